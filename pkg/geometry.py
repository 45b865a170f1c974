"""
Convex bodies as analytic support functions.

A body evaluates the 1-homogeneous extension H of its support function on
arbitrary (nonzero) points, returning H, grad H and the Hessian of H. The
principal radii of curvature at a unit normal u are the eigenvalues of that
Hessian restricted to the tangent space at u, so every measure below is an
integral over the sphere in the Gauss-map parametrization.
"""
import json
import logging
import math
import os
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

import config
from exact import ball_volume, sphere_area
from formulas import mci_from_quermass, santalo_project, steiner_quermass
from helpers import block_rng
from symbolic import AtomKind, poly_eval, quermass, rho as rho_atom

logger = logging.getLogger("Geometry")


class GeometryError(RuntimeError):
    pass


class ConvexityError(GeometryError):
    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = None if direction is None else [float(v) for v in direction]


class BodySpecError(ValueError):
    pass


class FrameError(ValueError):
    pass


# ==========================================
# HOMOGENEOUS TERMS
# ==========================================

def _monomial_values(X, exps):
    out = np.ones(X.shape[:-1])
    for axis, power in enumerate(exps):
        if power:
            out = out * X[..., axis] ** power
    return out


def _polynomial_parts(X, exps, coefs):
    """Value, gradient and Hessian of sum_m c_m x^e_m at every point of X (..., d)."""
    d = X.shape[-1]
    val = np.zeros(X.shape[:-1])
    grad = np.zeros(X.shape)
    hess = np.zeros(X.shape + (d,))
    for e, c in zip(exps, coefs):
        e = np.asarray(e, dtype=int)
        val += c * _monomial_values(X, e)
        for a in range(d):
            if e[a] == 0:
                continue
            ea = e.copy()
            ea[a] -= 1
            grad[..., a] += c * e[a] * _monomial_values(X, ea)
            for b in range(d):
                if ea[b] == 0:
                    continue
                eab = ea.copy()
                eab[b] -= 1
                hess[..., a, b] += c * e[a] * ea[b] * _monomial_values(X, eab)
    return val, grad, hess


def _radial_parts(X, p):
    """Value, gradient and Hessian of |x|^p."""
    d = X.shape[-1]
    norm = np.sqrt(np.sum(X * X, axis=-1))
    g = norm ** p
    gp = p * norm ** (p - 2)
    grad = gp[..., None] * X
    hess = gp[..., None, None] * np.eye(d) + (p * (p - 2) * norm ** (p - 4))[..., None, None] * (X[..., :, None] * X[..., None, :])
    return g, grad, hess


def _homogeneous_term(X, exps, coefs, degree):
    """P(x) |x|^(1-degree) for a homogeneous polynomial P of the given degree."""
    P, dP, d2P = _polynomial_parts(X, exps, coefs)
    g, dg, d2g = _radial_parts(X, 1 - degree)
    val = P * g
    grad = g[..., None] * dP + P[..., None] * dg
    hess = (g[..., None, None] * d2P
            + dP[..., :, None] * dg[..., None, :]
            + dg[..., :, None] * dP[..., None, :]
            + P[..., None, None] * d2g)
    return val, grad, hess


def _harmonic_2d_polynomial(degree, cos_coef, sin_coef):
    """Re((a - ib)(x + iy)^k) restricted to the circle is a cos(k t) + b sin(k t)."""
    exps, coefs = [], []
    for m in range(degree + 1):
        if m % 2 == 0:
            c = cos_coef * math.comb(degree, m) * (-1) ** (m // 2)
        else:
            c = sin_coef * math.comb(degree, m) * (-1) ** ((m - 1) // 2)
        if c:
            exps.append((degree - m, m))
            coefs.append(c)
    return exps, coefs


# Unnormalized real solid harmonics, keyed by (degree, order).
_SOLID_HARMONICS_3D = {
    (1, -1): {(0, 1, 0): 1},
    (1, 0): {(0, 0, 1): 1},
    (1, 1): {(1, 0, 0): 1},
    (3, -3): {(2, 1, 0): 3, (0, 3, 0): -1},
    (3, -2): {(1, 1, 1): 1},
    (3, -1): {(0, 1, 2): 4, (2, 1, 0): -1, (0, 3, 0): -1},
    (3, 0): {(0, 0, 3): 2, (2, 0, 1): -3, (0, 2, 1): -3},
    (3, 1): {(1, 0, 2): 4, (3, 0, 0): -1, (1, 2, 0): -1},
    (3, 2): {(2, 0, 1): 1, (0, 2, 1): -1},
    (3, 3): {(3, 0, 0): 1, (1, 2, 0): -3},
}


# ==========================================
# BODIES
# ==========================================

class SupportBody:
    family = None

    def __init__(self, dim):
        self.dim = int(dim)

    def evaluate(self, X):
        """(H, grad H, Hessian H) of the homogeneous support function at points X of shape (..., dim)."""
        raise NotImplementedError

    def support(self, U):
        return self.evaluate(np.asarray(U, dtype=float))[0]

    def to_spec(self):
        raise NotImplementedError

    def _certify(self, threshold):
        if self.dim < 2 or self.dim > 3:
            return
        grid = validation_grid(self.dim)
        radii = tangent_radii(self.evaluate(grid.nodes)[2], grid.tangents)
        _assert_convex(radii, grid.nodes, threshold, self)

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_spec())})"


class HarmonicBody(SupportBody):
    """halfwidth * |x| plus homogeneous odd-degree terms P_k(x) |x|^(1-k)."""

    def __init__(self, dim, halfwidth, terms):
        super().__init__(dim)
        if not halfwidth > 0:
            raise BodySpecError(f"halfwidth must be positive, got {halfwidth}")
        self.halfwidth = float(halfwidth)
        # (degree, exps, coefs), grouped per degree
        self._terms = [(0, [(0,) * self.dim], [self.halfwidth])] + list(terms)

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        val = np.zeros(X.shape[:-1])
        grad = np.zeros(X.shape)
        hess = np.zeros(X.shape + (X.shape[-1],))
        for degree, exps, coefs in self._terms:
            v, g, h = _homogeneous_term(X, exps, coefs, degree)
            val += v
            grad += g
            hess += h
        return val, grad, hess


class Ball(HarmonicBody):
    family = "ball"

    def __init__(self, radius, dim):
        if not radius > 0:
            raise BodySpecError(f"ball radius must be positive, got {radius}")
        if dim < 1:
            raise BodySpecError(f"ball dimension must be >= 1, got {dim}")
        super().__init__(dim, radius, [])
        self.radius = float(radius)

    def to_spec(self):
        return {"family": "ball", "radius": self.radius, "dim": self.dim}


class OddHarmonic2D(HarmonicBody):
    family = "odd_harmonic_2d"

    def __init__(self, halfwidth, harmonics):
        self.harmonics = []
        grouped = {}
        for entry in harmonics:
            degree = int(entry.get("degree", 0))
            if degree < 1 or degree % 2 == 0:
                raise BodySpecError(f"2D harmonics must have odd degree >= 1, got {degree}")
            a, b = float(entry.get("cos", 0.0)), float(entry.get("sin", 0.0))
            self.harmonics.append({"degree": degree, "cos": a, "sin": b})
            exps, coefs = _harmonic_2d_polynomial(degree, a, b)
            g_exps, g_coefs = grouped.setdefault(degree, ([], []))
            g_exps.extend(exps)
            g_coefs.extend(coefs)
        super().__init__(2, halfwidth, [(k, e, c) for k, (e, c) in sorted(grouped.items())])
        self._certify(max(config.EPS_CONVEX, config.HARMONIC_MARGIN))

    def to_spec(self):
        return {"family": self.family, "halfwidth": self.halfwidth, "harmonics": self.harmonics}


class OddHarmonic3D(HarmonicBody):
    family = "odd_harmonic_3d"

    def __init__(self, halfwidth, harmonics):
        self.harmonics = []
        grouped = {}
        for entry in harmonics:
            key = (int(entry.get("degree", 0)), int(entry.get("order", 0)))
            if key not in _SOLID_HARMONICS_3D:
                raise BodySpecError(f"unsupported 3D harmonic (degree, order) = {key}; degrees 1 and 3 only")
            coefficient = float(entry.get("coefficient", 0.0))
            self.harmonics.append({"degree": key[0], "order": key[1], "coefficient": coefficient})
            merged = grouped.setdefault(key[0], {})
            for exps, c in _SOLID_HARMONICS_3D[key].items():
                merged[exps] = merged.get(exps, 0.0) + coefficient * c
        terms = [(k, list(m.keys()), list(m.values())) for k, m in sorted(grouped.items())]
        super().__init__(3, halfwidth, terms)
        self._certify(max(config.EPS_CONVEX, config.HARMONIC_MARGIN))

    def to_spec(self):
        return {"family": self.family, "halfwidth": self.halfwidth, "harmonics": self.harmonics}


class ParallelBody(SupportBody):
    family = "parallel"

    def __init__(self, base, rho):
        if rho < 0:
            raise BodySpecError(f"parallel distance must be >= 0, got {rho}")
        super().__init__(base.dim)
        self.base = base
        self.rho = float(rho)

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        val, grad, hess = self.base.evaluate(X)
        norm = np.sqrt(np.sum(X * X, axis=-1))
        u = X / norm[..., None]
        val = val + self.rho * norm
        grad = grad + self.rho * u
        hess = hess + (self.rho / norm)[..., None, None] * (np.eye(self.dim) - u[..., :, None] * u[..., None, :])
        return val, grad, hess

    def to_spec(self):
        return {"family": "parallel", "base": self.base.to_spec(), "rho": self.rho}


class ProjectedBody(SupportBody):
    """Orthogonal projection onto span(frame rows), in frame coordinates."""
    family = "projected"

    def __init__(self, base, frame_vectors):
        frame_vectors = np.array(frame_vectors, dtype=float)
        super().__init__(frame_vectors.shape[0])
        self.base = base
        self.frame = frame_vectors
        self.frame.setflags(write=False)

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        V = self.frame
        val, grad, hess = self.base.evaluate(X @ V)
        grad_r = grad @ V.T
        hess_r = np.einsum("ka,...ab,lb->...kl", V, hess, V)
        return val, grad_r, hess_r

    def to_spec(self):
        return {"family": "projected", "base": self.base.to_spec(), "frame": self.frame.tolist()}


# ==========================================
# CONSTRUCTORS
# ==========================================

def ball(radius, dim=3):
    return Ball(radius, dim)


def odd_harmonic_2d(halfwidth, harmonics):
    return OddHarmonic2D(halfwidth, harmonics)


def odd_harmonic_3d(halfwidth, harmonics):
    return OddHarmonic3D(halfwidth, harmonics)


def parallel(body, rho):
    result = ParallelBody(body, rho)
    result._certify(config.EPS_CONVEX)
    return result


def project(body, frame):
    """
    Projection of `body` onto the subspace spanned by an orthonormal frame
    (an object with a `vectors` attribute of shape (r, n), or the array itself).
    """
    V = np.asarray(getattr(frame, "vectors", frame), dtype=float)
    if V.ndim != 2 or V.shape[0] < 1:
        raise FrameError(f"frame must be an (r, n) array, got shape {V.shape}")
    r, n = V.shape
    if n != body.dim:
        raise FrameError(f"frame lives in dimension {n} but the body has dimension {body.dim}")
    if r > n:
        raise FrameError(f"frame rank {r} exceeds ambient dimension {n}")
    deviation = float(np.max(np.abs(V @ V.T - np.eye(r))))
    if deviation > 1e-12:
        raise FrameError(f"frame is not orthonormal (Gram deviation {deviation:.3e})")
    if isinstance(body, Ball):
        return Ball(body.radius, r)
    result = ProjectedBody(body, V)
    result._certify(config.EPS_CONVEX)
    return result


def coordinate_frame(n, r):
    return np.eye(n)[:r]


def first_axis(dim):
    return coordinate_frame(dim, 1)[0]


# ==========================================
# QUADRATURE
# ==========================================

class QuadratureGrid:
    """Nodes on S^(dim-1) with positive weights and orthonormal tangent bases."""

    def __init__(self, dim, resolution, nodes, weights, tangents):
        self.dim = dim
        self.resolution = resolution
        self.nodes = nodes
        self.weights = weights
        self.tangents = tangents
        for arr in (self.nodes, self.weights, self.tangents):
            arr.setflags(write=False)

    @property
    def size(self):
        return len(self.weights)

    def rotated(self, seed):
        """The same grid under a random rotation (exposes axis-aligned bias)."""
        rng = block_rng(seed, 0)
        Q, R = np.linalg.qr(rng.standard_normal((self.dim, self.dim)))
        Q = Q * np.sign(np.diag(R))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        return QuadratureGrid(self.dim, self.resolution, self.nodes @ Q.T,
                              self.weights.copy(), np.einsum("ab,kbm->kam", Q, self.tangents))


def _build_grid(dim, resolution):
    if dim == 1:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.array([1.0, 1.0])
        tangents = np.zeros((2, 1, 0))
        return QuadratureGrid(1, 2, nodes, weights, tangents)
    if dim == 2:
        count = int(resolution)
        theta = 2.0 * math.pi * np.arange(count) / count
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        weights = np.full(count, 2.0 * math.pi / count)
        tangents = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)[:, :, None]
        return QuadratureGrid(2, count, nodes, weights, tangents)
    if dim == 3:
        order = int(resolution)
        z, wz = leggauss(order)
        n_phi = 2 * order
        phi = 2.0 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
        Z, PHI = np.meshgrid(z, phi, indexing="ij")
        S = np.sqrt(1.0 - Z * Z)
        nodes = np.stack([S * np.cos(PHI), S * np.sin(PHI), Z], axis=-1).reshape(-1, 3)
        weights = (wz[:, None] * np.full(n_phi, 2.0 * math.pi / n_phi)[None, :]).reshape(-1)
        e_theta = np.stack([Z * np.cos(PHI), Z * np.sin(PHI), -S], axis=-1).reshape(-1, 3)
        e_phi = np.stack([-np.sin(PHI), np.cos(PHI), np.zeros_like(PHI)], axis=-1).reshape(-1, 3)
        tangents = np.stack([e_theta, e_phi], axis=-1)
        return QuadratureGrid(3, order, nodes, weights, tangents)
    raise GeometryError(f"quadrature is available for dimensions 1..3, got {dim}")


def quadrature_grid(dim, resolution=None):
    if resolution is None:
        resolution = {2: config.QUAD_2D_NODES, 3: config.QUAD_3D_ORDER}.get(dim, 2)
    return _cached_grid(int(dim), int(resolution))


@lru_cache(maxsize=32)
def _cached_grid(dim, resolution):
    grid = _build_grid(dim, resolution)
    total = math.fsum(grid.weights.tolist())
    expected = sphere_area(dim - 1).to_float()
    if abs(total - expected) > 1e-13 * expected:
        raise GeometryError(f"grid weights sum to {total}, expected {expected}")
    logger.debug(f"Built dim-{dim} quadrature grid with {grid.size} nodes (resolution {grid.resolution})")
    return grid


def validation_grid(dim):
    return quadrature_grid(dim, {2: config.VALIDATION_2D_NODES, 3: config.VALIDATION_3D_ORDER}.get(dim, 2))


def _grid_for(body, resolution, grid):
    if grid is not None:
        return grid
    return quadrature_grid(body.dim, resolution)


# ==========================================
# CURVATURE
# ==========================================

def tangent_radii(hess, tangents):
    """Eigenvalues of the Hessian restricted to tangent bases: (..., d, d) x (..., d, m) -> (..., m)."""
    m = tangents.shape[-1]
    lead = np.broadcast_shapes(hess.shape[:-2], tangents.shape[:-2])
    if m == 0:
        return np.zeros(lead + (0,))
    A = np.einsum("...am,...ab,...bk->...mk", tangents, hess, tangents)
    if m == 1:
        return A[..., 0, 0:1]
    A = 0.5 * (A + np.swapaxes(A, -1, -2))
    return np.linalg.eigvalsh(A)


def _assert_convex(radii, directions, threshold, body=None):
    if radii.size == 0:
        return
    smallest = radii.min(axis=-1)
    low = float(smallest.min())
    if (low >= threshold) if threshold > 0 else (low > 0.0):
        return
    idx = np.unravel_index(int(np.argmin(smallest)), smallest.shape)
    direction = np.asarray(directions)[idx]
    label = body.family if body is not None else "body"
    raise ConvexityError(
        f"{label} loses convexity at direction {np.round(direction, 12).tolist()}: "
        f"smallest radius {float(smallest[idx]):.3e} (threshold {threshold:g})",
        direction,
    )


def elementary_symmetric(radii):
    """e_0..e_m of the last axis: (..., m) -> (..., m+1)."""
    m = radii.shape[-1]
    e = np.zeros(radii.shape[:-1] + (m + 1,))
    e[..., 0] = 1.0
    for k in range(m):
        rk = radii[..., k]
        e[..., 1:k + 2] = e[..., 1:k + 2] + rk[..., None] * e[..., 0:k + 1]
    return e


def _tangent_basis(u):
    d = len(u)
    if d == 1:
        return np.zeros((1, 0))
    Q, _ = np.linalg.qr(np.column_stack([u, np.eye(d)]))
    return Q[:, 1:d]


def _unit(u, dim):
    u = np.asarray(u, dtype=float).reshape(-1)
    if len(u) != dim:
        raise GeometryError(f"direction has {len(u)} components, body has dimension {dim}")
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise GeometryError(f"direction {u.tolist()} is not normalized")
    return u


def curvature_radii(body, u):
    u = _unit(u, body.dim)
    _, _, hess = body.evaluate(u)
    radii = tangent_radii(hess, _tangent_basis(u))
    _assert_convex(radii[None, :], u[None, :], 0.0, body)
    return sorted(float(r) for r in radii)


def _surface_data(body, grid):
    H, _, hess = body.evaluate(grid.nodes)
    radii = tangent_radii(hess, grid.tangents)
    _assert_convex(radii, grid.nodes, 0.0, body)
    return H, radii


def mean_curvature_integral(body, i, resolution=None, grid=None):
    """M_i = integral over the sphere of e_j(radii)/C(d-1, j), j = d-1-i."""
    d = body.dim
    if not 0 <= i <= d - 1:
        raise GeometryError(f"mean curvature integral index must lie in 0..{d - 1}, got {i}")
    grid = _grid_for(body, resolution, grid)
    _, radii = _surface_data(body, grid)
    j = d - 1 - i
    s_j = elementary_symmetric(radii)[..., j] / math.comb(d - 1, j)
    return math.fsum((grid.weights * s_j).tolist())


def volume(body, resolution=None, grid=None):
    d = body.dim
    grid = _grid_for(body, resolution, grid)
    H, radii = _surface_data(body, grid)
    top = elementary_symmetric(radii)[..., d - 1]
    return math.fsum((grid.weights * H * top).tolist()) / d


def quermassintegrals(body, resolution=None):
    """[W_0, ..., W_n] with W_0 the volume and W_i = M_(i-1)/n."""
    n = body.dim
    grid = _grid_for(body, resolution, None)
    values = [volume(body, grid=grid)]
    values += [mean_curvature_integral(body, i, grid=grid) / n for i in range(n)]
    return values


def width(body, u):
    u = _unit(u, body.dim)
    H = body.support(np.stack([u, -u]))
    return float(H[0] + H[1])


def width_extremes(body):
    nodes = validation_grid(body.dim).nodes if body.dim <= 3 else np.eye(body.dim)
    widths = body.support(nodes) + body.support(-nodes)
    return float(widths.min()), float(widths.max())


def is_constant_width(body, tol):
    low, high = width_extremes(body)
    return high - low <= tol


# ==========================================
# FLATTENED BODIES
# ==========================================

def projection_measures(proj, atoms, resolution=None):
    """Numeric values of M'(r,.) and V'_r atoms from quadrature of the r-dimensional body."""
    grid = quadrature_grid(proj.dim, resolution)
    values = {}
    for atom in atoms:
        if atom.kind is AtomKind.MCI_PROJ:
            values[atom] = mean_curvature_integral(proj, atom.indices[1], grid=grid)
        elif atom.kind is AtomKind.VOL_PROJ:
            values[atom] = volume(proj, grid=grid)
        else:
            raise GeometryError(f"atom {atom} is not a projection measure")
    return values


def _check_flattened(n, r):
    if not 1 <= r <= n - 1:
        raise GeometryError(f"flattened body needs 1 <= r <= n-1, got n={n}, r={r}")


def flattened_mci(n, proj, q, resolution=None):
    """M(n,q) of `proj` regarded as a flattened body of n-space."""
    _check_flattened(n, proj.dim)
    poly = santalo_project(n, proj.dim, q)
    return poly_eval(poly, projection_measures(proj, poly.atoms(), resolution))


def parallel_flattened_mci_oracle(n, proj, rho, l, resolution=None):
    """M(n,l) of the outer parallel body of flattened `proj`, from classical Steiner expansion."""
    _check_flattened(n, proj.dim)
    if rho < 0:
        raise GeometryError(f"parallel distance must be >= 0, got {rho}")
    if not 0 <= l <= n - 1:
        raise GeometryError(f"l must lie in 0..{n - 1}, got {l}")
    expansion = steiner_quermass(n, l + 1)
    bindings = {rho_atom(): rho}
    for atom in expansion.atoms():
        if atom.kind is AtomKind.QUERMASS:
            k = atom.indices[1]
            if k == n:
                bindings[atom] = sphere_area(n - 1).to_float() / n
            elif k == 0:
                bindings[atom] = 0.0
            else:
                bindings[atom] = flattened_mci(n, proj, k - 1, resolution) / n
    # W(n,l+1) of the parallel body is evaluated first; the bridge then scales it.
    parallel_quermass = poly_eval(expansion, bindings)
    return poly_eval(mci_from_quermass(n, l), {quermass(n, l + 1): parallel_quermass})


def flattened_parallel_volume(n, proj, rho, resolution=None, fiber_order=None):
    """
    n-volume of the parallel body of `proj` flattened into n-space, by
    integrating over normal fibres:
        kappa_m rho^m V_r + integral_0^rho S(t) kappa_m (rho^2 - t^2)^(m/2) dt,
    m = n - r, S(t) the boundary measure of the r-dimensional parallel body at t.
    """
    r = proj.dim
    _check_flattened(n, r)
    if rho == 0:
        return 0.0
    m = n - r
    grid = quadrature_grid(r, resolution)
    H, radii = _surface_data(proj, grid)
    base_volume = math.fsum((grid.weights * H * elementary_symmetric(radii)[..., r - 1]).tolist()) / r
    x, w = leggauss(int(fiber_order or config.FIBER_ORDER))
    phi = 0.25 * math.pi * (x + 1.0)
    w_phi = 0.25 * math.pi * w
    t = rho * np.sin(phi)
    shifted = radii[None, :, :] + t[:, None, None]
    boundary = elementary_symmetric(shifted)[..., r - 1] @ grid.weights
    fibre = math.fsum((w_phi * boundary * np.cos(phi) ** (m + 1)).tolist())
    kappa = ball_volume(m).to_float()
    return kappa * rho ** m * base_volume + kappa * rho ** (m + 1) * fibre


def steiner_fit_quermass(volume_fn, n, distances=None):
    """W_0..W_n from exact interpolation of rho -> V(K_rho) at n+1 distances."""
    if distances is None:
        distances = [0.25 * k for k in range(n + 1)]
    distances = np.asarray(distances, dtype=float)
    if len(distances) != n + 1:
        raise GeometryError(f"need {n + 1} distances, got {len(distances)}")
    values = np.array([volume_fn(float(d)) for d in distances])
    coefficients = np.linalg.solve(np.vander(distances, n + 1, increasing=True), values)
    return [float(coefficients[i]) / math.comb(n, i) for i in range(n + 1)]


# ==========================================
# BATCHED PROJECTIONS
# ==========================================

def batch_projection_measures(body, frames, resolution=None):
    """
    V_r and M'(r, 0..r-1) of the projections of `body` onto a stack of frames
    (B, r, n). Returns (volumes (B,), mci (B, r)).
    """
    frames = np.asarray(frames, dtype=float)
    B, r, n = frames.shape
    if n != body.dim:
        raise FrameError(f"frames live in dimension {n} but the body has dimension {body.dim}")
    if resolution is None:
        resolution = {2: config.BATCH_2D_NODES, 3: config.BATCH_3D_ORDER}.get(r, 2)
    grid = quadrature_grid(r, resolution)
    U = np.einsum("kr,brn->bkn", grid.nodes, frames)
    T = np.einsum("krm,brn->bknm", grid.tangents, frames)
    H, _, hess = body.evaluate(U)
    radii = tangent_radii(hess, T)
    _assert_convex(radii, U, 0.0, body)
    e = elementary_symmetric(radii)
    volumes = np.sum(grid.weights * H * e[..., r - 1], axis=-1) / r
    mci = np.empty((B, r))
    for i in range(r):
        j = r - 1 - i
        mci[:, i] = np.sum(grid.weights * e[..., j], axis=-1) / math.comb(r - 1, j)
    return volumes, mci


# ==========================================
# MONTE CARLO VOLUME
# ==========================================

def mc_parallel_volume(body, rho, samples, seed, block_size=None):
    """
    Hit-or-miss volume of the parallel body: x counts iff
    max over validation directions of <x,u> - h(u) <= rho.
    Returns (estimate, standard_error).
    """
    d = body.dim
    dirs = validation_grid(d).nodes
    h_dirs = body.support(dirs) + rho
    axes = np.eye(d)
    hi = body.support(axes) + rho
    lo = -(body.support(-axes) + rho)
    box = float(np.prod(hi - lo))
    block_size = int(block_size or config.MC_BLOCK_SIZE)
    hits = 0
    for b, start in enumerate(range(0, samples, block_size)):
        count = min(block_size, samples - start)
        pts = lo + (hi - lo) * block_rng(seed, b).random((count, d))
        hits += int(np.count_nonzero((pts @ dirs.T - h_dirs).max(axis=1) <= 0.0))
    p = hits / samples
    logger.debug(f"Membership volume: {hits}/{samples} hits in a box of volume {box:.6g}")
    return box * p, box * math.sqrt(p * (1.0 - p) / samples)


# ==========================================
# CLOSED FORMS
# ==========================================

def ball_mci_exact(n, i, radius):
    """O_(n-1) R^(n-1-i) as a PiScalar, R rational."""
    return sphere_area(n - 1) * Fraction(radius) ** (n - 1 - i)


def ball_volume_exact(n, radius):
    return ball_volume(n) * Fraction(radius) ** n


# ==========================================
# BODY SPECS
# ==========================================

def load_body(spec, dim=None):
    """Body from a JSON-compatible spec; a ball without "dim" takes `dim` from context."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise BodySpecError(f"body spec must be an object with a 'family' key, got {spec!r}")
    family = spec["family"]
    try:
        if family == "ball":
            body_dim = spec.get("dim", dim)
            if body_dim is None:
                raise BodySpecError("ball spec has no 'dim' and none was given by the caller")
            return Ball(float(spec["radius"]), int(body_dim))
        if family == "odd_harmonic_2d":
            _check_dim(family, 2, dim)
            return OddHarmonic2D(float(spec["halfwidth"]), spec.get("harmonics", []))
        if family == "odd_harmonic_3d":
            _check_dim(family, 3, dim)
            return OddHarmonic3D(float(spec["halfwidth"]), spec.get("harmonics", []))
        if family == "parallel":
            return parallel(load_body(spec["base"], dim), float(spec["rho"]))
        if family == "projected":
            frame = np.asarray(spec["frame"], dtype=float)
            return project(load_body(spec["base"], frame.shape[1]), frame)
    except KeyError as e:
        raise BodySpecError(f"{family} spec is missing key {e}") from e
    raise BodySpecError(f"unknown body family {family!r}")


def _check_dim(family, actual, wanted):
    if wanted is not None and wanted != actual:
        raise BodySpecError(f"{family} bodies live in dimension {actual}, not {wanted}")


def body_to_spec(body):
    return body.to_spec()


def resolve_body_path(path):
    if os.path.exists(path):
        return path
    candidate = os.path.join(config.FIXTURES_DIR, path)
    if os.path.exists(candidate):
        return candidate
    raise BodySpecError(f"body spec file not found: {path}")


def read_body_spec(path):
    try:
        with open(resolve_body_path(path), "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise BodySpecError(f"{path} is not valid JSON: {e}") from e


def read_body_file(path, dim=None):
    return load_body(read_body_spec(path), dim)
