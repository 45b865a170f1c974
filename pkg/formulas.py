"""
Builders for the mean-curvature-integral identities of constant-width bodies.

Every builder returns a FormulaPoly over the atoms of `symbolic`. The theorem
builders transcribe their case formulas term for term; whether they agree with
geometry is decided in `verify`, never here.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

from exact import DomainError, binomial, grassmann_measure, o_chain, sphere_area
from symbolic import (
    FormulaPoly, mci_body, mci_flat, mci_proj, poly_substitute, quermass, rho,
    vol_proj, width,
)

logger = logging.getLogger("Formulas")


class IndexRangeError(DomainError):
    pass


def _require(condition, message):
    if not condition:
        raise IndexRangeError(message)


def _check_nrl(n, r, l):
    _require(n >= 2, f"n must be >= 2, got n={n}")
    _require(1 <= r <= n - 1, f"r must lie in 1..{n - 1} for n={n}, got r={r}")
    _require(0 <= l <= n - 1, f"l must lie in 0..{n - 1} for n={n}, got l={l}")


def _term(coef, *factors):
    """coef * product of (atom, exponent) factors as a FormulaPoly."""
    return FormulaPoly([([f for f in factors if f[1]], coef)])


def _rho_poly():
    return FormulaPoly.atom(rho())


def _distance_power(distance, j):
    return (distance if distance is not None else _rho_poly()) ** j


def theorem_case(n, r, l):
    """1 for l >= n-r, 2 for l = n-r-1, 3 for l < n-r-1."""
    _check_nrl(n, r, l)
    if l >= n - r:
        return 1
    if l == n - r - 1:
        return 2
    return 3


# --- Steiner, quermassintegrals, mean curvature integrals ---

def steiner_volume(n, rho_symbolic=True, distance=None):
    """
    V(K_rho) = sum_i C(n,i) W(n,i) rho^i. With rho_symbolic=False the
    polynomial is returned at unit distance, i.e. V(K + B^n).
    """
    _require(n >= 1, f"n must be >= 1, got n={n}")
    if not rho_symbolic:
        distance = FormulaPoly.constant(1)
    total = FormulaPoly.zero()
    for i in range(n + 1):
        total += FormulaPoly([([(quermass(n, i), 1)], binomial(n, i))]) * _distance_power(distance, i)
    return total


def steiner_quermass(n, i, distance=None):
    """W(n,i)(K_rho) = sum_j C(n-i,j) W(n,i+j) rho^j."""
    _require(n >= 1, f"n must be >= 1, got n={n}")
    _require(0 <= i <= n, f"i must lie in 0..{n}, got i={i}")
    total = FormulaPoly.zero()
    for j in range(n - i + 1):
        total += FormulaPoly([([(quermass(n, i + j), 1)], binomial(n - i, j))]) * _distance_power(distance, j)
    return total


def mci_from_quermass(n, i):
    _require(n >= 1, f"n must be >= 1, got n={n}")
    _require(0 <= i <= n - 1, f"i must lie in 0..{n - 1}, got i={i}")
    return _term(n, (quermass(n, i + 1), 1))


def santalo_project(n, r, q):
    """
    Mean curvature integral M(n,q) of a body flattened into an r-plane,
    rewritten over the body's own r-dimensional measures.
    """
    _require(n >= 2, f"n must be >= 2, got n={n}")
    _require(1 <= r <= n - 1, f"r must lie in 1..{n - 1}, got r={r}")
    _require(0 <= q <= n - 1, f"q must lie in 0..{n - 1}, got q={q}")
    if q >= n - r:
        t = q - n + r
        coef = (binomial(r - 1, t) / binomial(n - 1, q)) * (sphere_area(q) / sphere_area(t))
        return _term(coef, (mci_proj(r, t), 1))
    if q == n - r - 1:
        coef = sphere_area(n - r - 1) / binomial(n - 1, n - r - 1)
        return _term(coef, (vol_proj(r), 1))
    return FormulaPoly.zero()


def santalo_bindings(n, r):
    return {mci_flat(n, q): santalo_project(n, r, q) for q in range(n)}


def constant_width_reduce(n, s):
    """W(n,s) of a body of constant width h, written over W(n,n-i) and h."""
    _require(n >= 1, f"n must be >= 1, got n={n}")
    _require(0 <= s <= n, f"s must lie in 0..{n}, got s={s}")
    total = FormulaPoly.zero()
    for i in range(n - s + 1):
        coef = (-1) ** i * binomial(n - s, i)
        total += _term(coef, (quermass(n, n - i), 1), (width(), n - s - i))
    return total


def parallel_constwidth_quermass(n, l):
    _require(n >= 1, f"n must be >= 1, got n={n}")
    _require(0 <= l <= n, f"l must lie in 0..{n}, got l={l}")
    total = FormulaPoly.zero()
    for j in range(n - l + 1):
        for i in range(n - l - j + 1):
            coef = (-1) ** i * binomial(n - l, j) * binomial(n - l - j, i)
            total += _term(coef, (quermass(n, n - i), 1), (rho(), j), (width(), n - l - j - i))
    return total


def wc_expansion(n, r, l):
    """Constant-width expansion of M(n,l) of the parallel flattened body, over MciFlat atoms."""
    _check_nrl(n, r, l)
    total = FormulaPoly.zero()
    for j in range(n - l):
        for i in range(n - l - j):
            coef = (-1) ** i * binomial(n - l - 1, j) * binomial(n - l - j - 1, i)
            total += _term(coef, (mci_flat(n, n - i - 1), 1), (rho(), j), (width(), n - l - j - i - 1))
    return total


def flattened_truth(n, r, l):
    """Classical M(n,l) of the parallel flattened body: sum_j C(n-l-1,j) Mflat(n,l+j) rho^j."""
    _check_nrl(n, r, l)
    total = FormulaPoly.zero()
    for j in range(n - l):
        total += _term(binomial(n - l - 1, j), (mci_flat(n, l + j), 1), (rho(), j))
    return total


# --- Theorem builders ---

class _Coefficients:
    """Per-(n, r) coefficient tables shared by both theorem builders."""

    def __init__(self, n, r, integrated):
        self.n, self.r, self.integrated = n, r, integrated
        self.chain_num = o_chain(n - 2, n - r)
        self.chain_den = o_chain(r - 2, 0)

    def mci(self, i):
        n, r = self.n, self.r
        ratio = binomial(r - 1, r - i - 1) / binomial(n - 1, n - i - 1)
        if self.integrated:
            factor = (sphere_area(n - i - 1) * self.chain_num) / (sphere_area(r - i - 1) * self.chain_den)
            return ratio * factor, (mci_body(n, n - i - 1), 1)
        return ratio * (sphere_area(n - i - 1) / sphere_area(r - i - 1)), (mci_proj(r, r - i - 1), 1)

    def vol(self):
        n, r = self.n, self.r
        base = sphere_area(n - r - 1) / binomial(n - 1, n - r - 1)
        if self.integrated:
            return base * self.chain_num / (self.chain_den * r), (mci_body(n, n - r - 1), 1)
        return base, (vol_proj(r), 1)


def _theorem(n, r, l, integrated):
    case = theorem_case(n, r, l)
    c = _Coefficients(n, r, integrated)
    total = FormulaPoly.zero()

    def add_mci(sign, comb, i, j, h_exp):
        nonlocal total
        coef, atom = c.mci(i)
        total += _term(sign * comb * coef, atom, (rho(), j), (width(), h_exp))

    if case == 1:
        for j in range(n - l):
            for i in range(n - l - j):
                comb = binomial(n - l - 1, j) * binomial(n - l - j - 1, i)
                add_mci((-1) ** i, comb, i, j, n - l - j - i - 1)
    elif case == 2:
        coef, atom = c.vol()
        total += _term((-1) ** r * coef, atom)
        for i in range(r):
            add_mci((-1) ** i, binomial(r, i), i, 0, r - i)
        for j in range(1, r + 1):
            for i in range(r - j + 1):
                add_mci((-1) ** i, binomial(r, j) * binomial(r - j, i), i, j, r - j - i)
    else:
        coef, atom = c.vol()
        for j in range(n - r - l):
            comb = binomial(n - l - 1, j) * binomial(n - l - j - 1, r)
            total += _term((-1) ** r * comb * coef, atom, (rho(), j), (width(), n - l - j - r - 1))
        for j in range(n - r - l + 1):
            for i in range(r):
                comb = binomial(n - l - 1, j) * binomial(n - l - j - 1, i)
                add_mci((-1) ** i, comb, i, j, n - l - j - i - 1)
        for j in range(n - r - l + 1, n - l):
            for i in range(n - l - j):
                comb = binomial(n - l - 1, j) * binomial(n - l - j - 1, i)
                add_mci((-1) ** i, comb, i, j, n - l - j - i - 1)
    logger.debug(f"theorem(n={n}, r={r}, l={l}, integrated={integrated}) case {case}: {len(total.terms)} terms")
    return total


def theorem1(n, r, l):
    """M(n,l) of the parallel flattened projection, over M'(r,.), V'_r, rho and h."""
    return _theorem(n, r, l, integrated=False)


def theorem2(n, r, l):
    """Grassmann integral of theorem1 over all r-planes, over M(n,.), rho and h."""
    return _theorem(n, r, l, integrated=True)


def theorem2_case2(n, r, l):
    _require(theorem_case(n, r, l) == 2, f"case-2 formula needs l = n-r-1 = {n - r - 1}, got l={l}")
    return theorem2(n, r, l)


def theorem1_residual(n, r, l):
    return theorem1(n, r, l) - poly_substitute(flattened_truth(n, r, l), santalo_bindings(n, r))


# --- Grassmann transfer ---

def _chain(n, r):
    return o_chain(n - 2, n - r) / o_chain(r - 2, 0)


def grassmann_mci_transfer(n, r, t):
    _require(n >= 2, f"n must be >= 2, got n={n}")
    _require(1 <= r <= n - 1, f"r must lie in 1..{n - 1}, got r={r}")
    _require(0 <= t <= r - 1, f"t must lie in 0..{r - 1}, got t={t}")
    return _term(_chain(n, r), (mci_body(n, n - r + t), 1))


def projection_volume_integral(n, r):
    _require(n >= 2, f"n must be >= 2, got n={n}")
    _require(1 <= r <= n - 1, f"r must lie in 1..{n - 1}, got r={r}")
    coef = o_chain(n - 2, n - r) / (o_chain(r - 2, 0) * r)
    return _term(coef, (mci_body(n, n - r - 1), 1))


def quermass_transfer(n, r, j):
    """Grassmann integral of W'(r,j) over all r-planes: n * chain / r * W(n, n-r+j)."""
    _require(n >= 2, f"n must be >= 2, got n={n}")
    _require(1 <= r <= n - 1, f"r must lie in 1..{n - 1}, got r={r}")
    _require(0 <= j <= r, f"j must lie in 0..{r}, got j={j}")
    coef = o_chain(n - 2, n - r) * n / (o_chain(r - 2, 0) * r)
    return _term(coef, (quermass(n, n - r + j), 1))


def transfer_bindings(n, r):
    bindings = {mci_proj(r, t): grassmann_mci_transfer(n, r, t) for t in range(r)}
    bindings[vol_proj(r)] = projection_volume_integral(n, r)
    return bindings


def transfer_theorem1(n, r, l):
    return poly_substitute(theorem1(n, r, l), transfer_bindings(n, r))


def transfer_theorem1_case2(n, r, l):
    _require(theorem_case(n, r, l) == 2, f"case-2 derivation needs l = n-r-1 = {n - r - 1}, got l={l}")
    return transfer_theorem1(n, r, l)


def quermass_to_mci_bindings(n):
    """W(n,k) -> M(n,k-1)/n for 1 <= k <= n."""
    return {quermass(n, k): _term(Fraction(1, n), (mci_body(n, k - 1), 1)) for k in range(1, n + 1)}


def _theorem1_case(case):
    def build(n, r, l):
        _require(theorem_case(n, r, l) == case, f"case-{case} formula does not apply at n={n}, r={r}, l={l}")
        return theorem1(n, r, l)
    return build


# --- Registry ---

def _santalo_case(case):
    def build(n, r, q):
        _check_nrl(n, r, 0)
        actual = 0 if q >= n - r else (1 if q == n - r - 1 else 2)
        _require(actual == case, f"this case of the flattened-body formula does not apply at n={n}, r={r}, q={q}")
        return santalo_project(n, r, q)
    return build


@dataclass(frozen=True)
class FormulaSpec:
    formula_id: str
    builder: object
    params: tuple
    title: str

    def build(self, **values):
        missing = [p for p in self.params if values.get(p) is None]
        if missing:
            raise IndexRangeError(f"{self.formula_id} needs --{' --'.join(missing)}")
        return self.builder(*(values[p] for p in self.params))


FORMULA_REGISTRY = {spec.formula_id: spec for spec in (
    FormulaSpec("eq-2.4", lambda n, r: FormulaPoly.constant(grassmann_measure(n, r)), ("n", "r"), "measure of the Grassmannian"),
    FormulaSpec("eq-2.5", steiner_volume, ("n",), "Steiner volume of the outer parallel body"),
    FormulaSpec("eq-2.6", steiner_quermass, ("n", "i"), "quermassintegral of the outer parallel body"),
    FormulaSpec("eq-2.7", mci_from_quermass, ("n", "i"), "mean curvature integral as quermassintegral"),
    FormulaSpec("eq-2.8", _santalo_case(0), ("n", "r", "q"), "flattened body, q >= n-r"),
    FormulaSpec("eq-2.9", _santalo_case(1), ("n", "r", "q"), "flattened body, q = n-r-1"),
    FormulaSpec("eq-2.10", _santalo_case(2), ("n", "r", "q"), "flattened body, q < n-r-1"),
    FormulaSpec("lemma-2.1", santalo_project, ("n", "r", "q"), "flattened body, all cases"),
    FormulaSpec("eq-2.11", constant_width_reduce, ("n", "s"), "constant-width reduction"),
    FormulaSpec("eq-3.1", parallel_constwidth_quermass, ("n", "l"), "parallel constant-width quermassintegral"),
    FormulaSpec("eq-3.4", wc_expansion, ("n", "r", "l"), "constant-width expansion over flattened integrals"),
    FormulaSpec("eq-3.7", quermass_transfer, ("n", "r", "j"), "Grassmann transfer of quermassintegrals"),
    FormulaSpec("eq-3.8", grassmann_mci_transfer, ("n", "r", "t"), "Grassmann transfer of mean curvature integrals"),
    FormulaSpec("eq-3.9", transfer_theorem1_case2, ("n", "r", "l"), "case l = n-r-1 derived by transfer"),
    FormulaSpec("eq-3.10", projection_volume_integral, ("n", "r"), "Grassmann integral of projection volume"),
    FormulaSpec("thm-1.1", theorem1, ("n", "r", "l"), "parallel flattened projection"),
    FormulaSpec("thm-1.1-case1", _theorem1_case(1), ("n", "r", "l"), "l >= n-r"),
    FormulaSpec("thm-1.1-case2", _theorem1_case(2), ("n", "r", "l"), "l = n-r-1"),
    FormulaSpec("thm-1.1-case3", _theorem1_case(3), ("n", "r", "l"), "l < n-r-1"),
    FormulaSpec("thm-1.2", theorem2, ("n", "r", "l"), "Grassmann integral of the parallel flattened projection"),
    FormulaSpec("thm-1.2-case2", theorem2_case2, ("n", "r", "l"), "l = n-r-1"),
)}
