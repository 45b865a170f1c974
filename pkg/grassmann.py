import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

import config
from exact import DomainError, grassmann_measure, kubota_coefficient
from geometry import batch_projection_measures, coordinate_frame, mean_curvature_integral
from helpers import block_rng
from reports import statistical_report

logger = logging.getLogger("Grassmann")

RANK_TOLERANCE = 1e-10


class DegenerateFrameError(RuntimeError):
    pass


class NonFiniteSampleError(RuntimeError):
    def __init__(self, message, frame=None):
        super().__init__(message)
        self.frame = frame


@dataclass(frozen=True, eq=False)
class SubspaceFrame:
    """r orthonormal vectors in n-space, stored as the rows of `vectors`."""

    n: int
    r: int
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=float)
        if vectors.shape != (self.r, self.n):
            raise DomainError(f"frame vectors must have shape ({self.r}, {self.n}), got {vectors.shape}")
        if self.gram_error_of(vectors) >= 1e-12:
            Q, R = np.linalg.qr(vectors.T)
            if np.min(np.abs(np.diag(R))) < RANK_TOLERANCE:
                raise DegenerateFrameError(f"frame vectors have rank < {self.r}")
            vectors = (Q * np.sign(np.diag(R))).T
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @staticmethod
    def gram_error_of(vectors):
        return float(np.max(np.abs(vectors @ vectors.T - np.eye(len(vectors)))))

    @property
    def gram_error(self):
        return self.gram_error_of(self.vectors)

    def to_list(self):
        return self.vectors.tolist()


@dataclass(frozen=True)
class McEstimate:
    mean: float
    standard_error: float
    samples: int
    seed: int


def _check_rank(n, r):
    if n < 2 or not 1 <= r <= n - 1:
        raise DomainError(f"need n >= 2 and 1 <= r <= n-1, got n={n}, r={r}")


def _draw_frames(rng, n, r, count):
    """(count, r, n) orthonormal frames from Gaussian n-vectors; degenerate draws are redrawn."""
    G = rng.standard_normal((count, n, r))
    Q, R = np.linalg.qr(G)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    bad = np.min(np.abs(diag), axis=-1) < RANK_TOLERANCE
    attempts = 0
    while bad.any():
        attempts += 1
        if attempts > config.FRAME_RETRY_CAP:
            raise DegenerateFrameError(f"could not draw a rank-{r} frame in {config.FRAME_RETRY_CAP} attempts")
        logger.warning(f"Redrawing {int(bad.sum())} degenerate frame(s)")
        Q2, R2 = np.linalg.qr(rng.standard_normal((int(bad.sum()), n, r)))
        Q[bad], R[bad] = Q2, R2
        diag = np.diagonal(R, axis1=-2, axis2=-1)
        bad = np.min(np.abs(diag), axis=-1) < RANK_TOLERANCE
    # sign fix makes the law exactly rotation invariant
    Q = Q * np.sign(diag)[:, None, :]
    return np.swapaxes(Q, -1, -2)


def sample_subspace(n, r, rng_state):
    _check_rank(n, r)
    return SubspaceFrame(n, r, _draw_frames(rng_state, n, r, 1)[0])


def frame_for(n, r, frame_seed=None):
    """Rows spanning the projection plane: the first r axes, or the frame drawn from `frame_seed`."""
    if frame_seed is None:
        return coordinate_frame(n, r)
    return sample_subspace(n, r, block_rng(frame_seed, 0)).vectors


def frame_stream(n, r, count, seed, block_size=None):
    """The frames a Monte Carlo run with this seed visits, in order."""
    _check_rank(n, r)
    block_size = int(block_size or config.MC_BLOCK_SIZE)
    for b, start in enumerate(range(0, count, block_size)):
        for vectors in _draw_frames(block_rng(seed, b), n, r, min(block_size, count - start)):
            yield SubspaceFrame(n, r, vectors)


def mc_grassmann_integral(fn, n, r, samples, seed, workers=1, vectorized=False, block_size=None):
    """
    m(G_{r,n-r}) times the sample mean of fn over uniform r-frames.

    Samples are split into fixed blocks, block b drawing from the Philox
    stream (seed, b). Blocks may run on any number of threads; values are
    concatenated in block order, so the estimate does not depend on `workers`.
    With vectorized=True, fn receives a (count, r, n) array per block.
    """
    _check_rank(n, r)
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    block_size = int(block_size or config.MC_BLOCK_SIZE)
    starts = list(range(0, samples, block_size))

    def run_block(b):
        frames = _draw_frames(block_rng(seed, b), n, r, min(block_size, samples - starts[b]))
        if vectorized:
            values = np.asarray(fn(frames), dtype=float).reshape(-1)
        else:
            values = np.array([fn(SubspaceFrame(n, r, v)) for v in frames], dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            frame = frames[bad[0]].tolist()
            raise NonFiniteSampleError(f"integrand returned {values[bad[0]]} at frame {frame}", frame)
        return values

    workers = max(1, int(workers))
    if workers == 1 or len(starts) == 1:
        chunks = [run_block(b) for b in range(len(starts))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            chunks = list(executor.map(run_block, range(len(starts))))
    values = np.concatenate(chunks)

    mean = math.fsum(values.tolist()) / samples
    variance = math.fsum(((values - mean) ** 2).tolist()) / (samples - 1)
    scale = grassmann_measure(n, r).to_float()
    logger.debug(f"MC over G({r},{n - r}): {samples} samples in {len(starts)} blocks, seed {seed}")
    return McEstimate(mean * scale, math.sqrt(variance / samples) * scale, samples, seed)


def projection_volume_integrand(body, resolution=None):
    """Vectorized integrand: r-volume of the projection onto each frame."""
    def fn(frames):
        return batch_projection_measures(body, frames, resolution)[0]
    return fn


def projection_mci_integrand(body, t, resolution=None):
    def fn(frames):
        return batch_projection_measures(body, frames, resolution)[1][:, t]
    return fn


def kubota_check(body, r, samples=None, seed=None, workers=1, configuration=None):
    """
    W_r of `body` two ways: the mean (n-r)-projection volume times the
    Kubota factor, against M_(r-1)/n from curvature quadrature.
    """
    n = body.dim
    if n not in (2, 3):
        raise DomainError(f"kubota check needs a body of dimension 2 or 3, got {n}")
    _check_rank(n, r)
    samples = int(samples or config.MC_DEFAULT_SAMPLES)
    seed = config.DEFAULT_SEED if seed is None else int(seed)

    estimate = mc_grassmann_integral(projection_volume_integrand(body), n, n - r, samples, seed,
                                     workers=workers, vectorized=True)
    measure = grassmann_measure(n, n - r).to_float()
    factor = kubota_coefficient(n, r).to_float()
    lhs = factor * estimate.mean / measure
    lhs_se = factor * estimate.standard_error / measure
    rhs = mean_curvature_integral(body, r - 1) / n
    if configuration is None:
        configuration = {"body": body.to_spec(), "r": r, "samples": samples, "seed": seed}
    return statistical_report("kubota", configuration, lhs, rhs, lhs_se, samples, seed)
