"""Trajectory similarity: discrete Frechet, its uncertainty-aware interval
form, and the Euclidean/DTW baselines.

The uncertainty-aware form draws K realizations of the noisy track from
per-point elliptical confidence regions and reports the min and max discrete
Frechet distance against the reference track, which is treated as ground
truth. Realization 0 is always the mean path, so the interval brackets the
plain Frechet distance.

All point distances are Euclidean on Cartesian coordinates.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Trajectory
from .errors import LengthMismatchError, SingularCovarianceError

DEFAULT_KAPPA_SQ = 5.991  # 95% confidence ellipse, 2 degrees of freedom
DEFAULT_REALIZATIONS = 25
COV_FLOOR = 1e-6


def _as_xy(obj) -> np.ndarray:
    """Coerce a Trajectory or array-like to an (n, 2) float array."""
    if isinstance(obj, Trajectory):
        return obj.xy()
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) point array, got shape {arr.shape}")
    return arr


@dataclass
class UncertainTrajectory:
    """Mean path with per-point 2x2 covariances and a confidence threshold."""

    mean: Trajectory
    covariances: np.ndarray  # (n, 2, 2)
    kappa_sq: float = DEFAULT_KAPPA_SQ

    def __post_init__(self):
        self.covariances = np.asarray(self.covariances, dtype=float)
        n = len(self.mean)
        if self.covariances.shape != (n, 2, 2):
            raise ValueError(
                f"need one 2x2 covariance per point: {self.covariances.shape} vs n={n}"
            )
        if self.kappa_sq <= 0:
            raise ValueError(f"kappa_sq must be positive, got {self.kappa_sq}")


@dataclass(frozen=True)
class FrechetBounds:
    """Best/worst-case Frechet distance over sampled realizations."""

    d_min: float
    d_max: float
    k_realizations: int

    def __post_init__(self):
        if not 0.0 <= self.d_min <= self.d_max:
            raise ValueError(f"invalid bounds [{self.d_min}, {self.d_max}]")


def discrete_frechet(a, b) -> float:
    """Discrete Frechet distance between two Cartesian trajectories."""
    xa, xb = _as_xy(a), _as_xy(b)
    if xa.shape[0] == 0 or xb.shape[0] == 0:
        raise ValueError("trajectories must be non-empty")
    return kernels.frechet_dp(xa, xb)


def _chol2x2(sigma, floor):
    """Lower Cholesky factor of a 2x2 PSD matrix, tolerating rank deficiency."""
    a, b, c, d = sigma[0, 0], sigma[0, 1], sigma[1, 0], sigma[1, 1]
    if floor > 0.0:
        a += floor
        d += floor
    if not math.isclose(b, c, rel_tol=1e-9, abs_tol=1e-12):
        raise SingularCovarianceError(f"covariance is not symmetric: {sigma}")
    tol = 1e-12 * max(1.0, a, d)
    if a < -tol or d < -tol or a * d - b * b < -tol:
        raise SingularCovarianceError(f"covariance is not PSD: {sigma}")
    a = max(a, 0.0)
    l11 = math.sqrt(a)
    l21 = b / l11 if l11 > 0.0 else 0.0
    l22 = math.sqrt(max(d - l21 * l21, 0.0))
    return np.array([[l11, 0.0], [l21, l22]])


def sample_realizations(u: UncertainTrajectory, k, seed, cov_floor=COV_FLOOR):
    """Draw k realizations of an uncertain trajectory, (k, n, 2).

    Realization 0 is the mean path. Later realizations perturb every point
    with a Gaussian truncated to the kappa^2 confidence ellipse of its
    covariance, each realization using a seed derived from (seed, index) so
    the set is reproducible under any evaluation order.
    """
    if k < 1:
        raise ValueError(f"need k >= 1 realizations, got {k}")
    mean = _as_xy(u.mean)
    n = mean.shape[0]
    chols = np.empty((n, 2, 2))
    for i in range(n):
        chols[i] = _chol2x2(u.covariances[i], cov_floor)
    out = np.empty((k, n, 2))
    out[0] = mean
    limit = u.kappa_sq
    for idx in range(1, k):
        rng = np.random.default_rng([seed, idx])
        z = rng.standard_normal((n, 2))
        bad = np.einsum("ij,ij->i", z, z) > limit
        while bad.any():
            z[bad] = rng.standard_normal((int(bad.sum()), 2))
            bad = np.einsum("ij,ij->i", z, z) > limit
        out[idx] = mean + np.einsum("nij,nj->ni", chols, z)
    return out


def frechet_interval(ref_xy, realizations) -> FrechetBounds:
    """Min/max Frechet distance from a fixed track to each realization."""
    ref_xy = np.asarray(ref_xy, dtype=float)
    d_min = math.inf
    d_max = -math.inf
    for real in realizations:
        d = kernels.frechet_dp(ref_xy, real)
        d_min = min(d_min, d)
        d_max = max(d_max, d)
    return FrechetBounds(d_min, d_max, len(realizations))


def uncertain_frechet(
    cam, rfid_u: UncertainTrajectory, k=DEFAULT_REALIZATIONS, seed=0,
    cov_floor=COV_FLOOR,
) -> FrechetBounds:
    """Frechet distance interval between a reference track and an uncertain one.

    The reference (camera) track is fixed; only the uncertain (RFID) track is
    perturbed. Because realization 0 is the mean path, the interval always
    contains discrete_frechet(cam, rfid_u.mean).
    """
    realizations = sample_realizations(rfid_u, k, seed, cov_floor)
    return frechet_interval(_as_xy(cam), realizations)


def euclidean_distance(a, b) -> float:
    """Root of the summed squared pointwise distances of synchronized tracks."""
    xa, xb = _as_xy(a), _as_xy(b)
    if xa.shape[0] != xb.shape[0]:
        raise LengthMismatchError(
            f"length mismatch: {xa.shape[0]} vs {xb.shape[0]}"
        )
    diff = xa - xb
    return float(np.sqrt(np.sum(diff * diff)))


def dtw_distance(a, b) -> float:
    """Dynamic time warping cost with squared-Euclidean local distances."""
    xa, xb = _as_xy(a), _as_xy(b)
    if xa.shape[0] == 0 or xb.shape[0] == 0:
        raise ValueError("trajectories must be non-empty")
    return kernels.dtw_dp(xa, xb)
