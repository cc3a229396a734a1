"""Tag-to-object association scoring and matching.

Each (object, tag) pair accumulates one (d_min, d_max) interval per analysis
step. A pair is scored by the Mahalanobis distance of the origin under the
Gaussian fitted to those samples: a perfectly matching pair would produce
intervals hugging zero, so smaller scores mean closer alignment. The matrix
of scores is resolved to a one-to-one mapping by greedy column removal, with
an optimal matcher available as a cross-check.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InsufficientSamplesError, SingularSigmaError

SIGMA_REG = 1e-9


def mahalanobis(x, mu, sigma) -> float:
    """sqrt((x - mu)^T sigma^-1 (x - mu)) for a PSD sigma."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    diff = x - mu
    try:
        solved = np.linalg.solve(sigma, diff)
    except np.linalg.LinAlgError as exc:
        raise SingularSigmaError(f"covariance is singular: {sigma}") from exc
    quad = float(diff @ solved)
    if not np.isfinite(quad):
        raise SingularSigmaError(f"covariance is numerically singular: {sigma}")
    return float(np.sqrt(max(quad, 0.0)))


@dataclass
class PairStats:
    """Accumulated (d_min, d_max) intervals for one object/tag pair."""

    samples: list = field(default_factory=list)

    def add(self, d_min, d_max):
        self.samples.append((float(d_min), float(d_max)))

    def __len__(self):
        return len(self.samples)

    @property
    def mean(self) -> np.ndarray:
        return np.mean(np.asarray(self.samples), axis=0)

    @property
    def covariance(self) -> np.ndarray:
        arr = np.asarray(self.samples)
        return np.cov(arr.T, ddof=1)


def pair_score(stats: PairStats, reg=SIGMA_REG) -> float:
    """Mahalanobis distance of the origin under the pair's interval statistics.

    Raises InsufficientSamplesError with fewer than two samples; the sample
    covariance is regularized by reg * I before inversion.
    """
    if len(stats) < 2:
        raise InsufficientSamplesError(
            f"need >= 2 interval samples, have {len(stats)}"
        )
    sigma = stats.covariance + reg * np.eye(2)
    return mahalanobis(np.zeros(2), stats.mean, sigma)


@dataclass
class CostMatrix:
    """Square score matrix; rows are objects, columns are tags."""

    entries: np.ndarray
    object_ids: list
    tag_ids: list

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        n, m = self.entries.shape
        if n != m:
            raise ValueError(f"cost matrix must be square, got {n}x{m}")
        if len(self.object_ids) != n or len(self.tag_ids) != n:
            raise ValueError("id labels must match the matrix dimension")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("cost matrix entries must be finite")


@dataclass
class AssociationResult:
    """A one-to-one object -> tag mapping with the chosen entry costs."""

    mapping: dict
    costs: dict
    method: str

    @property
    def total_cost(self) -> float:
        return float(sum(self.costs.values()))


def pooled_variance(stats) -> float:
    """Mean per-pair interval variance across a stats grid.

    Used as a shrinkage ridge when scoring: per-pair sample covariances from
    few, autocorrelated samples collapse for well-matched pairs (their
    intervals barely move between steps), which would inflate their scores.
    Shrinking every pair toward the pooled scale keeps scores comparable.
    """
    total = 0.0
    count = 0
    for row in stats:
        for s in row:
            if len(s) >= 2:
                cov = s.covariance
                total += 0.5 * (cov[0, 0] + cov[1, 1])
                count += 1
    return total / count if count else 0.0


def build_cost_matrix(stats, object_ids=None, tag_ids=None, reg=SIGMA_REG) -> CostMatrix:
    """Score every pair; stats[i][j] holds object i against tag j."""
    n = len(stats)
    object_ids = list(object_ids) if object_ids is not None else list(range(n))
    tag_ids = list(tag_ids) if tag_ids is not None else list(range(n))
    entries = np.empty((n, n))
    for i in range(n):
        if len(stats[i]) != n:
            raise ValueError("stats must be a square grid of PairStats")
        for j in range(n):
            try:
                entries[i, j] = pair_score(stats[i][j], reg)
            except InsufficientSamplesError as exc:
                raise InsufficientSamplesError(
                    f"pair (object {object_ids[i]}, tag {tag_ids[j]}): {exc}"
                ) from exc
    return CostMatrix(entries, object_ids, tag_ids)


def greedy_assign(m: CostMatrix) -> AssociationResult:
    """Row-by-row minimum with column removal.

    Rows are processed in ascending index order; each takes its cheapest
    still-available column (ties to the lowest column index), which is then
    removed from contention.
    """
    n = m.entries.shape[0]
    available = list(range(n))
    mapping = {}
    costs = {}
    for i in range(n):
        row = m.entries[i, available]
        j = available.pop(int(np.argmin(row)))
        mapping[m.object_ids[i]] = m.tag_ids[j]
        costs[m.object_ids[i]] = float(m.entries[i, j])
    return AssociationResult(mapping, costs, "greedy")


def optimal_assign(m: CostMatrix) -> AssociationResult:
    """Minimum-total-cost perfect matching (Hungarian-style solver).

    Offered as a cross-check for the greedy rule, never the default.
    """
    rows, cols = linear_sum_assignment(m.entries)
    mapping = {}
    costs = {}
    for i, j in zip(rows, cols):
        mapping[m.object_ids[i]] = m.tag_ids[j]
        costs[m.object_ids[i]] = float(m.entries[i, j])
    return AssociationResult(mapping, costs, "optimal")
