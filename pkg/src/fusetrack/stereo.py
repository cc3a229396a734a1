"""Semi-global stereo matching and reprojection.

Pipeline: per-pixel matching cost (absolute intensity difference), 1-D cost
aggregation along 8 scan directions with small/large disparity-change
penalties, summation across directions, per-pixel argmin disparity, then
depth Z = f B / d and 3-D reprojection through the 4x4 Q matrix. An energy
evaluator is provided as a diagnostic: the aggregation approximates the
global energy minimum, it does not attain it.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ZeroDisparityError

# cost assigned where the shifted right-image pixel falls outside the frame
BOUNDARY_COST = 1000.0
DEFAULT_P1 = 10.0
DEFAULT_P2 = 120.0

# 8 aggregation directions as (dy, dx) unit steps
DIRECTIONS_8 = (
    (0, 1), (0, -1), (1, 0), (-1, 0),
    (1, 1), (1, -1), (-1, 1), (-1, -1),
)


@dataclass
class StereoPair:
    """Rectified grayscale pair with a disparity search range."""

    left: np.ndarray  # (H, W) intensities 0..255
    right: np.ndarray
    max_disparity: int

    def __post_init__(self):
        self.left = np.asarray(self.left, dtype=np.float64)
        self.right = np.asarray(self.right, dtype=np.float64)
        if self.left.shape != self.right.shape:
            raise ValueError(
                f"image shapes differ: {self.left.shape} vs {self.right.shape}"
            )
        if self.left.ndim != 2:
            raise ValueError("images must be 2-D grayscale grids")
        if not 0 < self.max_disparity < self.left.shape[1]:
            raise ValueError(
                f"max_disparity must be in (0, image width); got {self.max_disparity}"
            )


@dataclass
class DisparityMap:
    d: np.ndarray  # (H, W) int
    valid_mask: np.ndarray  # (H, W) bool

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.int64)
        self.valid_mask = np.asarray(self.valid_mask, dtype=bool)


@dataclass
class CameraIntrinsics:
    """Pinhole intrinsics of a rectified pair plus the stereo baseline.

    The reprojection matrix q assumes square pixels (f = f_x); depth uses
    f_x as well.
    """

    f_x: float
    f_y: float
    c_x: float
    c_y: float
    baseline: float  # m
    q: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.f_x <= 0 or self.f_y <= 0 or self.baseline <= 0:
            raise ValueError("focal lengths and baseline must be positive")
        self.q = np.array(
            [
                [1.0, 0.0, 0.0, -self.c_x],
                [0.0, 1.0, 0.0, -self.c_y],
                [0.0, 0.0, 0.0, self.f_x],
                [0.0, 0.0, 1.0 / self.baseline, 0.0],
            ]
        )


def matching_cost(pair: StereoPair) -> np.ndarray:
    """Absolute-difference cost volume C[y, x, d] = |L[y,x] - R[y,x-d]|.

    Shifts that leave the right image get BOUNDARY_COST.
    """
    h, w = pair.left.shape
    nd = pair.max_disparity + 1
    cost = np.full((h, w, nd), BOUNDARY_COST, dtype=np.float64)
    for d in range(nd):
        if d == 0:
            cost[:, :, 0] = np.abs(pair.left - pair.right)
        else:
            cost[:, d:, d] = np.abs(pair.left[:, d:] - pair.right[:, :-d])
    return cost


def aggregate_path(cost, direction, p1=DEFAULT_P1, p2=DEFAULT_P2) -> np.ndarray:
    """Aggregate the cost volume along one scan direction.

    Recursion per pixel p with predecessor p-r along the path:
        L(p, d) = C(p, d) + min(L(p-r, d),
                                L(p-r, d-1) + P1,
                                L(p-r, d+1) + P1,
                                min_i L(p-r, i) + P2)
                  - min_k L(p-r, k)
    Path-start pixels keep their raw cost. The subtraction keeps values
    bounded: L <= C + P2 everywhere.
    """
    if not (0 < p1 <= p2):
        raise ValueError(f"penalties must satisfy 0 < P1 <= P2, got {p1}, {p2}")
    dy, dx = direction
    if (dy, dx) == (0, 0) or abs(dy) > 1 or abs(dx) > 1:
        raise ValueError(f"direction must be a unit step, got {direction}")
    return kernels.sgm_aggregate(np.asarray(cost, dtype=np.float64), dy, dx, p1, p2)


def sum_paths(volumes) -> np.ndarray:
    """Sum per-direction aggregated volumes.

    Accumulation happens in a canonical order (sorted by direction when
    directions are attached, else input order), so the result does not
    depend on how the caller ordered the volumes.
    """
    volumes = list(volumes)
    if not volumes:
        raise ValueError("at least one aggregated volume is required")
    if all(isinstance(v, tuple) for v in volumes):
        volumes = [v for _, v in sorted(volumes, key=lambda item: item[0])]
    total = np.zeros_like(volumes[0])
    for v in volumes:
        total = total + v
    return total


def select_disparity(s) -> DisparityMap:
    """Per-pixel argmin over disparities; ties go to the smaller disparity."""
    d = np.argmin(s, axis=2)
    return DisparityMap(d, np.ones(d.shape, dtype=bool))


def sgm_disparity(
    pair: StereoPair, p1=DEFAULT_P1, p2=DEFAULT_P2, directions=DIRECTIONS_8
):
    """Full pipeline: cost volume, 8-path aggregation, summation, argmin."""
    cost = matching_cost(pair)
    volumes = [(d, aggregate_path(cost, d, p1, p2)) for d in directions]
    s = sum_paths(volumes)
    return select_disparity(s), cost


def energy(disparity: DisparityMap, cost, p1=DEFAULT_P1, p2=DEFAULT_P2) -> float:
    """Global energy of a disparity map: data term plus smoothness penalties.

    Smoothness is evaluated over 4-neighborhoods, each unordered pixel pair
    counted once; unit disparity jumps cost P1, larger jumps P2.
    """
    d = disparity.d
    h, w = d.shape
    ys, xs = np.indices((h, w))
    data = float(np.sum(cost[ys, xs, d]))
    smooth = 0.0
    for diff in (np.abs(np.diff(d, axis=0)), np.abs(np.diff(d, axis=1))):
        smooth += p1 * float(np.count_nonzero(diff == 1))
        smooth += p2 * float(np.count_nonzero(diff > 1))
    return data + smooth


def depth_from_disparity(disparity: DisparityMap, intr: CameraIntrinsics):
    """Depth grid Z = f B / d in meters; NaN where disparity is zero/invalid."""
    d = disparity.d.astype(np.float64)
    with np.errstate(divide="ignore"):
        z = intr.f_x * intr.baseline / d
    z[(disparity.d == 0) | ~disparity.valid_mask] = np.nan
    return z


def reproject(u, v, d, intr: CameraIntrinsics):
    """Back-project pixel (u, v) at disparity d to (X, Y, Z) meters."""
    if d <= 0:
        raise ZeroDisparityError(f"disparity must be positive, got {d}")
    vec = intr.q @ np.array([u, v, d, 1.0])
    return tuple(vec[:3] / vec[3])


def random_dot_pair(disparity_true, rng, max_disparity=None):
    """Synthesize a random-dot stereo pair realizing a known disparity map.

    Right-image pixels are copied from the left at their planted offset;
    pixels never referenced by the warp (occlusions and the sheared border)
    are filled with fresh noise. Returns (StereoPair, non_occluded_mask).
    """
    disparity_true = np.asarray(disparity_true, dtype=int)
    h, w = disparity_true.shape
    left = rng.integers(0, 256, (h, w)).astype(np.float64)
    right = rng.integers(0, 256, (h, w)).astype(np.float64)
    filled = np.zeros((h, w), dtype=bool)
    non_occluded = np.zeros((h, w), dtype=bool)
    for y in range(h):
        for x in range(w - 1, -1, -1):  # nearer (larger-d) surfaces win
            xs = x - disparity_true[y, x]
            if 0 <= xs < w and not filled[y, xs]:
                right[y, xs] = left[y, x]
                filled[y, xs] = True
                non_occluded[y, x] = True
    if max_disparity is None:
        max_disparity = int(disparity_true.max()) + 1
    return StereoPair(left, right, max_disparity), non_occluded
