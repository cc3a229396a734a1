"""Temporal overlap and spline resampling of trajectory pairs.

Camera and RFID tracks arrive on different clocks and rates; comparing them
point-for-point requires a shared uniform time grid over the overlap window.
Resampling always runs on Cartesian coordinates.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .core import Trajectory
from .errors import InsufficientSupportError, NoOverlapError

DEFAULT_SAMPLES = 100
# spline fits are capped at this many support points; long histories are
# decimated first (the output grid is far coarser anyway)
MAX_SUPPORT = 1024


@dataclass
class AlignedPair:
    """Two trajectories resampled onto one uniform grid."""

    cam: Trajectory
    rfid: Trajectory
    n_samples: int
    interval: tuple


def overlap_interval(cam: Trajectory, rfid: Trajectory):
    """Shared time window: latest start to earliest end.

    Raises NoOverlapError when the window is empty or a single instant.
    """
    if len(cam) == 0 or len(rfid) == 0:
        raise ValueError("both trajectories must be non-empty")
    t_start = max(cam.points[0].t, rfid.points[0].t)
    t_end = min(cam.points[-1].t, rfid.points[-1].t)
    if t_start >= t_end:
        raise NoOverlapError(
            f"no shared window: [{t_start}, {t_end}] is empty"
        )
    return t_start, t_end


def resample_arrays(t, xy, grid):
    """Cubic-spline interpolation of an (n, 2) path onto a new time grid.

    Uses not-a-knot boundaries (reproduces polynomials up to cubics exactly;
    degenerates to linear interpolation for two points). Support larger than
    MAX_SUPPORT is decimated uniformly before fitting.
    """
    t = np.asarray(t, dtype=float)
    xy = np.asarray(xy, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if t.size < 2 or grid[0] < t[0] or grid[-1] > t[-1]:
        raise InsufficientSupportError(
            f"need >= 2 points bracketing [{grid[0]}, {grid[-1]}], have {t.size}"
        )
    if t.size > MAX_SUPPORT:
        keep = np.unique(np.round(np.linspace(0, t.size - 1, MAX_SUPPORT)).astype(int))
        t = t[keep]
        xy = xy[keep]
    if t.size == 2:
        w = (grid - t[0]) / (t[1] - t[0])
        return xy[0][None, :] + w[:, None] * (xy[1] - xy[0])[None, :]
    spline = CubicSpline(t, xy, axis=0, bc_type="not-a-knot")
    return spline(grid)


def resample_covariances(t, covs, grid):
    """Per-entry linear interpolation of (n, 2, 2) covariances onto a grid.

    Linear interpolation of PSD matrices is a convex combination, so the
    result stays PSD.
    """
    t = np.asarray(t, dtype=float)
    covs = np.asarray(covs, dtype=float)
    out = np.empty((len(grid), 2, 2))
    for i in range(2):
        for j in range(2):
            out[:, i, j] = np.interp(grid, t, covs[:, i, j])
    return out


def resample(traj: Trajectory, interval, n=DEFAULT_SAMPLES) -> Trajectory:
    """Resample a trajectory to n uniform samples over an interval."""
    if n < 2:
        raise ValueError(f"need n >= 2 samples, got {n}")
    t_start, t_end = interval
    if t_start >= t_end:
        raise ValueError(f"empty interval [{t_start}, {t_end}]")
    cart = traj.to_cartesian()
    grid = np.linspace(t_start, t_end, n)
    xy = resample_arrays(cart.times(), cart.xy(), grid)
    return Trajectory.from_arrays(traj.id, grid, xy, traj.source)


def align_pair(cam: Trajectory, rfid: Trajectory, n=DEFAULT_SAMPLES) -> AlignedPair:
    """Resample both trajectories onto their shared window, n samples each."""
    interval = overlap_interval(cam, rfid)
    cam_rs = resample(cam, interval, n)
    rfid_rs = resample(rfid, interval, n)
    return AlignedPair(cam_rs, rfid_rs, n, interval)
