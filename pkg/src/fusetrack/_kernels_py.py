"""Numpy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable (see
kernels.py). The dynamic programs are evaluated along anti-diagonal
wavefronts so the inner loop is vectorized; results are bit-identical to
the compiled kernels because every reduction is an exact min/max selection
and additions associate the same way in both implementations.
"""

import numpy as np

BACKEND = "python"


def frechet_dp(a, b):
    """Discrete Frechet distance between point sequences a (n,2) and b (m,2).

    Min over monotone couplings of the max pointwise Euclidean distance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, m = a.shape[0], b.shape[0]
    diff = a[:, None, :] - b[None, :, :]
    d = np.sqrt(diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1])
    if n == 1:
        return float(np.max(d[0]))
    if m == 1:
        return float(np.max(d[:, 0]))
    ca = np.empty((n, m), dtype=np.float64)
    ca[:, 0] = np.maximum.accumulate(d[:, 0])
    ca[0, :] = np.maximum.accumulate(d[0, :])
    for k in range(2, n + m - 1):
        lo = max(1, k - (m - 1))
        hi = min(n - 1, k - 1)
        if lo > hi:
            continue
        i = np.arange(lo, hi + 1)
        j = k - i
        best = np.minimum(
            np.minimum(ca[i - 1, j], ca[i - 1, j - 1]), ca[i, j - 1]
        )
        ca[i, j] = np.maximum(d[i, j], best)
    return float(ca[n - 1, m - 1])


def dtw_dp(a, b):
    """Dynamic time warping cost with squared-Euclidean local distances."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, m = a.shape[0], b.shape[0]
    diff = a[:, None, :] - b[None, :, :]
    d = diff[..., 0] * diff[..., 0] + diff[..., 1] * diff[..., 1]
    acc = np.empty((n, m), dtype=np.float64)
    acc[:, 0] = np.add.accumulate(d[:, 0])
    acc[0, :] = np.add.accumulate(d[0, :])
    for k in range(2, n + m - 1):
        lo = max(1, k - (m - 1))
        hi = min(n - 1, k - 1)
        if lo > hi:
            continue
        i = np.arange(lo, hi + 1)
        j = k - i
        best = np.minimum(
            np.minimum(acc[i - 1, j], acc[i - 1, j - 1]), acc[i, j - 1]
        )
        acc[i, j] = d[i, j] + best
    return float(acc[n - 1, m - 1])


def _sgm_step(c, prev, p1, p2):
    # c, prev: (..., D) slices; returns aggregated costs for the current pixels
    minprev = prev.min(axis=-1, keepdims=True)
    best = np.minimum(prev, minprev + p2)
    best[..., 1:] = np.minimum(best[..., 1:], prev[..., :-1] + p1)
    best[..., :-1] = np.minimum(best[..., :-1], prev[..., 1:] + p1)
    return c + best - minprev


def sgm_aggregate(cost, dy, dx, p1, p2):
    """Aggregate a stereo cost volume along one scan direction.

    cost is (H, W, D); (dy, dx) is a unit step with at least one nonzero
    component. Pixels whose predecessor falls outside the image start a new
    path and keep their raw matching cost.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    h, w, _ = cost.shape
    out = np.empty_like(cost)
    if dx == 0:
        ys = range(h) if dy > 0 else range(h - 1, -1, -1)
        for idx, y in enumerate(ys):
            if idx == 0:
                out[y] = cost[y]
            else:
                out[y] = _sgm_step(cost[y], out[y - dy], p1, p2)
        return out
    xs = range(w) if dx > 0 else range(w - 1, -1, -1)
    for idx, x in enumerate(xs):
        if idx == 0:
            out[:, x] = cost[:, x]
            continue
        prev_col = out[:, x - dx]
        if dy == 0:
            out[:, x] = _sgm_step(cost[:, x], prev_col, p1, p2)
        elif dy > 0:
            out[0, x] = cost[0, x]
            out[1:, x] = _sgm_step(cost[1:, x], prev_col[:-1], p1, p2)
        else:
            out[h - 1, x] = cost[h - 1, x]
            out[:-1, x] = _sgm_step(cost[:-1, x], prev_col[1:], p1, p2)
    return out
