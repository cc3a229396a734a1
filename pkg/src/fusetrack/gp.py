"""Gaussian-process regression for range and bearing estimation.

A fitted model supplies the predictive mean used as the measurement and the
predictive variance used as the measurement noise, one scalar output per
model. Models are grouped into a registry keyed by frequency bin, with one
range model and one angle model per bin.

The kernel is a unit-variance RBF, k(x1, x2) = exp(-||x1 - x2||^2 / (2 s^2)),
so predictive variances live in [0, 1]. The prior mean is a constant, by
default the mean of the training targets.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SingularKernelError

DEFAULT_NOISE = 1e-6
COND_LIMIT = 1e12  # refuse fits whose jittered kernel is worse than this


def rbf_kernel(x1, x2, length_scale):
    """RBF kernel value exp(-||x1 - x2||^2 / (2 length_scale^2)), in (0, 1]."""
    if length_scale <= 0:
        raise ValueError(f"length_scale must be positive, got {length_scale}")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    sq = float(np.sum((x1 - x2) ** 2))
    return float(np.exp(-sq / (2.0 * length_scale**2)))


def _kernel_matrix(xa, xb, length_scale):
    sq = np.sum((xa[:, None, :] - xb[None, :, :]) ** 2, axis=-1)
    return np.exp(-sq / (2.0 * length_scale**2))


@dataclass
class GPModel:
    """A fitted GP: training set, hyperparameters, and the cached solve."""

    x_train: np.ndarray  # (n, d)
    y_train: np.ndarray  # (n,)
    length_scale: float
    noise: float  # observation noise std added as noise^2 * I
    mean: float  # constant prior mean
    alpha: np.ndarray  # solution of (K + noise^2 I) alpha = y - mean
    chol: tuple  # cho_factor of the jittered kernel matrix

    def predict_mean(self, x_star):
        return predict_mean(self, x_star)

    def predict_variance(self, x_star):
        return predict_variance(self, x_star)


def fit(x, y, length_scale, noise=DEFAULT_NOISE, mean=None) -> GPModel:
    """Fit a GP with an RBF kernel and cache the training solve.

    Args:
        x: training inputs, (n, d) or (n,) for scalar inputs.
        y: scalar targets, (n,).
        length_scale: RBF length scale, > 0.
        noise: observation noise std; noise^2 is added to the kernel diagonal.
        mean: constant prior mean; defaults to the mean of y.

    Raises:
        SingularKernelError: the jittered kernel matrix is not positive
            definite (e.g. duplicated inputs with zero noise).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1 and x.ndim == 2 and np.asarray(y).size > 1:
        x = x.T
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"input/target counts differ: {x.shape[0]} vs {y.shape[0]}")
    if y.size < 1:
        raise ValueError("at least one training point is required")
    if length_scale <= 0:
        raise ValueError(f"length_scale must be positive, got {length_scale}")
    if noise < 0:
        raise ValueError(f"noise must be nonnegative, got {noise}")

    mean = float(np.mean(y)) if mean is None else float(mean)
    k = _kernel_matrix(x, x, length_scale)
    k[np.diag_indices_from(k)] += noise**2
    try:
        chol = cho_factor(k, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularKernelError(
            f"kernel matrix is not positive definite ({exc}); "
            "increase noise or drop duplicate inputs"
        ) from exc
    diag = np.abs(np.diag(chol[0]))
    cond_est = (diag.max() / diag.min()) ** 2
    if cond_est > COND_LIMIT:
        raise SingularKernelError(
            f"kernel matrix is ill-conditioned (cond ~ {cond_est:.2e}); "
            "increase noise or the length scale spacing"
        )
    alpha = cho_solve(chol, y - mean)
    if not np.all(np.isfinite(alpha)):
        raise SingularKernelError("kernel solve produced non-finite coefficients")
    return GPModel(x, y, float(length_scale), float(noise), mean, alpha, chol)


def predict_mean(model: GPModel, x_star):
    """Predictive mean m + k(x*, X) alpha at one test point or a batch."""
    x_star = np.asarray(x_star, dtype=float)
    single = x_star.ndim <= 1
    xs = np.atleast_2d(x_star)
    ks = _kernel_matrix(xs, model.x_train, model.length_scale)
    out = model.mean + ks @ model.alpha
    return float(out[0]) if single else out


def predict_variance(model: GPModel, x_star):
    """Predictive variance k(x*,x*) - k(x*,X) (K + noise^2 I)^-1 k(X,x*).

    Clamped at zero when roundoff drives it slightly negative. Never exceeds
    the prior variance of 1.
    """
    x_star = np.asarray(x_star, dtype=float)
    single = x_star.ndim <= 1
    xs = np.atleast_2d(x_star)
    ks = _kernel_matrix(xs, model.x_train, model.length_scale)
    solved = cho_solve(model.chol, ks.T)
    var = 1.0 - np.sum(ks * solved.T, axis=1)
    var = np.maximum(var, 0.0)
    return float(var[0]) if single else var


def select_length_scale(
    x, y, grid=None, noise=DEFAULT_NOISE, split=0.8, seed=0
):
    """Grid-search the length scale by held-out RMSE on a train/eval split.

    Returns (best_length_scale, rmse_by_scale dict). Falls back to fitting
    on everything when the set is too small to split.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        x = x.T
    if grid is None:
        grid = np.geomspace(0.05, 50.0, 16)
    rng = np.random.default_rng(seed)
    n = y.size
    idx = rng.permutation(n)
    n_train = max(1, int(round(split * n)))
    train, held = idx[:n_train], idx[n_train:]
    if held.size == 0:
        train = idx
        held = idx
    scores = {}
    for s in grid:
        try:
            model = fit(x[train], y[train], float(s), noise)
        except SingularKernelError:
            continue
        pred = predict_mean(model, x[held])
        scores[float(s)] = float(np.sqrt(np.mean((pred - y[held]) ** 2)))
    if not scores:
        raise SingularKernelError("no length scale in the grid produced a valid fit")
    best = min(scores, key=scores.get)
    return best, scores


@dataclass
class GPRegistry:
    """Per-frequency-bin (range, angle) model pairs, JSON-serializable."""

    models: dict  # bin key -> {"range": GPModel, "angle": GPModel}

    def predict(self, features, freq_bin):
        """Estimate (r, theta, var_r, var_theta) for one feature vector."""
        if freq_bin not in self.models:
            raise KeyError(f"no GP models for frequency bin {freq_bin!r}")
        pair = self.models[freq_bin]
        r = pair["range"].predict_mean(features)
        theta = pair["angle"].predict_mean(features)
        var_r = pair["range"].predict_variance(features)
        var_theta = pair["angle"].predict_variance(features)
        return r, theta, var_r, var_theta

    def to_json(self) -> str:
        doc = {"bins": {}}
        for key, pair in self.models.items():
            doc["bins"][key] = {
                target: {
                    "inputs": model.x_train.tolist(),
                    "targets": model.y_train.tolist(),
                    "length_scale": model.length_scale,
                    "noise": model.noise,
                    "mean": model.mean,
                }
                for target, model in pair.items()
            }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text) -> "GPRegistry":
        doc = json.loads(text)
        models = {}
        for key, pair in doc["bins"].items():
            models[key] = {
                target: fit(
                    np.asarray(entry["inputs"], dtype=float),
                    np.asarray(entry["targets"], dtype=float),
                    entry["length_scale"],
                    entry["noise"],
                    entry["mean"],
                )
                for target, entry in pair.items()
            }
        return cls(models)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "GPRegistry":
        with open(path) as fh:
            return cls.from_json(fh.read())
