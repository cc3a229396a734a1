"""Extended Kalman filter over range/bearing measurements.

State is [x, y, vx, vy] in the reader frame with a constant-velocity motion
model; measurements are polar (r, theta) with per-measurement variances
(typically GP predictive variances). Only refined positions are exported;
velocities exist to stabilize the smoothing.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Frame, Source, TimedPoint, Trajectory, wrap_angle
from .errors import (
    NonMonotoneTimeError,
    NumericalError,
    OriginSingularityError,
    SingularInnovationError,
)

ORIGIN_EPS = 1e-9
COND_LIMIT = 1e12
DEFAULT_Q_SCALE = 0.1  # white-noise-acceleration intensity, m^2/s^3


@dataclass
class TagState:
    """Position/velocity mean with its 4x4 covariance at time t."""

    mean: np.ndarray  # (4,) [x, y, vx, vy]
    cov: np.ndarray  # (4, 4) symmetric PSD
    t: float

    @property
    def position(self):
        return self.mean[:2]

    @property
    def velocity(self):
        return self.mean[2:]

    @property
    def position_cov(self):
        return self.cov[:2, :2]


@dataclass(frozen=True)
class PolarMeasurement:
    """Range/bearing observation with measurement variances."""

    r: float
    theta: float
    var_r: float
    var_theta: float
    t: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"range must be >= 0, got {self.r}")
        if self.var_r <= 0 or self.var_theta <= 0:
            raise ValueError("measurement variances must be positive")


def cv_transition(dt) -> np.ndarray:
    """Constant-velocity transition: position += velocity * dt."""
    phi = np.eye(4)
    phi[0, 2] = dt
    phi[1, 3] = dt
    return phi


def process_noise(dt, q_scale=DEFAULT_Q_SCALE) -> np.ndarray:
    """Discretized white-noise-acceleration covariance for one axis pair.

    Per axis: [[dt^3/3, dt^2/2], [dt^2/2, dt]] * q_scale, laid out on the
    [x, y, vx, vy] ordering.
    """
    q = np.zeros((4, 4))
    a = q_scale * dt**3 / 3.0
    b = q_scale * dt**2 / 2.0
    c = q_scale * dt
    for pos, vel in ((0, 2), (1, 3)):
        q[pos, pos] = a
        q[pos, vel] = b
        q[vel, pos] = b
        q[vel, vel] = c
    return q


def predict(state: TagState, dt, q=None) -> TagState:
    """Propagate mean and covariance forward by dt."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if q is None:
        q = process_noise(dt)
    phi = cv_transition(dt)
    mean = phi @ state.mean
    cov = phi @ state.cov @ phi.T + q
    cov = 0.5 * (cov + cov.T)
    return TagState(mean, cov, state.t + dt)


def observe(state: TagState):
    """Predicted polar measurement (r, theta) of the state position."""
    x, y = state.mean[0], state.mean[1]
    rho = math.hypot(x, y)
    if rho < ORIGIN_EPS:
        raise OriginSingularityError(
            f"state at t={state.t} is within {ORIGIN_EPS} m of the origin"
        )
    return rho, math.atan2(y, x)


def jacobian(state: TagState) -> np.ndarray:
    """Jacobian of the polar observation with respect to [x, y, vx, vy]."""
    x, y = state.mean[0], state.mean[1]
    rho2 = x * x + y * y
    rho = math.sqrt(rho2)
    if rho < ORIGIN_EPS:
        raise OriginSingularityError(
            f"state at t={state.t} is within {ORIGIN_EPS} m of the origin"
        )
    return np.array(
        [
            [x / rho, y / rho, 0.0, 0.0],
            [-y / rho2, x / rho2, 0.0, 0.0],
        ]
    )


def update(state: TagState, z: PolarMeasurement) -> TagState:
    """Fuse one polar measurement; the angle innovation is wrapped."""
    r_pred, theta_pred = observe(state)
    h = jacobian(state)
    s = h @ state.cov @ h.T
    s[0, 0] += z.var_r
    s[1, 1] += z.var_theta
    # condition and inverse of the symmetric 2x2 innovation covariance
    half_tr = 0.5 * (s[0, 0] + s[1, 1])
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    gap = math.sqrt(max(half_tr * half_tr - det, 0.0))
    lo, hi = half_tr - gap, half_tr + gap
    if lo <= 0.0 or hi / lo > COND_LIMIT:
        raise SingularInnovationError(
            f"innovation covariance is ill-conditioned at t={z.t}"
        )
    s_inv = np.array([[s[1, 1], -s[0, 1]], [-s[1, 0], s[0, 0]]]) / det
    k = state.cov @ h.T @ s_inv
    innovation = np.array([z.r - r_pred, wrap_angle(z.theta - theta_pred)])
    mean = state.mean + k @ innovation
    cov = (np.eye(4) - k @ h) @ state.cov
    cov = 0.5 * (cov + cov.T)
    min_eig = float(np.linalg.eigvalsh(cov)[0])
    if min_eig < -1e-9:
        raise NumericalError(
            f"posterior covariance lost positive semidefiniteness ({min_eig:.3e})"
        )
    return TagState(mean, cov, z.t)


def measurement_cov_cartesian(state: TagState, z: PolarMeasurement) -> np.ndarray:
    """Measurement (r, theta) variances mapped to a Cartesian 2x2 covariance.

    Linearized at the filtered position, so range and bearing uncertainty
    turn into a correlated x/y ellipse aligned with the ray to the tag.
    """
    x, y = state.mean[0], state.mean[1]
    rho = math.hypot(x, y)
    if rho < ORIGIN_EPS:
        return np.diag([z.var_r, z.var_r])
    c, s = x / rho, y / rho
    j = np.array([[c, -y], [s, x]])  # rho*sin = y, rho*cos = x
    return j @ np.diag([z.var_r, z.var_theta]) @ j.T


def init_state(z0: PolarMeasurement, dt) -> TagState:
    """Initial state from the first measurement.

    Position comes from the polar fix; velocity starts at zero with standard
    deviations sigma_x/dt and sigma_y/dt, where sigma_x, sigma_y are the
    Cartesian position uncertainties propagated from (var_r, var_theta).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    c, s = math.cos(z0.theta), math.sin(z0.theta)
    x, y = z0.r * c, z0.r * s
    # linearized polar -> Cartesian propagation of the measurement covariance
    j = np.array([[c, -z0.r * s], [s, z0.r * c]])
    pos_cov = j @ np.diag([z0.var_r, z0.var_theta]) @ j.T
    sigma_x = math.sqrt(pos_cov[0, 0])
    sigma_y = math.sqrt(pos_cov[1, 1])
    cov = np.zeros((4, 4))
    cov[:2, :2] = pos_cov
    cov[2, 2] = (sigma_x / dt) ** 2
    cov[3, 3] = (sigma_y / dt) ** 2
    return TagState(np.array([x, y, 0.0, 0.0]), cov, z0.t)


class TagTracker:
    """Single-tag filter that accumulates the refined track incrementally.

    One instance per tag, single writer. Keeps per-point position
    covariances so downstream similarity can build uncertainty regions.
    """

    def __init__(self, q_scale=DEFAULT_Q_SCALE, init_dt=None):
        self.q_scale = q_scale
        self.init_dt = init_dt
        self.state = None
        self._pending = None  # first measurement, held until dt is known
        # growth-doubling buffers; arrays() returns views of the filled part
        self._n = 0
        self._t_buf = np.empty(64)
        self._xy_buf = np.empty((64, 2))
        self._cov_buf = np.empty((64, 2, 2))
        self._meas_cov_buf = np.empty((64, 2, 2))

    def _record(self, meas_cov=None):
        if self._n == self._t_buf.shape[0]:
            grow = self._n
            self._t_buf = np.concatenate([self._t_buf, np.empty(grow)])
            self._xy_buf = np.concatenate([self._xy_buf, np.empty((grow, 2))])
            self._cov_buf = np.concatenate([self._cov_buf, np.empty((grow, 2, 2))])
            self._meas_cov_buf = np.concatenate(
                [self._meas_cov_buf, np.empty((grow, 2, 2))]
            )
        self._t_buf[self._n] = self.state.t
        self._xy_buf[self._n] = self.state.position
        self._cov_buf[self._n] = self.state.position_cov
        self._meas_cov_buf[self._n] = (
            self.state.position_cov if meas_cov is None else meas_cov
        )
        self._n += 1

    def add(self, z: PolarMeasurement, index=None):
        label = f"measurement {index}" if index is not None else "measurement"
        if self.state is None and self._pending is None:
            if self.init_dt is not None:
                self.state = init_state(z, self.init_dt)
                self._record()
            else:
                self._pending = z
            return
        if self._pending is not None:
            dt = z.t - self._pending.t
            if dt <= 0:
                raise NonMonotoneTimeError(f"{label}: t={z.t} does not advance time")
            self.state = init_state(self._pending, dt)
            self._record()
            self._pending = None
        dt = z.t - self.state.t
        if dt <= 0:
            raise NonMonotoneTimeError(f"{label}: t={z.t} does not advance time")
        try:
            self.state = predict(self.state, dt, process_noise(dt, self.q_scale))
            self.state = update(self.state, z)
        except NumericalError as exc:
            raise type(exc)(f"{label}: {exc}") from exc
        self._record(measurement_cov_cartesian(self.state, z))

    @property
    def count(self):
        """Number of refined track points available."""
        if self._pending is not None:
            return 1
        return self._n

    def arrays(self, cov_source="posterior"):
        """(t, xy, cov) views of the refined track so far; do not mutate.

        cov_source selects the per-point 2x2 covariance: "posterior" for the
        filter's position covariance, "measurement" for the measurement
        (r, theta) variances propagated to Cartesian at the filtered
        position (the scale the confidence ellipses are built from).
        """
        if cov_source not in ("posterior", "measurement"):
            raise ValueError(f"unknown cov_source {cov_source!r}")
        if self._pending is not None:
            # lone measurement: report the init-position fix
            state = init_state(self._pending, self.init_dt or 1.0)
            return (
                np.array([state.t]),
                state.position[None, :].copy(),
                state.position_cov[None, :, :].copy(),
            )
        n = self._n
        covs = self._cov_buf if cov_source == "posterior" else self._meas_cov_buf
        return self._t_buf[:n], self._xy_buf[:n], covs[:n]

    def trajectory(self, traj_id="tag") -> Trajectory:
        t, xy, _ = self.arrays()
        pts = [
            TimedPoint(float(ti), (float(x), float(y)), Frame.CARTESIAN)
            for ti, (x, y) in zip(t, xy)
        ]
        return Trajectory(traj_id, pts, Source.RFID)


def filter_trajectory(
    measurements, q_scale=DEFAULT_Q_SCALE, traj_id="tag"
) -> Trajectory:
    """Run init/predict/update over a time-ordered measurement sequence.

    Returns the Cartesian position track only. Errors from individual steps
    carry the offending measurement index.
    """
    if not measurements:
        raise ValueError("at least one measurement is required")
    tracker = TagTracker(q_scale=q_scale)
    for i, z in enumerate(measurements):
        tracker.add(z, index=i)
    return tracker.trajectory(traj_id)


def filter_with_covariance(measurements, q_scale=DEFAULT_Q_SCALE):
    """Like filter_trajectory but also returns per-point 2x2 covariances."""
    if not measurements:
        raise ValueError("at least one measurement is required")
    tracker = TagTracker(q_scale=q_scale)
    for i, z in enumerate(measurements):
        tracker.add(z, index=i)
    return tracker.arrays()
