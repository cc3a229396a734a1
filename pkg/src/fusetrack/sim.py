"""Monte-Carlo association testbed.

Agents wander between uniformly drawn waypoints inside a disk (or an annular
sector for the field-like preset), each carrying an RFID tag and tracked by
a camera with persistent labels. Synthetic sensing produces near-truth
camera tracks and noisy polar RFID measurements with reported variances.
Every analysis step the full pipeline (EKF, alignment, similarity scoring,
assignment) re-runs on the window so far; a trial converges once the full
mapping is correct on three consecutive steps.
"""

import csv
import io
import json
import math
import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import align, assoc, similarity
from .ekf import PolarMeasurement, TagTracker
from .errors import OutOfGridError

METHODS = ("frechet", "dtw", "euclid")

# maximum tag count by (radius m, occupancy density p/m^2)
DENSITY_GRID = (8.0e-4, 15.9e-4, 23.9e-4, 31.8e-4, 39.8e-4)
RADIUS_GRID = (20, 30, 40, 50, 60, 70, 80)
MAX_TAGS = {
    20: (1, 2, 3, 4, 5),
    30: (3, 5, 7, 9, 12),
    40: (4, 8, 12, 16, 20),
    50: (7, 13, 19, 25, 32),
    60: (9, 18, 27, 36, 45),
    70: (13, 25, 37, 49, 62),
    80: (16, 32, 48, 64, 80),
}


def table_lookup(radius, density):
    """Maximum tag count for a (radius, density) cell of the testbed table."""
    row = None
    for r in RADIUS_GRID:
        if math.isclose(radius, r, rel_tol=1e-9):
            row = r
            break
    col = None
    for i, d in enumerate(DENSITY_GRID):
        if math.isclose(density, d, rel_tol=1e-6):
            col = i
            break
    if row is None or col is None:
        raise OutOfGridError(f"(radius={radius}, density={density}) not in the table")
    return MAX_TAGS[row][col]


@dataclass
class SimConfig:
    """Testbed parameters; defaults mirror the documented sensor noise."""

    radius: float = 20.0
    n_tags: int = 3
    density: float | None = None  # persons/m^2, informational
    trial_count: int = 20
    camera_noise_sigma: float = 0.02  # m
    rfid_range_sigma: float = 1.0  # m
    rfid_angle_sigma: float = math.radians(3.0)  # rad
    max_sim_time: float = 3600.0  # s
    seed: int = 0
    speed_range: tuple = (0.5, 1.5)  # m/s
    rfid_rate_hz: float = 10.0
    analysis_dt: float = 1.0  # s between association re-evaluations
    n_resample: int = 50
    k_realizations: int = similarity.DEFAULT_REALIZATIONS
    kappa_sq: float = similarity.DEFAULT_KAPPA_SQ
    q_scale: float = 0.1
    consecutive_required: int = 3
    assign: str = "greedy"
    # seconds of track history scored per analysis step; the interval
    # statistics carry the cross-step memory, so the per-step window stays
    # short enough for its samples to vary between steps
    window_s: float = 5.0
    # confidence ellipses are built from the filter's position covariance;
    # "measurement" swaps in the raw (r, theta) variances instead
    ellipse_source: str = "posterior"
    # sensing footprint; enforced only when fov_enabled
    fov_enabled: bool = False
    rfid_max_range: float = 20.0
    rfid_max_angle: float = math.radians(30.0)
    camera_max_range: float = 10.0
    # region: full disk of `radius`, or an annular sector (field-like)
    region: str = "disk"
    sector_r_min: float = 1.0
    sector_half_angle: float = math.radians(30.0)

    def __post_init__(self):
        if self.n_tags < 1:
            raise ValueError("n_tags must be >= 1")
        if self.max_sim_time > 3600.0:
            raise ValueError("max_sim_time is capped at one hour per trial")
        if self.region not in ("disk", "sector"):
            raise ValueError(f"unknown region {self.region!r}")

    def to_dict(self):
        d = dict(self.__dict__)
        d["speed_range"] = list(self.speed_range)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "speed_range" in d:
            d["speed_range"] = tuple(d["speed_range"])
        return cls(**d)


def table_config(radius, density, **overrides) -> SimConfig:
    """Config for one table cell: tag count taken from the lookup table."""
    n = table_lookup(radius, density)
    return SimConfig(radius=radius, n_tags=n, density=density, **overrides)


def field_like_config(seed=0, **overrides) -> SimConfig:
    """Four tags confined to an annular sector of about 52 m^2 at 10 m range,
    with the sensing footprint constraints enabled.

    The dense geometry calls for per-measurement association updates and a
    short scoring window (agents cross the whole sector in seconds).
    """
    defaults = dict(
        radius=10.0,
        n_tags=4,
        seed=seed,
        region="sector",
        sector_r_min=1.0,
        sector_half_angle=math.radians(30.0),
        fov_enabled=True,
        rfid_max_range=20.0,
        rfid_max_angle=math.radians(30.0),
        camera_max_range=10.0,
        analysis_dt=0.1,
        window_s=2.0,
        n_resample=30,
    )
    defaults.update(overrides)
    return SimConfig(**defaults)


@dataclass
class AgentState:
    """Positions, current waypoints, and per-agent speeds."""

    positions: np.ndarray  # (n, 2)
    waypoints: np.ndarray  # (n, 2)
    speeds: np.ndarray  # (n,)


def _draw_points(cfg: SimConfig, n, rng):
    """Uniform points in the configured region (area-uniform)."""
    if cfg.region == "disk":
        r = cfg.radius * np.sqrt(rng.random(n))
        phi = rng.uniform(-math.pi, math.pi, n)
    else:
        r0sq = cfg.sector_r_min**2
        r = np.sqrt(r0sq + rng.random(n) * (cfg.radius**2 - r0sq))
        phi = rng.uniform(-cfg.sector_half_angle, cfg.sector_half_angle, n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def init_agents(cfg: SimConfig, rng) -> AgentState:
    positions = _draw_points(cfg, cfg.n_tags, rng)
    waypoints = _draw_points(cfg, cfg.n_tags, rng)
    speeds = rng.uniform(cfg.speed_range[0], cfg.speed_range[1], cfg.n_tags)
    return AgentState(positions, waypoints, speeds)


def step_agents(state: AgentState, dt, rng, cfg: SimConfig) -> AgentState:
    """Advance every agent toward its waypoint; arrivals draw a new one.

    An agent already at its waypoint keeps its position for this step and
    receives a fresh uniformly drawn waypoint. Motion is along straight
    segments between region points, so disk containment is preserved.
    """
    positions = state.positions.copy()
    waypoints = state.waypoints.copy()
    for i in range(len(positions)):
        delta = waypoints[i] - positions[i]
        dist = math.hypot(delta[0], delta[1])
        step = state.speeds[i] * dt
        if dist < 1e-9:
            waypoints[i] = _draw_points(cfg, 1, rng)[0]
        elif dist <= step:
            positions[i] = waypoints[i]
        else:
            positions[i] = positions[i] + delta * (step / dist)
    return AgentState(positions, waypoints, state.speeds)


def sense(truth, cfg: SimConfig, rng):
    """Synthetic camera and RFID observations of the true positions.

    Returns (cam_xy, cam_visible, rfid), where rfid is an (n, 4) array of
    (r, theta, var_r, var_theta) rows and the visibility masks apply the
    sensing footprint when fov_enabled. Noise is drawn for every agent
    regardless of visibility so the random stream does not depend on the
    footprint configuration.
    """
    n = truth.shape[0]
    cam_xy = truth + rng.normal(0.0, cfg.camera_noise_sigma, (n, 2))
    r_true = np.hypot(truth[:, 0], truth[:, 1])
    theta_true = np.arctan2(truth[:, 1], truth[:, 0])
    # floor keeps the polar fix off the reader itself, where bearing is
    # undefined and the observation Jacobian blows up
    r = np.maximum(r_true + rng.normal(0.0, cfg.rfid_range_sigma, n), 0.05)
    theta = theta_true + rng.normal(0.0, cfg.rfid_angle_sigma, n)
    theta = np.mod(theta + math.pi, 2.0 * math.pi) - math.pi
    theta[theta == -math.pi] = math.pi
    rfid = np.column_stack(
        [
            r,
            theta,
            np.full(n, cfg.rfid_range_sigma**2),
            np.full(n, cfg.rfid_angle_sigma**2),
        ]
    )
    if cfg.fov_enabled:
        cam_visible = r_true <= cfg.camera_max_range
        rfid_visible = (r_true <= cfg.rfid_max_range) & (
            np.abs(theta_true) <= cfg.rfid_max_angle
        )
    else:
        cam_visible = np.ones(n, dtype=bool)
        rfid_visible = np.ones(n, dtype=bool)
    return cam_xy, cam_visible, rfid, rfid_visible


@dataclass
class MethodOutcome:
    converged: bool
    time_to_association: float  # simulated s; max_sim_time when not converged
    final_accuracy: float
    steps_evaluated: int


@dataclass
class TrialResult:
    """Outcome of one trial for each evaluated method."""

    per_method: dict
    n_tags: int
    trial_index: int

    def outcome(self, method) -> MethodOutcome:
        return self.per_method[method]

    @property
    def converged(self):
        return next(iter(self.per_method.values())).converged

    @property
    def time_to_association(self):
        return next(iter(self.per_method.values())).time_to_association

    @property
    def final_accuracy(self):
        return next(iter(self.per_method.values())).final_accuracy


def _realization_seed(cfg_seed, trial_index, step_index, tag_index):
    ss = np.random.SeedSequence([cfg_seed, trial_index, step_index, tag_index])
    return int(ss.generate_state(1)[0])


class _CamTrack:
    """Growing camera track buffer."""

    def __init__(self):
        self._n = 0
        self._t = np.empty(256)
        self._xy = np.empty((256, 2))

    def add(self, t, xy):
        if self._n == self._t.shape[0]:
            extra = self._n
            self._t = np.concatenate([self._t, np.empty(extra)])
            self._xy = np.concatenate([self._xy, np.empty((extra, 2))])
        self._t[self._n] = t
        self._xy[self._n] = xy
        self._n += 1

    @property
    def count(self):
        return self._n

    def arrays(self):
        return self._t[: self._n], self._xy[: self._n]


def run_trial(cfg: SimConfig, methods=("frechet",), trial_index=0) -> TrialResult:
    """Run one trial, evaluating every requested method on shared sensor data."""
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, trial_index]))
    agents = init_agents(cfg, rng)
    n = cfg.n_tags
    dt = 1.0 / cfg.rfid_rate_hz
    ticks_per_analysis = max(1, round(cfg.analysis_dt / dt))
    total_ticks = int(round(cfg.max_sim_time / dt))

    trackers = [TagTracker(q_scale=cfg.q_scale) for _ in range(n)]
    cams = [_CamTrack() for _ in range(n)]
    stats = [[assoc.PairStats() for _ in range(n)] for _ in range(n)]

    active = {m: True for m in methods}
    streak = {m: 0 for m in methods}
    outcome = {}
    last_mapping = {m: None for m in methods}
    steps_evaluated = {m: 0 for m in methods}
    step_index = 0
    t_now = 0.0

    for tick in range(total_ticks):
        t_now = (tick + 1) * dt
        agents = step_agents(agents, dt, rng, cfg)
        cam_xy, cam_vis, rfid, rfid_vis = sense(agents.positions, cfg, rng)
        for i in range(n):
            if cam_vis[i]:
                cams[i].add(t_now, cam_xy[i])
            if rfid_vis[i]:
                trackers[i].add(
                    PolarMeasurement(
                        float(rfid[i, 0]),
                        float(rfid[i, 1]),
                        float(rfid[i, 2]),
                        float(rfid[i, 3]),
                        t_now,
                    )
                )

        if (tick + 1) % ticks_per_analysis != 0:
            continue
        step_index += 1
        if not any(active.values()):
            break
        window = _analysis_window(cams, trackers, cfg.window_s)
        if window is None:
            continue
        grid = np.linspace(window[0], window[1], cfg.n_resample)
        cam_rs, tag_rs, tag_cov_rs = _resample_all(
            cams, trackers, grid, cfg.ellipse_source
        )
        if cam_rs is None:
            continue

        realizations = None
        for m in methods:
            if not active[m]:
                continue
            if m == "frechet":
                if realizations is None:
                    realizations = [
                        similarity.sample_realizations(
                            similarity.UncertainTrajectory(
                                tag_rs[i], tag_cov_rs[i], cfg.kappa_sq
                            ),
                            cfg.k_realizations,
                            _realization_seed(cfg.seed, trial_index, step_index, i),
                        )
                        for i in range(n)
                    ]
                for obj in range(n):
                    for tag in range(n):
                        bounds = similarity.frechet_interval(
                            cam_rs[obj], realizations[tag]
                        )
                        stats[obj][tag].add(bounds.d_min, bounds.d_max)
                if len(stats[0][0]) < 2:
                    continue
                ridge = max(assoc.pooled_variance(stats), assoc.SIGMA_REG)
                matrix = assoc.build_cost_matrix(stats, reg=ridge)
            else:
                fn = (
                    similarity.dtw_distance
                    if m == "dtw"
                    else similarity.euclidean_distance
                )
                entries = np.empty((n, n))
                for obj in range(n):
                    for tag in range(n):
                        entries[obj, tag] = fn(cam_rs[obj], tag_rs[tag])
                matrix = assoc.CostMatrix(entries, list(range(n)), list(range(n)))
            assigner = assoc.optimal_assign if cfg.assign == "optimal" else assoc.greedy_assign
            mapping = assigner(matrix).mapping
            last_mapping[m] = mapping
            steps_evaluated[m] += 1
            correct = all(mapping[i] == i for i in range(n))
            streak[m] = streak[m] + 1 if correct else 0
            if streak[m] >= cfg.consecutive_required:
                active[m] = False
                outcome[m] = MethodOutcome(True, t_now, 1.0, steps_evaluated[m])

    for m in methods:
        if m in outcome:
            continue
        mapping = last_mapping[m]
        if mapping is None:
            accuracy = 0.0
        else:
            accuracy = sum(1 for i in range(n) if mapping[i] == i) / n
        outcome[m] = MethodOutcome(False, cfg.max_sim_time, accuracy, steps_evaluated[m])
    ordered = {m: outcome[m] for m in methods}
    return TrialResult(ordered, n, trial_index)


def _analysis_window(cams, trackers, window_s):
    starts, ends = [], []
    for c in cams:
        if c.count < 2:
            return None
        t, _ = c.arrays()
        starts.append(t[0])
        ends.append(t[-1])
    for tr in trackers:
        if tr.count < 2:
            return None
        t, _, _ = tr.arrays()
        starts.append(t[0])
        ends.append(t[-1])
    lo, hi = max(starts), min(ends)
    lo = max(lo, hi - window_s)
    if lo >= hi:
        return None
    return lo, hi


def _resample_all(cams, trackers, grid, ellipse_source="measurement"):
    cam_rs, tag_rs, tag_cov_rs = [], [], []
    lo = grid[0]
    for c in cams:
        t, xy = c.arrays()
        i0 = max(0, int(np.searchsorted(t, lo, side="right")) - 1)
        cam_rs.append(align.resample_arrays(t[i0:], xy[i0:], grid))
    for tr in trackers:
        t, xy, cov = tr.arrays(cov_source=ellipse_source)
        i0 = max(0, int(np.searchsorted(t, lo, side="right")) - 1)
        tag_rs.append(align.resample_arrays(t[i0:], xy[i0:], grid))
        tag_cov_rs.append(align.resample_covariances(t[i0:], cov[i0:], grid))
    return cam_rs, tag_rs, tag_cov_rs


def _campaign_worker(args):
    cfg_dict, methods, config_index, trial_index = args
    cfg = SimConfig.from_dict(cfg_dict)
    result = run_trial(cfg, methods, trial_index)
    return config_index, trial_index, result


def run_campaign(configs, methods=("frechet",), jobs=1):
    """Run every (config, trial, method) combination and aggregate.

    Per-trial seeds derive from (config seed, trial index), so the report is
    bit-identical for a fixed seed regardless of worker count or scheduling.
    """
    configs = list(configs)
    tasks = [
        (cfg.to_dict(), tuple(methods), ci, k)
        for ci, cfg in enumerate(configs)
        for k in range(cfg.trial_count)
    ]
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.get_context("spawn").Pool(jobs) as pool:
            raw = pool.map(_campaign_worker, tasks)
    else:
        raw = [_campaign_worker(t) for t in tasks]
    raw.sort(key=lambda item: (item[0], item[1]))

    trials = []
    for config_index, trial_index, result in raw:
        cfg = configs[config_index]
        for m in methods:
            out = result.outcome(m)
            trials.append(
                {
                    "config_index": config_index,
                    "trial_index": trial_index,
                    "radius_m": cfg.radius,
                    "density_per_m2": cfg.density
                    if cfg.density is not None
                    else cfg.n_tags / (math.pi * cfg.radius**2),
                    "n_tags": cfg.n_tags,
                    "method": m,
                    "converged": bool(out.converged),
                    "time_to_association_s": float(out.time_to_association),
                    "accuracy": float(out.final_accuracy),
                }
            )

    summary = {}
    for ci, cfg in enumerate(configs):
        for m in methods:
            rows = [
                t
                for t in trials
                if t["config_index"] == ci and t["method"] == m
            ]
            acc = np.array([t["accuracy"] for t in rows])
            times = np.array([t["time_to_association_s"] for t in rows])
            key = f"config{ci}:{m}"
            summary[key] = {
                "radius_m": cfg.radius,
                "n_tags": cfg.n_tags,
                "method": m,
                "trials": len(rows),
                "mean_accuracy": float(acc.mean()) if rows else float("nan"),
                "convergence_rate": float(
                    np.mean([t["converged"] for t in rows])
                )
                if rows
                else float("nan"),
                "time_p50_s": float(np.percentile(times, 50)) if rows else float("nan"),
                "time_p95_s": float(np.percentile(times, 95)) if rows else float("nan"),
            }
    return {
        "configs": [cfg.to_dict() for cfg in configs],
        "methods": list(methods),
        "trials": trials,
        "summary": summary,
    }


def report_to_json(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def trials_to_csv(report) -> str:
    """One CSV row per (trial, method)."""
    buf = io.StringIO()
    fields = [
        "config_index",
        "trial_index",
        "radius_m",
        "density_per_m2",
        "n_tags",
        "method",
        "converged",
        "time_to_association_s",
        "accuracy",
    ]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in report["trials"]:
        writer.writerow(row)
    return buf.getvalue()


def export_scenario(cfg: SimConfig, duration, trial_index=0):
    """Generate measurement logs for one trial's motion and sensing.

    Returns (rfid_csv, camera_csv) strings in the ingestion schema, with tag
    ids 'tag-<k>' carried by the same agents as camera tracks 'obj-<k>'.
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, trial_index]))
    agents = init_agents(cfg, rng)
    dt = 1.0 / cfg.rfid_rate_hz
    ticks = int(round(duration / dt))
    rfid_buf = io.StringIO()
    cam_buf = io.StringIO()
    rfid_writer = csv.writer(rfid_buf, lineterminator="\n")
    cam_writer = csv.writer(cam_buf, lineterminator="\n")
    rfid_writer.writerow(["t", "tag_id", "freq_bin", "r", "theta", "var_r", "var_theta"])
    cam_writer.writerow(["t", "track_id", "x", "y"])
    for tick in range(ticks):
        t_now = (tick + 1) * dt
        agents = step_agents(agents, dt, rng, cfg)
        cam_xy, cam_vis, rfid, rfid_vis = sense(agents.positions, cfg, rng)
        for i in range(cfg.n_tags):
            if cam_vis[i]:
                cam_writer.writerow(
                    [f"{t_now:.3f}", f"obj-{i}", repr(float(cam_xy[i, 0])), repr(float(cam_xy[i, 1]))]
                )
            if rfid_vis[i]:
                rfid_writer.writerow(
                    [
                        f"{t_now:.3f}",
                        f"tag-{i}",
                        "bin0",
                        repr(float(rfid[i, 0])),
                        repr(float(rfid[i, 1])),
                        repr(float(rfid[i, 2])),
                        repr(float(rfid[i, 3])),
                    ]
                )
    return rfid_buf.getvalue(), cam_buf.getvalue()
