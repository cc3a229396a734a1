"""End-to-end association of ingested RFID and camera logs.

Per analysis step the window grows from the shared overlap start; tag tracks
are EKF-refined, aligned against every camera track on a common grid, scored
(uncertainty-aware Frechet statistics by default, DTW or Euclidean
baselines on request), and resolved to a one-to-one mapping. The report
carries every step's mapping and scores plus a convergence flag that is set
once the mapping has been stable for three consecutive steps.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import align, assoc, similarity
from .ekf import TagTracker
from .errors import CountMismatchError, NoOverlapError

STABLE_STEPS = 3


@dataclass
class AssocConfig:
    """Knobs for the association pipeline."""

    method: str = "frechet"  # frechet | dtw | euclid
    assign: str = "greedy"  # greedy | optimal
    n_resample: int = align.DEFAULT_SAMPLES
    k_realizations: int = similarity.DEFAULT_REALIZATIONS
    kappa_sq: float = similarity.DEFAULT_KAPPA_SQ
    q_scale: float = 0.1
    analysis_dt: float = 1.0
    window_s: float = 5.0  # track history scored per step
    seed: int = 0
    t_min: float | None = None  # trim ingested data to [t_min, t_max]
    t_max: float | None = None
    # optional rigid transform applied to camera tracks: rotation about the
    # origin by transform_theta radians, then translation
    transform_theta: float = 0.0
    transform_tx: float = 0.0
    transform_ty: float = 0.0


def _apply_transform(xy, cfg: AssocConfig):
    if cfg.transform_theta == 0.0 and cfg.transform_tx == 0.0 and cfg.transform_ty == 0.0:
        return xy
    c, s = math.cos(cfg.transform_theta), math.sin(cfg.transform_theta)
    rot = np.array([[c, -s], [s, c]])
    return xy @ rot.T + np.array([cfg.transform_tx, cfg.transform_ty])


def associate(rfid_per_tag, camera_tracks, cfg: AssocConfig = None):
    """Associate ingested measurement sequences with camera trajectories.

    Args:
        rfid_per_tag: dict tag_id -> list[PolarMeasurement] (time-sorted).
        camera_tracks: dict track_id -> Trajectory (Cartesian).
        cfg: AssocConfig.

    Returns:
        Report dict with per-step mappings/scores, the final mapping, a
        convergence flag, aligned-trajectory overlays, and per-tag
        generalized-variance series.

    Raises:
        CountMismatchError: tag and track counts differ.
        NoOverlapError: the sensors never observe a common window.
    """
    cfg = cfg or AssocConfig()
    tag_ids = sorted(rfid_per_tag)
    object_ids = sorted(camera_tracks)
    if len(tag_ids) != len(object_ids):
        raise CountMismatchError(
            f"{len(tag_ids)} tags vs {len(object_ids)} camera tracks"
        )
    n = len(tag_ids)

    # EKF refinement over the (optionally trimmed) measurement streams
    tag_data = {}
    for tag_id in tag_ids:
        seq = [
            z
            for z in rfid_per_tag[tag_id]
            if (cfg.t_min is None or z.t >= cfg.t_min)
            and (cfg.t_max is None or z.t <= cfg.t_max)
        ]
        if len(seq) < 2:
            raise NoOverlapError(f"tag {tag_id!r} has fewer than 2 usable measurements")
        tracker = TagTracker(q_scale=cfg.q_scale)
        for i, z in enumerate(seq):
            tracker.add(z, index=i)
        tag_data[tag_id] = tracker.arrays()

    cam_data = {}
    for obj_id in object_ids:
        traj = camera_tracks[obj_id].to_cartesian()
        t = traj.times()
        xy = _apply_transform(traj.xy(), cfg)
        keep = np.ones(len(t), dtype=bool)
        if cfg.t_min is not None:
            keep &= t >= cfg.t_min
        if cfg.t_max is not None:
            keep &= t <= cfg.t_max
        if keep.sum() < 2:
            raise NoOverlapError(f"track {obj_id!r} has fewer than 2 usable points")
        cam_data[obj_id] = (t[keep], xy[keep])

    starts = [t[0] for t, _ in cam_data.values()] + [t[0] for t, _, _ in tag_data.values()]
    ends = [t[-1] for t, _ in cam_data.values()] + [t[-1] for t, _, _ in tag_data.values()]
    t_start, t_end = max(starts), min(ends)
    if t_start >= t_end:
        raise NoOverlapError(f"no shared window: [{t_start}, {t_end}]")

    stats = [[assoc.PairStats() for _ in range(n)] for _ in range(n)]
    steps = []
    stable = 0
    prev_mapping = None
    converged_at = None

    step_times = np.arange(t_start + cfg.analysis_dt, t_end + 1e-9, cfg.analysis_dt)
    if step_times.size == 0:
        step_times = np.array([t_end])
    final_alignment = None
    for step_index, t_now in enumerate(step_times, start=1):
        # truncate every track to [.., t_now]; the grid ends at the earliest
        # truncated endpoint so no track needs extrapolation
        cam_cut, tag_cut = {}, {}
        hi = t_now
        ok = True
        for obj_id, (t, xy) in cam_data.items():
            idx = np.searchsorted(t, t_now, side="right")
            if idx < 2:
                ok = False
                break
            cam_cut[obj_id] = (t[:idx], xy[:idx])
            hi = min(hi, t[idx - 1])
        if ok:
            for tag_id, (t, xy, cov) in tag_data.items():
                idx = np.searchsorted(t, t_now, side="right")
                if idx < 2:
                    ok = False
                    break
                tag_cut[tag_id] = (t[:idx], xy[:idx], cov[:idx])
                hi = min(hi, t[idx - 1])
        if not ok or hi <= t_start:
            continue
        lo = max(t_start, hi - cfg.window_s)
        grid = np.linspace(lo, hi, cfg.n_resample)
        cam_rs = {
            obj_id: align.resample_arrays(t, xy, grid)
            for obj_id, (t, xy) in cam_cut.items()
        }
        tag_rs, tag_cov_rs = {}, {}
        for tag_id, (t, xy, cov) in tag_cut.items():
            tag_rs[tag_id] = align.resample_arrays(t, xy, grid)
            tag_cov_rs[tag_id] = align.resample_covariances(t, cov, grid)

        if cfg.method == "frechet":
            realizations = {
                tag_id: similarity.sample_realizations(
                    similarity.UncertainTrajectory(
                        tag_rs[tag_id], tag_cov_rs[tag_id], cfg.kappa_sq
                    ),
                    cfg.k_realizations,
                    int(
                        np.random.SeedSequence(
                            [cfg.seed, step_index, k]
                        ).generate_state(1)[0]
                    ),
                )
                for k, tag_id in enumerate(tag_ids)
            }
            for i, obj_id in enumerate(object_ids):
                for j, tag_id in enumerate(tag_ids):
                    bounds = similarity.frechet_interval(
                        cam_rs[obj_id], realizations[tag_id]
                    )
                    stats[i][j].add(bounds.d_min, bounds.d_max)
            if len(stats[0][0]) < 2:
                continue
            ridge = max(assoc.pooled_variance(stats), assoc.SIGMA_REG)
            matrix = assoc.build_cost_matrix(stats, object_ids, tag_ids, reg=ridge)
        else:
            fn = (
                similarity.dtw_distance
                if cfg.method == "dtw"
                else similarity.euclidean_distance
            )
            entries = np.array(
                [
                    [fn(cam_rs[obj_id], tag_rs[tag_id]) for tag_id in tag_ids]
                    for obj_id in object_ids
                ]
            )
            matrix = assoc.CostMatrix(entries, object_ids, tag_ids)

        assigner = assoc.optimal_assign if cfg.assign == "optimal" else assoc.greedy_assign
        result = assigner(matrix)
        scores = {
            obj_id: {
                tag_id: float(matrix.entries[i, j])
                for j, tag_id in enumerate(tag_ids)
            }
            for i, obj_id in enumerate(object_ids)
        }
        steps.append(
            {
                "step": step_index,
                "t": float(t_now),
                "mapping": dict(result.mapping),
                "scores": scores,
            }
        )
        final_alignment = (grid, cam_rs, tag_rs)
        if prev_mapping is not None and result.mapping == prev_mapping:
            stable += 1
        else:
            stable = 1
        prev_mapping = result.mapping
        if stable >= STABLE_STEPS and converged_at is None:
            converged_at = float(t_now)

    overlay = {"camera": {}, "rfid": {}}
    if final_alignment is not None:
        grid, cam_rs, tag_rs = final_alignment
        for obj_id, xy in cam_rs.items():
            overlay["camera"][obj_id] = [
                [float(ti), float(x), float(y)] for ti, (x, y) in zip(grid, xy)
            ]
        for tag_id, xy in tag_rs.items():
            overlay["rfid"][tag_id] = [
                [float(ti), float(x), float(y)] for ti, (x, y) in zip(grid, xy)
            ]

    gen_var = {}
    for tag_id, (t, _, cov) in tag_data.items():
        det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] * cov[:, 1, 0]
        gen_var[tag_id] = [[float(ti), float(d)] for ti, d in zip(t, det)]

    return {
        "method": cfg.method,
        "assign": cfg.assign,
        "tag_ids": tag_ids,
        "object_ids": object_ids,
        "steps": steps,
        "final_mapping": steps[-1]["mapping"] if steps else {},
        "converged": converged_at is not None,
        "converged_at_s": converged_at,
        "overlay": overlay,
        "generalized_variance": gen_var,
    }
