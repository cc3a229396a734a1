"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py` to see them
all). Criteria and tolerances are pinned here; nothing is deferred to later
calibration.

Known state: criterion 5 (baseline ordering) does not hold at this
configuration. With the documented sensor noise (1 m range, 3 deg bearing,
2 cm camera) and filter smoothing, agents in a 20 m disk are separated by
5-18 m while track errors stay under ~0.5 m, so the DTW and Euclidean
baselines associate essentially perfectly and no 10-point gap can exist.
The test asserts the criterion as stated and is expected to fail; see the
project notes for the full analysis.
"""

import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from fusetrack import assoc, ekf, gp, sim, similarity, stereo
from tests.test_similarity import dtw_oracle, frechet_oracle

ROOT = Path(__file__).resolve().parents[1]


def report(num, ok, detail):
    print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_frechet_oracle_equivalence():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        n, m = rng.integers(1, 7, 2)
        a = rng.normal(0, 5, (n, 2))
        b = rng.normal(0, 5, (m, 2))
        if similarity.discrete_frechet(a, b) != frechet_oracle(a, b):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    report(
        1,
        mismatches == 0 and elapsed < 10.0,
        f"1000 pairs, {mismatches} mismatches, {elapsed:.2f}s (<10s)",
    )


def test_criterion_02_dtw_oracle_equivalence():
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(500):
        n, m = rng.integers(1, 6, 2)
        a = rng.normal(0, 5, (n, 2))
        b = rng.normal(0, 5, (m, 2))
        if similarity.dtw_distance(a, b) != dtw_oracle(a, b):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    report(
        2,
        mismatches == 0 and elapsed < 10.0,
        f"500 pairs, {mismatches} mismatches, {elapsed:.2f}s (<10s)",
    )


def test_criterion_03_assignment_oracle_equivalence():
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    ok = True
    for _ in range(500):
        n = int(rng.integers(1, 5))
        entries = rng.uniform(0, 10, (n, n))
        m = assoc.CostMatrix(entries, list(range(n)), list(range(n)))
        opt = assoc.optimal_assign(m).total_cost
        brute = min(
            sum(entries[i, p[i]] for i in range(n))
            for p in itertools.permutations(range(n))
        )
        greedy = assoc.greedy_assign(m).total_cost
        ok &= abs(opt - brute) <= 1e-12 and greedy >= opt - 1e-12
    elapsed = time.perf_counter() - t0
    report(3, ok and elapsed < 5.0, f"500 matrices, {elapsed:.2f}s (<5s)")


def _campaign(configs, methods, trials):
    rows = {m: [] for m in methods}
    for cfg in configs:
        for k in range(trials):
            result = sim.run_trial(cfg, methods, trial_index=k)
            for m in methods:
                rows[m].append(result.outcome(m))
    return rows


def test_criterion_04_simulation_reproduction():
    t0 = time.perf_counter()
    configs = [
        sim.SimConfig(radius=20.0, n_tags=n, density=d, seed=4000 + n,
                      max_sim_time=120.0)
        for n, d in zip(range(1, 6), sim.DENSITY_GRID)
    ]
    rows = _campaign(configs, ("frechet",), trials=50)["frechet"]
    acc = float(np.mean([o.final_accuracy for o in rows]))
    median_t = float(np.median([o.time_to_association for o in rows]))
    elapsed = time.perf_counter() - t0
    report(
        4,
        acc >= 0.95 and median_t <= 20.0 and elapsed <= 600.0,
        f"R=20 n=1..5, 50 trials each: mean accuracy {acc:.3f} (>=0.95), "
        f"median time {median_t:.1f}s (<=20s), runtime {elapsed:.0f}s (<=600s)",
    )


def test_criterion_05_baseline_ordering():
    cfg = sim.SimConfig(
        radius=20.0, n_tags=5, density=sim.DENSITY_GRID[-1], seed=4005,
        max_sim_time=120.0,
    )
    rows = _campaign([cfg], ("frechet", "dtw", "euclid"), trials=50)
    acc = {m: float(np.mean([o.final_accuracy for o in rows[m]])) for m in rows}
    gap_ok = acc["frechet"] >= acc["dtw"] + 0.10
    order_ok = acc["dtw"] >= acc["euclid"]
    report(
        5,
        gap_ok and order_ok,
        f"highest density, n=5: frechet {acc['frechet']:.3f}, dtw {acc['dtw']:.3f}, "
        f"euclid {acc['euclid']:.3f}; need frechet >= dtw+0.10 and dtw >= euclid",
    )


def test_criterion_06_large_radius():
    cfg = sim.SimConfig(radius=80.0, n_tags=20, density=sim.DENSITY_GRID[-1],
                        seed=4080, max_sim_time=120.0)
    rows = _campaign([cfg], ("frechet",), trials=20)["frechet"]
    acc = float(np.mean([o.final_accuracy for o in rows]))
    p95 = float(np.percentile([o.time_to_association for o in rows], 95))
    report(
        6,
        acc >= 0.75 and p95 <= 60.0,
        f"R=80, 20 tags, 20 trials: mean accuracy {acc:.3f} (>=0.75), "
        f"p95 time {p95:.1f}s (<=60s)",
    )


def test_criterion_07_field_like_scenario():
    doc = json.loads((ROOT / "configs" / "field_like.json").read_text())
    cfg = sim.SimConfig.from_dict(doc["configs"][0])
    hits = 0
    for k in range(20):
        out = sim.run_trial(cfg, ("frechet",), trial_index=k).outcome("frechet")
        hits += out.converged and out.time_to_association <= 10.0
    report(
        7,
        hits >= 18,
        f"shipped 4-track sector scenario: {hits}/20 runs converged within 10s "
        "(need >=18)",
    )


def test_criterion_08_ekf_gp_property_suites():
    # covariance symmetric PSD over 1000 random filter steps
    rng = np.random.default_rng(108)
    s = ekf.init_state(ekf.PolarMeasurement(10.0, 0.2, 1.0, 0.003, 0.0), 0.1)
    psd_ok = True
    for _ in range(500):
        dt = float(rng.uniform(0.02, 0.5))
        s = ekf.predict(s, dt, ekf.process_noise(dt, float(rng.uniform(0, 1))))
        psd_ok &= np.allclose(s.cov, s.cov.T, atol=1e-9)
        psd_ok &= np.linalg.eigvalsh(s.cov)[0] >= -1e-9
        r_true = math.hypot(s.mean[0], s.mean[1])
        z = ekf.PolarMeasurement(
            max(r_true + rng.normal(0, 1.0), 0.01),
            ekf.wrap_angle(math.atan2(s.mean[1], s.mean[0]) + rng.normal(0, 0.05)),
            float(rng.uniform(0.1, 2.0)),
            float(rng.uniform(1e-4, 0.01)),
            s.t + 1e-3,
        )
        s = ekf.update(s, z)
        psd_ok &= np.allclose(s.cov, s.cov.T, atol=1e-9)
        psd_ok &= np.linalg.eigvalsh(s.cov)[0] >= -1e-9

    # GP interpolation with zero jitter, and variance within [0, prior]
    x = rng.uniform(-3, 3, (10, 2))
    y = rng.normal(0, 2, 10)
    model = gp.fit(x, y, 1.0, noise=0.0)
    interp_err = max(abs(model.predict_mean(xi) - yi) for xi, yi in zip(x, y))
    var_ok = True
    for _ in range(300):
        v = model.predict_variance(rng.uniform(-5, 5, 2))
        var_ok &= 0.0 <= v <= 1.0 + 1e-12

    # observation Jacobian vs central differences at 100 random states
    jac_err = 0.0
    eps = 1e-6
    for _ in range(100):
        pos = rng.uniform(-20, 20, 2)
        if math.hypot(*pos) < 0.5:
            continue
        st = ekf.TagState(np.array([*pos, 0.0, 0.0]), np.eye(4), 0.0)
        h = ekf.jacobian(st)
        for col in range(2):
            d = np.zeros(2)
            d[col] = eps
            plus = ekf.observe(ekf.TagState(np.array([*(pos + d), 0, 0]), np.eye(4), 0))
            minus = ekf.observe(ekf.TagState(np.array([*(pos - d), 0, 0]), np.eye(4), 0))
            fd = (np.array(plus) - np.array(minus)) / (2 * eps)
            jac_err = max(jac_err, float(np.abs(h[:2, col] - fd).max()))

    ok = psd_ok and interp_err <= 1e-8 and var_ok and jac_err <= 1e-6
    report(
        8,
        ok,
        f"EKF PSD over 1000 steps: {psd_ok}; GP interpolation err {interp_err:.1e} "
        f"(<=1e-8); variance bounds: {var_ok}; Jacobian vs FD err {jac_err:.1e} (<=1e-6)",
    )


def test_criterion_09_stereo():
    t0 = time.perf_counter()
    rng = np.random.default_rng(109)
    # piecewise-constant disparity plane in [0, 8] on a 64x64 stereogram
    d_true = np.zeros((64, 64), dtype=int)
    d_true[:, :] = 2
    d_true[8:30, 12:40] = 8
    d_true[36:60, 20:56] = 5
    d_true[44:58, 2:14] = 0
    pair, non_occ = stereo.random_dot_pair(d_true, rng, max_disparity=9)
    disparity, _ = stereo.sgm_disparity(pair)
    close = np.abs(disparity.d - d_true) <= 1
    frac = float(close[non_occ].mean())

    # Z = f B / d consistency between the depth grid and reprojection
    intr = stereo.CameraIntrinsics(700.0, 700.0, 32.0, 32.0, 0.12)
    depth = stereo.depth_from_disparity(disparity, intr)
    z_ok = True
    ys, xs = np.nonzero(disparity.d > 0)
    for y, x in zip(ys[::97], xs[::97]):
        _, _, z = stereo.reproject(float(x), float(y), float(disparity.d[y, x]), intr)
        z_ok &= abs(z - depth[y, x]) <= 1e-9

    # aggregation upper bound, exhaustive over 16x16 volumes
    bound_ok = True
    for _ in range(5):
        cost = rng.uniform(0, 255, (16, 16, 10))
        p1, p2 = 10.0, 120.0
        for d in stereo.DIRECTIONS_8:
            out = stereo.aggregate_path(cost, d, p1, p2)
            bound_ok &= bool(np.all(out <= cost + p2 + 1e-9))
    elapsed = time.perf_counter() - t0
    report(
        9,
        frac >= 0.95 and z_ok and bound_ok and elapsed < 30.0,
        f"64x64 stereogram: {frac:.3f} within +-1 (>=0.95); depth consistency: "
        f"{z_ok}; L<=C+P2 bound: {bound_ok}; {elapsed:.1f}s (<30s)",
    )


def test_criterion_10_determinism():
    cfgs = [
        sim.SimConfig(radius=20.0, n_tags=2, seed=900, trial_count=3,
                      max_sim_time=30.0),
        sim.SimConfig(radius=20.0, n_tags=3, seed=901, trial_count=2,
                      max_sim_time=30.0),
    ]
    methods = ("frechet", "dtw")
    r1 = sim.report_to_json(sim.run_campaign(cfgs, methods, jobs=1))
    r2 = sim.report_to_json(sim.run_campaign(cfgs, methods, jobs=1))
    r3 = sim.report_to_json(sim.run_campaign(cfgs, methods, jobs=2))
    report(
        10,
        r1 == r2 == r3,
        f"campaign reports bit-identical across reruns ({r1 == r2}) and "
        f"parallel execution ({r1 == r3})",
    )
