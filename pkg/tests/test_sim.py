import json
import math

import numpy as np
import pytest

from fusetrack import sim
from fusetrack.errors import OutOfGridError


class TestTableLookup:
    @pytest.mark.parametrize(
        "radius,density,want",
        [
            (20, 39.8e-4, 5),
            (80, 8.0e-4, 16),
            (50, 23.9e-4, 19),
            (30, 15.9e-4, 5),
            (70, 31.8e-4, 49),
        ],
    )
    def test_entries(self, radius, density, want):
        assert sim.table_lookup(radius, density) == want

    def test_full_grid_shape(self):
        for r in sim.RADIUS_GRID:
            for d in sim.DENSITY_GRID:
                assert sim.table_lookup(r, d) >= 1

    def test_out_of_grid(self):
        with pytest.raises(OutOfGridError):
            sim.table_lookup(25, 8.0e-4)
        with pytest.raises(OutOfGridError):
            sim.table_lookup(20, 9.9e-4)

    def test_table_config(self):
        cfg = sim.table_config(40, 23.9e-4, seed=3)
        assert cfg.n_tags == 12
        assert cfg.density == pytest.approx(23.9e-4)


class TestConfig:
    def test_hour_cap(self):
        with pytest.raises(ValueError):
            sim.SimConfig(max_sim_time=3601.0)

    def test_round_trip(self):
        cfg = sim.field_like_config(seed=9)
        again = sim.SimConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg

    def test_sector_area_is_about_52_m2(self):
        cfg = sim.field_like_config()
        area = cfg.sector_half_angle * (cfg.radius**2 - cfg.sector_r_min**2)
        assert area == pytest.approx(52.0, abs=1.0)


class TestAgents:
    def test_containment_long_run(self):
        cfg = sim.SimConfig(radius=15.0, n_tags=6, seed=0)
        rng = np.random.default_rng(0)
        state = sim.init_agents(cfg, rng)
        for _ in range(10_000):
            state = sim.step_agents(state, 0.1, rng, cfg)
            assert np.all(np.hypot(state.positions[:, 0], state.positions[:, 1]) <= 15.0 + 1e-9)

    def test_step_bounded_by_speed(self):
        cfg = sim.SimConfig(radius=20.0, n_tags=4, seed=1)
        rng = np.random.default_rng(1)
        state = sim.init_agents(cfg, rng)
        for _ in range(500):
            prev = state.positions.copy()
            state = sim.step_agents(state, 1.0, rng, cfg)
            moved = np.linalg.norm(state.positions - prev, axis=1)
            assert np.all(moved <= state.speeds * 1.0 + 1e-9)

    def test_arrival_redraws_waypoint(self):
        cfg = sim.SimConfig(radius=10.0, n_tags=1, seed=2)
        rng = np.random.default_rng(2)
        state = sim.init_agents(cfg, rng)
        state.waypoints[0] = state.positions[0]
        out = sim.step_agents(state, 0.5, rng, cfg)
        assert np.array_equal(out.positions[0], state.positions[0])
        assert not np.array_equal(out.waypoints[0], state.waypoints[0])

    def test_sector_agents_in_cone(self):
        cfg = sim.field_like_config(seed=3)
        rng = np.random.default_rng(3)
        state = sim.init_agents(cfg, rng)
        for _ in range(2000):
            state = sim.step_agents(state, 0.1, rng, cfg)
            r = np.hypot(state.positions[:, 0], state.positions[:, 1])
            phi = np.abs(np.arctan2(state.positions[:, 1], state.positions[:, 0]))
            assert np.all(r <= cfg.radius + 1e-9)
            assert np.all(phi <= cfg.sector_half_angle + 1e-9)


class TestSense:
    def test_zero_camera_noise(self):
        cfg = sim.SimConfig(camera_noise_sigma=0.0, n_tags=3)
        rng = np.random.default_rng(4)
        truth = np.array([[1.0, 2.0], [3.0, -1.0], [5.0, 0.5]])
        cam, cam_vis, rfid, rfid_vis = sim.sense(truth, cfg, rng)
        assert np.array_equal(cam, truth)
        assert cam_vis.all() and rfid_vis.all()

    def test_reported_variances_match_config(self):
        cfg = sim.SimConfig(n_tags=2)
        rng = np.random.default_rng(5)
        _, _, rfid, _ = sim.sense(np.array([[4.0, 1.0], [7.0, -2.0]]), cfg, rng)
        assert np.all(rfid[:, 2] == cfg.rfid_range_sigma**2)
        assert np.all(rfid[:, 3] == cfg.rfid_angle_sigma**2)

    def test_range_error_moments(self):
        cfg = sim.SimConfig(n_tags=1)
        rng = np.random.default_rng(6)
        truth = np.tile([[10.0, 0.0]], (10_000, 1))
        errs = []
        for row in truth:
            _, _, rfid, _ = sim.sense(row[None, :], cfg, rng)
            errs.append(rfid[0, 0] - 10.0)
        std = np.std(errs)
        assert abs(std - cfg.rfid_range_sigma) / cfg.rfid_range_sigma <= 0.05

    def test_fov_masks(self):
        cfg = sim.SimConfig(
            n_tags=3,
            fov_enabled=True,
            camera_max_range=10.0,
            rfid_max_range=20.0,
            rfid_max_angle=math.radians(30.0),
        )
        rng = np.random.default_rng(7)
        truth = np.array(
            [
                [5.0, 0.0],  # visible to both
                [15.0, 0.0],  # rfid only (beyond camera range)
                [2.0, 8.0],  # camera only (bearing ~76 degrees)
            ]
        )
        _, cam_vis, _, rfid_vis = sim.sense(truth, cfg, rng)
        assert cam_vis.tolist() == [True, False, True]
        assert rfid_vis.tolist() == [True, True, False]


class TestRunTrial:
    def test_single_tag_converges_perfectly(self):
        cfg = sim.SimConfig(radius=20.0, n_tags=1, seed=8, max_sim_time=60.0)
        out = sim.run_trial(cfg, ("frechet",), 0).per_method["frechet"]
        assert out.converged
        assert out.final_accuracy == 1.0
        assert out.time_to_association <= 60.0

    def test_zero_noise_well_separated(self):
        cfg = sim.SimConfig(
            radius=20.0,
            n_tags=3,
            seed=9,
            max_sim_time=60.0,
            camera_noise_sigma=1e-6,
            rfid_range_sigma=1e-3,
            rfid_angle_sigma=1e-4,
        )
        out = sim.run_trial(cfg, ("frechet",), 0).per_method["frechet"]
        assert out.converged and out.final_accuracy == 1.0

    def test_convergence_implies_correct_mapping(self):
        cfg = sim.SimConfig(radius=20.0, n_tags=3, seed=10, max_sim_time=60.0)
        for k in range(5):
            r = sim.run_trial(cfg, ("frechet", "dtw"), k)
            for out in r.per_method.values():
                if out.converged:
                    assert out.final_accuracy == 1.0

    def test_same_seed_reproducible(self):
        cfg = sim.SimConfig(radius=20.0, n_tags=2, seed=11, max_sim_time=30.0)
        a = sim.run_trial(cfg, ("frechet",), 4).per_method["frechet"]
        b = sim.run_trial(cfg, ("frechet",), 4).per_method["frechet"]
        assert (a.converged, a.time_to_association, a.final_accuracy) == (
            b.converged,
            b.time_to_association,
            b.final_accuracy,
        )

    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            sim.run_trial(sim.SimConfig(), ("nearest",), 0)


class TestCampaign:
    def _cfg(self, **kw):
        base = dict(radius=20.0, n_tags=2, seed=12, max_sim_time=30.0, trial_count=3)
        base.update(kw)
        return sim.SimConfig(**base)

    def test_single_entry_report(self):
        rep = sim.run_campaign([self._cfg(trial_count=1)], ("frechet",))
        assert len(rep["trials"]) == 1
        assert len(rep["summary"]) == 1

    def test_deterministic_json(self):
        rep1 = sim.run_campaign([self._cfg()], ("frechet", "euclid"))
        rep2 = sim.run_campaign([self._cfg()], ("frechet", "euclid"))
        assert sim.report_to_json(rep1) == sim.report_to_json(rep2)

    def test_parallel_equals_serial(self):
        cfgs = [self._cfg(), self._cfg(n_tags=3, seed=13)]
        rep1 = sim.run_campaign(cfgs, ("frechet",), jobs=1)
        rep2 = sim.run_campaign(cfgs, ("frechet",), jobs=2)
        assert sim.report_to_json(rep1) == sim.report_to_json(rep2)

    def test_csv_row_count(self):
        rep = sim.run_campaign([self._cfg()], ("frechet", "dtw"))
        text = sim.trials_to_csv(rep)
        rows = text.strip().splitlines()
        assert len(rows) == 1 + 3 * 2  # header + trials x methods


def test_export_scenario_schema():
    cfg = sim.SimConfig(radius=20.0, n_tags=3, seed=14)
    rfid_csv, cam_csv = sim.export_scenario(cfg, duration=5.0)
    rfid_lines = rfid_csv.strip().splitlines()
    cam_lines = cam_csv.strip().splitlines()
    assert rfid_lines[0] == "t,tag_id,freq_bin,r,theta,var_r,var_theta"
    assert cam_lines[0] == "t,track_id,x,y"
    assert len(rfid_lines) == 1 + 3 * 50
    assert len(cam_lines) == 1 + 3 * 50
