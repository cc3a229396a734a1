"""Command-line interface.

Subcommands:
    gp-train    fit per-bin GP models from a feature/target CSV
    associate   run the association pipeline on RFID + camera logs
    sim         run a simulation campaign, or export a synthetic scenario
    stereo      compute a disparity map (and optionally depth) from a pair
    export      turn a report JSON into plain-CSV plot inputs

FUSETRACK_SEED overrides any configured seed. Exit codes: 0 success,
2 schema error, 3 tag/object count mismatch, 4 numerical failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import gp, ingest, pipeline, sim, stereo
from .errors import (
    CountMismatchError,
    NumericalError,
    SchemaError,
    ValidationError,
)


def _seed_override(seed):
    env = os.environ.get("FUSETRACK_SEED")
    return int(env) if env else seed


def _cmd_gp_train(args):
    rows = np.genfromtxt(args.input, delimiter=",", names=True, dtype=None, encoding="utf-8")
    names = list(rows.dtype.names)
    for required in ("freq_bin", "range_m", "angle_rad"):
        if required not in names:
            raise SchemaError(f"gp-train CSV needs a {required!r} column", line=1)
    feature_cols = [n for n in names if n != "freq_bin" and n[0] == "f" and n[1:].isdigit()]
    if not feature_cols:
        raise SchemaError("gp-train CSV needs feature columns f0,f1,...", line=1)
    seed = _seed_override(args.seed)
    bins = np.asarray(rows["freq_bin"], dtype=str)
    models = {}
    for bin_key in sorted(set(bins)):
        mask = bins == bin_key
        x = np.column_stack([np.asarray(rows[c], dtype=float)[mask] for c in feature_cols])
        pair = {}
        for target, col in (("range", "range_m"), ("angle", "angle_rad")):
            y = np.asarray(rows[col], dtype=float)[mask]
            scale, _ = gp.select_length_scale(
                x, y, noise=args.noise, split=args.split, seed=seed
            )
            pair[target] = gp.fit(x, y, scale, args.noise)
        models[bin_key] = pair
    registry = gp.GPRegistry(models)
    registry.save(args.out)
    print(f"trained {len(models)} bin(s) -> {args.out}")
    return 0


def _cmd_associate(args):
    registry = gp.GPRegistry.load(args.gp_registry) if args.gp_registry else None
    rfid = ingest.ingest_rfid(args.rfid, registry)
    camera = ingest.ingest_camera(args.camera)
    cfg = pipeline.AssocConfig(
        method=args.method,
        assign=args.assign,
        n_resample=args.n_resample,
        k_realizations=args.k,
        q_scale=args.q_scale,
        analysis_dt=args.analysis_dt,
        seed=_seed_override(args.seed),
        t_min=args.t_min,
        t_max=args.t_max,
        transform_theta=math.radians(args.transform_deg),
        transform_tx=args.transform_tx,
        transform_ty=args.transform_ty,
    )
    report = pipeline.associate(rfid, camera, cfg)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def _cmd_sim(args):
    with open(args.config) as fh:
        doc = json.load(fh)
    methods = tuple(doc.get("methods", ["frechet"]))
    configs = [sim.SimConfig.from_dict(c) for c in doc["configs"]]
    seed_env = os.environ.get("FUSETRACK_SEED")
    if seed_env:
        configs = [
            sim.SimConfig.from_dict({**c.to_dict(), "seed": int(seed_env)})
            for c in configs
        ]
    if args.export_scenario:
        cfg = configs[0]
        rfid_csv, cam_csv = sim.export_scenario(cfg, args.duration)
        os.makedirs(args.export_scenario, exist_ok=True)
        rfid_path = os.path.join(args.export_scenario, "rfid.csv")
        cam_path = os.path.join(args.export_scenario, "camera.csv")
        with open(rfid_path, "w") as fh:
            fh.write(rfid_csv)
        with open(cam_path, "w") as fh:
            fh.write(cam_csv)
        print(f"wrote {rfid_path} and {cam_path}")
        return 0
    report = sim.run_campaign(configs, methods, jobs=args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "campaign.json")
    csv_path = os.path.join(args.out_dir, "trials.csv")
    with open(json_path, "w") as fh:
        fh.write(sim.report_to_json(report))
    with open(csv_path, "w") as fh:
        fh.write(sim.trials_to_csv(report))
    print(f"wrote {json_path} and {csv_path}")
    for key in sorted(report["summary"]):
        entry = report["summary"][key]
        print(
            f"  {key}: n_tags={entry['n_tags']} mean_accuracy={entry['mean_accuracy']:.3f} "
            f"p50_time={entry['time_p50_s']:.1f}s"
        )
    return 0


def _cmd_stereo(args):
    from PIL import Image

    left = np.asarray(Image.open(args.left).convert("L"), dtype=np.float64)
    right = np.asarray(Image.open(args.right).convert("L"), dtype=np.float64)
    pair = stereo.StereoPair(left, right, args.max_disp)
    disparity, _ = stereo.sgm_disparity(pair, args.p1, args.p2)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "disparity.csv")
    np.savetxt(csv_path, disparity.d, fmt="%d", delimiter=",")
    vis = (disparity.d * (255.0 / max(1, args.max_disp))).clip(0, 255).astype(np.uint8)
    pgm_path = os.path.join(args.out_dir, "disparity.pgm")
    Image.fromarray(vis, mode="L").save(pgm_path)
    written = [csv_path, pgm_path]
    if args.intrinsics:
        with open(args.intrinsics) as fh:
            doc = json.load(fh)
        intr = stereo.CameraIntrinsics(
            doc["f_x"], doc["f_y"], doc["c_x"], doc["c_y"], doc["baseline_m"]
        )
        depth = stereo.depth_from_disparity(disparity, intr)
        depth_path = os.path.join(args.out_dir, "depth.csv")
        np.savetxt(depth_path, depth, fmt="%.6f", delimiter=",")
        written.append(depth_path)
    print("wrote " + ", ".join(written))
    return 0


def _cmd_export(args):
    with open(args.report) as fh:
        report = json.load(fh)
    written = ingest.export_plotdata(report, args.out_dir)
    print("wrote " + ", ".join(written))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fusetrack",
        description="Camera-RFID trajectory fusion toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gp-train", help="train per-bin GP range/angle models")
    p.add_argument("--input", required=True, help="CSV with freq_bin,f*,range_m,angle_rad")
    p.add_argument("--split", type=float, default=0.8, help="train fraction")
    p.add_argument("--noise", type=float, default=gp.DEFAULT_NOISE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="registry JSON path")
    p.set_defaults(fn=_cmd_gp_train)

    p = sub.add_parser("associate", help="associate RFID tags with camera tracks")
    p.add_argument("--rfid", required=True)
    p.add_argument("--camera", required=True)
    p.add_argument("--gp-registry", default=None)
    p.add_argument("--method", choices=["frechet", "dtw", "euclid"], default="frechet")
    p.add_argument("--assign", choices=["greedy", "optimal"], default="greedy")
    p.add_argument("--n-resample", type=int, default=100)
    p.add_argument("--k", type=int, default=25, help="realizations per step")
    p.add_argument("--q-scale", type=float, default=0.1)
    p.add_argument("--analysis-dt", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--transform-deg", type=float, default=0.0,
                   help="camera-to-reader frame rotation, degrees")
    p.add_argument("--transform-tx", type=float, default=0.0)
    p.add_argument("--transform-ty", type=float, default=0.0)
    p.add_argument("--out", default=None, help="report JSON path (stdout if omitted)")
    p.set_defaults(fn=_cmd_associate)

    p = sub.add_parser("sim", help="run a campaign or export a scenario")
    p.add_argument("--config", required=True, help="campaign config JSON")
    p.add_argument("--out-dir", default="sim-results")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--export-scenario", default=None, metavar="DIR",
                   help="write one trial's measurement logs instead of running")
    p.add_argument("--duration", type=float, default=30.0,
                   help="scenario length in seconds (with --export-scenario)")
    p.set_defaults(fn=_cmd_sim)

    p = sub.add_parser("stereo", help="semi-global matching on a stereo pair")
    p.add_argument("--left", required=True, help="left image (PGM)")
    p.add_argument("--right", required=True, help="right image (PGM)")
    p.add_argument("--max-disp", type=int, default=16)
    p.add_argument("--p1", type=float, default=stereo.DEFAULT_P1)
    p.add_argument("--p2", type=float, default=stereo.DEFAULT_P2)
    p.add_argument("--intrinsics", default=None,
                   help="JSON with f_x,f_y,c_x,c_y,baseline_m for depth output")
    p.add_argument("--out-dir", default="stereo-out")
    p.set_defaults(fn=_cmd_stereo)

    p = sub.add_parser("export", help="report JSON -> plot-ready CSVs")
    p.add_argument("--report", required=True)
    p.add_argument("--out-dir", default="plot-data")
    p.set_defaults(fn=_cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SchemaError, ValidationError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except CountMismatchError as exc:
        print(f"count mismatch: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
