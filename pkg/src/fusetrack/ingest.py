"""CSV ingestion for RFID and camera logs, plus plot-data export.

RFID log schema (header required):
    t,tag_id,freq_bin,r,theta,var_r,var_theta     -- pre-estimated form
    t,tag_id,freq_bin,f0,f1,...                   -- feature form; a GP
                                                     registry maps features
                                                     to (r, theta) estimates
Camera log schema:
    t,track_id,x,y

Times are seconds, positions meters in the reader frame, angles radians.
"""

import csv
import io

import numpy as np

from .core import Frame, Source, TimedPoint, Trajectory, validate_trajectory
from .ekf import PolarMeasurement
from .errors import NonMonotoneTimeError, SchemaError

RFID_ESTIMATE_HEADER = ["t", "tag_id", "freq_bin", "r", "theta", "var_r", "var_theta"]
CAMERA_HEADER = ["t", "track_id", "x", "y"]


def _float(value, line, column):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise SchemaError(f"column {column!r} is not numeric: {value!r}", line=line)


def ingest_rfid(source, registry=None):
    """Parse an RFID log into per-tag, time-sorted measurement sequences.

    Args:
        source: path or file-like with CSV text.
        registry: GPRegistry, required when the log carries feature vectors
            instead of pre-estimated (r, theta) rows.

    Returns:
        dict tag_id -> list[PolarMeasurement], sorted by time.
    """
    rows, header = _read_rows(source)
    if header[:3] != ["t", "tag_id", "freq_bin"]:
        raise SchemaError(
            f"RFID header must start with t,tag_id,freq_bin; got {header}", line=1
        )
    estimate_form = header == RFID_ESTIMATE_HEADER
    feature_form = len(header) > 3 and all(
        c.startswith("f") for c in header[3:]
    ) and not estimate_form
    if not estimate_form and not feature_form:
        raise SchemaError(
            "RFID columns must be r,theta,var_r,var_theta or feature columns f0,f1,...",
            line=1,
        )
    if feature_form and registry is None:
        raise SchemaError(
            "feature-form RFID log requires a GP model registry", line=1
        )

    per_tag = {}
    for line, row in rows:
        if len(row) != len(header):
            raise SchemaError(
                f"expected {len(header)} columns, got {len(row)}", line=line
            )
        t = _float(row[0], line, "t")
        tag_id = row[1]
        freq_bin = row[2]
        if estimate_form:
            r = _float(row[3], line, "r")
            theta = _float(row[4], line, "theta")
            var_r = _float(row[5], line, "var_r")
            var_theta = _float(row[6], line, "var_theta")
        else:
            features = [_float(v, line, c) for v, c in zip(row[3:], header[3:])]
            try:
                r, theta, var_r, var_theta = registry.predict(features, freq_bin)
            except KeyError as exc:
                raise SchemaError(str(exc), line=line) from exc
        try:
            z = PolarMeasurement(r, theta, var_r, var_theta, t)
        except ValueError as exc:
            raise SchemaError(str(exc), line=line) from exc
        per_tag.setdefault(tag_id, []).append(z)

    for tag_id, seq in per_tag.items():
        seq.sort(key=lambda z: z.t)
        for a, b in zip(seq, seq[1:]):
            if b.t <= a.t:
                raise NonMonotoneTimeError(
                    f"tag {tag_id!r} has duplicate timestamp {b.t}"
                )
    return per_tag


def ingest_camera(source):
    """Parse a camera log into one Cartesian Trajectory per track id."""
    rows, header = _read_rows(source)
    if header != CAMERA_HEADER:
        raise SchemaError(f"camera header must be {CAMERA_HEADER}; got {header}", line=1)
    per_track = {}
    seen = set()
    for line, row in rows:
        if len(row) != 4:
            raise SchemaError(f"expected 4 columns, got {len(row)}", line=line)
        t = _float(row[0], line, "t")
        track_id = row[1]
        if (t, track_id) in seen:
            raise SchemaError(
                f"duplicate record for track {track_id!r} at t={t}", line=line
            )
        seen.add((t, track_id))
        x = _float(row[2], line, "x")
        y = _float(row[3], line, "y")
        per_track.setdefault(track_id, []).append(TimedPoint(t, (x, y), Frame.CARTESIAN))
    out = {}
    for track_id, pts in per_track.items():
        pts.sort(key=lambda p: p.t)
        traj = Trajectory(track_id, pts, Source.CAMERA)
        validate_trajectory(traj)
        out[track_id] = traj
    return out


def _read_rows(source):
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("file is empty", line=1)
    header = [h.strip() for h in header]
    rows = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        rows.append((line, [c.strip() for c in row]))
    return rows, header


def export_rfid_csv(per_tag) -> str:
    """Inverse of ingest_rfid for the estimate form."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RFID_ESTIMATE_HEADER)
    for tag_id in sorted(per_tag):
        for z in per_tag[tag_id]:
            writer.writerow(
                [repr(z.t), tag_id, "bin0", repr(z.r), repr(z.theta), repr(z.var_r), repr(z.var_theta)]
            )
    return buf.getvalue()


def export_camera_csv(trajectories) -> str:
    """Inverse of ingest_camera."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CAMERA_HEADER)
    for track_id in sorted(trajectories):
        for p in trajectories[track_id].points:
            writer.writerow([repr(p.t), track_id, repr(p.coords[0]), repr(p.coords[1])])
    return buf.getvalue()


def export_plotdata(report, out_dir):
    """Write plain-CSV plot inputs for a campaign or association report.

    Campaign reports produce accuracy-vs-density and time-to-association
    tables; association reports produce mapping-step, trajectory-overlay,
    and generalized-variance tables. Returns the list of written paths.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    written = []

    def _write(name, header, rows):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)

    if "trials" in report:  # campaign report
        _write(
            "accuracy_by_density.csv",
            ["radius_m", "density_per_m2", "n_tags", "method", "trials", "mean_accuracy",
             "convergence_rate", "time_p50_s", "time_p95_s"],
            [
                [
                    entry["radius_m"],
                    next(
                        (
                            c.get("density")
                            for c in report["configs"]
                            if c["radius"] == entry["radius_m"]
                            and c["n_tags"] == entry["n_tags"]
                        ),
                        "",
                    )
                    or "",
                    entry["n_tags"],
                    entry["method"],
                    entry["trials"],
                    entry["mean_accuracy"],
                    entry["convergence_rate"],
                    entry["time_p50_s"],
                    entry["time_p95_s"],
                ]
                for entry in report["summary"].values()
            ],
        )
        _write(
            "time_to_association.csv",
            ["config_index", "trial_index", "radius_m", "n_tags", "method",
             "converged", "time_to_association_s", "accuracy"],
            [
                [
                    t["config_index"],
                    t["trial_index"],
                    t["radius_m"],
                    t["n_tags"],
                    t["method"],
                    t["converged"],
                    t["time_to_association_s"],
                    t["accuracy"],
                ]
                for t in report["trials"]
            ],
        )
    elif "steps" in report:  # association report
        _write(
            "mapping_steps.csv",
            ["step", "t_s", "object_id", "tag_id", "score"],
            [
                [s["step"], s["t"], obj, tag, s["scores"][obj][tag]]
                for s in report["steps"]
                for obj, tag in s["mapping"].items()
            ],
        )
        overlay_rows = []
        for kind in ("camera", "rfid"):
            for track_id, pts in report.get("overlay", {}).get(kind, {}).items():
                overlay_rows.extend([kind, track_id, p[0], p[1], p[2]] for p in pts)
        _write("trajectory_overlay.csv", ["kind", "id", "t_s", "x_m", "y_m"], overlay_rows)
        gv_rows = [
            [tag_id, p[0], p[1]]
            for tag_id, pts in report.get("generalized_variance", {}).items()
            for p in pts
        ]
        _write("generalized_variance.csv", ["tag_id", "t_s", "gv_m4"], gv_rows)
    else:
        raise SchemaError("unrecognized report document")
    return written
