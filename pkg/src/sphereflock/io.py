"""CSV and manifest writers.  Doubles are written with 17 significant digits."""

import csv
import json

from .diagnostics import RECORD_FIELDS

SNAPSHOT_FIELDS = ("t", "agent", "x0", "x1", "x2", "v0", "v1", "v2")
SWEEP_FIELDS = ("sigma", "n", "seed", "E0", "flocking_condition", "final_flock_metric",
                "final_antipodal_margin", "min_antipodal_margin", "error")


def fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_timeseries(path, traj):
    _write(path, RECORD_FIELDS, (r.as_row() for r in traj.records))


def write_snapshots(path, traj, every=1):
    def rows():
        for k in range(0, len(traj.t), every):
            for i in range(traj.x.shape[1]):
                yield [float(traj.t[k]), i, *map(float, traj.x[k, i]), *map(float, traj.v[k, i])]
    _write(path, SNAPSHOT_FIELDS, rows())


def write_sweep(path, rows):
    _write(path, SWEEP_FIELDS, ([row.get(k, "") for k in SWEEP_FIELDS] for row in rows))


def read_csv(path):
    """Read one of the CSV outputs back as a dict of float columns."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for k, v in row.items():
                cols[k].append(_parse(v))
    return cols


def _parse(v):
    if v in ("true", "false"):
        return v == "true"
    try:
        return float(v)
    except ValueError:
        return v


def write_manifest(path, manifest):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
