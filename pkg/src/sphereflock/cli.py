"""Command-line front end: ``simulate``, ``verify``, ``sweep`` and ``plot``.

Exit codes
----------
simulate: 0 ok, 1 configuration error, 2 inadmissible initial data, 3 blowup.
verify: number of failed suites (capped at 63); 64 for usage errors.
sweep: 0 once every cell has run (cell failures are recorded in ``sweep.csv``),
1 for configuration errors or an empty grid.
"""

import argparse
import inspect
import itertools
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, diagnostics as diag, io, verify
from .config import ConfigError, RunConfig, load
from .errors import AdmissibilityError, SphereFlockError
from .integrator import simulate

EX_USAGE = 64
MAX_FAILURES = 63
GRID_AXES = ("sigma", "sigma_factor", "n", "seed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _fail(code, message):
    print(f"sphereflock: {message}", file=sys.stderr)
    return code


def _overrides(args):
    d = {}
    for name in ("dt", "t_end", "sigma", "n", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            d[name] = value
    return d


def apply_overrides(cfg, dt=None, t_end=None, sigma=None, n=None, seed=None, out=None):
    """Return a new RunConfig with command-line overrides applied and revalidated."""
    d = cfg.to_dict()
    for key, value in (("dt", dt), ("t_end", t_end), ("sigma", sigma)):
        if value is not None:
            d["params"][key] = float(value)
    if n is not None:
        d["params"]["n"] = d["scenario"]["n"] = int(n)
        d["scenario"].pop("alphas", None)
    if seed is not None:
        d["params"]["seed"] = d["scenario"]["seed"] = int(seed)
    if out is not None:
        d["output_dir"] = out
    return RunConfig.from_dict(d)


def _base_config(path):
    if path is None:
        return RunConfig(), {}
    cfg = load(path)
    with open(path) as fh:
        raw = json.load(fh)
    return cfg, raw


def run_checks(traj):
    """Checks enabled for every run; flocking-related ones only when sigma > 0."""
    p = traj.params
    reports = [diag.constraint_check(traj), diag.energy_monotone_check(traj),
               diag.speed_bound_check(traj)]
    if len(traj) >= 5 and p.dt * p.record_every <= 1e-2:
        reports.append(diag.dissipation_identity_check(traj))
    if p.sigma > 0:
        reports += [diag.diameter_bound_check(traj), diag.flocking_declared(traj)]
    return reports


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def run_and_write(cfg, out_dir, snapshot_every=None):
    """Run one configuration and write its CSVs and manifest into ``out_dir``.

    Returns the trajectory; AdmissibilityError propagates, blowups do not.
    """
    start = time.perf_counter()
    ens = cfg.scenario.build()
    traj = simulate(ens, cfg.params, raise_on_blowup=False)
    elapsed = time.perf_counter() - start
    io.write_timeseries(os.path.join(out_dir, "timeseries.csv"), traj)
    io.write_snapshots(os.path.join(out_dir, "snapshots.csv"), traj,
                       snapshot_every or cfg.snapshot_every)
    e0 = traj.records[0].E
    checks = run_checks(traj) if len(traj) > 1 else []
    manifest = {
        "version": __version__,
        "config": cfg.to_dict(),
        "wall_clock_seconds": round(elapsed, 3),
        "status": "blowup" if traj.error else "ok",
        "error": traj.error,
        "E0": e0,
        "flocking_condition": diag.flocking_condition(cfg.params.n, e0, cfg.params.sigma),
        "final": dict(zip(diag.RECORD_FIELDS, traj.records[-1].as_row())),
        "checks": {r.name: {"passed": r.passed, "skipped": r.skipped, "details": r.details}
                   for r in checks},
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return traj


def cmd_simulate(args):
    try:
        cfg, _ = _base_config(args.config)
        cfg = apply_overrides(cfg, out=args.out, **_overrides(args))
        if args.plots:
            cfg.emit_plots = True
    except (SphereFlockError, ValueError) as exc:
        return _fail(1, str(exc))
    if not cfg.output_dir:
        return _fail(1, "no output directory given (use --out or output_dir)")
    if not os.path.isdir(cfg.output_dir):
        return _fail(1, f"output directory {cfg.output_dir!r} does not exist")
    try:
        traj = run_and_write(cfg, cfg.output_dir)
    except AdmissibilityError as exc:
        for v in exc.violations:
            print(f"  agent {v.index}: |x|-1 = {v.norm_residual:.3e}, <x,v> = {v.tangency_residual:.3e}",
                  file=sys.stderr)
        return _fail(2, str(exc))
    except SphereFlockError as exc:
        return _fail(1, str(exc))
    if cfg.emit_plots:
        from .plotting import plot_run
        plot_run(cfg.output_dir)
    last = traj.records[-1]
    print(f"t={last.t:.6g} E={last.E:.6e} flock_metric={last.flock_metric:.3e} "
          f"antipodal_margin={last.antipodal_margin:.6f}")
    if traj.error:
        return _fail(3, traj.error)
    return 0


def _run_suite(name, seed):
    fn = verify.SUITES[name]
    if seed is not None and "seed" in inspect.signature(fn).parameters:
        return fn(seed=seed)
    return fn()


def cmd_verify(args):
    name = args.suite_opt or args.suite or "all"
    if name != "all" and name not in verify.SUITES:
        print(f"sphereflock verify: unknown suite {name!r}; choose from "
              f"{', '.join(['all', *verify.SUITES])}", file=sys.stderr)
        return EX_USAGE
    names = list(verify.SUITES) if name == "all" else [name]
    failed = 0
    for suite in names:
        start = time.perf_counter()
        reports = _run_suite(suite, args.seed)
        ok = all(r.passed or r.skipped for r in reports)
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {suite}")
        for r in reports:
            # timings go to stderr so stdout is reproducible
            r.details.pop("seconds", None)
            print(f"    {r.summary()}")
        print(f"# {suite}: {time.perf_counter() - start:.2f} s", file=sys.stderr)
    print(f"{len(names) - failed}/{len(names)} suites passed")
    return min(failed, MAX_FAILURES)


def _parse_list(text, kind):
    return [kind(s) for s in text.split(",") if s.strip()]


def grid_cells(grid):
    """Expand a grid dict into a list of cell override dicts (empty if any axis is)."""
    unknown = set(grid) - set(GRID_AXES)
    if unknown:
        raise ConfigError(f"unknown grid axes: {sorted(unknown)}")
    if "sigma" in grid and "sigma_factor" in grid:
        raise ConfigError("grid may set sigma or sigma_factor, not both")
    axes = [(k, list(grid[k])) for k in GRID_AXES if k in grid]
    if not axes:
        return []
    return [dict(zip([k for k, _ in axes], combo))
            for combo in itertools.product(*[vals for _, vals in axes])]


def run_cell(base, cell, out_dir):
    """Run one sweep cell; any failure is captured in the returned row."""
    # sigma stays blank until solved when the cell sets it through sigma_factor
    sigma = "" if "sigma_factor" in cell else cell.get("sigma", base.params.sigma)
    row = {"sigma": sigma, "n": cell.get("n", base.params.n),
           "seed": cell.get("seed", base.params.seed), "error": ""}
    try:
        cfg = apply_overrides(base, sigma=cell.get("sigma"), n=cell.get("n"), seed=cell.get("seed"))
        if "sigma_factor" in cell:
            ens = cfg.scenario.build()
            sigma = diag.flocking_sigma(ens.x, ens.v, cell["sigma_factor"])
            if sigma is None:
                raise ConfigError(f"no finite sigma meets factor {cell['sigma_factor']} "
                                  "for this initial configuration")
            cfg = apply_overrides(cfg, sigma=sigma)
        row["sigma"] = cfg.params.sigma
        os.makedirs(out_dir, exist_ok=True)
        traj = run_and_write(cfg, out_dir)
    except (SphereFlockError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    fm = [r.antipodal_margin for r in traj.records]
    e0 = traj.records[0].E
    row.update(E0=e0, flocking_condition=diag.flocking_condition(cfg.params.n, e0, cfg.params.sigma),
               final_flock_metric=traj.records[-1].flock_metric,
               final_antipodal_margin=fm[-1], min_antipodal_margin=min(fm), error=traj.error)
    return row


def worker_count(cells):
    limit = os.environ.get("SPHEREFLOCK_THREADS")
    n = int(limit) if limit else (os.cpu_count() or 1)
    return max(1, min(n, cells))


def seed_summary(rows):
    """Per-(sigma, n) spread of the final flocking metric across seeds."""
    groups = {}
    for r in rows:
        if not r["error"]:
            groups.setdefault((r["sigma"], r["n"]), []).append(r["final_flock_metric"])
    out = []
    for (sigma, n), vals in groups.items():
        a = np.array(vals)
        out.append({"sigma": sigma, "n": n, "seeds": len(a), "mean": float(a.mean()),
                    "std": float(a.std()), "min": float(a.min()), "max": float(a.max())})
    return out


def cmd_sweep(args):
    try:
        base, raw = _base_config(args.config)
        grid = dict(raw.get("grid", {}))
        for key, kind in (("sigma", float), ("sigma_factor", float), ("n", int), ("seed", int)):
            value = getattr(args, key)
            if value is not None:
                grid[key] = _parse_list(value, kind)
        if args.sigma is not None:
            grid.pop("sigma_factor", None)
        base = apply_overrides(base, dt=args.dt, t_end=args.t_end, out=args.out)
        cells = grid_cells(grid)
    except (SphereFlockError, ValueError) as exc:
        return _fail(1, str(exc))
    if not cells:
        return _fail(1, "empty sweep grid")
    if not os.path.isdir(base.output_dir):
        return _fail(1, f"output directory {base.output_dir!r} does not exist")
    dirs = [os.path.join(base.output_dir, f"cell_{k:04d}") for k in range(len(cells))]
    with ThreadPoolExecutor(max_workers=worker_count(len(cells))) as pool:
        rows = list(pool.map(lambda cd: run_cell(base, *cd), zip(cells, dirs)))
    io.write_sweep(os.path.join(base.output_dir, "sweep.csv"), rows)
    summary = seed_summary(rows)
    for s in summary:
        print(f"sigma={s['sigma']:.6g} n={s['n']} seeds={s['seeds']} final_flock_metric: "
              f"mean={s['mean']:.3e} std={s['std']:.3e} min={s['min']:.3e} max={s['max']:.3e}")
    failures = [r for r in rows if r["error"]]
    for r in failures:
        print(f"cell sigma={r['sigma']} n={r['n']} seed={r['seed']}: {r['error']}", file=sys.stderr)
    io.write_manifest(os.path.join(base.output_dir, "manifest.json"),
                      {"version": __version__, "base_config": base.to_dict(), "grid": grid,
                       "cells": len(cells), "failed_cells": len(failures), "seed_summary": summary})
    if base.emit_plots or args.plots:
        from .plotting import plot_sweep
        plot_sweep(base.output_dir)
    return 0


def cmd_plot(args):
    out = args.out
    if not out or not os.path.isdir(out):
        return _fail(1, f"output directory {out!r} does not exist")
    from .plotting import plot_run, plot_sweep
    written = []
    if os.path.exists(os.path.join(out, "timeseries.csv")):
        written += plot_run(out)
    if os.path.exists(os.path.join(out, "sweep.csv")):
        written += plot_sweep(out)
    if not written:
        return _fail(1, f"no timeseries.csv or sweep.csv in {out}")
    for path in written:
        print(path)
    return 0


def build_parser():
    parser = _Parser(prog="sphereflock", description="Cucker-Smale flocking on the unit sphere.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(p, lists=False):
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--dt", type=float)
        p.add_argument("--t-end", type=float)
        p.add_argument("--plots", action="store_true", help="render SVG figures")
        if lists:
            p.add_argument("--sigma", help="comma-separated grid values")
            p.add_argument("--sigma-factor", help="comma-separated multiples of the flocking threshold")
            p.add_argument("--n", help="comma-separated grid values")
            p.add_argument("--seed", help="comma-separated grid values")
        else:
            p.add_argument("--sigma", type=float)
            p.add_argument("--n", type=int)
            p.add_argument("--seed", type=int, metavar="U64")

    p = sub.add_parser("simulate", help="run one configuration")
    run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("suite", nargs="?", help="suite name or 'all'")
    p.add_argument("--suite", dest="suite_opt", metavar="NAME")
    p.add_argument("--seed", type=int, metavar="U64")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a parameter grid")
    run_flags(p, lists=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render SVG figures from an output directory")
    p.add_argument("--out", metavar="DIR", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
