"""Verification suites: geometry identities, exact-solution oracle, energy
identity, flocking runs and the transport-rate bound.

Every suite returns a list of :class:`~sphereflock.diagnostics.CheckReport`.
Tolerances default to the acceptance values; the runs are seeded so repeated
calls give identical reports.
"""

import math
import time

import numpy as np

from . import diagnostics as diag
from . import geometry
from .dynamics import CommWeight, SimParams
from .integrator import simulate
from .scenarios import appendixB_trajectory, cap_clustered, circular_exact, random_admissible

EXACT_ALPHAS = (0.0, math.pi / 3, 2 * math.pi / 3)


def _timed(report, start, limit=None):
    elapsed = time.perf_counter() - start
    report.details["seconds"] = round(elapsed, 3)
    if limit is not None:
        report.details["time_limit"] = limit
    return report


def random_unit_pairs(n, seed):
    rng = np.random.default_rng(seed)
    x1 = rng.normal(size=(n, 3))
    x2 = rng.normal(size=(n, 3))
    v = rng.normal(size=(n, 3))
    x1 /= np.linalg.norm(x1, axis=1, keepdims=True)
    x2 /= np.linalg.norm(x2, axis=1, keepdims=True)
    keep = np.linalg.norm(x1 + x2, axis=1) > 1e-6
    return x1[keep], x2[keep], v[keep]


def geometry_suite(seed=0, pairs=100_000, tol=1e-12):
    start = time.perf_counter()
    x1, x2, v = random_unit_pairs(pairs, seed)
    R = geometry.rotation_matrix(x1, x2)
    Rt = np.swapaxes(R, -1, -2)
    eye = np.eye(3)
    c = geometry.dot(x1, x2)[:, None]
    axis = np.cross(x1, x2)
    apply = lambda M, y: np.einsum("nij,nj->ni", M, y)  # noqa: E731
    errs = {
        "orthogonality": np.abs(Rt @ R - eye).max(),
        "transpose_symmetry": np.abs(Rt - geometry.rotation_matrix(x2, x1)).max(),
        "maps_x1_to_x2": np.abs(apply(R, x1) - x2).max(),
        "maps_x2": np.abs(apply(R, x2) - (2 * c * x2 - x1)).max(),
        "fixes_axis": np.abs(apply(R, axis) - axis).max(),
        "norm_preservation": (np.abs(np.linalg.norm(apply(R, v), axis=1) - np.linalg.norm(v, axis=1))
                              / np.linalg.norm(v, axis=1)).max(),
    }
    details = {k: float(e) for k, e in errs.items()}
    details["pairs"] = len(x1)
    identities = diag.CheckReport("geometry_identities", all(e <= tol for e in errs.values()), details)
    _timed(identities, start, 5.0)

    start = time.perf_counter()
    dev = float(np.abs(R - geometry.rotation_matrix_rodrigues(x1, x2)).max())
    equivalence = _timed(diag.CheckReport("formula_equivalence", dev <= tol,
                                          {"max_entry_deviation": dev, "pairs": len(x1)}), start, 5.0)

    # R -> I as x2 -> x1
    base = x1[0]
    perp = np.cross(base, [0.0, 0.0, 1.0] if abs(base[2]) < 0.9 else [1.0, 0.0, 0.0])
    perp /= np.linalg.norm(perp)
    gaps = []
    for d in (1e-3, 1e-6, 1e-9):
        ang = 2 * math.asin(d / 2)
        y = math.cos(ang) * base + math.sin(ang) * perp
        gaps.append(float(np.abs(geometry.rotation_matrix(base, y) - eye).max()))
    continuity = diag.CheckReport(
        "continuity_at_coincidence",
        all(g <= 2 * d for g, d in zip(gaps, (1e-3, 1e-6, 1e-9))) and gaps[0] > gaps[1] > gaps[2],
        {f"gap_at_{d:g}": g for d, g in zip((1e-3, 1e-6, 1e-9), gaps)})
    return [identities, equivalence, continuity]


def weight_suite(seed=0, samples=100_000):
    out = []
    for psi in (CommWeight("quadratic"), CommWeight("linear", kappa=1.0)):
        _, _, rep = diag.weight_sandwich_check(psi, samples, seed)
        rep.name = f"weight_sandwich[{psi.kind}]"
        out.append(rep)
    return out


def exact_params(dt, t_end=8.0):
    return SimParams(n=len(EXACT_ALPHAS), sigma=0.0, dt=dt, t_end=t_end,
                     record_every=max(1, int(round(0.1 / dt))))


def exact_error(dt, t_end=8.0):
    traj = simulate(circular_exact(EXACT_ALPHAS), exact_params(dt, t_end))
    err = max(np.abs(traj.x[k] - circular_exact(EXACT_ALPHAS, traj.t[k]).x).max()
              for k in range(len(traj)))
    return float(err), traj


def exact_suite(tol=1e-9, dts=(4e-3, 2e-3, 1e-3), band=(3.7, 4.3)):
    start = time.perf_counter()
    err, traj = exact_error(1e-3)
    oracle = diag.CheckReport("exact_oracle", err < tol,
                              {"max_position_error": err, "tol": tol,
                               "max_flock_metric": max(r.flock_metric for r in traj.records)})
    errors = [exact_error(dt)[0] if dt != 1e-3 else err for dt in dts]
    slope = float(np.polyfit(np.log(dts), np.log(errors), 1)[0])
    conv = diag.CheckReport("convergence_order", band[0] <= slope <= band[1],
                            {"exponent": slope, **{f"err_dt_{dt:g}": e for dt, e in zip(dts, errors)}})
    _timed(conv, start, 10.0)
    return [oracle, conv, diag.constraint_check(traj)]


def dissipation_runs(seed=3, sigmas=(0.0, 1.0, 10.0), n=10, t_end=20.0):
    ens = random_admissible(n, seed)
    return {s: simulate(ens, SimParams(n=n, sigma=s, dt=1e-3, t_end=t_end, record_every=5, seed=seed))
            for s in sigmas}


def dissipation_suite(seed=3, tol=1e-5):
    start = time.perf_counter()
    out = []
    for sigma, traj in dissipation_runs(seed).items():
        for rep in (diag.dissipation_identity_check(traj, tol), diag.energy_monotone_check(traj),
                    diag.speed_bound_check(traj), diag.constraint_check(traj)):
            rep.name = f"{rep.name}[sigma={sigma:g}]"
            out.append(rep)
    _timed(out[0], start, 60.0)
    return out


def alignment_run(seed=1, t_end=200.0):
    ens = cap_clustered(5, radius=0.5, seed=seed, speed=0.5)
    return simulate(ens, SimParams(n=5, sigma=0.0, dt=1e-3, t_end=t_end, record_every=100, seed=seed))


def alignment_suite(seed=1, threshold=1e-2, after=50.0, slack=1.1):
    start = time.perf_counter()
    traj = alignment_run(seed)
    t = traj.t
    fm = np.array([r.flock_metric for r in traj.records])
    running_min = np.minimum.accumulate(fm)
    late = t >= after
    rebound = float((fm[late] / running_min[late]).max())
    rep = diag.CheckReport("velocity_alignment_sigma0",
                           bool(fm[-1] < threshold and rebound <= slack),
                           {"final_flock_metric": float(fm[-1]), "threshold": threshold,
                            "max_rebound_after_t50": rebound, "note": "finite-horizon threshold"})
    return [_timed(rep, start, 120.0), diag.constraint_check(traj)]


def flocking_run(seed=0, factor=1.5, t_end=100.0):
    ens = cap_clustered(5, radius=0.3, seed=seed, speed=0.1)
    sigma = diag.flocking_sigma(ens.x, ens.v, factor)
    return simulate(ens, SimParams(n=5, sigma=sigma, dt=1e-3, t_end=t_end, record_every=100, seed=seed))


def flocking_suite(seed=0, metric_tol=1e-3, eps=1e-3):
    start = time.perf_counter()
    traj = flocking_run(seed)
    p = traj.params
    e0 = traj.records[0].E
    floor = 4.0 - 2.0 * p.n ** 2 * e0 / p.sigma - 1e-6
    margin2 = min(r.antipodal_margin for r in traj.records) ** 2
    final = traj.records[-1].flock_metric
    rep = diag.CheckReport("flocking_threshold", bool(final < metric_tol and margin2 > floor),
                           {"sigma": p.sigma, "E0": e0,
                            "condition": diag.flocking_condition(p.n, e0, p.sigma),
                            "final_flock_metric": final, "min_margin2": margin2,
                            "margin2_floor": floor})
    _timed(rep, start, 60.0)
    return [rep, diag.diameter_bound_check(traj), diag.metric_equivalence_check(traj, eps=eps),
            diag.constraint_check(traj)]


def appendix_times(t0=0.01, t1=0.5, stride=1e-4):
    return t0 + stride * np.arange(int(round((t1 - t0) / stride)) + 1)


def dRdt_suite(sharpness=0.25):
    start = time.perf_counter()
    rep = diag.dR_dt_bound_check(appendixB_trajectory(appendix_times()), (0, 1))
    rep.passed = rep.passed and rep.details["sharpness"] > sharpness
    rep.details["sharpness_floor"] = sharpness
    return [_timed(rep, start, 10.0)]


SUITES = {
    "geometry": geometry_suite,
    "weight": weight_suite,
    "exact": exact_suite,
    "dissipation": dissipation_suite,
    "alignment": alignment_suite,
    "flocking": flocking_suite,
    "drdt": dRdt_suite,
}
