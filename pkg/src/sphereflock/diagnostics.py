"""Energies, flocking metrics and the trajectory-level bound checks."""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import geometry
from .dynamics import pair_weights
from .errors import DomainError, WindowError

RECORD_FIELDS = ("t", "E", "E_K", "E_C", "v_max", "dissipation",
                 "flock_metric", "antipodal_margin", "diameter")


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    E_K: float
    E_C: float
    v_max: float
    dissipation: float
    flock_metric: float
    antipodal_margin: float
    diameter: float

    def as_row(self):
        return [getattr(self, k) for k in RECORD_FIELDS]


@dataclass
class CheckReport:
    """Outcome of one verification check; ``details`` holds observed margins."""

    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    skipped: bool = False

    def summary(self):
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        parts = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"{status} {self.name}: {parts}"

    def to_dict(self):
        return asdict(self)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def energy(ens, sigma):
    """Return ``(E, E_K, E_C)``; the configuration sum runs over all ordered pairs."""
    x, v = ens.x, ens.v
    n = len(x)
    e_k = float(np.sum(v * v)) / n
    diff = x[:, None, :] - x[None, :, :]
    e_c = sigma / (2.0 * n * n) * float(np.sum(diff * diff))
    return e_k + e_c, e_k, e_c


def relative_velocities(x, v):
    """``rel[i, j] = R_{x_j -> x_i} v_j - v_i``, together with ``||x_i + x_j||``.

    Antipodal pairs carry ``rel = 0`` and ``||x_i + x_j||`` near zero; every
    use multiplies ``rel`` by a factor vanishing there.
    """
    Rv = geometry.transport(x[:, None, :], x[None, :, :], v[None, :, :])
    s = x[:, None, :] + x[None, :, :]
    snorm = np.sqrt(geometry.dot(s, s))
    anti = snorm <= geometry.EPS_ANTI
    rel = np.where(anti[..., None], 0.0, Rv - v[:, None, :])
    return rel, snorm


def dissipation_rate(ens, psi):
    """-(1/N^2) sum_ij psi_ij ||R_{x_j -> x_i} v_j - v_i||^2 (never positive)."""
    rel, _ = relative_velocities(ens.x, ens.v)
    W = pair_weights(ens.x, psi)
    return -float(np.sum(W * geometry.dot(rel, rel))) / ens.n ** 2


def pair_metric(x, v, k=1.0):
    """Matrix f_k[i, j] = ||x_i + x_j|| * ||R_{x_j -> x_i} v_j - v_i||^k."""
    rel, snorm = relative_velocities(x, v)
    speed = np.sqrt(geometry.dot(rel, rel))
    f = snorm * speed ** k
    return np.where(snorm <= geometry.EPS_ANTI, 0.0, f)


def flock_metric(ens):
    return float(pair_metric(ens.x, ens.v).max())


def antipodal_margin(ens):
    n = ens.n
    if n == 1:
        return 2.0
    s = ens.x[:, None, :] + ens.x[None, :, :]
    iu = np.triu_indices(n, 1)
    return float(np.sqrt(geometry.dot(s, s))[iu].min())


def diameter(ens):
    d = ens.x[:, None, :] - ens.x[None, :, :]
    return float(np.sqrt(geometry.dot(d, d)).max())


def max_speed(ens):
    return float(np.sqrt(geometry.dot(ens.v, ens.v)).max())


def record(ens, sigma, psi):
    x, v, n = ens.x, ens.v, ens.n
    E, e_k, e_c = energy(ens, sigma)
    rel, snorm = relative_velocities(x, v)
    rel2 = geometry.dot(rel, rel)
    W = pair_weights(x, psi)
    metric = np.where(snorm <= geometry.EPS_ANTI, 0.0, snorm * np.sqrt(rel2))
    d = x[:, None, :] - x[None, :, :]
    margin = 2.0 if n == 1 else float(snorm[np.triu_indices(n, 1)].min())
    return DiagnosticsRecord(
        t=ens.t, E=E, E_K=e_k, E_C=e_c, v_max=max_speed(ens),
        dissipation=-float(np.sum(W * rel2)) / n ** 2, flock_metric=float(metric.max()),
        antipodal_margin=margin, diameter=float(np.sqrt(geometry.dot(d, d)).max()))


def flocking_condition(n, e0, sigma):
    """Sufficient condition sigma > N^2 E(0) / 2 for flocking."""
    if e0 < 0:
        raise DomainError("initial energy must be non-negative")
    return sigma > n * n * e0 / 2.0


def flocking_sigma(x, v, factor=1.5):
    """Bonding rate with sigma = factor * N^2 E(0) / 2, E(0) evaluated at that sigma.

    E(0) itself grows linearly in sigma, so the relation is solved in closed
    form; returns None when no finite sigma satisfies it (cluster too wide).
    """
    n = len(x)
    e_k = float(np.sum(v * v)) / n
    diff = x[:, None, :] - x[None, :, :]
    spread = float(np.sum(diff * diff)) / (2.0 * n * n)
    denom = 1.0 - factor * n * n * spread / 2.0
    if denom <= 0:
        return None
    return factor * n * n * e_k / 2.0 / denom


# -- trajectory checks ---------------------------------------------------------

def _series(traj, name):
    return np.array([getattr(r, name) for r in traj.records])


def constraint_check(traj, tol=1e-12):
    norm_res = np.abs(np.linalg.norm(traj.x, axis=-1) - 1.0).max()
    tan_res = np.abs(np.einsum("skc,skc->sk", traj.x, traj.v)).max()
    return CheckReport("constraints", bool(norm_res <= tol and tan_res <= tol),
                       {"max_norm_residual": float(norm_res),
                        "max_tangency_residual": float(tan_res), "tol": tol})


def energy_monotone_check(traj, eta=1e-10):
    E = _series(traj, "E")
    if len(E) < 2:
        return CheckReport("energy_monotone", True, {"max_increase": 0.0})
    per_step = np.diff(E) / traj.params.record_every
    worst = float(per_step.max())
    return CheckReport("energy_monotone", worst <= eta,
                       {"max_increase_per_step": worst, "eta": eta})


def speed_bound_check(traj, slack=1e-8):
    e0 = traj.records[0].E
    bound = math.sqrt(traj.params.n * e0)
    vmax = float(_series(traj, "v_max").max())
    return CheckReport("speed_bound", vmax <= bound + slack,
                       {"max_speed": vmax, "bound": bound})


def dissipation_identity_check(traj, tol=1e-5):
    """dE/dt from recorded samples against the dissipation rate.

    Uses the five-point centred stencil; the three-point one leaves an
    O(dt^2) truncation error above 1e-5 at stiff bonding rates (sigma = 10).
    """
    t = _series(traj, "t")
    if len(t) < 5:
        return CheckReport("dissipation_identity", True, {"samples": len(t)}, skipped=True)
    spacing = traj.params.dt * traj.params.record_every
    if spacing > 1e-2 + 1e-15:
        raise DomainError(f"sample spacing {spacing} too coarse for the identity check")
    E = _series(traj, "E")
    rate = _series(traj, "dissipation")
    h = np.diff(t).mean()
    fd = (-E[4:] + 8.0 * E[3:-1] - 8.0 * E[1:-3] + E[:-4]) / (12.0 * h)
    err = float(np.abs(fd - rate[2:-2]).max())
    return CheckReport("dissipation_identity", err < tol,
                       {"max_abs_error": err, "tol": tol,
                        "max_dissipation": float(np.abs(rate).max())})


def diameter_bound_check(traj, slack=1e-8):
    """Diameter and speed bounds that hold whenever sigma > 0."""
    sigma = traj.params.sigma
    if sigma <= 0:
        return CheckReport("diameter_bound", True, {"reason": "sigma = 0"}, skipped=True)
    n = traj.params.n
    e0 = traj.records[0].E
    d2_bound = 2.0 * n * n * e0 / sigma
    v2_bound = n * e0
    diam2 = _series(traj, "diameter") ** 2
    v2 = _series(traj, "v_max") ** 2
    margin_d = float((d2_bound - diam2).min())
    margin_v = float((v2_bound - v2).min())
    return CheckReport("diameter_bound", margin_d >= -slack and margin_v >= -slack,
                       {"diameter2_bound": d2_bound, "max_diameter2": float(diam2.max()),
                        "worst_diameter_margin": margin_d, "worst_speed_margin": margin_v})


def flocking_declared(traj, metric_tol=1e-3, tail=0.1):
    """Finite-horizon flocking verdict over the final ``tail`` fraction of samples."""
    n, sigma = traj.params.n, traj.params.sigma
    e0 = traj.records[0].E
    k0 = min(len(traj.records) - 1, int(math.floor(len(traj.records) * (1 - tail))))
    fm = _series(traj, "flock_metric")[k0:]
    am = _series(traj, "antipodal_margin")[k0:]
    margin_floor = 4.0 - 2.0 * n * n * e0 / sigma - 1e-6 if sigma > 0 else 0.0
    ok = bool(fm.max() < metric_tol and (am ** 2).min() > margin_floor)
    return CheckReport("flocking", ok, {"tail_max_flock_metric": float(fm.max()),
                                        "tail_min_margin2": float((am ** 2).min()),
                                        "margin2_floor": margin_floor})


def weight_sandwich_check(psi, samples=1000, seed=0, min_sum_norm=0.1):
    """Empirical extremes of psi(||x - y||) / ||x + y||^2 over random unit pairs.

    The ratio is 0/0 at antipodal pairs and its rounding error grows like
    eps / ||x + y||^2, so pairs with ``||x + y|| < min_sum_norm`` are skipped.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(samples, 3))
    y = rng.normal(size=(samples, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    s2 = geometry.dot(x + y, x + y)
    keep = s2 >= min_sum_norm ** 2
    r = np.clip(np.linalg.norm(x - y, axis=1), 0.0, 2.0)
    ratio = psi(r[keep]) / s2[keep]
    lo, hi = float(ratio.min()), float(ratio.max())
    ok = bool(np.isfinite(lo) and np.isfinite(hi) and lo > 0)
    details = {"C_low": lo, "C_high": hi, "pairs": int(keep.sum()),
               "skipped_near_antipodal": int((~keep).sum())}
    if getattr(psi, "kind", None) == "quadratic":
        dev = float(np.abs(ratio - 0.25).max())
        details["max_dev_from_quarter"] = dev
        ok = ok and dev <= 1e-12
    elif getattr(psi, "kind", None) == "linear":
        k = psi.kappa
        ok = ok and lo >= k / 4 - 1e-12 and hi <= k / 2 + 1e-12
    return lo, hi, CheckReport("weight_sandwich", ok, details)


def _rotation_series(traj, i, j):
    xi, xj = traj.x[:, i], traj.x[:, j]
    snorm = np.linalg.norm(xi + xj, axis=-1)
    if np.any(snorm <= geometry.EPS_ANTI):
        raise WindowError(f"pair ({i}, {j}) reaches the antipodal cutoff inside the window")
    return geometry.rotation_matrix(xj, xi), snorm


def dR_dt_bound_check(traj, pair=(0, 1), C_fit=None, near=0.1):
    """Finite-difference ||dR(x_j, x_i)/dt|| against C V_max (1 + 1/||x_i + x_j||).

    ``C_fit`` defaults to the smallest constant satisfying the bound at every
    interior sample.  ``sharpness`` is the smallest ratio of the observed rate
    to ``C_fit V_max / ||x_i + x_j||`` over the first ``near`` fraction of the
    window.
    """
    i, j = pair
    t = np.asarray(traj.t, dtype=float)
    if len(t) < 3:
        raise DomainError("need at least three samples")
    if np.max(np.diff(t)) > 1e-2 + 1e-15:
        raise DomainError("samples too sparse for finite differencing")
    R, snorm = _rotation_series(traj, i, j)
    dR = (R[2:] - R[:-2]) / (t[2:] - t[:-2])[:, None, None]
    rate = np.abs(dR).max(axis=(1, 2))
    vmax = np.linalg.norm(traj.v[1:-1], axis=-1).max(axis=1)
    s = snorm[1:-1]
    scale = vmax * (1.0 + 1.0 / s)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(scale > 0, rate / scale, 0.0)
    fitted = C_fit is None
    if fitted:
        C_fit = float(ratio.max())
    passed = bool(np.all(rate <= C_fit * scale * (1 + 1e-12) + 1e-300))
    n_near = max(1, int(len(rate) * near))
    singular = C_fit * vmax[:n_near] / s[:n_near]
    with np.errstate(divide="ignore", invalid="ignore"):
        sharp = np.where(singular > 0, rate[:n_near] / singular, np.inf)
    return CheckReport("dR_dt_bound", passed, {
        "C_fit": C_fit, "fitted": fitted, "max_ratio": float(ratio.max()),
        "max_rate": float(rate.max()), "sharpness": float(sharp.min()),
        "near_window_end": float(t[1:-1][n_near - 1])})


def metric_equivalence_check(traj, k_list=(1.0, 2.0), eps=1e-3, rtol=1e-12):
    """Check the pointwise relations tying the f_k metrics together.

    For k > m and every pair, ``f_k <= (2V)^(k-m) f_m`` and
    ``f_m <= 2^(1-m/k) f_k^(m/k)`` with V = sqrt(N E(0)); in particular
    f_1 < eps forces f_2 < 2V eps on the same samples.
    """
    n = traj.params.n
    V = math.sqrt(n * traj.records[0].E)
    ks = sorted(float(k) for k in k_list)
    f = {k: np.stack([pair_metric(traj.x[s], traj.v[s], k) for s in range(len(traj.x))])
         for k in ks}
    worst = 0.0
    ok = True
    for a, m in enumerate(ks):
        for k in ks[a + 1:]:
            up = (2 * V) ** (k - m) * f[m]
            down = 2.0 ** (1 - m / k) * f[k] ** (m / k)
            ok &= bool(np.all(f[k] <= up * (1 + rtol) + 1e-300))
            ok &= bool(np.all(f[m] <= down * (1 + rtol) + 1e-300))
    details = {"V": V, "eps": eps}
    if 1.0 in f and 2.0 in f:
        f1 = f[1.0].max(axis=(1, 2))
        f2 = f[2.0].max(axis=(1, 2))
        tail = f1 < eps
        details["tail_samples"] = int(tail.sum())
        if tail.any():
            worst = float(f2[tail].max())
            ok &= worst < eps * 2 * V
        details["tail_max_f2"] = worst
        details["f2_threshold"] = eps * 2 * V
    return CheckReport("metric_equivalence", bool(ok), details)
