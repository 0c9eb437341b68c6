"""Fixed-step RK4 with projection back onto the constraint set."""

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import diagnostics
from .dynamics import Ensemble, accel_kernel
from .errors import AdmissibilityError, BlowupError

log = logging.getLogger(__name__)


@dataclass
class Violation:
    index: int
    norm_residual: float
    tangency_residual: float


@dataclass
class Trajectory:
    """Recorded samples of a run; ``x`` and ``v`` have shape ``(samples, N, 3)``."""

    params: object
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    records: list = field(default_factory=list)
    error: str = ""

    def __len__(self):
        return len(self.t)

    def ensemble(self, k):
        return Ensemble(self.x[k], self.v[k], self.t[k])

    @property
    def samples(self):
        return [(self.t[k], self.ensemble(k), self.records[k]) for k in range(len(self))]


def check_admissible(ens, tol):
    """One :class:`Violation` per agent that is off the sphere or not tangent."""
    norm_res = np.abs(np.linalg.norm(ens.x, axis=1) - 1.0)
    tan_res = np.abs(np.einsum("ij,ij->i", ens.x, ens.v))
    bad = ~((norm_res <= tol) & (tan_res <= tol))
    return [Violation(int(i), float(norm_res[i]), float(tan_res[i])) for i in np.flatnonzero(bad)]


def _project(x, v):
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise BlowupError("non-finite state")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms <= 0.5):
        raise BlowupError(f"position drifted off the sphere (min |x| = {norms.min():.3e})")
    x = x / norms[:, None]
    v = v - np.einsum("ij,ij->i", v, x)[:, None] * x
    return x, v


def project(ens):
    x, v = _project(ens.x, ens.v)
    return Ensemble(x, v, ens.t)


@njit(cache=True, nogil=True)
def _rk4_kernel(x, v, dt, sigma, kind, kappa, table_r, table_p):
    # returns (x, v, status): 0 ok, 1 non-finite, 2 drifted inside |x| <= 1/2
    k1v = accel_kernel(x, v, sigma, kind, kappa, table_r, table_p, np.empty_like(x))
    h = 0.5 * dt
    k2x = v + h * k1v
    k2v = accel_kernel(x + h * v, k2x, sigma, kind, kappa, table_r, table_p, np.empty_like(x))
    k3x = v + h * k2v
    k3v = accel_kernel(x + h * k2x, k3x, sigma, kind, kappa, table_r, table_p, np.empty_like(x))
    k4x = v + dt * k3v
    k4v = accel_kernel(x + dt * k3x, k4x, sigma, kind, kappa, table_r, table_p, np.empty_like(x))
    xn = x + (dt / 6.0) * (v + 2.0 * k2x + 2.0 * k3x + k4x)
    vn = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    status = 0
    for i in range(x.shape[0]):
        nrm = np.sqrt(xn[i, 0] ** 2 + xn[i, 1] ** 2 + xn[i, 2] ** 2)
        if not (np.isfinite(nrm) and np.isfinite(vn[i, 0]) and np.isfinite(vn[i, 1])
                and np.isfinite(vn[i, 2])):
            return xn, vn, 1
        if nrm <= 0.5:
            status = 2
            continue
        for c in range(3):
            xn[i, c] /= nrm
        vx = vn[i, 0] * xn[i, 0] + vn[i, 1] * xn[i, 1] + vn[i, 2] * xn[i, 2]
        for c in range(3):
            vn[i, c] -= vx * xn[i, c]
    return xn, vn, status


def _rk4(x, v, dt, sigma, psi, kernel_args=None):
    if kernel_args is None:
        kernel_args = psi.kernel_args
        x = np.ascontiguousarray(x, dtype=float)
        v = np.ascontiguousarray(v, dtype=float)
    x, v, status = _rk4_kernel(x, v, float(dt), float(sigma), *kernel_args)
    if status == 1:
        raise BlowupError("non-finite state")
    if status == 2:
        raise BlowupError("position drifted off the sphere")
    return x, v


def step_rk4(ens, p):
    """One RK4 step of size ``p.dt`` followed by projection."""
    x, v = _rk4(ens.x, ens.v, p.dt, p.sigma, p.weight)
    return Ensemble(x, v, ens.t + p.dt)


def simulate(ens0, p, raise_on_blowup=True):
    """Integrate from ``ens0`` to ``p.t_end``, sampling every ``p.record_every`` steps.

    Raises AdmissibilityError for bad initial data.  On blowup the partial
    trajectory is attached to the raised BlowupError (or returned with
    ``error`` set when ``raise_on_blowup`` is False).
    """
    violations = check_admissible(ens0, p.tol_geo)
    if violations:
        raise AdmissibilityError(f"{len(violations)} agent(s) violate admissibility", violations)
    n_steps = int(round(p.t_end / p.dt))
    t0 = ens0.t
    x, v = _project(ens0.x, ens0.v)
    ts, xs, vs, recs = [], [], [], []

    def keep(k, x, v):
        ens = Ensemble(x, v, t0 + k * p.dt)
        ts.append(ens.t)
        xs.append(ens.x)
        vs.append(ens.v)
        recs.append(diagnostics.record(ens, p.sigma, p.weight))

    keep(0, x, v)
    error = ""
    args = p.weight.kernel_args
    x = np.ascontiguousarray(x)
    v = np.ascontiguousarray(v)
    for k in range(1, n_steps + 1):
        try:
            x, v = _rk4(x, v, p.dt, p.sigma, p.weight, args)
        except BlowupError as exc:
            error = f"blowup at step {k}: {exc}"
            log.error(error)
            break
        if k % p.record_every == 0:
            keep(k, x, v)
    traj = Trajectory(p, np.array(ts), np.array(xs), np.array(vs), recs, error)
    if error and raise_on_blowup:
        raise BlowupError(error, traj)
    return traj
