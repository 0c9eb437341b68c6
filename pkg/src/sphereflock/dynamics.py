"""Right-hand side of the Cucker-Smale system on the unit sphere.

Each agent carries a position ``x_i`` on the sphere and a tangent velocity
``v_i``.  The acceleration is the sum of three pieces:

* centripetal force  ``-||v_i||^2 x_i / ||x_i||^2``,
* alignment          ``(1/N) sum_j psi_ij (R_{x_j -> x_i} v_j - v_i)``,
* bonding            ``(sigma/N) sum_k (||x_i||^2 x_k - <x_i, x_k> x_i)``.

The alignment weight vanishes at antipodal pairs, where the transport is
undefined, and the force is extended by zero there.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import geometry
from .errors import DomainError

R_SLACK = 1e-12


@dataclass(frozen=True)
class CommWeight:
    """Communication weight psi on [0, 2], decreasing with psi(2) = 0.

    kind
        ``"quadratic"``: (4 - r^2) / 4 (the default);
        ``"linear"``: kappa (2 - r);
        ``"custom-table"``: piecewise-linear interpolation of ``table``,
        a sequence of ``(r, psi)`` nodes starting at r=0 and ending at r=2.
    """

    kind: str = "quadratic"
    kappa: float = 1.0
    table: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("quadratic", "linear", "custom-table"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.kind == "linear" and not self.kappa > 0:
            raise DomainError("linear weight needs kappa > 0")
        if self.kind == "custom-table":
            nodes = np.asarray(self.table, dtype=float)
            if nodes.ndim != 2 or nodes.shape[1] != 2 or len(nodes) < 2:
                raise DomainError("custom-table needs at least two (r, psi) nodes")
            r, p = nodes.T
            if r[0] != 0.0 or r[-1] != 2.0 or np.any(np.diff(r) <= 0):
                raise DomainError("table nodes must increase from r=0 to r=2")
            if np.any(np.diff(p) > 0) or p[-1] != 0.0 or not p[-2] > 0.0:
                raise DomainError("table must be non-increasing, end at 0 with negative final slope")
            object.__setattr__(self, "table", tuple(map(tuple, nodes.tolist())))

    def _checked(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(~np.isfinite(r)) or np.any(r < -R_SLACK) or np.any(r > 2.0 + R_SLACK):
            raise DomainError("weight argument outside [0, 2]")
        return np.clip(r, 0.0, 2.0)

    def __call__(self, r):
        r = self._checked(r)
        if self.kind == "quadratic":
            return (4.0 - r * r) / 4.0
        if self.kind == "linear":
            return self.kappa * (2.0 - r)
        nodes = np.asarray(self.table)
        return np.interp(r, nodes[:, 0], nodes[:, 1])

    def derivative(self, r):
        r = self._checked(r)
        if self.kind == "quadratic":
            return -r / 2.0
        if self.kind == "linear":
            return np.full_like(r, -self.kappa)
        nodes = np.asarray(self.table)
        slopes = np.diff(nodes[:, 1]) / np.diff(nodes[:, 0])
        idx = np.clip(np.searchsorted(nodes[:, 0], r, side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]

    @property
    def kernel_args(self):
        """``(kind_code, kappa, table_r, table_p)`` for the compiled kernels."""
        code = {"quadratic": geometry.WEIGHT_QUADRATIC, "linear": geometry.WEIGHT_LINEAR,
                "custom-table": geometry.WEIGHT_TABLE}[self.kind]
        nodes = np.asarray(self.table, dtype=float).reshape(-1, 2)
        return code, float(self.kappa), np.ascontiguousarray(nodes[:, 0]), np.ascontiguousarray(nodes[:, 1])

    def to_dict(self):
        return {"kind": self.kind, "kappa": self.kappa, "table": [list(p) for p in self.table]}

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d.get("kind", "quadratic"), kappa=float(d.get("kappa", 1.0)),
                   table=tuple(tuple(p) for p in d.get("table", ())))


def weight_eval(psi, r):
    return psi(r)


@dataclass
class Ensemble:
    """Positions ``x`` and velocities ``v`` (both ``(N, 3)``) at time ``t``."""

    x: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.array(self.x, dtype=float).reshape(-1, 3)
        self.v = np.array(self.v, dtype=float).reshape(-1, 3)
        if self.x.shape != self.v.shape:
            raise DomainError("positions and velocities differ in shape")
        self.t = float(self.t)

    @property
    def n(self):
        return len(self.x)

    def copy(self):
        return Ensemble(self.x.copy(), self.v.copy(), self.t)


@dataclass
class SimParams:
    n: int = 3
    sigma: float = 0.0
    weight: CommWeight = field(default_factory=CommWeight)
    dt: float = 1e-3
    t_end: float = 50.0
    record_every: int = 100
    seed: int = 0
    tol_geo: float = geometry.TAU_GEO

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("need at least one agent")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not self.t_end >= 0:
            raise DomainError("t_end must be non-negative")
        if not self.sigma >= 0:
            raise DomainError("sigma must be non-negative")
        if self.record_every < 1:
            raise DomainError("record_every must be >= 1")

    def to_dict(self):
        return {"n": self.n, "sigma": self.sigma, "weight": self.weight.to_dict(),
                "dt": self.dt, "t_end": self.t_end, "record_every": self.record_every,
                "seed": self.seed, "tol_geo": self.tol_geo}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["weight"] = CommWeight.from_dict(d.get("weight", {}))
        return cls(**d)


def centripetal_force(x, v):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    return -(geometry.dot(v, v) / geometry.dot(x, x))[..., None] * x


def bonding_force(ens, sigma, i=None):
    """Bonding (Lohe-type) force on agent ``i``, or on every agent if ``i`` is None."""
    force = _bonding(ens.x, sigma)
    return force if i is None else force[i]


def pair_weights(x, psi):
    """Symmetric matrix psi_ij = psi(||x_i - x_j||), exactly zero at antipodal pairs."""
    diff = x[:, None, :] - x[None, :, :]
    r = np.clip(np.sqrt(geometry.dot(diff, diff)), 0.0, 2.0)
    s = x[:, None, :] + x[None, :, :]
    anti = np.sqrt(geometry.dot(s, s)) <= geometry.EPS_ANTI
    return np.where(anti, 0.0, psi(r))


def _alignment(x, v, psi):
    # fixed j = 0..N-1 reduction order per agent
    T = geometry.weighted_transport(x[:, None, :], x[None, :, :], v[None, :, :], psi)
    W = pair_weights(x, psi)
    return (T.sum(axis=1) - W.sum(axis=1)[:, None] * v) / len(x)


def alignment_force(ens, psi, i=None):
    force = _alignment(ens.x, ens.v, psi)
    return force if i is None else force[i]


def _bonding(x, sigma):
    total = x.sum(axis=0)
    return (sigma / len(x)) * (geometry.dot(x, x)[:, None] * total
                               - geometry.dot(x, total)[:, None] * x)


@njit(cache=True, nogil=True)
def accel_kernel(x, v, sigma, kind, kappa, table_r, table_p, out):
    n = x.shape[0]
    total = np.zeros(3)
    for k in range(n):
        for c in range(3):
            total[c] += x[k, c]
    acc = np.zeros(3)
    for i in range(n):
        acc[0] = 0.0
        acc[1] = 0.0
        acc[2] = 0.0
        for j in range(n):
            geometry.transport_accumulate(x, v, i, j, kind, kappa, table_r, table_p, acc)
        xx = x[i, 0] * x[i, 0] + x[i, 1] * x[i, 1] + x[i, 2] * x[i, 2]
        vv = v[i, 0] * v[i, 0] + v[i, 1] * v[i, 1] + v[i, 2] * v[i, 2]
        xs = x[i, 0] * total[0] + x[i, 1] * total[1] + x[i, 2] * total[2]
        for c in range(3):
            out[i, c] = (-vv / xx * x[i, c] + acc[c] / n
                         + sigma / n * (xx * total[c] - xs * x[i, c]))
    return out


def acceleration(x, v, sigma, psi):
    """Total acceleration on every agent for raw ``(N, 3)`` arrays."""
    x = np.ascontiguousarray(x, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    return accel_kernel(x, v, float(sigma), *psi.kernel_args, np.empty_like(x))


def rhs(ens, p):
    """Time derivative ``(dx, dv)`` of the full state."""
    if not (np.all(np.isfinite(ens.x)) and np.all(np.isfinite(ens.v))):
        raise DomainError("state contains non-finite values")
    return ens.v.copy(), acceleration(ens.x, ens.v, p.sigma, p.weight)
