"""Initial ensembles and closed-form reference paths."""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Ensemble
from .errors import DomainError

KINDS = ("random-uniform", "cap-clustered", "circular-exact", "appendixB")


def _unit_rows(a):
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def _tangent_velocities(rng, x, speed):
    v = rng.normal(size=x.shape)
    v -= np.einsum("ij,ij->i", v, x)[:, None] * x
    v = _unit_rows(v) * speed
    # one more projection pass brings tangency down to rounding level
    v -= np.einsum("ij,ij->i", v, x)[:, None] * x
    return v


def random_admissible(n, seed=0, speed=1.0):
    """Positions uniform on the sphere, tangent velocities of magnitude ``speed``."""
    if n < 1:
        raise DomainError("need at least one agent")
    rng = np.random.default_rng(seed)
    x = _unit_rows(rng.normal(size=(n, 3)))
    return Ensemble(x, _tangent_velocities(rng, x, speed), 0.0)


def _frame(center):
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(c, e1), c


def cap_clustered(n, center=(0.0, 0.0, 1.0), radius=0.3, seed=0, speed=0.1):
    """Positions uniform on the spherical cap of angular ``radius`` about ``center``."""
    if not 0 < radius <= math.pi / 2:
        raise DomainError("cap radius must lie in (0, pi/2]")
    rng = np.random.default_rng(seed)
    cos_t = rng.uniform(math.cos(radius), 1.0, size=n)
    phi = rng.uniform(0.0, 2 * math.pi, size=n)
    sin_t = np.sqrt(1.0 - cos_t ** 2)
    e1, e2, c = _frame(center)
    x = (sin_t * np.cos(phi))[:, None] * e1 + (sin_t * np.sin(phi))[:, None] * e2 + cos_t[:, None] * c
    x = _unit_rows(x)
    if speed == 0:
        return Ensemble(x, np.zeros_like(x), 0.0)
    return Ensemble(x, _tangent_velocities(rng, x, speed), 0.0)


def circular_exact(alphas, t=0.0):
    """Unit-speed rotation about the z axis with phases ``alphas`` (exact at sigma = 0)."""
    a = np.asarray(alphas, dtype=float).reshape(-1) + t
    zero = np.zeros_like(a)
    x = np.stack([np.cos(a), np.sin(a), zero], axis=1)
    v = np.stack([-np.sin(a), np.cos(a), zero], axis=1)
    return Ensemble(x, v, t)


def circular_acceleration(alphas, t=0.0):
    """Analytic second derivative of :func:`circular_exact`."""
    return -circular_exact(alphas, t).x


def appendixB_state(t):
    """Two-agent kinematic path approaching an antipodal pair as t -> 0+.

    ``x2`` sits at the north pole; ``x1`` spirals into the south pole with
    horizontal radius t^2 and angle 1/sqrt(t).  Returns ``(x1, x2, v1)`` with
    ``v1 = dx1/dt`` differentiated by hand.
    """
    t = float(t)
    if not 0.0 < t < 1.0:
        raise DomainError("path defined for 0 < t < 1")
    s = 1.0 / math.sqrt(t)
    sn, cs = math.sin(s), math.cos(s)
    t2 = t * t
    root = math.sqrt(1.0 - t2 * t2)
    x1 = np.array([t2 * sn, -t2 * cs, -root])
    x2 = np.array([0.0, 0.0, 1.0])
    half_sqrt = 0.5 * math.sqrt(t)
    v1 = np.array([2.0 * t * sn - half_sqrt * cs,
                   -2.0 * t * cs - half_sqrt * sn,
                   2.0 * t2 * t / root])
    return x1, x2, v1


def appendixB_trajectory(times):
    """The two-agent collapse path sampled at ``times``, packed as a trajectory (x2 at rest)."""
    from .integrator import Trajectory

    times = np.asarray(times, dtype=float)
    x = np.empty((len(times), 2, 3))
    v = np.zeros((len(times), 2, 3))
    for k, t in enumerate(times):
        x[k, 0], x[k, 1], v[k, 0] = appendixB_state(t)
    return Trajectory(params=None, t=times, x=x, v=v)


@dataclass
class ScenarioSpec:
    kind: str = "random-uniform"
    n: int = 3
    seed: int = 0
    speed: float = 1.0
    center: tuple = (0.0, 0.0, 1.0)
    radius: float = 0.3
    alphas: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown scenario kind {self.kind!r}")
        self.center = tuple(float(c) for c in self.center)
        self.alphas = tuple(float(a) for a in self.alphas)
        if self.kind == "circular-exact":
            if not self.alphas:
                self.alphas = tuple(math.pi * k / self.n for k in range(self.n))
            self.n = len(self.alphas)

    def build(self):
        if self.kind == "random-uniform":
            return random_admissible(self.n, self.seed, self.speed)
        if self.kind == "cap-clustered":
            return cap_clustered(self.n, self.center, self.radius, self.seed, self.speed)
        if self.kind == "circular-exact":
            return circular_exact(self.alphas, 0.0)
        raise DomainError("appendixB is a kinematic path, not an initial ensemble")

    def to_dict(self):
        # every field is written, including ones the kind ignores, so that
        # loading a dumped spec gives back an equal object
        return {"kind": self.kind, "n": self.n, "seed": self.seed, "speed": self.speed,
                "center": list(self.center), "radius": self.radius, "alphas": list(self.alphas)}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
