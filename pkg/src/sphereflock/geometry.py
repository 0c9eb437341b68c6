"""Rotation (parallel transport) between points of the unit sphere.

All functions accept single vectors of shape ``(3,)`` or stacks of shape
``(..., 3)`` and broadcast over the leading axes.  Inputs are expected to be
unit vectors already; nothing here renormalises positions.
"""

import numpy as np
from numba import njit

from .errors import AntipodalError, DomainError

EPS_ANTI = 1e-8   # ||x1 + x2|| at or below this counts as antipodal
EPS_SAME = 1e-12  # ||x1 - x2|| at or below this uses R = I
TAU_GEO = 1e-9    # unit-norm tolerance on positions


def _as_vec(a, name):
    a = np.asarray(a, dtype=float)
    if a.shape[-1:] != (3,):
        raise DomainError(f"{name} must have trailing dimension 3, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite values")
    return a


def _check_unit(x, name):
    dev = np.abs(np.linalg.norm(x, axis=-1) - 1.0)
    if np.any(dev > TAU_GEO):
        raise DomainError(f"{name} is not a unit vector (|norm - 1| = {dev.max():.3e})")


def dot(a, b):
    return np.einsum("...k,...k->...", a, b)


def skew(u):
    """Cross-product matrix ``[u]`` with ``[u] @ v == cross(u, v)``."""
    u = np.asarray(u, dtype=float)
    K = np.zeros(u.shape[:-1] + (3, 3))
    K[..., 0, 1] = -u[..., 2]
    K[..., 0, 2] = u[..., 1]
    K[..., 1, 0] = u[..., 2]
    K[..., 1, 2] = -u[..., 0]
    K[..., 2, 0] = -u[..., 1]
    K[..., 2, 1] = u[..., 0]
    return K


def tangent_project(x, v):
    """Remove the component of ``v`` along the unit vector ``x``."""
    x = _as_vec(x, "x")
    v = _as_vec(v, "v")
    _check_unit(x, "x")
    return v - dot(v, x)[..., None] * x


def _pair_frame(x1, x2):
    x1 = _as_vec(x1, "x1")
    x2 = _as_vec(x2, "x2")
    _check_unit(x1, "x1")
    _check_unit(x2, "x2")
    anti = np.linalg.norm(x1 + x2, axis=-1) <= EPS_ANTI
    if np.any(anti):
        raise AntipodalError("rotation between antipodal points is undefined")
    same = np.linalg.norm(x1 - x2, axis=-1) <= EPS_SAME
    w = np.cross(x1, x2)
    nw = np.linalg.norm(w, axis=-1)
    u = w / np.where(same, 1.0, nw)[..., None]
    return x1, x2, u, nw, same


def rotation_matrix(x1, x2):
    """Rotation matrix R(x1, x2) carrying ``x1`` to ``x2`` about ``x1 x x2``.

    Built from the inner/outer-product form
    ``<x1,x2> I - x1 x2^T + x2 x1^T + (1 - <x1,x2>) u u^T``
    with ``u`` the normalised cross product.  Coincident points give the
    identity.

    Raises
    ------
    AntipodalError
        If ``||x1 + x2|| <= EPS_ANTI`` for any pair.
    """
    x1, x2, u, _, same = _pair_frame(x1, x2)
    c = dot(x1, x2)[..., None, None]
    eye = np.broadcast_to(np.eye(3), c.shape[:-2] + (3, 3))
    R = (c * eye
         - x1[..., :, None] * x2[..., None, :]
         + x2[..., :, None] * x1[..., None, :]
         + (1.0 - c) * u[..., :, None] * u[..., None, :])
    return np.where(same[..., None, None], eye, R)


def rotation_matrix_rodrigues(x1, x2):
    """Same rotation via the axis-angle form cos(t) I + sin(t) [u] + (1 - cos(t)) u u^T."""
    x1, x2, u, nw, same = _pair_frame(x1, x2)
    theta = np.arctan2(nw, dot(x1, x2))[..., None, None]
    eye = np.broadcast_to(np.eye(3), theta.shape[:-2] + (3, 3))
    R = (np.cos(theta) * eye
         + np.sin(theta) * skew(u)
         + (1.0 - np.cos(theta)) * u[..., :, None] * u[..., None, :])
    return np.where(same[..., None, None], eye, R)


def rotate(x1, x2, v):
    """Apply R(x1, x2) to ``v``; the result has the same norm as ``v``."""
    R = rotation_matrix(x1, x2)
    return np.einsum("...ij,...j->...i", R, _as_vec(v, "v"))


def _transport_terms(x_to, x_from, v):
    # R(x_from, x_to) v written without matrices:
    #   c v - x_from <x_to, v> + x_to <x_from, v> + w <w, v> / (1 + c),  w = x_from x x_to
    # where 1 + c = ||x_to + x_from||^2 / 2 holds for unit vectors and is
    # better conditioned near antipodal pairs than 1 + <x_to, x_from>.
    c = dot(x_to, x_from)
    s2 = dot(x_to + x_from, x_to + x_from)
    anti = np.sqrt(s2) <= EPS_ANTI
    same = np.linalg.norm(x_to - x_from, axis=-1) <= EPS_SAME
    w = np.cross(x_from, x_to)
    linear = (c[..., None] * v
              - x_from * dot(x_to, v)[..., None]
              + x_to * dot(x_from, v)[..., None])
    linear = np.where(same[..., None], v, linear)
    inv_half_s2 = np.where(anti | same, 0.0, 2.0 / np.where(anti, 1.0, s2))
    return linear, w * (dot(w, v) * inv_half_s2)[..., None], anti


def transport(x_to, x_from, v):
    """Parallel transport ``R(x_from, x_to) v`` with zero returned at antipodal pairs.

    This is the batched, matrix-free counterpart of :func:`rotate`; callers
    that need the transported vector near an antipodal pair should multiply
    by a factor vanishing there (a weight or ``||x_to + x_from||``).
    """
    x_to = _as_vec(x_to, "x_to")
    x_from = _as_vec(x_from, "x_from")
    v = _as_vec(v, "v")
    linear, quad, anti = _transport_terms(x_to, x_from, v)
    return np.where(anti[..., None], 0.0, linear + quad)


def weighted_transport(x1, x2, v, psi):
    """psi(||x1 - x2||) R(x2 -> x1) v, extended by zero at antipodal pairs.

    ``psi`` is any callable mapping distances in [0, 2] to weights, e.g. a
    :class:`~sphereflock.dynamics.CommWeight`.  Total on unit inputs.
    """
    x1 = _as_vec(x1, "x1")
    x2 = _as_vec(x2, "x2")
    v = _as_vec(v, "v")
    r = np.clip(np.linalg.norm(x1 - x2, axis=-1), 0.0, 2.0)
    weight = np.asarray(psi(r), dtype=float)
    linear, quad, anti = _transport_terms(x1, x2, v)
    weight = np.where(anti, 0.0, weight)
    return weight[..., None] * (linear + quad)


# -- compiled per-pair kernels used by the time stepper ------------------------

WEIGHT_QUADRATIC, WEIGHT_LINEAR, WEIGHT_TABLE = 0, 1, 2


@njit(cache=True, inline="always")
def _psi_scalar(r, kind, kappa, table_r, table_p):
    if kind == WEIGHT_QUADRATIC:
        return (4.0 - r * r) / 4.0
    if kind == WEIGHT_LINEAR:
        return kappa * (2.0 - r)
    # piecewise-linear table; np.interp here costs more than the whole pair update
    k = 1
    while k < table_r.shape[0] - 1 and table_r[k] < r:
        k += 1
    frac = (r - table_r[k - 1]) / (table_r[k] - table_r[k - 1])
    return table_p[k - 1] + frac * (table_p[k] - table_p[k - 1])


@njit(cache=True, inline="always")
def transport_accumulate(x, v, i, j, kind, kappa, table_r, table_p, out):
    """Add psi_ij (R_{x_j -> x_i} v_j - v_i) to ``out``; no-op at antipodal pairs.

    Scalar counterpart of :func:`weighted_transport` minus the ``psi_ij v_i``
    term, written out component-wise for the integrator's inner loop.
    """
    xi0, xi1, xi2 = x[i, 0], x[i, 1], x[i, 2]
    xj0, xj1, xj2 = x[j, 0], x[j, 1], x[j, 2]
    vj0, vj1, vj2 = v[j, 0], v[j, 1], v[j, 2]
    s0 = xi0 + xj0
    s1 = xi1 + xj1
    s2_ = xi2 + xj2
    s2 = s0 * s0 + s1 * s1 + s2_ * s2_
    if np.sqrt(s2) <= EPS_ANTI:
        return
    d0 = xi0 - xj0
    d1 = xi1 - xj1
    d2 = xi2 - xj2
    r = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    if r > 2.0:
        r = 2.0
    psi = _psi_scalar(r, kind, kappa, table_r, table_p)
    if r <= EPS_SAME:
        out[0] += psi * (vj0 - v[i, 0])
        out[1] += psi * (vj1 - v[i, 1])
        out[2] += psi * (vj2 - v[i, 2])
        return
    c = xi0 * xj0 + xi1 * xj1 + xi2 * xj2
    a = xi0 * vj0 + xi1 * vj1 + xi2 * vj2
    b = xj0 * vj0 + xj1 * vj1 + xj2 * vj2
    # w = x_j x x_i
    w0 = xj1 * xi2 - xj2 * xi1
    w1 = xj2 * xi0 - xj0 * xi2
    w2 = xj0 * xi1 - xj1 * xi0
    q = (w0 * vj0 + w1 * vj1 + w2 * vj2) * 2.0 / s2
    out[0] += psi * (c * vj0 - xj0 * a + xi0 * b + w0 * q - v[i, 0])
    out[1] += psi * (c * vj1 - xj1 * a + xi1 * b + w1 * q - v[i, 1])
    out[2] += psi * (c * vj2 - xj2 * a + xi2 * b + w2 * q - v[i, 2])
