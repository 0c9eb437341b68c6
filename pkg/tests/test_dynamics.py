import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphereflock import dynamics as dyn
from sphereflock.dynamics import CommWeight, Ensemble, SimParams
from sphereflock.errors import DomainError
from sphereflock.scenarios import circular_exact, random_admissible

E1, E2, E3 = np.eye(3)
EX_ALPHAS = (0.0, math.pi / 3, 2 * math.pi / 3)


@pytest.mark.parametrize("kind, kappa, r, expected", [
    ("quadratic", 1.0, 2.0, 0.0),
    ("quadratic", 1.0, 0.0, 1.0),
    ("linear", 1.0, 1.0, 1.0),
    ("linear", 3.0, 0.5, 4.5),
])
def test_weight_values(kind, kappa, r, expected):
    assert dyn.weight_eval(CommWeight(kind, kappa=kappa), r) == pytest.approx(expected, abs=1e-15)


def test_weight_out_of_range():
    psi = CommWeight()
    with pytest.raises(DomainError):
        psi(2.1)
    with pytest.raises(DomainError):
        psi(-0.5)
    assert psi(2.0 + 1e-13) == 0.0


def test_custom_table():
    psi = CommWeight("custom-table", table=((0.0, 1.0), (1.0, 0.5), (2.0, 0.0)))
    np.testing.assert_allclose(psi(np.array([0.0, 0.5, 1.0, 1.5, 2.0])), [1.0, 0.75, 0.5, 0.25, 0.0])
    np.testing.assert_allclose(psi.derivative(np.array([0.2, 1.8])), [-0.5, -0.5])
    with pytest.raises(DomainError):
        CommWeight("custom-table", table=((0.0, 1.0), (2.0, 0.5)))
    with pytest.raises(DomainError):
        CommWeight("custom-table", table=((0.0, 0.2), (1.0, 0.5), (2.0, 0.0)))


def test_unknown_weight_kind():
    with pytest.raises(DomainError):
        CommWeight("cubic")
    with pytest.raises(DomainError):
        CommWeight("linear", kappa=0.0)


@pytest.mark.parametrize("psi", [CommWeight(), CommWeight("linear", kappa=2.0),
                                 CommWeight("custom-table", table=((0.0, 1.0), (1.5, 0.4), (2.0, 0.0)))])
def test_weight_roundtrip(psi):
    assert CommWeight.from_dict(psi.to_dict()) == psi


@given(st.floats(0.0, 2.0))
def test_weight_derivative_matches_fd(r):
    psi = CommWeight()
    h = 1e-6
    lo, hi = max(r - h, 0.0), min(r + h, 2.0)
    assert (psi(hi) - psi(lo)) / (hi - lo) == pytest.approx(float(psi.derivative(r)), abs=1e-6)


def test_centripetal_examples():
    np.testing.assert_array_equal(dyn.centripetal_force(E1, E2), [-1.0, 0.0, 0.0])
    np.testing.assert_array_equal(dyn.centripetal_force(E1, np.zeros(3)), np.zeros(3))
    np.testing.assert_array_equal(dyn.centripetal_force(E3, [2.0, 0.0, 0.0]), [0.0, 0.0, -4.0])


def test_bonding_examples():
    ens = Ensemble(np.array([E1, E2]), np.zeros((2, 3)))
    np.testing.assert_array_equal(dyn.bonding_force(ens, 0.0), np.zeros((2, 3)))
    np.testing.assert_allclose(dyn.bonding_force(ens, 1.0, 0), [0.0, 0.5, 0.0])
    same = Ensemble(np.array([E3, E3, E3]), np.zeros((3, 3)))
    np.testing.assert_array_equal(dyn.bonding_force(same, 5.0), np.zeros((3, 3)))


def test_alignment_examples():
    psi = CommWeight()
    single = Ensemble(np.array([E1]), np.array([E2]))
    np.testing.assert_array_equal(dyn.alignment_force(single, psi), np.zeros((1, 3)))
    np.testing.assert_allclose(dyn.alignment_force(circular_exact(EX_ALPHAS), psi), 0.0, atol=1e-15)
    anti = Ensemble(np.array([E1, -E1]), np.array([E2, E3]))
    np.testing.assert_array_equal(dyn.alignment_force(anti, psi), np.zeros((2, 3)))


def test_rhs_example_circular():
    ens = circular_exact(EX_ALPHAS)
    dx, dv = dyn.rhs(ens, SimParams(n=3))
    np.testing.assert_array_equal(dx, ens.v)
    np.testing.assert_allclose(dv, -ens.x, atol=1e-15)


def test_rhs_rest_state():
    ens = Ensemble(np.array([E3]), np.zeros((1, 3)))
    dx, dv = dyn.rhs(ens, SimParams(n=1, sigma=2.0))
    assert not dx.any() and not dv.any()


@given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1), st.floats(0.0, 10.0))
def test_rhs_tangency_residual(n, seed, sigma):
    ens = random_admissible(n, seed)
    _, dv = dyn.rhs(ens, SimParams(n=n, sigma=sigma))
    residual = np.einsum("ij,ij->i", ens.x, dv) + np.einsum("ij,ij->i", ens.v, ens.v)
    assert np.abs(residual).max() < 1e-9


@pytest.mark.parametrize("psi", [CommWeight(), CommWeight("linear", kappa=0.7),
                                 CommWeight("custom-table", table=((0.0, 1.0), (0.5, 0.9), (2.0, 0.0)))])
def test_compiled_kernel_matches_numpy(psi):
    ens = random_admissible(7, seed=4)
    sigma = 1.3
    reference = (dyn.centripetal_force(ens.x, ens.v) + dyn.alignment_force(ens, psi)
                 + dyn.bonding_force(ens, sigma))
    np.testing.assert_allclose(dyn.acceleration(ens.x, ens.v, sigma, psi), reference, atol=1e-13)


def test_compiled_kernel_antipodal_pair():
    x = np.array([E1, -E1])
    v = np.array([E2, E3])
    out = dyn.acceleration(x, v, 0.0, CommWeight())
    np.testing.assert_allclose(out, dyn.centripetal_force(x, v), atol=1e-15)


def test_rhs_rejects_nonfinite():
    ens = Ensemble(np.array([E1]), np.array([[0.0, np.inf, 0.0]]))
    with pytest.raises(DomainError):
        dyn.rhs(ens, SimParams(n=1))


@pytest.mark.parametrize("kwargs", [dict(n=0), dict(dt=0.0), dict(sigma=-1.0),
                                    dict(t_end=-1.0), dict(record_every=0)])
def test_simparams_validation(kwargs):
    with pytest.raises(DomainError):
        SimParams(**kwargs)


def test_simparams_roundtrip():
    p = SimParams(n=4, sigma=2.5, weight=CommWeight("linear", kappa=0.5), dt=2e-3, seed=9)
    assert SimParams.from_dict(p.to_dict()) == p
