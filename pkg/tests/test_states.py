import numpy as np
import pytest

from ctxlab.error_handling import ArgumentError, StateValidationError
from ctxlab.operator_algebra import ProductObservable, all_product_observables
from ctxlab.pm_square import Line
from ctxlab.states import (
    DensityMatrix,
    Ensemble,
    PureState,
    RandomStateConfig,
    basis_state,
    expectation,
    expectation_line,
    maximally_mixed,
    random_state,
    singlet,
    to_density,
)


def test_singlet_amplitudes():
    psi = singlet()
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(psi.amplitudes, [0, s, -s, 0])
    assert abs(psi.norm - 1) < 1e-12


@pytest.mark.parametrize("label,value", [
    ("ZZ", -1.0), ("XX", -1.0), ("YY", -1.0),
    ("ZI", 0.0), ("IX", 0.0), ("ZX", 0.0),
])
def test_singlet_expectations(singlet_rho, label, value):
    assert expectation(singlet_rho, ProductObservable.parse(label)) == pytest.approx(value, abs=1e-12)


def test_basis_state_order():
    np.testing.assert_array_equal(basis_state("01").amplitudes, [0, 1, 0, 0])
    assert expectation(to_density(basis_state("10")), ProductObservable.parse("ZI")) == pytest.approx(-1.0)
    with pytest.raises(ArgumentError):
        basis_state("2")


def test_unnormalized_vector_rejected():
    with pytest.raises(StateValidationError):
        PureState(np.array([1, 1, 0, 0]))
    psi = PureState.from_unnormalized([1, 1, 0, 0])
    assert psi.norm == pytest.approx(1.0)
    with pytest.raises(StateValidationError):
        PureState.from_unnormalized([0, 0, 0, 0])


@pytest.mark.parametrize("rho", [
    np.diag([0.5, 0.5, 0.5, 0.5]),                    # trace 2
    np.diag([1.2, -0.2, 0.0, 0.0]),                   # negative eigenvalue
    np.array([[0.5, 0.1, 0, 0], [0.3, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]),  # not Hermitian
    np.eye(2) / 2,                                    # wrong shape
])
def test_invalid_density_matrices(rho):
    with pytest.raises(StateValidationError):
        DensityMatrix(rho)


def test_maximally_mixed():
    rho = maximally_mixed()
    assert rho.purity == pytest.approx(0.25)
    assert rho.min_eigenvalue == pytest.approx(0.25)


def test_mix(singlet_rho):
    mixed = singlet_rho.mix(maximally_mixed(), 0.5)
    assert 0.25 < mixed.purity < 1.0
    with pytest.raises(ArgumentError):
        singlet_rho.mix(maximally_mixed(), 1.5)


@pytest.mark.parametrize("state", [
    to_density(singlet()),
    maximally_mixed(),
    to_density(basis_state("00")),
    to_density(PureState.from_unnormalized([1, 2j, -0.5, 0.25 + 1j])),
])
def test_line_expectations_are_state_independent(state):
    for line in Line:
        expected = -1.0 if line is Line.C3 else 1.0
        assert expectation_line(state, line) == pytest.approx(expected, abs=1e-12)


def test_random_state_is_reproducible():
    cfg = RandomStateConfig(seed=7, ensemble=Ensemble.GINIBRE_MIXED, stream=(1, 3))
    np.testing.assert_array_equal(random_state(cfg).rho, random_state(cfg).rho)
    other = RandomStateConfig(seed=7, ensemble=Ensemble.GINIBRE_MIXED, stream=(1, 4))
    assert not np.array_equal(random_state(cfg).rho, random_state(other).rho)


def test_haar_states_are_pure():
    for i in range(20):
        rho = random_state(RandomStateConfig(seed=42, ensemble=Ensemble.HAAR_PURE, stream=(0, i)))
        assert rho.purity == pytest.approx(1.0, abs=1e-10)


def test_ginibre_states_are_valid_and_mixed():
    for i in range(20):
        rho = random_state(RandomStateConfig(seed=42, ensemble=Ensemble.GINIBRE_MIXED, stream=(1, i)))
        assert np.trace(rho.rho).real == pytest.approx(1.0, abs=1e-10)
        assert rho.min_eigenvalue >= -1e-10
        assert 0.25 - 1e-10 <= rho.purity < 1.0


def test_rank_one_ensemble_is_pure():
    rho = random_state(RandomStateConfig(seed=3, ensemble=Ensemble.RANK_LIMITED, rank=1))
    assert rho.purity == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kwargs", [
    {"seed": -1},
    {"seed": 2 ** 64},
    {"seed": 1, "rank": 0},
    {"seed": 1, "rank": 5},
])
def test_random_state_config_validation(kwargs):
    with pytest.raises(ArgumentError):
        RandomStateConfig(**kwargs)


def test_expectation_is_linear_in_the_state():
    a = random_state(RandomStateConfig(seed=1, ensemble=Ensemble.HAAR_PURE))
    b = random_state(RandomStateConfig(seed=2, ensemble=Ensemble.GINIBRE_MIXED))
    mixed = a.mix(b, 0.3)
    for label in ("ZX", "XZ", "YY", "ZI", "XX"):
        o = ProductObservable.parse(label)
        assert abs(expectation(mixed, o) - (0.3 * expectation(a, o) + 0.7 * expectation(b, o))) <= 1e-10


def test_density_tolerance_is_configurable():
    rho = np.eye(4, dtype=np.complex128) / 4 * (1 + 1e-11)
    assert DensityMatrix(rho).tol == 1e-10
    with pytest.raises(StateValidationError):
        DensityMatrix(rho, tol=1e-12)


def test_pure_state_tolerance_is_configurable():
    amps = np.array([1, 0, 0, 0], dtype=np.complex128) * (1 + 1e-12)
    PureState(amps)
    with pytest.raises(StateValidationError):
        PureState(amps, tol=1e-13)


def test_tolerance_follows_derived_states():
    cfg = RandomStateConfig(seed=3, ensemble=Ensemble.GINIBRE_MIXED)
    rho = random_state(cfg, tol=1e-8)
    assert rho.tol == 1e-8
    assert rho.mix(maximally_mixed(), 0.5).tol == 1e-8
    assert to_density(singlet(), tol=1e-6).tol == 1e-6
    with pytest.raises(StateValidationError):
        to_density(singlet(), tol=1e-300)


@pytest.mark.parametrize("ensemble", [Ensemble.HAAR_PURE, Ensemble.GINIBRE_MIXED])
def test_expectations_stay_within_unit_interval(ensemble):
    observables = list(all_product_observables())
    assert len(observables) == 16
    index = list(Ensemble).index(ensemble)
    for i in range(500):
        rho = random_state(RandomStateConfig(seed=11, ensemble=ensemble, stream=(index, i)))
        for o in observables:
            assert abs(expectation(rho, o)) <= 1 + 1e-9
