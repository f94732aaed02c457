import math

import numpy as np
import pytest

from ctxlab.error_handling import ArgumentError, InvariantError
from ctxlab.operator_algebra import ProductObservable
from ctxlab.pm_square import Line
from ctxlab.measurement_sim import (
    EstimateReport,
    MeasurementRecord,
    MeasurementSetup,
    NoiseModel,
    agreement_pvalue,
    attenuation,
    c3_setup,
    estimate,
    estimate_chi,
    flip_probability_for,
    gamma_from_estimates,
    line_stream,
    measure_once,
    r3_setup,
    record_stream,
    run_setup,
    setup_for_line,
)
from ctxlab.states import (
    Ensemble,
    PureState,
    RandomStateConfig,
    basis_state,
    expectation,
    random_state,
    to_density,
)

ZX = ProductObservable.parse("ZX")
ZZ = ProductObservable.parse("ZZ")
ZI = ProductObservable.parse("ZI")


def test_deterministic_outcome_ignores_random_number(singlet_rho):
    for u in (0.0, 0.5, 0.999999):
        outcome, post = measure_once(singlet_rho, ZZ, u)
        assert outcome == -1
        np.testing.assert_allclose(post.rho, singlet_rho.rho, atol=1e-12)


def test_basis_state_measurement():
    outcome, _ = measure_once(to_density(basis_state("00")), ZI, 0.99)
    assert outcome == 1


def test_post_state_is_eigenstate(singlet_rho):
    plus, post_plus = measure_once(singlet_rho, ZX, 0.2)
    minus, post_minus = measure_once(singlet_rho, ZX, 0.8)
    assert (plus, minus) == (1, -1)
    assert expectation(post_plus, ZX) == pytest.approx(1.0, abs=1e-12)
    assert expectation(post_minus, ZX) == pytest.approx(-1.0, abs=1e-12)


def test_setup_requires_commuting_triple():
    with pytest.raises(ArgumentError):
        MeasurementSetup("bad", (ZX, ProductObservable.parse("XX"), ProductObservable.parse("YY")))
    with pytest.raises(ArgumentError):
        MeasurementSetup("short", (ZX, ZZ))


def test_setup_for_line():
    assert [o.label for o in r3_setup().sequence] == ["ZX", "XZ", "YY"]
    assert [o.label for o in c3_setup().sequence] == ["ZZ", "XX", "YY"]
    assert setup_for_line(Line.R1).label == "R1_setup"
    with pytest.raises(ArgumentError):
        r3_setup().reordered((0, 0, 1))


@pytest.mark.parametrize("line", list(Line))
def test_noiseless_products_are_deterministic_in_every_order(line):
    rho = random_state(RandomStateConfig(seed=11, ensemble=Ensemble.GINIBRE_MIXED))
    expected = -1 if line is Line.C3 else 1
    rng = np.random.default_rng(5)
    for setup in setup_for_line(line).orderings():
        for _ in range(10):
            assert run_setup(rho, setup, NoiseModel(0.0), rng).product == expected


def test_record_product_invariant():
    with pytest.raises(InvariantError):
        MeasurementRecord("R3_setup", (1, 1, -1), 1)


def test_run_setup_matches_first_shot_of_stream(singlet_rho):
    noise = NoiseModel(0.2)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=9, spawn_key=(0,)))
    single = run_setup(singlet_rho, r3_setup(), noise, rng)
    first = next(record_stream(singlet_rho, r3_setup(), noise, shots=1, seed=9, block_size=1))
    assert single == first


def test_record_stream_agrees_with_estimate(singlet_rho):
    noise = NoiseModel(0.1)
    records = list(record_stream(singlet_rho, c3_setup(), noise, shots=3000, seed=4, block_size=500))
    assert len(records) == 3000
    report = estimate(singlet_rho, c3_setup(), noise, shots=3000, seed=4, block_size=500)
    assert report.mean_product == sum(r.product for r in records) / 3000


@pytest.mark.parametrize("q", [-0.1, 0.51, float("nan")])
def test_noise_model_range(q):
    with pytest.raises(ArgumentError):
        NoiseModel(q)


def test_attenuation():
    assert attenuation(0.0) == 1.0
    assert attenuation(0.5) == 0.0
    assert attenuation(0.01741) == pytest.approx(0.8991, abs=1e-4)
    q = flip_probability_for(0.90)
    assert q == pytest.approx(0.017255, abs=1e-6)
    assert attenuation(q) == pytest.approx(0.90, abs=1e-12)
    with pytest.raises(ArgumentError):
        flip_probability_for(0.0)


def test_noiseless_estimate_is_exact(singlet_rho):
    r3 = estimate(singlet_rho, r3_setup(), NoiseModel(0.0), shots=20000, seed=1, stream=line_stream(Line.R3))
    c3 = estimate(singlet_rho, c3_setup(), NoiseModel(0.0), shots=20000, seed=1, stream=line_stream(Line.C3))
    assert (r3.mean_product, r3.standard_error) == (1.0, 0.0)
    assert (c3.mean_product, c3.standard_error) == (-1.0, 0.0)
    assert gamma_from_estimates(r3, c3) == (3.0, 0.0)


def test_first_outcome_is_unbiased_on_singlet(singlet_rho):
    report = estimate(singlet_rho, r3_setup(), NoiseModel(0.0), shots=20000, seed=2)
    assert abs(report.outcome_means[0]) <= 4 * report.outcome_errors[0]


def test_single_shot_has_zero_error(singlet_rho):
    report = estimate(singlet_rho, r3_setup(), NoiseModel(0.3), shots=1, seed=0)
    assert report.shots == 1
    assert report.standard_error == 0.0


@pytest.mark.parametrize("kwargs", [{"shots": 0}, {"shots": 10, "block_size": 0}])
def test_estimate_argument_validation(singlet_rho, kwargs):
    with pytest.raises(ArgumentError):
        estimate(singlet_rho, r3_setup(), NoiseModel(0.0), seed=0, **{"shots": 10, **kwargs})


def test_noise_attenuates_product(singlet_rho):
    q = 0.1
    report = estimate(singlet_rho, r3_setup(), NoiseModel(q), shots=200_000, seed=42)
    assert abs(report.mean_product - attenuation(q)) <= 4 * report.standard_error


def test_full_flip_noise_erases_signal(singlet_rho):
    report = estimate(singlet_rho, c3_setup(), NoiseModel(0.5), shots=100_000, seed=42)
    assert abs(report.mean_product) <= 4 * report.standard_error


def test_estimate_independent_of_worker_count(singlet_rho):
    kwargs = dict(shots=50_000, seed=123, block_size=4096)
    serial = estimate(singlet_rho, r3_setup(), NoiseModel(0.05), workers=1, **kwargs)
    parallel = estimate(singlet_rho, r3_setup(), NoiseModel(0.05), workers=4, **kwargs)
    assert serial == parallel


def test_seed_changes_noisy_results(singlet_rho):
    a = estimate(singlet_rho, r3_setup(), NoiseModel(0.1), shots=5000, seed=1)
    b = estimate(singlet_rho, r3_setup(), NoiseModel(0.1), shots=5000, seed=2)
    assert a != b


def test_noiseless_chi_is_six(singlet_rho):
    chi, sigma, reports = estimate_chi(singlet_rho, NoiseModel(0.0), shots=2000, seed=3)
    assert chi == 6.0
    assert sigma == 0.0
    assert set(reports) == set(Line)


def test_pure_state_input_accepted():
    psi = PureState.from_unnormalized([1, 0, 0, 1])
    report = estimate(psi, c3_setup(), NoiseModel(0.0), shots=100, seed=0)
    assert report.mean_product == -1.0


@pytest.mark.slow
def test_readout_noise_reproduces_published_attenuation(singlet_rho):
    noise = NoiseModel(flip_probability_for(0.90))
    r3 = estimate(singlet_rho, r3_setup(), noise, shots=1_000_000, seed=42, stream=line_stream(Line.R3))
    c3 = estimate(singlet_rho, c3_setup(), noise, shots=1_000_000, seed=42, stream=line_stream(Line.C3))
    assert abs(r3.mean_product - 0.90) <= 4 * r3.standard_error
    assert abs(c3.mean_product + 0.90) <= 4 * c3.standard_error
    gamma, sigma = gamma_from_estimates(r3, c3)
    assert abs(gamma - 2.80) <= 4 * sigma
    assert (gamma - 1) / sigma > 5


def test_noiseless_setups_are_deterministic_for_random_states():
    for i in range(100):
        ensemble = Ensemble.HAAR_PURE if i % 2 else Ensemble.GINIBRE_MIXED
        rho = random_state(RandomStateConfig(seed=42, ensemble=ensemble, stream=(i,)))
        r3 = estimate(rho, r3_setup(), NoiseModel(0.0), shots=10_000, seed=i)
        c3 = estimate(rho, c3_setup(), NoiseModel(0.0), shots=10_000, seed=i)
        assert (r3.mean_product, r3.standard_error) == (1.0, 0.0)
        assert (c3.mean_product, c3.standard_error) == (-1.0, 0.0)


def test_attenuated_means_match_target(singlet_rho):
    noise = NoiseModel(flip_probability_for(0.90))
    r3 = estimate(singlet_rho, r3_setup(), noise, shots=100_000, seed=42, stream=line_stream(Line.R3))
    c3 = estimate(singlet_rho, c3_setup(), noise, shots=100_000, seed=42, stream=line_stream(Line.C3))
    assert abs(r3.mean_product - 0.90) <= 3 * r3.standard_error
    assert abs(c3.mean_product + 0.90) <= 3 * c3.standard_error


@pytest.mark.parametrize("order", [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)])
def test_measurement_order_does_not_matter(order):
    rho = random_state(RandomStateConfig(seed=8, ensemble=Ensemble.GINIBRE_MIXED))
    setup = r3_setup().reordered(order)
    report = estimate(rho, setup, NoiseModel(0.05), shots=100_000, seed=17)
    assert abs(report.mean_product - attenuation(0.05)) <= 4 * report.standard_error


@pytest.mark.parametrize("setup", [r3_setup(), c3_setup()], ids=["R3", "C3"])
def test_each_outcome_matches_expectation_on_mixed_state(setup):
    state = random_state(RandomStateConfig(seed=17, ensemble=Ensemble.GINIBRE_MIXED))
    q = 0.05
    report = estimate(state, setup, NoiseModel(q), shots=100_000, seed=29)
    for o, mean, se in zip(setup.sequence, report.outcome_means, report.outcome_errors):
        predicted = (1 - 2 * q) * expectation(state, o)
        assert se > 0
        assert abs(mean - predicted) <= 4 * se


def test_wrong_sign_count():
    report = EstimateReport(setup="R3_setup", shots=5, mean_product=0.6, standard_error=0.4)
    assert report.wrong_sign_count(1) == 1
    assert report.wrong_sign_count(-1) == 4


def test_product_flip_probability():
    assert NoiseModel(0.0).product_flip_probability == 0.0
    assert NoiseModel(0.5).product_flip_probability == 0.5
    assert NoiseModel(0.01).product_flip_probability == pytest.approx((1 - 0.98 ** 3) / 2)


def test_noiseless_agreement_is_exact():
    clean = EstimateReport(setup="R3_setup", shots=10, mean_product=1.0, standard_error=0.0)
    one_wrong = EstimateReport(setup="R3_setup", shots=10, mean_product=0.8, standard_error=0.13)
    assert agreement_pvalue({Line.R3: clean}, NoiseModel(0.0)) == 1.0
    assert agreement_pvalue({Line.R3: one_wrong}, NoiseModel(0.0)) == 0.0


@pytest.mark.parametrize("shots, q", [(5, 0.01), (1000, 0.0001)])
@pytest.mark.parametrize("seed", range(10))
def test_few_noisy_shots_agree_with_noise_model(singlet_rho, shots, q, seed):
    noise = NoiseModel(q)
    reports = {
        line: estimate(singlet_rho, setup_for_line(line), noise, shots=shots, seed=seed, stream=line_stream(line))
        for line in (Line.R3, Line.C3)
    }
    threshold = math.erfc(4 / math.sqrt(2))
    for line, report in reports.items():
        assert agreement_pvalue({line: report}, noise) >= threshold
    assert agreement_pvalue(reports, noise) >= threshold


def test_all_shots_agreeing_under_noise_is_not_a_failure():
    # zero spread does not make a noisy mean exact
    report = EstimateReport(setup="R3_setup", shots=1000, mean_product=1.0, standard_error=0.0)
    assert agreement_pvalue({Line.R3: report}, NoiseModel(0.0001)) == 1.0


def test_gross_disagreement_is_detected():
    report = EstimateReport(setup="C3_setup", shots=1000, mean_product=-0.5, standard_error=0.03)
    assert agreement_pvalue({Line.C3: report}, NoiseModel(0.01)) < 1e-12
