#!/usr/bin/env python3
"""
Shot-level simulation of sequential measurements of commuting triples.

One shot prepares a fresh copy of the input state, measures the three
observables of a setup in order with the Lüders update
rho -> P rho P / tr(P rho P), then flips each recorded outcome independently
with probability q.

Noise model: the line operators R3 and C3 equal ±I, so depolarizing the
prepared state leaves their products untouched. Imperfect readout is what
attenuates the product, and independent flips attenuate it by (1 - 2q)^3.

Random numbers: every shot consumes six uniforms from [0, 1), three to pick
outcomes (outcome +1 iff u < p(+1)) and three to decide flips (flip iff u < q).
Shots are grouped into blocks of ``block_size``; block k of a run draws from
``default_rng(SeedSequence(entropy=seed, spawn_key=stream + (k,)))``. Blocks
reduce through integer sums, so results do not depend on the worker count.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .error_handling import ArgumentError, InvariantError, require
from .inequalities import binomial_pvalue, chi_value, gamma_value, quadrature
from .operator_algebra import IDENTITY4, ProductObservable, commute, to_matrix
from .pm_square import EXPECTED_SIGNS, Line, PeresMerminSquare, build_square
from .states import DensityMatrix, PureState, to_density
from .sweep import partition, run_partitioned

logger = logging.getLogger(__name__)

# Branches less likely than this are never selected.
EPS_BRANCH = 1e-12
DEFAULT_BLOCK_SIZE = 8192
UNIFORMS_PER_SHOT = 6


@dataclass(frozen=True)
class MeasurementSetup:
    """An ordered triple of mutually commuting observables measured in one run."""
    label: str
    sequence: Tuple[ProductObservable, ...]

    def __post_init__(self):
        object.__setattr__(self, "sequence", tuple(self.sequence))
        if len(self.sequence) != 3:
            raise ArgumentError(f"A setup measures 3 observables, got {len(self.sequence)}")
        for a, b in combinations(self.sequence, 2):
            if not commute(to_matrix(a), to_matrix(b)):
                raise ArgumentError(f"Setup {self.label}: {a} and {b} do not commute")

    def reordered(self, order: Sequence[int]) -> "MeasurementSetup":
        """Same observables measured in a different order (a permutation of 0, 1, 2)."""
        if sorted(order) != [0, 1, 2]:
            raise ArgumentError(f"Not a permutation of (0, 1, 2): {tuple(order)}")
        return MeasurementSetup(self.label, tuple(self.sequence[i] for i in order))

    def orderings(self) -> List["MeasurementSetup"]:
        return [self.reordered(order) for order in permutations(range(3))]


def setup_for_line(line: Line, square: Optional[PeresMerminSquare] = None) -> MeasurementSetup:
    """Setup measuring the cells of ``line`` in product order."""
    square = square or build_square()
    line = Line(line)
    return MeasurementSetup(f"{line}_setup", square.line(line))


def r3_setup() -> MeasurementSetup:
    return setup_for_line(Line.R3)


def c3_setup() -> MeasurementSetup:
    return setup_for_line(Line.C3)


@dataclass(frozen=True)
class MeasurementRecord:
    """Recorded (possibly flipped) outcomes of one shot."""
    setup: str
    outcomes: Tuple[int, int, int]
    product: int

    def __post_init__(self):
        a, b, c = self.outcomes
        if self.product != a * b * c:
            raise InvariantError(f"Record product {self.product} != {a}*{b}*{c}")


@dataclass(frozen=True)
class NoiseModel:
    """Independent classical flip of each recorded outcome with probability q."""
    flip_probability: float = 0.0

    def __post_init__(self):
        q = self.flip_probability
        if not (math.isfinite(q) and 0.0 <= q <= 0.5):
            raise ArgumentError(f"flip_probability must lie in [0, 1/2], got {q}")

    @property
    def attenuation(self) -> float:
        return attenuation(self.flip_probability)

    @property
    def product_flip_probability(self) -> float:
        """Probability that an odd number of the three outcomes flip."""
        return (1.0 - self.attenuation) / 2.0


def attenuation(q: float) -> float:
    """Factor (1 - 2q)^3 by which independent flips shrink a triple product."""
    return (1.0 - 2.0 * q) ** 3


def flip_probability_for(target: float) -> float:
    """
    Flip probability whose attenuation equals ``target``.

    Args:
        target: Desired |<product>| in (0, 1]

    Returns:
        q solving (1 - 2q)^3 = target
    """
    if not 0.0 < target <= 1.0:
        raise ArgumentError(f"target attenuation must lie in (0, 1], got {target}")
    return (1.0 - target ** (1.0 / 3.0)) / 2.0


@dataclass(frozen=True)
class EstimateReport:
    """Mean and standard error of the triple product over independent shots."""
    setup: str
    shots: int
    mean_product: float
    standard_error: float
    outcome_means: Tuple[float, ...] = field(default=())
    outcome_errors: Tuple[float, ...] = field(default=())

    def wrong_sign_count(self, sign: int) -> int:
        """Shots whose recorded product differs from the noiseless value ``sign``."""
        return int(round(self.shots * (1.0 - sign * self.mean_product) / 2.0))


def _as_density(state) -> DensityMatrix:
    return to_density(state) if isinstance(state, PureState) else state


def _split(rho: np.ndarray, matrix: np.ndarray):
    """Branch probabilities and normalized Lüders post-states for one observable."""
    branches = []
    for sign in (1, -1):
        projector = (IDENTITY4 + sign * matrix) / 2
        post = projector @ rho @ projector
        p = float(np.real(np.trace(post)))
        if p < EPS_BRANCH:
            branches.append((0.0, None))
        else:
            post = post / p
            branches.append((p, (post + post.conj().T) / 2))
    (p_plus, post_plus), (p_minus, post_minus) = branches
    if post_plus is None and post_minus is None:
        raise InvariantError(f"Both outcome probabilities vanish (p+={p_plus}, p-={p_minus})")
    return p_plus, post_plus, post_minus


def _threshold(p_plus: float, post_plus, post_minus) -> float:
    # Outcome +1 iff u < threshold; impossible branches are pinned.
    if post_plus is None:
        return 0.0
    if post_minus is None:
        return 1.0
    return p_plus


def measure_once(state: DensityMatrix, o: ProductObservable, rand: float) -> Tuple[int, DensityMatrix]:
    """
    Projectively measure ``o`` on ``state`` using one uniform draw.

    Args:
        state: Pre-measurement state
        o: Observable with eigenvalues ±1
        rand: Uniform number in [0, 1)

    Returns:
        (outcome, post-measurement state)
    """
    state = _as_density(state)
    p_plus, post_plus, post_minus = _split(state.rho, to_matrix(o))
    if rand < _threshold(p_plus, post_plus, post_minus):
        return 1, DensityMatrix(post_plus, state.tol)
    return -1, DensityMatrix(post_minus, state.tol)


def _apply_noise(outcomes: np.ndarray, flip_uniforms: np.ndarray, noise: NoiseModel) -> np.ndarray:
    return np.where(flip_uniforms < noise.flip_probability, -outcomes, outcomes)


def run_setup(
    state: DensityMatrix,
    setup: MeasurementSetup,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> MeasurementRecord:
    """
    One shot: sequential Lüders measurements, then readout flips.

    Draws six uniforms from ``rng`` in the same order as the block sampler,
    so a one-shot block and this function agree for the same generator.
    """
    u = rng.random(UNIFORMS_PER_SHOT)
    current = _as_density(state)
    outcomes = []
    for k, o in enumerate(setup.sequence):
        outcome, current = measure_once(current, o, float(u[k]))
        outcomes.append(outcome)
    recorded = _apply_noise(np.array(outcomes), u[3:], noise)
    a, b, c = (int(x) for x in recorded)
    return MeasurementRecord(setup.label, (a, b, c), a * b * c)


def _lueders_tree(rho: np.ndarray, setup: MeasurementSetup) -> List[np.ndarray]:
    """
    Outcome thresholds for every prefix of earlier outcomes.

    Level k holds 2**k thresholds indexed by the prefix code (bit 1 = outcome -1,
    earliest outcome most significant). Unreachable prefixes keep threshold 0.
    """
    matrices = [to_matrix(o) for o in setup.sequence]
    levels = [np.zeros(2 ** k) for k in range(len(matrices))]

    def walk(current: np.ndarray, k: int, code: int) -> None:
        if k == len(matrices):
            return
        p_plus, post_plus, post_minus = _split(current, matrices[k])
        levels[k][code] = _threshold(p_plus, post_plus, post_minus)
        if post_plus is not None:
            walk(post_plus, k + 1, 2 * code)
        if post_minus is not None:
            walk(post_minus, k + 1, 2 * code + 1)

    walk(rho, 0, 0)
    return levels


def _sample_outcomes(levels: List[np.ndarray], uniforms: np.ndarray) -> np.ndarray:
    n = uniforms.shape[0]
    outcomes = np.empty((n, len(levels)), dtype=np.int64)
    code = np.zeros(n, dtype=np.intp)
    for k, thresholds in enumerate(levels):
        plus = uniforms[:, k] < thresholds[code]
        outcomes[:, k] = np.where(plus, 1, -1)
        code = 2 * code + (~plus)
    return outcomes


def _block_generator(seed: int, stream: Tuple[int, ...], block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(stream) + (block,)))


def _simulate_block(levels: List[np.ndarray], noise: NoiseModel, rng: np.random.Generator, shots: int) -> np.ndarray:
    u = rng.random((shots, UNIFORMS_PER_SHOT))
    return _apply_noise(_sample_outcomes(levels, u[:, :3]), u[:, 3:], noise)


@dataclass(frozen=True)
class _Tally:
    shots: int
    product_sum: int
    product_sq_sum: int
    outcome_sums: Tuple[int, ...]

    def __add__(self, other: "_Tally") -> "_Tally":
        return _Tally(
            self.shots + other.shots,
            self.product_sum + other.product_sum,
            self.product_sq_sum + other.product_sq_sum,
            tuple(a + b for a, b in zip(self.outcome_sums, other.outcome_sums)),
        )


def _standard_error(n: int, total: int, total_sq: int) -> float:
    if n < 2:
        return 0.0
    # Unbiased variance from exact integer sums.
    numerator = n * total_sq - total * total
    if numerator <= 0:
        return 0.0
    return math.sqrt(numerator / (n * (n - 1)) / n)


def _validate_run(shots: int, block_size: int) -> None:
    require(shots >= 1, f"shots must be >= 1, got {shots}")
    require(block_size >= 1, f"block_size must be >= 1, got {block_size}")


def record_stream(
    state: DensityMatrix,
    setup: MeasurementSetup,
    noise: NoiseModel,
    shots: int,
    seed: int,
    stream: Tuple[int, ...] = (),
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> Iterator[MeasurementRecord]:
    """Yield the records of every shot, in shot order."""
    _validate_run(shots, block_size)
    levels = _lueders_tree(_as_density(state).rho, setup)
    for chunk in partition(shots, block_size):
        recorded = _simulate_block(levels, noise, _block_generator(seed, stream, chunk.index), chunk.size)
        for a, b, c in recorded.tolist():
            yield MeasurementRecord(setup.label, (a, b, c), a * b * c)


def estimate(
    state: DensityMatrix,
    setup: MeasurementSetup,
    noise: NoiseModel,
    shots: int,
    seed: int,
    stream: Tuple[int, ...] = (),
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
) -> EstimateReport:
    """
    Estimate <product> of a setup over independent shots.

    Args:
        state: Prepared state, copied fresh for every shot
        setup: Observables to measure
        noise: Readout flip model
        shots: Number of shots (>= 1)
        seed: Base seed
        stream: Extra spawn-key prefix separating setups within one run
        block_size: Shots per independently seeded block
        workers: Thread-pool size for blocks

    Returns:
        EstimateReport; identical for identical arguments, whatever ``workers``
    """
    _validate_run(shots, block_size)
    levels = _lueders_tree(_as_density(state).rho, setup)

    def tally(chunk) -> _Tally:
        recorded = _simulate_block(levels, noise, _block_generator(seed, stream, chunk.index), chunk.size)
        products = np.prod(recorded, axis=1)
        return _Tally(
            shots=chunk.size,
            product_sum=int(products.sum()),
            product_sq_sum=int((products * products).sum()),
            outcome_sums=tuple(int(s) for s in recorded.sum(axis=0)),
        )

    chunks = partition(shots, block_size)
    tallies = run_partitioned(tally, chunks, workers)
    total = tallies[0]
    for t in tallies[1:]:
        total = total + t

    n = total.shots
    # Outcomes are ±1, so each squared outcome sums to n.
    report = EstimateReport(
        setup=setup.label,
        shots=n,
        mean_product=total.product_sum / n,
        standard_error=_standard_error(n, total.product_sum, total.product_sq_sum),
        outcome_means=tuple(s / n for s in total.outcome_sums),
        outcome_errors=tuple(_standard_error(n, s, n) for s in total.outcome_sums),
    )
    logger.info(
        f"{setup.label}: <product> = {report.mean_product:.6f} ± {report.standard_error:.6f} "
        f"over {n} shots"
    )
    return report


def gamma_from_estimates(r3: EstimateReport, c3: EstimateReport) -> Tuple[float, float]:
    """(γ, σ) = (1 + <R3> - <C3>, sqrt(se_R3² + se_C3²))"""
    return (
        gamma_value(r3.mean_product, c3.mean_product),
        quadrature([r3.standard_error, c3.standard_error]),
    )


def line_stream(line: Line) -> Tuple[int]:
    """Spawn-key prefix for a line's setup; distinct lines draw independent numbers."""
    return (list(Line).index(Line(line)),)


def estimate_chi(
    state: DensityMatrix,
    noise: NoiseModel,
    shots: int,
    seed: int,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
) -> Tuple[float, float, Dict[Line, EstimateReport]]:
    """
    Assemble χ from six per-line setups.

    Returns:
        (χ, σ, per-line reports)
    """
    reports = {
        line: estimate(state, setup_for_line(line), noise, shots, seed,
                       stream=line_stream(line), block_size=block_size, workers=workers)
        for line in Line
    }
    chi = chi_value({line: r.mean_product for line, r in reports.items()})
    sigma = quadrature([r.standard_error for r in reports.values()])
    return chi, sigma, reports


def agreement_pvalue(reports: Dict[Line, EstimateReport], noise: NoiseModel) -> float:
    """
    Exact two-sided p-value of the pooled wrong-sign count under ``noise``.

    Every line product is ±I, so before noise each shot records the line's
    sign; readout flips turn a shot wrong with probability
    ``noise.product_flip_probability``, independently. The pooled count over
    the given lines is therefore binomial, which holds at any shot count.
    """
    wrong = sum(r.wrong_sign_count(EXPECTED_SIGNS[Line(line)]) for line, r in reports.items())
    trials = sum(r.shots for r in reports.values())
    return binomial_pvalue(wrong, trials, noise.product_flip_probability)
