#!/usr/bin/env python3
"""
Contextuality witnesses assembled from line values, expectations or data.

    χ = <R1> + <R2> + <R3> + <C1> + <C2> - <C3>     NCR ≤ 4, QM = 6
    γ = <I> + <R3> - <C3>                           NCR = 1, QM = 3
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

from .error_handling import ArgumentError
from .ncr_models import chi_bound, gamma_bound
from .pm_square import EXPECTED_SIGNS, Line, line_positions

logger = logging.getLogger(__name__)

CHI_NCR_BOUND = 4
CHI_QM_VALUE = 6
GAMMA_NCR_VALUE = 1
GAMMA_QM_VALUE = 3

GAMMA_LINES: Tuple[Line, Line] = (Line.R3, Line.C3)


def chi_value(line_values: Mapping[Line, float]) -> float:
    """χ from per-line values (signs, expectations or estimated means)."""
    return sum(EXPECTED_SIGNS[line] * line_values[Line(line)] for line in Line)


def gamma_value(r3: float, c3: float) -> float:
    return 1.0 + r3 - c3


def quadrature(errors: Sequence[float]) -> float:
    """Independent-error propagation: sqrt(sum of squares)."""
    return math.sqrt(sum(e * e for e in errors))


def binomial_pvalue(successes: int, trials: int, p: float) -> float:
    """
    Two-sided tail probability of ``successes`` in ``trials`` Bernoulli(p) draws.

    Twice the tail on the far side of the mean, capped at 1. Degenerate
    p (0 or 1) gives 1 for the only possible count and 0 otherwise.

    Raises:
        ArgumentError: if p is outside [0, 1] or the counts are inconsistent
    """
    if not (0.0 <= p <= 1.0) or not (0 <= successes <= trials):
        raise ArgumentError(f"invalid binomial test: {successes} of {trials} at p={p}")
    if p in (0.0, 1.0):
        return 1.0 if successes == round(trials * p) else 0.0

    step = 1 if successes >= trials * p else -1
    log_p, log_q, log_n = math.log(p), math.log1p(-p), math.lgamma(trials + 1)
    tail = 0.0
    k = successes
    while 0 <= k <= trials:
        term = math.exp(log_n - math.lgamma(k + 1) - math.lgamma(trials - k + 1)
                        + k * log_p + (trials - k) * log_q)
        tail += term
        # terms shrink monotonically away from the mean
        if term <= tail * 1e-17:
            break
        k += step
    return min(1.0, 2.0 * tail)


@dataclass(frozen=True)
class DataEvaluation:
    """γ computed from measured <R3>, <C3> with their standard errors."""
    r3_mean: float
    r3_err: float
    c3_mean: float
    c3_err: float
    gamma: float
    sigma: float
    ncr_value: int = GAMMA_NCR_VALUE
    qm_prediction: int = GAMMA_QM_VALUE

    @property
    def excess(self) -> float:
        return self.gamma - self.ncr_value

    @property
    def exact(self) -> bool:
        """Zero error bars with a positive excess: the violation is exact."""
        return self.sigma == 0.0 and self.excess > 0.0

    @property
    def significance(self) -> float:
        """(γ - 1)/σ; signed infinity when σ = 0 and γ ≠ 1, 0 when both are zero."""
        if self.sigma == 0.0:
            return math.copysign(math.inf, self.excess) if self.excess != 0.0 else 0.0
        return self.excess / self.sigma

    def violates(self, threshold_sigmas: float) -> bool:
        """γ exceeds the NCR value by more than ``threshold_sigmas`` σ."""
        if self.sigma == 0.0:
            return self.excess > 0.0
        return self.excess > threshold_sigmas * self.sigma


def evaluate_from_data(r3_mean: float, r3_err: float, c3_mean: float, c3_err: float) -> DataEvaluation:
    """
    Evaluate γ from published or simulated line averages.

    Args:
        r3_mean: Measured <R3>, in [-1, 1]
        r3_err: Its standard error, >= 0
        c3_mean: Measured <C3>, in [-1, 1]
        c3_err: Its standard error, >= 0

    Returns:
        DataEvaluation with γ = 1 + <R3> - <C3> and σ in quadrature

    Raises:
        ArgumentError: if a mean is outside [-1, 1] or an error is negative
    """
    problems = []
    for name, mean in (("r3", r3_mean), ("c3", c3_mean)):
        if not (math.isfinite(mean) and -1.0 <= mean <= 1.0):
            problems.append(f"{name} mean must lie in [-1, 1], got {mean}")
    for name, err in (("r3", r3_err), ("c3", c3_err)):
        if not (math.isfinite(err) and err >= 0.0):
            problems.append(f"{name} error must be >= 0, got {err}")
    if problems:
        raise ArgumentError("; ".join(problems))

    evaluation = DataEvaluation(
        r3_mean=r3_mean,
        r3_err=r3_err,
        c3_mean=c3_mean,
        c3_err=c3_err,
        gamma=gamma_value(r3_mean, c3_mean),
        sigma=quadrature([r3_err, c3_err]),
    )
    logger.info(f"gamma = {evaluation.gamma:.6f} ± {evaluation.sigma:.6f}")
    return evaluation


@dataclass(frozen=True)
class SchemeSummary:
    """Resources and violation margin of one witness."""
    name: str
    lines: Tuple[Line, ...]
    observables: int
    setups: int
    ncr_bound: int
    qm_value: int

    @property
    def margin(self) -> int:
        return self.qm_value - self.ncr_bound


def _distinct_cells(lines: Sequence[Line]) -> int:
    return len({p for line in lines for p in line_positions(line)})


def compare_schemes() -> List[SchemeSummary]:
    """
    Contrast the six-setup χ witness with the two-setup γ witness.

    Observable and setup counts come from the square's geometry, NCR values
    from the exhaustive scans and QM values from the line signs.
    """
    all_lines = tuple(Line)
    qm_chi = int(chi_value({line: EXPECTED_SIGNS[line] for line in Line}))
    qm_gamma = int(gamma_value(EXPECTED_SIGNS[Line.R3], EXPECTED_SIGNS[Line.C3]))
    return [
        SchemeSummary("chi", all_lines, _distinct_cells(all_lines), len(all_lines),
                      chi_bound().max_value, qm_chi),
        SchemeSummary("gamma", GAMMA_LINES, _distinct_cells(GAMMA_LINES), len(GAMMA_LINES),
                      gamma_bound().max_value, qm_gamma),
    ]


def witnesses_from_expectations(line_values: Dict[Line, float]) -> Tuple[float, float]:
    """(χ, γ) from the six line expectations of a state."""
    return chi_value(line_values), gamma_value(line_values[Line.R3], line_values[Line.C3])
