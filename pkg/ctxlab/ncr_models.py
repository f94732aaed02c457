#!/usr/bin/env python3
"""
Exhaustive noncontextual hidden-variable (NCR) value assignments.

Two forms of the product rule are modeled:

* nine-value: one predetermined ±1 per cell of the square; a line's value is
  the product of its three cell values.
* six-value: one predetermined ±1 per single-qubit Pauli σ^q_a (q = 1, 2;
  a = x, y, z); a cell's value is the product of its two factors' values
  (identity contributes +1) and a line's value the product over its cells.

Both spaces are small (512 and 64 assignments), so every bound here is
established by scanning all of them. Integer arithmetic only.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Dict, Iterator, List, Optional, Tuple

from .error_handling import ArgumentError
from .operator_algebra import PauliLabel
from .pm_square import (
    ALL_POSITIONS,
    EXPECTED_SIGNS,
    Line,
    PeresMerminSquare,
    SquarePosition,
    build_square,
    line_positions,
)

logger = logging.getLogger(__name__)

NINE_VALUE_COUNT = 2 ** 9
SIX_VALUE_COUNT = 2 ** 6

# Single-qubit symbols in product-rule order: σ¹z σ²z σ¹x σ²x σ¹y σ²y.
SINGLE_QUBIT_KEYS: Tuple[Tuple[int, PauliLabel], ...] = (
    (1, PauliLabel.Z), (2, PauliLabel.Z),
    (1, PauliLabel.X), (2, PauliLabel.X),
    (1, PauliLabel.Y), (2, PauliLabel.Y),
)


class Scheme(str, Enum):
    NINE_VALUE = "nine_value"
    SIX_VALUE = "six_value"


class Witness(str, Enum):
    CHI = "chi"
    GAMMA = "gamma"


def _check_signs(values) -> None:
    for v in values:
        if v not in (1, -1):
            raise ArgumentError(f"Assignment values must be +1 or -1, got {v!r}")


@dataclass(frozen=True)
class NineValueAssignment:
    """Predetermined value of every cell, stored row-major."""
    signs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.signs) != 9:
            raise ArgumentError(f"A nine-value assignment needs 9 signs, got {len(self.signs)}")
        _check_signs(self.signs)

    @property
    def values(self) -> Dict[SquarePosition, int]:
        return dict(zip(ALL_POSITIONS, self.signs))

    def value(self, position: SquarePosition) -> int:
        return self.signs[(position.row - 1) * 3 + (position.col - 1)]


@dataclass(frozen=True)
class SixValueAssignment:
    """Predetermined value of every single-qubit Pauli, in SINGLE_QUBIT_KEYS order."""
    signs: Tuple[int, ...]

    def __post_init__(self):
        if len(self.signs) != 6:
            raise ArgumentError(f"A six-value assignment needs 6 signs, got {len(self.signs)}")
        _check_signs(self.signs)

    @property
    def values(self) -> Dict[Tuple[int, PauliLabel], int]:
        return dict(zip(SINGLE_QUBIT_KEYS, self.signs))

    def value(self, qubit: int, axis: PauliLabel) -> int:
        axis = PauliLabel(axis)
        if axis is PauliLabel.I:
            return 1
        return self.signs[SINGLE_QUBIT_KEYS.index((qubit, axis))]


@dataclass(frozen=True)
class NcrBoundReport:
    """Result of scanning every assignment of one scheme for one witness."""
    witness: Witness
    scheme: Scheme
    assignments_scanned: int
    max_value: int
    min_value: int
    attaining_assignments: int


def _sign_vectors(n: int) -> Iterator[Tuple[int, ...]]:
    # Bit 0 -> +1, bit 1 -> -1, first position most significant.
    for bits in product((0, 1), repeat=n):
        yield tuple(-1 if b else 1 for b in bits)


def enumerate_nine() -> Iterator[NineValueAssignment]:
    """All 512 cell assignments; the first is all +1."""
    for signs in _sign_vectors(9):
        yield NineValueAssignment(signs)


def enumerate_six() -> Iterator[SixValueAssignment]:
    """All 64 single-qubit assignments; the first is all +1."""
    for signs in _sign_vectors(6):
        yield SixValueAssignment(signs)


def line_value_nine(a: NineValueAssignment, line: Line) -> int:
    p, q, r = line_positions(line)
    return a.value(p) * a.value(q) * a.value(r)


def line_value_six(a: SixValueAssignment, line: Line, square: Optional[PeresMerminSquare] = None) -> int:
    """Product of the single-qubit values of every factor along ``line``."""
    square = square or build_square()
    value = 1
    for o in square.line(line):
        value *= a.value(1, o.first) * a.value(2, o.second)
    return value


def chi_of(a: NineValueAssignment) -> int:
    """R1 + R2 + R3 + C1 + C2 - C3"""
    return sum(EXPECTED_SIGNS[line] * line_value_nine(a, line) for line in Line)


def gamma_of(a: SixValueAssignment) -> int:
    """1 + v(R3) - v(C3)"""
    return decoupled_gamma(line_value_six(a, Line.R3), line_value_six(a, Line.C3))


def decoupled_gamma(v_r3: int, v_c3: int) -> int:
    """
    γ for freely chosen v(R3), v(C3).

    Without the six-value product rule tying R3 and C3 together,
    v(R3) = +1, v(C3) = -1 gives 3; used as a negative control.
    """
    return 1 + v_r3 - v_c3


def chi_from_lines(values: Dict[Line, int]) -> int:
    return sum(EXPECTED_SIGNS[line] * values[line] for line in Line)


def induce_nine(a: SixValueAssignment, square: Optional[PeresMerminSquare] = None) -> NineValueAssignment:
    """Cell values implied by the six-value product rule."""
    square = square or build_square()
    signs = []
    for position in ALL_POSITIONS:
        o = square.at(position)
        signs.append(a.value(1, o.first) * a.value(2, o.second))
    return NineValueAssignment(tuple(signs))


def _summarize(witness: Witness, scheme: Scheme, values: List[int]) -> NcrBoundReport:
    top = max(values)
    return NcrBoundReport(
        witness=witness,
        scheme=scheme,
        assignments_scanned=len(values),
        max_value=top,
        min_value=min(values),
        attaining_assignments=sum(1 for v in values if v == top),
    )


def chi_bound() -> NcrBoundReport:
    return _summarize(Witness.CHI, Scheme.NINE_VALUE, [chi_of(a) for a in enumerate_nine()])


def gamma_bound() -> NcrBoundReport:
    return _summarize(Witness.GAMMA, Scheme.SIX_VALUE, [gamma_of(a) for a in enumerate_six()])


def induced_chi_bound() -> NcrBoundReport:
    """χ range over the 64 nine-value assignments induced by six-value ones."""
    return _summarize(Witness.CHI, Scheme.SIX_VALUE, [chi_of(induce_nine(a)) for a in enumerate_six()])


def ncr_bounds() -> Tuple[NcrBoundReport, NcrBoundReport]:
    """
    Brute-force the classical bounds of both witnesses.

    Returns:
        (χ report over 512 nine-value assignments, γ report over 64 six-value assignments)
    """
    chi = chi_bound()
    gamma = gamma_bound()
    logger.info(
        f"NCR scan: chi in [{chi.min_value}, {chi.max_value}] "
        f"({chi.attaining_assignments} maximizers), gamma in [{gamma.min_value}, {gamma.max_value}]"
    )
    return chi, gamma


def count_all_relations_satisfied() -> int:
    """Nine-value assignments reproducing all six quantum line signs (0)."""
    return sum(
        1 for a in enumerate_nine()
        if all(line_value_nine(a, line) == EXPECTED_SIGNS[line] for line in Line)
    )


def count_joint_six_value_solutions() -> int:
    """Six-value assignments with v(R3) = +1 and v(C3) = -1 together (0)."""
    return sum(
        1 for a in enumerate_six()
        if line_value_six(a, Line.R3) == 1 and line_value_six(a, Line.C3) == -1
    )


def parity_violations() -> int:
    """Nine-value assignments whose six line values do not multiply to +1 (0)."""
    bad = 0
    for a in enumerate_nine():
        parity = 1
        for line in Line:
            parity *= line_value_nine(a, line)
        if parity != 1:
            bad += 1
    return bad


def check_untested_lines(square: Optional[PeresMerminSquare] = None) -> bool:
    """
    True iff R1, R2, C1 and C2 evaluate to +1 under every six-value assignment,
    i.e. these four relations hold in NCR models and need no measurement.
    """
    square = square or build_square()
    for a in enumerate_six():
        for line in (Line.R1, Line.R2, Line.C1, Line.C2):
            if line_value_six(a, line, square) != 1:
                logger.debug(f"{line} = -1 under six-value assignment {a.signs}")
                return False
    return True
