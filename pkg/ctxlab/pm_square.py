#!/usr/bin/env python3
"""
The 3x3 Peres-Mermin square of two-qubit product observables.

    row 1:  Z⊗I   I⊗Z   Z⊗Z
    row 2:  I⊗X   X⊗I   X⊗X
    row 3:  Z⊗X   X⊗Z   Y⊗Y

Every row and column holds three mutually commuting observables whose
ordered product is +I, except the third column whose product is -I.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .error_handling import ArgumentError
from .operator_algebra import (
    EPS_OP,
    IDENTITY4,
    ComplexMatrix4,
    ProductObservable,
    commutator,
    distance,
    max_abs,
    to_matrix,
)

logger = logging.getLogger(__name__)


class Line(str, Enum):
    """A row (R) or column (C) of the square."""
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"

    @property
    def is_row(self) -> bool:
        return self.value[0] == "R"

    @property
    def index(self) -> int:
        return int(self.value[1])

    def __str__(self) -> str:
        return self.value


# Quantum eigenvalue of each line operator, in line order R1..C3.
EXPECTED_SIGNS: Dict[Line, int] = {
    Line.R1: 1, Line.R2: 1, Line.R3: 1,
    Line.C1: 1, Line.C2: 1, Line.C3: -1,
}


@dataclass(frozen=True, order=True)
class SquarePosition:
    """1-indexed (row, col) of a cell."""
    row: int
    col: int

    def __post_init__(self):
        if self.row not in (1, 2, 3) or self.col not in (1, 2, 3):
            raise ArgumentError(f"Square position out of range: ({self.row}, {self.col})")

    @classmethod
    def parse(cls, text: str) -> "SquarePosition":
        """Parse ``"r,c"``."""
        try:
            row, col = (int(part) for part in text.split(","))
        except ValueError as e:
            raise ArgumentError(f"Expected 'row,col', got {text!r}") from e
        return cls(row, col)

    def __str__(self) -> str:
        return f"A{self.row}{self.col}"


ALL_POSITIONS: Tuple[SquarePosition, ...] = tuple(
    SquarePosition(r, c) for r in (1, 2, 3) for c in (1, 2, 3)
)


def line_positions(line: Line) -> Tuple[SquarePosition, SquarePosition, SquarePosition]:
    """Cells of a line in product order: R_i = A_i1 A_i2 A_i3, C_i = A_1i A_2i A_3i."""
    line = Line(line)
    i = line.index
    if line.is_row:
        return SquarePosition(i, 1), SquarePosition(i, 2), SquarePosition(i, 3)
    return SquarePosition(1, i), SquarePosition(2, i), SquarePosition(3, i)


def lines_through(position: SquarePosition) -> Tuple[Line, Line]:
    """The row and column that contain ``position``."""
    return Line(f"R{position.row}"), Line(f"C{position.col}")


@dataclass(frozen=True)
class PeresMerminSquare:
    """Nine product observables arranged in a 3x3 array."""
    cells: Tuple[Tuple[ProductObservable, ...], ...]

    def __post_init__(self):
        if len(self.cells) != 3 or any(len(row) != 3 for row in self.cells):
            raise ArgumentError("A square needs exactly 3 rows of 3 cells")

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[object]]) -> "PeresMerminSquare":
        """
        Build a square from arbitrary cells (observables or two-letter labels).
        Intended for fault injection and negative tests.
        """
        rows = tuple(
            tuple(c if isinstance(c, ProductObservable) else ProductObservable.parse(str(c)) for c in row)
            for row in cells
        )
        return cls(rows)

    def cell(self, row: int, col: int) -> ProductObservable:
        position = SquarePosition(row, col)
        return self.cells[position.row - 1][position.col - 1]

    def at(self, position: SquarePosition) -> ProductObservable:
        return self.cells[position.row - 1][position.col - 1]

    def line(self, line: Line) -> Tuple[ProductObservable, ...]:
        return tuple(self.at(p) for p in line_positions(line))

    def with_cell(self, position: SquarePosition, observable: ProductObservable) -> "PeresMerminSquare":
        """Copy of the square with one cell replaced."""
        rows = [list(row) for row in self.cells]
        rows[position.row - 1][position.col - 1] = observable
        return PeresMerminSquare(tuple(tuple(row) for row in rows))

    def layout(self) -> List[List[str]]:
        """Cell labels, row-major, for reports."""
        return [[o.label for o in row] for row in self.cells]


_CANONICAL = PeresMerminSquare.from_cells([
    ["ZI", "IZ", "ZZ"],
    ["IX", "XI", "XX"],
    ["ZX", "XZ", "YY"],
])


def build_square() -> PeresMerminSquare:
    """The canonical Peres-Mermin square."""
    return _CANONICAL


@dataclass(frozen=True)
class LineIdentityReport:
    """Outcome of checking one line operator against ±I."""
    line: Line
    expected_sign: int
    max_deviation: float
    passed: bool


def line_product(square: PeresMerminSquare, line: Line) -> ComplexMatrix4:
    """Ordered matrix product of the three cells along ``line``."""
    a, b, c = (to_matrix(o) for o in square.line(Line(line)))
    return a @ b @ c


def verify_eigen_relations(square: PeresMerminSquare, tol: float = EPS_OP) -> List[LineIdentityReport]:
    """
    Check every line operator against its expected multiple of the identity.

    Args:
        square: Square to check
        tol: Max-entry tolerance

    Returns:
        One LineIdentityReport per line, in order R1, R2, R3, C1, C2, C3
    """
    reports = []
    for line in Line:
        sign = EXPECTED_SIGNS[line]
        deviation = distance(line_product(square, line), sign * IDENTITY4)
        passed = deviation <= tol
        if not passed:
            logger.warning(f"Line {line} deviates from {sign:+d}I by {deviation:.3e}")
        reports.append(LineIdentityReport(line, sign, deviation, passed))
    return reports


def expected_sign_product() -> int:
    """Product of the six quantum line signs (−1)."""
    return int(np.prod([EXPECTED_SIGNS[line] for line in Line]))


def commutator_norms(square: PeresMerminSquare) -> Dict[str, float]:
    """
    Max-entry magnitude of the commutator for the 18 within-line pairs.

    Returns:
        Mapping ``"<line>:<cell>,<cell>"`` -> norm
    """
    norms = {}
    for line in Line:
        for p, q in combinations(line_positions(line), 2):
            norm = max_abs(commutator(to_matrix(square.at(p)), to_matrix(square.at(q))))
            norms[f"{line}:{p},{q}"] = norm
    return norms


def verify_compatibility(square: PeresMerminSquare, tol: float = EPS_OP) -> bool:
    """True iff all observables sharing a line pairwise commute."""
    bad = {k: v for k, v in commutator_norms(square).items() if v > tol}
    for name, norm in bad.items():
        logger.warning(f"Non-commuting pair {name}: |[a,b]| = {norm:.3e}")
    return not bad


def cell_occurrences() -> Dict[SquarePosition, int]:
    """How many lines each cell position appears in (2 for every cell)."""
    counts = {p: 0 for p in ALL_POSITIONS}
    for line in Line:
        for p in line_positions(line):
            counts[p] += 1
    return counts


# The hidden-variable form of R2 is sometimes printed with σ_y on qubit 1
# (v(Y⊗I), v(Y⊗X)); the operator relation has σ_x there and so does this square.
R2_LABEL_NOTE = (
    "R2 uses X⊗I and X⊗X (operator form); a variant printing Y⊗I and Y⊗X "
    "in the value relation is treated as a typographical slip"
)
