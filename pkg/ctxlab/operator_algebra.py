#!/usr/bin/env python3
"""
Dense complex linear algebra for one and two qubits.

Pauli convention (inherited by every other module):

    X = [[0, 1], [1, 0]]    Y = [[0, -i], [i, 0]]    Z = [[1, 0], [0, -1]]

Two-qubit operators are Kronecker products with qubit 1 as the left
(outer-block) factor, so the computational basis is ordered
|00>, |01>, |10>, |11>.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Dict, Iterator, Tuple

import numpy as np

from .error_handling import ArgumentError

logger = logging.getLogger(__name__)

# Operator-identity tolerance (max-entry distance).
EPS_OP = 1e-12

ComplexMatrix2 = np.ndarray
ComplexMatrix4 = np.ndarray


class PauliLabel(str, Enum):
    """Single-qubit Pauli label."""
    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"

    def __str__(self) -> str:
        return self.value


def _frozen(entries) -> np.ndarray:
    matrix = np.array(entries, dtype=np.complex128)
    matrix.setflags(write=False)
    return matrix


_PAULI_MATRICES: Dict[PauliLabel, ComplexMatrix2] = {
    PauliLabel.I: _frozen([[1, 0], [0, 1]]),
    PauliLabel.X: _frozen([[0, 1], [1, 0]]),
    PauliLabel.Y: _frozen([[0, -1j], [1j, 0]]),
    PauliLabel.Z: _frozen([[1, 0], [0, -1]]),
}

IDENTITY4: ComplexMatrix4 = _frozen(np.eye(4))

# a·b = phase · c for single-qubit Paulis (XY = iZ and cyclic).
_PAULI_TABLE: Dict[Tuple[PauliLabel, PauliLabel], Tuple[complex, PauliLabel]] = {}
for _a in PauliLabel:
    _PAULI_TABLE[(PauliLabel.I, _a)] = (1, _a)
    _PAULI_TABLE[(_a, PauliLabel.I)] = (1, _a)
    _PAULI_TABLE[(_a, _a)] = (1, PauliLabel.I)
for _a, _b, _c in [("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")]:
    _PAULI_TABLE[(PauliLabel(_a), PauliLabel(_b))] = (1j, PauliLabel(_c))
    _PAULI_TABLE[(PauliLabel(_b), PauliLabel(_a))] = (-1j, PauliLabel(_c))


def pauli_matrix(label: PauliLabel) -> ComplexMatrix2:
    """Return the (read-only) 2x2 matrix of a Pauli label."""
    return _PAULI_MATRICES[PauliLabel(label)]


def pauli_product(a: PauliLabel, b: PauliLabel) -> Tuple[complex, PauliLabel]:
    """
    Multiply two single-qubit Pauli labels.

    Args:
        a: Left factor
        b: Right factor

    Returns:
        (phase, label) such that pauli_matrix(a) @ pauli_matrix(b) == phase * pauli_matrix(label)
    """
    return _PAULI_TABLE[(PauliLabel(a), PauliLabel(b))]


def tensor(a: ComplexMatrix2, b: ComplexMatrix2) -> ComplexMatrix4:
    """Kronecker product; ``a`` acts on qubit 1 (outer blocks)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ArgumentError(f"tensor expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


@dataclass(frozen=True)
class ProductObservable:
    """A two-qubit observable ``first ⊗ second``."""
    first: PauliLabel
    second: PauliLabel

    def __post_init__(self):
        object.__setattr__(self, "first", PauliLabel(self.first))
        object.__setattr__(self, "second", PauliLabel(self.second))

    @classmethod
    def parse(cls, text: str) -> "ProductObservable":
        """Build from a two-letter label such as ``"ZX"``."""
        text = text.strip().upper()
        if len(text) != 2 or any(ch not in "IXYZ" for ch in text):
            raise ArgumentError(f"Not a two-qubit Pauli label: {text!r}")
        return cls(PauliLabel(text[0]), PauliLabel(text[1]))

    @property
    def label(self) -> str:
        return f"{self.first.value}{self.second.value}"

    def factor(self, qubit: int) -> PauliLabel:
        """Pauli factor on qubit 1 or 2."""
        if qubit == 1:
            return self.first
        if qubit == 2:
            return self.second
        raise ArgumentError(f"qubit must be 1 or 2, got {qubit}")

    def to_matrix(self) -> ComplexMatrix4:
        return to_matrix(self)

    def __str__(self) -> str:
        return self.label


def to_matrix(o: ProductObservable) -> ComplexMatrix4:
    """Numeric 4x4 realization of a product observable."""
    return tensor(pauli_matrix(o.first), pauli_matrix(o.second))


def all_product_observables() -> Iterator[ProductObservable]:
    """All 16 two-qubit Pauli products in IXYZ lexicographic order."""
    for first, second in product(PauliLabel, repeat=2):
        yield ProductObservable(first, second)


def observable_product(a: ProductObservable, b: ProductObservable) -> Tuple[complex, ProductObservable]:
    """
    Symbolic product of two product observables (mixed-product law).

    Returns:
        (phase, observable) with to_matrix(a) @ to_matrix(b) == phase * to_matrix(observable)
    """
    phase1, first = pauli_product(a.first, b.first)
    phase2, second = pauli_product(a.second, b.second)
    return phase1 * phase2, ProductObservable(first, second)


def matmul(a: ComplexMatrix4, b: ComplexMatrix4) -> ComplexMatrix4:
    return np.asarray(a, dtype=np.complex128) @ np.asarray(b, dtype=np.complex128)


def adjoint(a: ComplexMatrix4) -> ComplexMatrix4:
    return np.asarray(a, dtype=np.complex128).conj().T


def trace(a: ComplexMatrix4) -> complex:
    return complex(np.trace(a))


def commutator(a: ComplexMatrix4, b: ComplexMatrix4) -> ComplexMatrix4:
    """[a, b] = a·b − b·a"""
    return matmul(a, b) - matmul(b, a)


def max_abs(a: np.ndarray) -> float:
    """Max-entry magnitude; the norm used for every operator comparison."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def distance(a: ComplexMatrix4, b: ComplexMatrix4) -> float:
    return max_abs(np.asarray(a) - np.asarray(b))


def matrices_close(a: ComplexMatrix4, b: ComplexMatrix4, tol: float = EPS_OP) -> bool:
    return distance(a, b) <= tol


def is_hermitian(a: ComplexMatrix4, tol: float = EPS_OP) -> bool:
    return distance(a, adjoint(a)) <= tol


def is_involution(a: ComplexMatrix4, tol: float = EPS_OP) -> bool:
    a = np.asarray(a, dtype=np.complex128)
    return distance(matmul(a, a), np.eye(a.shape[0])) <= tol


def commute(a: ComplexMatrix4, b: ComplexMatrix4, tol: float = EPS_OP) -> bool:
    return max_abs(commutator(a, b)) <= tol
