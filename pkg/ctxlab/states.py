#!/usr/bin/env python3
"""
Two-qubit quantum states, expectation values, and seeded random ensembles.

Random states come from NumPy's PCG64 generator (``numpy.random.default_rng``)
seeded through a ``SeedSequence``. A sweep derives the seed of its i-th state
as ``SeedSequence(entropy=base_seed, spawn_key=stream)``, so any state of a
sweep can be regenerated on its own and workers never share a generator.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from .error_handling import ArgumentError, InvariantError, StateValidationError
from .operator_algebra import ComplexMatrix4, ProductObservable, to_matrix
from .pm_square import Line, PeresMerminSquare, build_square, line_product

logger = logging.getLogger(__name__)

EPS_STATE = 1e-10
EXPECTATION_SLACK = 1e-9
RNG_NAME = "numpy.PCG64"
SEED_MAX = 2 ** 64


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized 4-component state vector in the |00>,|01>,|10>,|11> basis."""
    amplitudes: np.ndarray
    tol: float = field(default=EPS_STATE, compare=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (4,):
            raise StateValidationError(f"A two-qubit pure state needs 4 amplitudes, got {amps.shape[0]}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > self.tol:
            raise StateValidationError(f"State is not normalized: |psi|^2 = {norm:.12f}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes: Sequence[complex], tol: float = EPS_STATE) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise StateValidationError("Cannot normalize the zero vector")
        return cls(amps / norm, tol)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite 4x4 matrix."""
    rho: ComplexMatrix4
    tol: float = field(default=EPS_STATE, compare=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.complex128)
        if rho.shape != (4, 4):
            raise StateValidationError(f"A two-qubit density matrix is 4x4, got {rho.shape}")
        herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
        if herm_dev > self.tol:
            raise StateValidationError(f"Density matrix is not Hermitian (deviation {herm_dev:.3e})")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > self.tol:
            raise StateValidationError(f"Density matrix trace is {tr.real:.12f}, expected 1")
        # eigvalsh reads one triangle only, so symmetrize first.
        min_eig = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
        if min_eig < -self.tol:
            raise StateValidationError(f"Density matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.rho)))

    def mix(self, other: "DensityMatrix", alpha: float) -> "DensityMatrix":
        """alpha * self + (1 - alpha) * other"""
        if not 0.0 <= alpha <= 1.0:
            raise ArgumentError(f"Mixing weight must lie in [0, 1], got {alpha}")
        return DensityMatrix(alpha * self.rho + (1.0 - alpha) * other.rho, self.tol)


class Ensemble(str, Enum):
    HAAR_PURE = "haar_pure"
    GINIBRE_MIXED = "ginibre_mixed"
    RANK_LIMITED = "rank_limited"


@dataclass(frozen=True)
class RandomStateConfig:
    """
    Seed and ensemble of one random state.

    ``stream`` is the SeedSequence spawn key; sweeps set it to
    (ensemble_index, state_index).
    """
    seed: int
    ensemble: Ensemble = Ensemble.HAAR_PURE
    rank: int = 4
    stream: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ensemble", Ensemble(self.ensemble))
        if not 0 <= int(self.seed) < SEED_MAX:
            raise ArgumentError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not 1 <= self.rank <= 4:
            raise ArgumentError(f"rank must lie in 1..4, got {self.rank}")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(entropy=int(self.seed), spawn_key=tuple(self.stream)))


def basis_state(bits: str) -> PureState:
    """Computational basis state, e.g. ``basis_state("01")`` = |01>."""
    if len(bits) != 2 or any(b not in "01" for b in bits):
        raise ArgumentError(f"Expected two bits, got {bits!r}")
    amps = np.zeros(4, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return PureState(amps)


def singlet() -> PureState:
    """(|01> - |10>)/sqrt(2)"""
    s = 1.0 / np.sqrt(2.0)
    return PureState(np.array([0.0, s, -s, 0.0], dtype=np.complex128))


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(np.eye(4, dtype=np.complex128) / 4.0)


def to_density(psi: PureState, tol: float = EPS_STATE) -> DensityMatrix:
    """Rank-1 projector |psi><psi|, validated to ``tol``."""
    if not isinstance(psi, PureState):
        psi = PureState(psi, tol)
    amps = psi.amplitudes
    return DensityMatrix(np.outer(amps, amps.conj()), tol)


def _checked_real(value: complex, what: str, tol: float = EPS_STATE) -> float:
    if abs(value.imag) > tol:
        raise InvariantError(f"{what} has imaginary part {value.imag:.3e}")
    real = float(value.real)
    if abs(real) > 1.0 + EXPECTATION_SLACK:
        raise InvariantError(f"{what} = {real} lies outside [-1, 1]")
    return real


def _as_density(state, tol: float = EPS_STATE) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return to_density(state, tol)
    return DensityMatrix(state, tol)


def expectation(state: DensityMatrix, o: ProductObservable, tol: float = EPS_STATE) -> float:
    """tr(rho O) for a product observable; an imaginary part above ``tol`` is an error."""
    state = _as_density(state, tol)
    return _checked_real(complex(np.trace(state.rho @ to_matrix(o))), f"<{o}>", tol)


def expectation_line(
    state: DensityMatrix,
    line: Line,
    square: Optional[PeresMerminSquare] = None,
    tol: float = EPS_STATE,
) -> float:
    """tr(rho L) for the line operator L (product of the line's three cells)."""
    state = _as_density(state, tol)
    square = square or build_square()
    return _checked_real(complex(np.trace(state.rho @ line_product(square, line))), f"<{line}>", tol)


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_state(cfg: RandomStateConfig, tol: float = EPS_STATE) -> DensityMatrix:
    """
    Draw one state from the configured ensemble.

    haar_pure: normalized complex Gaussian vector, then |psi><psi|.
    ginibre_mixed / rank_limited: G G^dagger / tr(G G^dagger) with G a 4xk
    complex Gaussian matrix (k = 4 for ginibre_mixed).

    Args:
        cfg: Seed, ensemble and stream
        tol: Validation tolerance of the returned state

    Returns:
        DensityMatrix, bit-identical for identical cfg
    """
    rng = cfg.generator()
    if cfg.ensemble is Ensemble.HAAR_PURE:
        return to_density(PureState.from_unnormalized(_complex_normal(rng, 4), tol), tol)
    k = 4 if cfg.ensemble is Ensemble.GINIBRE_MIXED else cfg.rank
    g = _complex_normal(rng, (4, k))
    w = g @ g.conj().T
    rho = w / np.trace(w).real
    # Rounding can leave ~1e-17 anti-Hermitian residue; keep the Hermitian part.
    return DensityMatrix((rho + rho.conj().T) / 2, tol)
