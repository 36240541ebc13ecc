"""Truncated two-qubit/single-mode Hilbert space and product-state preparation.

Basis layout is Fock-major: index = 4*m + 2*[qubit1 excited] + [qubit2
excited], so each Fock level m owns a contiguous group of four qubit
configurations (gg, ge, eg, ee).  This keeps every operator used here
block-banded with bandwidth 8.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class QubitLevel(enum.IntEnum):
    G = 0
    E = 1

    @property
    def sigma_z(self) -> int:
        """Eigenvalue of sigma_z, with the excited state at +1."""
        return 1 if self is QubitLevel.E else -1


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff n_max and the leakage tolerance guarding it.

    leakage_tol bounds the population allowed in the top two Fock levels
    before a propagation is declared truncation-limited.
    """

    n_max: int
    leakage_tol: float = 1e-9

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if not 0.0 <= self.leakage_tol < 1.0:
            raise ValueError(f"leakage_tol must lie in [0, 1), got {self.leakage_tol}")

    @property
    def dim(self) -> int:
        return 4 * (self.n_max + 1)


def basis_index(q1: QubitLevel | int, q2: QubitLevel | int, m: int,
                trunc: FockTruncation) -> int:
    """Flat index of the basis state |q1, q2, m>."""
    if not 0 <= m <= trunc.n_max:
        raise ValueError(f"Fock index {m} outside [0, {trunc.n_max}]")
    return 4 * m + 2 * int(q1) + int(q2)


def index_labels(i: int) -> tuple[QubitLevel, QubitLevel, int]:
    """Inverse of basis_index (truncation-independent)."""
    return QubitLevel((i >> 1) & 1), QubitLevel(i & 1), i >> 2


def sz_sign_vectors(trunc: FockTruncation) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of sigma_z for qubit 1 and qubit 2 over the full basis."""
    i = np.arange(trunc.dim)
    s1 = np.where((i >> 1) & 1, 1.0, -1.0)
    s2 = np.where(i & 1, 1.0, -1.0)
    return s1, s2


def fock_numbers(trunc: FockTruncation) -> np.ndarray:
    """Photon number of each basis state."""
    return (np.arange(trunc.dim) >> 2).astype(float)


def total_excitations(trunc: FockTruncation) -> np.ndarray:
    """Photon number plus number of excited qubits, per basis state."""
    i = np.arange(trunc.dim)
    return (i >> 2) + ((i >> 1) & 1) + (i & 1)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over the truncated basis.

    Amplitudes are stored read-only; operations return new instances.
    """

    amplitudes: np.ndarray
    trunc: FockTruncation

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.trunc.dim,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({self.trunc.dim},)"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def population(self, i: int) -> float:
        return float(np.abs(self.amplitudes[i]) ** 2)


def prepare_initial(theta1: float, theta2: float, trunc: FockTruncation) -> StateVector:
    """Product state (cos t1 |g> + sin t1 |e>)(cos t2 |g> + sin t2 |e>)|0>.

    Angles are taken as given (effectively mod 2pi through cos/sin).
    """
    amps = np.zeros(trunc.dim, dtype=np.complex128)
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    amps[0] = c1 * c2
    amps[1] = c1 * s2
    amps[2] = s1 * c2
    amps[3] = s1 * s2
    return StateVector(amps, trunc)


def extend_truncation(state: StateVector, new_n_max: int) -> StateVector:
    """Embed the state in a larger Fock space, preserving amplitudes exactly."""
    if new_n_max < state.trunc.n_max:
        raise ValueError(
            f"new_n_max {new_n_max} smaller than current {state.trunc.n_max}"
        )
    new_trunc = FockTruncation(new_n_max, state.trunc.leakage_tol)
    amps = np.zeros(new_trunc.dim, dtype=np.complex128)
    amps[: state.trunc.dim] = state.amplitudes
    return StateVector(amps, new_trunc)


def reduce_truncation(state: StateVector, new_n_max: int,
                      drop_tol: float = 1e-12) -> StateVector:
    """Project onto a smaller cutoff; errors if discarded population > drop_tol."""
    if new_n_max > state.trunc.n_max:
        raise ValueError(
            f"new_n_max {new_n_max} larger than current {state.trunc.n_max}"
        )
    new_trunc = FockTruncation(new_n_max, state.trunc.leakage_tol)
    dropped = float(np.sum(np.abs(state.amplitudes[new_trunc.dim:]) ** 2))
    if dropped > drop_tol:
        raise ValueError(
            f"projection would discard population {dropped:.3e} > {drop_tol:.3e}"
        )
    return StateVector(state.amplitudes[: new_trunc.dim], new_trunc)
