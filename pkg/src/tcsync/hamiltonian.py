"""Tavis-Cummings Hamiltonian and the parametric drive operator.

The static part is

    H_TC = omega a'a + sum_mu [ (omega_q^mu / 2) sigma_z^mu
                                + g_mu (sigma-^mu a' + sigma+^mu a) ]

and the drive contributes alpha(t) * (a' + a)^2 with the envelope
alpha(t) = alpha0 * cos(omega_d t) * Theta(tau - t), Theta(0) = 1, so the
modulation is active on [0, tau] inclusive and zero afterwards.

All matrix elements are real; operators are returned in a small COO/CSR
wrapper that the propagation backends consume directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .hilbert import FockTruncation

#: g1 == g2 decisions (balanced vs unbalanced closed forms) use this slack.
BALANCED_ATOL = 1e-15


@dataclass(frozen=True)
class SystemParams:
    """Frequencies, couplings and drive settings (hbar = 1).

    Defaults put the cavity, both qubits and the drive on resonance at
    unit frequency, with the modulation window ending at tau = 500.
    """

    omega: float = 1.0
    omega_q1: float = 1.0
    omega_q2: float = 1.0
    g1: float = 0.04
    g2: float = 0.04
    alpha0: float = 0.0
    omega_d: float = 1.0
    tau: float = 500.0

    @property
    def is_balanced(self) -> bool:
        return abs(self.g1 - self.g2) <= BALANCED_ATOL


class SparseOperator:
    """Hermitian operator stored as COO entries with a cached CSR form."""

    def __init__(self, dimension: int, rows, cols, values):
        self.dimension = dimension
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.complex128)
        coo = sp.coo_matrix((values, (rows, cols)),
                            shape=(dimension, dimension))
        coo.sum_duplicates()
        self._coo = coo

    @property
    def entries(self) -> list[tuple[int, int, complex]]:
        return list(zip(self._coo.row.tolist(), self._coo.col.tolist(),
                        self._coo.data.tolist()))

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return self._coo.tocsr()

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        return self.csr @ vec

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        d = self.csr - self.csr.getH()
        return d.nnz == 0 or float(abs(d).max()) <= tol

    def scaled_sum(self, coeff_self: complex, other: "SparseOperator",
                   coeff_other: complex) -> "SparseOperator":
        if other.dimension != self.dimension:
            raise ValueError(
                f"dimension mismatch: {self.dimension} vs {other.dimension}"
            )
        s = (coeff_self * self.csr + coeff_other * other.csr).tocoo()
        return SparseOperator(self.dimension, s.row, s.col, s.data)


def build_tc(params: SystemParams, trunc: FockTruncation) -> SparseOperator:
    """Static Tavis-Cummings Hamiltonian on the truncated basis.

    Matrix elements are those of the untruncated operator projected onto
    m <= n_max; couplings to m > n_max are simply absent.
    """
    rows, cols, vals = [], [], []

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    for m in range(trunc.n_max + 1):
        for q1 in (0, 1):
            for q2 in (0, 1):
                i = 4 * m + 2 * q1 + q2
                s1 = 1.0 if q1 else -1.0
                s2 = 1.0 if q2 else -1.0
                put(i, i, params.omega * m
                    + 0.5 * (params.omega_q1 * s1 + params.omega_q2 * s2))
                # sigma-^mu a' lowers the qubit and raises the photon number;
                # the hermitian conjugate supplies sigma+^mu a.
                if q1 == 1 and m + 1 <= trunc.n_max:
                    j = 4 * (m + 1) + q2          # |g, q2, m+1>
                    v = params.g1 * math.sqrt(m + 1)
                    put(j, i, v)
                    put(i, j, v)
                if q2 == 1 and m + 1 <= trunc.n_max:
                    j = 4 * (m + 1) + 2 * q1      # |q1, g, m+1>
                    v = params.g2 * math.sqrt(m + 1)
                    put(j, i, v)
                    put(i, j, v)
    return SparseOperator(trunc.dim, rows, cols, vals)


def build_drive(trunc: FockTruncation) -> SparseOperator:
    """Quadrature-squared operator (a' + a)^2 = a'^2 + a^2 + a'a + aa'.

    Diagonal 2m + 1; off-diagonal couplings m <-> m+2 with
    sqrt((m+1)(m+2)).  Identity on both qubits, so only Fock offsets
    0 and +-2 appear.
    """
    rows, cols, vals = [], [], []
    for m in range(trunc.n_max + 1):
        for q in range(4):
            i = 4 * m + q
            rows.append(i)
            cols.append(i)
            vals.append(2.0 * m + 1.0)
            if m + 2 <= trunc.n_max:
                j = 4 * (m + 2) + q
                v = math.sqrt((m + 1) * (m + 2))
                rows.extend((j, i))
                cols.extend((i, j))
                vals.extend((v, v))
    return SparseOperator(trunc.dim, rows, cols, vals)


def alpha_at(t: float, params: SystemParams) -> float:
    """Drive envelope alpha0 cos(omega_d t) Theta(tau - t), Theta(0) = 1."""
    if t <= params.tau:
        return params.alpha0 * math.cos(params.omega_d * t)
    return 0.0


def hamiltonian_at(t: float, h_tc: SparseOperator, drive: SparseOperator,
                   params: SystemParams) -> SparseOperator:
    """Full Hamiltonian H_TC + alpha(t) (a'+a)^2 at time t."""
    a = alpha_at(t, params)
    if a == 0.0:
        return h_tc
    return h_tc.scaled_sum(1.0, drive, a)


@dataclass(frozen=True, eq=False)
class Operators:
    """Operator bundle consumed by the propagator.

    Carries the static Hamiltonian, the drive operator and the parameters
    they were built from, plus a merged sparsity pattern shared by both so
    the stepping kernels evaluate H_TC + alpha(t) D in a single pass.
    """

    params: SystemParams
    trunc: FockTruncation
    h_tc: SparseOperator
    drive: SparseOperator

    @classmethod
    def build(cls, params: SystemParams, trunc: FockTruncation) -> "Operators":
        return cls(params, trunc, build_tc(params, trunc), build_drive(trunc))

    def with_n_max(self, n_max: int) -> "Operators":
        return Operators.build(
            self.params, FockTruncation(n_max, self.trunc.leakage_tol)
        )

    @cached_property
    def merged(self):
        """(indptr, indices, h_values, d_values) on the union pattern.

        Both operators are real; the imaginary parts vanish by
        construction and are dropped here.
        """
        pattern = (abs(self.h_tc.csr) + abs(self.drive.csr)).tocsr()
        pattern.sort_indices()
        h = self.h_tc.csr.copy()
        d = self.drive.csr.copy()
        hvals = np.zeros(pattern.nnz)
        dvals = np.zeros(pattern.nnz)
        for vals, op in ((hvals, h), (dvals, d)):
            op.sort_indices()
            # scatter op values into the union pattern row by row
            for i in range(pattern.shape[0]):
                p0, p1 = pattern.indptr[i], pattern.indptr[i + 1]
                o0, o1 = op.indptr[i], op.indptr[i + 1]
                pos = p0 + np.searchsorted(pattern.indices[p0:p1],
                                           op.indices[o0:o1])
                vals[pos] = op.data[o0:o1].real
        return (pattern.indptr.astype(np.int64),
                pattern.indices.astype(np.int64), hvals, dvals)
