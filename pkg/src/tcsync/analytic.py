"""Closed-form dynamics of the undriven interaction-picture blocks.

After the drive switches off the total excitation number N is conserved and
the interaction-picture state factors into small invariant blocks, labelled
here by the Fock index m of their |g,g,m> member:

    block 0:   {|g,g,0>}                                (N=0, frozen)
    block 1:   {|g,g,1>, |g,e,0>, |e,g,0>}              (N=1)
    block m>1: {|g,g,m>, |g,e,m-1>, |e,g,m-1>, |e,e,m-2>}  (N=m)

Each block evolves with two frequencies at most; the constants multiplying
the modes are extracted from a single snapshot and then reproduce the state
at any later time.  Equal couplings admit simple closed forms; unequal
couplings go through an explicit 4x4 mode matrix, which degenerates as
g1 -> g2 (DegenerateCouplingError) where the balanced forms take over.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCouplingError, ExtractionError
from .hamiltonian import SystemParams
from .hilbert import (FockTruncation, QubitLevel, StateVector, basis_index,
                      fock_numbers, sz_sign_vectors)

DEFAULT_TOL_MAG = 0.02
DEFAULT_TOL_PHASE = 0.05 * math.pi

_G = QubitLevel.G
_E = QubitLevel.E


# ---------------------------------------------------------------- frames

def to_interaction_picture(state: StateVector, t: float,
                           params: SystemParams) -> StateVector:
    """Strip the free phases: psi_I = exp(+i H0 t) psi."""
    return _rotate(state, t, params, +1.0)


def from_interaction_picture(state: StateVector, t: float,
                             params: SystemParams) -> StateVector:
    return _rotate(state, t, params, -1.0)


def _rotate(state, t, params, sign):
    s1, s2 = sz_sign_vectors(state.trunc)
    e0 = (params.omega * fock_numbers(state.trunc)
          + 0.5 * (params.omega_q1 * s1 + params.omega_q2 * s2))
    return StateVector(state.amplitudes * np.exp(sign * 1j * e0 * t),
                       state.trunc)


@dataclass(frozen=True)
class InteractionAmplitudes:
    """Block-ordered view of an interaction-picture state: a[m]=<g,g,m|psi>,
    b[m]=<g,e,m|psi>, c[m]=<e,g,m|psi>, d[m]=<e,e,m|psi>."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def from_state(cls, state: StateVector) -> "InteractionAmplitudes":
        psi = state.amplitudes
        return cls(psi[0::4].copy(), psi[1::4].copy(),
                   psi[2::4].copy(), psi[3::4].copy())

    @property
    def n_max(self) -> int:
        return len(self.a) - 1

    def block_population(self, m: int) -> float:
        if m == 0:
            return float(abs(self.a[0]) ** 2)
        p = abs(self.a[m]) ** 2 + abs(self.b[m - 1]) ** 2 + abs(self.c[m - 1]) ** 2
        if m >= 2:
            p += abs(self.d[m - 2]) ** 2
        return float(p)


# ------------------------------------------------- mode invariants

def k_m(m: int) -> float:
    """Balanced block-m Rabi factor: oscillation frequency is g*k_m(m)."""
    return math.sqrt(2.0 * (2 * m - 1))


def g_norm(g1: float, g2: float) -> float:
    return math.hypot(g1, g2)


def l_m(g1: float, g2: float, m: int) -> float:
    g2n = g1 * g1 + g2 * g2
    return math.sqrt(g2n * g2n + 16.0 * g1 * g1 * g2 * g2 * m * (m - 1))


def m_plus(g1: float, g2: float, m: int) -> float:
    g2n = g1 * g1 + g2 * g2
    return math.sqrt(g2n * (2 * m - 1) + l_m(g1, g2, m))


def m_minus(g1: float, g2: float, m: int) -> float:
    # product form: exact 0 at g1=g2, no cancellation for close couplings
    return 2.0 * math.sqrt(m * (m - 1)) * abs(g1 * g1 - g2 * g2) / m_plus(g1, g2, m)


def _unbalanced_matrix(g1: float, g2: float, m: int, t: float) -> np.ndarray:
    """Columns are the four block-m eigenmodes at time t, ordered
    (S,U) = (+,+), (+,-), (-,+), (-,-)."""
    if g1 <= 0.0 or g2 <= 0.0:
        raise DegenerateCouplingError(
            f"mode decomposition needs both couplings positive, got "
            f"g1={g1}, g2={g2}"
        )
    rm = math.sqrt(m)
    rm1 = math.sqrt(m - 1)
    g2n = g1 * g1 + g2 * g2
    ell = l_m(g1, g2, m)
    mp = m_plus(g1, g2, m)
    mm = m_minus(g1, g2, m)
    if mm <= 1e-12 * mp:
        raise DegenerateCouplingError(
            f"couplings g1={g1}, g2={g2} are degenerate for block m={m}; "
            f"use the balanced closed forms"
        )
    cols = np.empty((4, 4), dtype=np.complex128)
    j = 0
    for s_sign, m_s in ((+1.0, mp), (-1.0, mm)):
        u_a = (g2n + s_sign * ell) / (4.0 * g1 * g2 * rm * rm1)
        for u_sign in (+1.0, -1.0):
            lam = -u_sign * m_s / math.sqrt(2.0)
            v_b = (g2 * rm * u_a + g1 * rm1) / lam
            v_c = (g1 * rm * u_a + g2 * rm1) / lam
            phase = np.exp(1j * u_sign * m_s * t / math.sqrt(2.0))
            cols[:, j] = np.array([u_a, v_b, v_c, 1.0]) * phase
            j += 1
    return cols


# ------------------------------------------------- coefficient containers

@dataclass(frozen=True)
class GroundCoeff:
    """Frozen N=0 amplitude."""

    c0: complex

    block = 0

    @property
    def weight(self) -> float:
        return abs(self.c0) ** 2

    def amplitudes_at(self, t: float) -> dict:
        return {(_G, _G, 0): self.c0}


@dataclass(frozen=True)
class BalancedVacuumCoeffs:
    """N=1 block, equal couplings: one frozen mode (c10, the antisymmetric
    qubit combination) plus a conjugate pair rotating at +-sqrt(2)*g."""

    c10: complex
    c20: complex
    c30: complex
    g: float

    block = 1

    @property
    def weight(self) -> float:
        amps = self.amplitudes_at(0.0)
        return float(sum(abs(v) ** 2 for v in amps.values()))

    def amplitudes_at(self, t: float) -> dict:
        root2 = math.sqrt(2.0)
        em = np.exp(-1j * root2 * self.g * t)
        ep = np.exp(+1j * root2 * self.g * t)
        a1 = root2 * (self.c20 * em - self.c30 * ep)
        b0 = -self.c10 + self.c20 * em + self.c30 * ep
        c0 = b0 + 2.0 * self.c10
        return {(_G, _G, 1): a1, (_G, _E, 0): b0, (_E, _G, 0): c0}


@dataclass(frozen=True)
class BalancedBlockCoeffs:
    """Block m >= 2, equal couplings: two frozen modes (c1, c2) plus a pair
    rotating at +-g*k_m(m)."""

    m: int
    c1: complex
    c2: complex
    c3: complex
    c4: complex
    g: float

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"block index must be >= 2, got {self.m}")

    @property
    def block(self) -> int:
        return self.m

    @property
    def weight(self) -> float:
        amps = self.amplitudes_at(0.0)
        return float(sum(abs(v) ** 2 for v in amps.values()))

    def amplitudes_at(self, t: float) -> dict:
        m = self.m
        gam = self.g * k_m(m)
        ep = np.exp(1j * gam * t)
        em = np.exp(-1j * gam * t)
        rm = math.sqrt(m)
        rm1 = math.sqrt(m - 1)
        a = (self.c2 * (1 - m) + self.c3 * m * ep + self.c4 * m * em) / (rm * rm1)
        b = -self.c1 - k_m(m) * (self.c3 * ep - self.c4 * em) / (2.0 * rm1)
        c = b + 2.0 * self.c1
        d = self.c2 + self.c3 * ep + self.c4 * em
        return {(_G, _G, m): a, (_G, _E, m - 1): b,
                (_E, _G, m - 1): c, (_E, _E, m - 2): d}


@dataclass(frozen=True)
class UnbalancedVacuumCoeffs:
    """N=1 block, unequal couplings: frozen mode c1 entering |g,e,0> with
    weight -g1 and |e,g,0> with +g2, plus a pair rotating at +-G."""

    c1: complex
    c2: complex
    c3: complex
    g1: float
    g2: float

    block = 1

    @property
    def weight(self) -> float:
        amps = self.amplitudes_at(0.0)
        return float(sum(abs(v) ** 2 for v in amps.values()))

    def amplitudes_at(self, t: float) -> dict:
        g = g_norm(self.g1, self.g2)
        em = np.exp(-1j * g * t)
        ep = np.exp(+1j * g * t)
        osc = self.c2 * em + self.c3 * ep
        a1 = g * (self.c2 * em - self.c3 * ep)
        b0 = self.g2 * osc - self.c1 * self.g1
        c0 = self.g1 * osc + self.c1 * self.g2
        return {(_G, _G, 1): a1, (_G, _E, 0): b0, (_E, _G, 0): c0}


@dataclass(frozen=True)
class UnbalancedBlockCoeffs:
    """Block m >= 2, unequal couplings: four modes at +-M_plus/sqrt(2) and
    +-M_minus/sqrt(2), labelled (S,U) by branch and rotation sense."""

    m: int
    cpp: complex
    cpm: complex
    cmp_: complex
    cmm: complex
    g1: float
    g2: float

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"block index must be >= 2, got {self.m}")

    @property
    def block(self) -> int:
        return self.m

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.cpp, self.cpm, self.cmp_, self.cmm],
                        dtype=np.complex128)

    @property
    def weight(self) -> float:
        amps = self.amplitudes_at(0.0)
        return float(sum(abs(v) ** 2 for v in amps.values()))

    def amplitudes_at(self, t: float) -> dict:
        m = self.m
        vec = _unbalanced_matrix(self.g1, self.g2, m, t) @ self.coefficients
        return {(_G, _G, m): vec[0], (_G, _E, m - 1): vec[1],
                (_E, _G, m - 1): vec[2], (_E, _E, m - 2): vec[3]}


BlockCoeffs = (GroundCoeff | BalancedVacuumCoeffs | BalancedBlockCoeffs
               | UnbalancedVacuumCoeffs | UnbalancedBlockCoeffs)


# ------------------------------------------------------- extraction

def extract_balanced_vacuum(amps: InteractionAmplitudes, t0: float,
                            g: float) -> BalancedVacuumCoeffs:
    a1, b0, c0 = amps.a[1], amps.b[0], amps.c[0]
    c1 = (c0 - b0) / 2.0
    sig = (b0 + c0) / 2.0
    del_ = a1 / math.sqrt(2.0)
    phi = math.sqrt(2.0) * g * t0
    c2 = (sig + del_) * np.exp(1j * phi) / 2.0
    c3 = (sig - del_) * np.exp(-1j * phi) / 2.0
    return BalancedVacuumCoeffs(complex(c1), complex(c2), complex(c3), g)


def extract_balanced_block(amps: InteractionAmplitudes, t0: float,
                           g: float, m: int) -> BalancedBlockCoeffs:
    if m < 2:
        raise ValueError(f"block index must be >= 2, got {m}")
    a, b = amps.a[m], amps.b[m - 1]
    c, d = amps.c[m - 1], amps.d[m - 2]
    rm = math.sqrt(m)
    rm1 = math.sqrt(m - 1)
    gam = g * k_m(m)
    c1 = (c - b) / 2.0
    c2 = (a * rm * rm1 - m * d) / (1.0 - 2.0 * m)
    x = d - c2
    y = -(b + c) * rm1 / k_m(m)
    c3 = (x + y) * np.exp(-1j * gam * t0) / 2.0
    c4 = (x - y) * np.exp(+1j * gam * t0) / 2.0
    return BalancedBlockCoeffs(m, complex(c1), complex(c2),
                               complex(c3), complex(c4), g)


def extract_unbalanced_vacuum(amps: InteractionAmplitudes, t0: float,
                              g1: float, g2: float) -> UnbalancedVacuumCoeffs:
    a1, b0, c0 = amps.a[1], amps.b[0], amps.c[0]
    g = g_norm(g1, g2)
    if g == 0.0:
        raise DegenerateCouplingError("both couplings are zero")
    c1 = (g2 * c0 - g1 * b0) / (g * g)
    sig = (g1 * c0 + g2 * b0) / (g * g)
    del_ = a1 / g
    c2 = (sig + del_) * np.exp(+1j * g * t0) / 2.0
    c3 = (sig - del_) * np.exp(-1j * g * t0) / 2.0
    return UnbalancedVacuumCoeffs(complex(c1), complex(c2), complex(c3), g1, g2)


def extract_unbalanced_block(amps: InteractionAmplitudes, t0: float,
                             g1: float, g2: float,
                             m: int) -> UnbalancedBlockCoeffs:
    if m < 2:
        raise ValueError(f"block index must be >= 2, got {m}")
    rhs = np.array([amps.a[m], amps.b[m - 1], amps.c[m - 1], amps.d[m - 2]],
                   dtype=np.complex128)
    mat = _unbalanced_matrix(g1, g2, m, t0)
    try:
        coef = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise ExtractionError(f"singular mode matrix for block m={m}") from exc
    return UnbalancedBlockCoeffs(m, complex(coef[0]), complex(coef[1]),
                                 complex(coef[2]), complex(coef[3]), g1, g2)


def extract_blocks(state_interaction: StateVector, t0: float,
                   params: SystemParams,
                   min_population: float = 1e-12) -> list:
    """Decompose an interaction-picture snapshot into block coefficients.

    Blocks holding less than min_population of the total norm are dropped.
    Balanced parameters use the closed forms, otherwise the mode-matrix
    solve.  Only blocks fully inside the truncation are considered.
    """
    amps = InteractionAmplitudes.from_state(state_interaction)
    total = float(state_interaction.norm ** 2)
    if total == 0.0:
        raise ExtractionError("cannot extract coefficients from a zero state")
    thresh = min_population * total
    balanced = params.is_balanced
    out: list = []
    if amps.block_population(0) >= thresh:
        out.append(GroundCoeff(complex(amps.a[0])))
    if amps.block_population(1) >= thresh:
        if balanced:
            out.append(extract_balanced_vacuum(amps, t0, params.g1))
        else:
            out.append(extract_unbalanced_vacuum(amps, t0, params.g1, params.g2))
    for m in range(2, amps.n_max + 1):
        if amps.block_population(m) < thresh:
            continue
        if balanced:
            out.append(extract_balanced_block(amps, t0, params.g1, m))
        else:
            out.append(extract_unbalanced_block(amps, t0, params.g1,
                                                params.g2, m))
    return out


def analytic_state(coeffs: list, trunc: FockTruncation,
                   t: float) -> StateVector:
    """Interaction-picture state rebuilt from block coefficients."""
    psi = np.zeros(trunc.dim, dtype=np.complex128)
    for blk in coeffs:
        for (q1, q2, m), val in blk.amplitudes_at(t).items():
            psi[basis_index(q1, q2, m, trunc)] = val
    return StateVector(psi, trunc)


# ------------------------------------------------------- derived quantities

def delta_sigma_z(coeffs, t: float) -> float:
    """Block contribution to <sigma_z^(1)> - <sigma_z^(2)> at time t."""
    b = c = 0.0
    for (q1, q2, _m), val in coeffs.amplitudes_at(t).items():
        if q1 == _G and q2 == _E:
            b = abs(val) ** 2
        elif q1 == _E and q2 == _G:
            c = abs(val) ** 2
    return 2.0 * (c - b)


def dark_state_probability(coeffs: BalancedVacuumCoeffs) -> float:
    """Squared magnitude of the frozen antisymmetric N=1 coefficient."""
    if not isinstance(coeffs, BalancedVacuumCoeffs):
        raise TypeError("dark-state probability is defined for the balanced "
                        "N=1 block only")
    return abs(coeffs.c10) ** 2


# ------------------------------------------------------- synchrony checks

@dataclass(frozen=True)
class SyncVerdict:
    block: int
    mechanism: str  # "coefficient-vanishing" | "phase-quadrature" | "none"
    residuals: dict
    notes: tuple = ()

    @property
    def synchronized(self) -> bool:
        return self.mechanism != "none"


def quadrature_distance(phase: float) -> float:
    """Circular distance from phase to the nearest odd multiple of pi/2."""
    return abs(math.remainder(phase - math.pi / 2.0, math.pi))


def _pair_phase_dist(anti, osc_sum):
    if abs(anti) == 0.0 or abs(osc_sum) == 0.0:
        return math.nan
    return quadrature_distance(float(np.angle(osc_sum) - np.angle(anti)))


def _two_mode_verdict(block, anti, osc_a, osc_b, tol_mag, tol_phase,
                      notes=()):
    pair = abs(abs(osc_a) - abs(osc_b))
    dist = _pair_phase_dist(anti, osc_a + osc_b)
    residuals = {"anti_mag": abs(anti), "pair_mag": pair, "phase_dist": dist}
    if abs(anti) < tol_mag:
        mech = "coefficient-vanishing"
    elif pair < tol_mag and not math.isnan(dist) and dist < tol_phase:
        mech = "phase-quadrature"
    else:
        mech = "none"
    return SyncVerdict(block, mech, residuals, tuple(notes))


def check_sync(coeffs, tol_mag: float = DEFAULT_TOL_MAG,
               tol_phase: float = DEFAULT_TOL_PHASE) -> SyncVerdict:
    """Classify how (whether) the two qubits lock within one block.

    "coefficient-vanishing": the modes that could drive the qubits apart
    are empty.  "phase-quadrature": those modes are populated but arranged
    so their beat against the frozen part time-averages away.  "none":
    neither residual pattern holds within tolerance.
    """
    if isinstance(coeffs, GroundCoeff):
        return SyncVerdict(0, "coefficient-vanishing",
                           {"anti_mag": 0.0, "pair_mag": 0.0,
                            "phase_dist": math.nan},
                           ("single-state block",))
    if isinstance(coeffs, BalancedVacuumCoeffs):
        return _two_mode_verdict(1, coeffs.c10, coeffs.c20, coeffs.c30,
                                 tol_mag, tol_phase)
    if isinstance(coeffs, BalancedBlockCoeffs):
        # within B and C the oscillating pair enters with opposite signs,
        # so the quadrature test uses (c3, -c4) against c1
        return _two_mode_verdict(coeffs.m, coeffs.c1, coeffs.c3, -coeffs.c4,
                                 tol_mag, tol_phase)
    if isinstance(coeffs, UnbalancedVacuumCoeffs):
        return _two_mode_verdict(1, coeffs.c1, coeffs.c2, coeffs.c3,
                                 tol_mag, tol_phase)
    if isinstance(coeffs, UnbalancedBlockCoeffs):
        return _unbalanced_block_verdict(coeffs, tol_mag, tol_phase)
    raise TypeError(f"no synchrony check for {type(coeffs).__name__}")


def _unbalanced_block_verdict(coeffs: UnbalancedBlockCoeffs, tol_mag,
                              tol_phase) -> SyncVerdict:
    notes = []
    if abs(coeffs.g1 - coeffs.g2) <= 0.1 * min(coeffs.g1, coeffs.g2):
        notes.append("couplings nearly equal: the slow mode pair beats on "
                     "a timescale that may exceed the observation window")
    slow_mag = max(abs(coeffs.cmp_), abs(coeffs.cmm))
    res_plus = abs(abs(coeffs.cpp) - abs(coeffs.cpm))
    res_minus = abs(abs(coeffs.cmp_) - abs(coeffs.cmm))
    dist = _pair_phase_dist(coeffs.cpp + coeffs.cpm, coeffs.cmp_ + coeffs.cmm)
    residuals = {"slow_mag": slow_mag, "plus_pair": res_plus,
                 "minus_pair": res_minus, "phase_dist": dist}
    if slow_mag < tol_mag:
        mech = "coefficient-vanishing"
    elif (not math.isnan(dist) and dist < tol_phase
          and min(res_plus, res_minus) < tol_mag):
        mech = "phase-quadrature"
        if max(res_plus, res_minus) >= tol_mag:
            notes.append(f"one mode pair stays magnitude-unbalanced "
                         f"(residual {max(res_plus, res_minus):.3f}); the "
                         f"lock rests on the other pair and the phase gap")
    else:
        mech = "none"
    return SyncVerdict(coeffs.m, mech, residuals, tuple(notes))


def check_sync_blocks(coeffs: list, tol_mag: float = DEFAULT_TOL_MAG,
                      tol_phase: float = DEFAULT_TOL_PHASE) -> list:
    return [check_sync(c, tol_mag, tol_phase) for c in coeffs
            if not isinstance(c, GroundCoeff)]


# ------------------------------------------------------------ persistence

_LABELS = {
    GroundCoeff: ("c0",),
    BalancedVacuumCoeffs: ("c10", "c20", "c30"),
    BalancedBlockCoeffs: ("c1", "c2", "c3", "c4"),
    UnbalancedVacuumCoeffs: ("c1", "c2", "c3"),
    UnbalancedBlockCoeffs: ("c++", "c+-", "c-+", "c--"),
}
_FIELDS = {
    GroundCoeff: ("c0",),
    BalancedVacuumCoeffs: ("c10", "c20", "c30"),
    BalancedBlockCoeffs: ("c1", "c2", "c3", "c4"),
    UnbalancedVacuumCoeffs: ("c1", "c2", "c3"),
    UnbalancedBlockCoeffs: ("cpp", "cpm", "cmp_", "cmm"),
}


def save_coefficients_csv(path, coeffs: list, params: SystemParams,
                          t0: float) -> None:
    with open(path, "w") as fh:
        fh.write(f"# tcsync coefficients g1={params.g1:.17g} "
                 f"g2={params.g2:.17g} t0={t0:.17g}\n")
        fh.write("block,label,re,im,abs,arg\n")
        for blk in coeffs:
            labels = _LABELS[type(blk)]
            fields = _FIELDS[type(blk)]
            for lab, fld in zip(labels, fields):
                v = complex(getattr(blk, fld))
                fh.write(f"{blk.block},{lab},{v.real:.17g},{v.imag:.17g},"
                         f"{abs(v):.17g},{np.angle(v):.17g}\n")


def load_coefficients_csv(path) -> tuple[list, dict]:
    """Inverse of save_coefficients_csv: (coefficients, metadata)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    m = re.match(r"#\s*tcsync coefficients\s+g1=(\S+)\s+g2=(\S+)\s+t0=(\S+)",
                 lines[0])
    if m is None:
        raise ValueError(f"{path}: missing coefficient metadata line")
    meta = {"g1": float(m.group(1)), "g2": float(m.group(2)),
            "t0": float(m.group(3))}
    rows: dict[int, dict[str, complex]] = {}
    for ln in lines[2:]:
        parts = ln.split(",")
        blk = int(parts[0])
        rows.setdefault(blk, {})[parts[1]] = complex(float(parts[2]),
                                                     float(parts[3]))
    g1, g2 = meta["g1"], meta["g2"]
    balanced = abs(g1 - g2) <= 1e-15
    out: list = []
    for blk in sorted(rows):
        vals = rows[blk]
        if blk == 0:
            out.append(GroundCoeff(vals["c0"]))
        elif blk == 1 and "c10" in vals:
            out.append(BalancedVacuumCoeffs(vals["c10"], vals["c20"],
                                            vals["c30"], g1))
        elif blk == 1:
            out.append(UnbalancedVacuumCoeffs(vals["c1"], vals["c2"],
                                              vals["c3"], g1, g2))
        elif "c++" in vals:
            out.append(UnbalancedBlockCoeffs(blk, vals["c++"], vals["c+-"],
                                             vals["c-+"], vals["c--"],
                                             g1, g2))
        else:
            if not balanced:
                raise ValueError(f"{path}: balanced labels for block {blk} "
                                 f"but g1 != g2 in metadata")
            out.append(BalancedBlockCoeffs(blk, vals["c1"], vals["c2"],
                                           vals["c3"], vals["c4"], g1))
    return out, meta
