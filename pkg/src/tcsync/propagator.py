"""Fixed-step RK4 propagation with sampling, leakage guarding and cutoff control.

The classical 4th-order scheme is applied to dpsi/dt = -i H(t) psi with the
Hamiltonian evaluated at the stage times (t, t+dt/2, t+dt).  The drive
switch-off at tau is handled exactly by the envelope convention
(Theta(0)=1); keeping tau on the step grid, as the defaults do, avoids
smearing the discontinuity across a step.

Observables are sampled every sample_interval (which must be an integer
multiple of dt).  When the population of the top two Fock levels crosses
trunc.leakage_tol the run either aborts (TruncationOverflowError) or, with
auto_extend enabled, grows the ladder by 50% and resumes from the sample
where the leak was detected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import (CutoffBoundError, DivergenceError, NormDriftError,
                     TruncationOverflowError)
from .hamiltonian import Operators, alpha_at
from .hilbert import FockTruncation, StateVector, extend_truncation


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 0.01
    sample_interval: float = 0.5
    t_end: float = 2000.0
    norm_tol: float = 1e-6
    renormalize: bool = False
    auto_extend: bool = False
    max_n_max: int = 4096

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        self.steps_per_sample  # validate grid commensurability
        self.n_samples

    @property
    def steps_per_sample(self) -> int:
        k = round(self.sample_interval / self.dt)
        if k < 1 or abs(k * self.dt - self.sample_interval) > 1e-9 * self.sample_interval:
            raise ValueError(
                f"sample_interval {self.sample_interval} is not an integer "
                f"multiple of dt {self.dt}"
            )
        return k

    @property
    def n_samples(self) -> int:
        n = round(self.t_end / self.sample_interval)
        if n < 1 or abs(n * self.sample_interval - self.t_end) > 1e-9 * self.t_end:
            raise ValueError(
                f"t_end {self.t_end} is not an integer multiple of "
                f"sample_interval {self.sample_interval}"
            )
        return n


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled run: times (starting at 0), normalized <sigma_z> pair, <n>,
    raw state norm, the final state, and optionally every sampled state."""

    times: np.ndarray
    sz1: np.ndarray
    sz2: np.ndarray
    n: np.ndarray
    norm: np.ndarray
    final_state: StateVector
    n_max_used: int
    states: np.ndarray | None = None

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - 1.0)))


def step(state: StateVector, t: float, dt: float, ops: Operators) -> StateVector:
    """One RK4 step from t to t+dt (reference implementation, numpy path)."""
    if ops.trunc.dim != state.trunc.dim:
        raise ValueError("operator/state dimension mismatch")
    h = ops.h_tc.csr
    d = ops.drive.csr
    p = ops.params

    def rhs(tt, y):
        a = alpha_at(tt, p)
        if a == 0.0:
            return -1j * (h @ y)
        return -1j * (h @ y + a * (d @ y))

    y = state.amplitudes
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, y + (dt / 2) * k1)
    k3 = rhs(t + dt / 2, y + (dt / 2) * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return StateVector(y + (dt / 6) * (k1 + 2 * (k2 + k3) + k4), state.trunc)


def evolve(initial: StateVector, config: IntegratorConfig, ops: Operators,
           store_states: bool = False) -> Trajectory:
    """Propagate from t=0 to t_end, sampling every sample_interval.

    Sample 0 is the initial state itself.  Expectation samples are
    normalized; the norm column tracks the raw integrator norm (the
    pre-renormalization value when renormalize is on, i.e. per-interval
    drift in that case).  Norm drift beyond config.norm_tol raises
    NormDriftError; non-finite states raise DivergenceError; leakage
    raises TruncationOverflowError unless auto_extend is set.
    """
    if ops.trunc.n_max != initial.trunc.n_max:
        raise ValueError("operators and state built for different cutoffs")
    n_samples = config.n_samples
    sps = config.steps_per_sample
    p = ops.params

    times = np.arange(n_samples + 1) * config.sample_interval
    sz1 = np.empty(n_samples + 1)
    sz2 = np.empty(n_samples + 1)
    nbar = np.empty(n_samples + 1)
    norm = np.empty(n_samples + 1)

    psi = initial.amplitudes.copy()
    cur = ops
    trunc = initial.trunc
    states = None
    if store_states:
        states = np.zeros((n_samples + 1, trunc.dim), dtype=np.complex128)
        states[0] = psi

    norm2, sz1[0], sz2[0], nbar[0], _ = backend.state_reductions(psi, trunc.dim - 8)
    norm[0] = math.sqrt(norm2)

    done = 0
    while done < n_samples:
        indptr, indices, hvals, dvals = cur.merged
        status, did = backend.rk4_span(
            psi, indptr, indices, hvals, dvals, config.dt,
            done * sps, n_samples - done, sps,
            p.alpha0, p.omega_d, p.tau,
            trunc.dim - 8, trunc.leakage_tol, config.renormalize,
            sz1[1:], sz2[1:], nbar[1:], norm[1:], done,
            states[1:] if states is not None else None,
        )
        done += did
        if status == backend.NONFINITE:
            raise DivergenceError(float(times[done]) + config.sample_interval,
                                  config.dt)
        if status == backend.LEAKED:
            _, _, _, _, leak = backend.state_reductions(psi, trunc.dim - 8)
            if not config.auto_extend:
                raise TruncationOverflowError(float(times[done]),
                                              trunc.n_max, leak)
            if done == n_samples:
                break  # leak on the final sample; nothing left to redo
            new_n_max = trunc.n_max + max(2, math.ceil(trunc.n_max / 2))
            if new_n_max > config.max_n_max:
                raise CutoffBoundError(new_n_max, config.max_n_max)
            grown = extend_truncation(StateVector(psi, trunc), new_n_max)
            trunc = grown.trunc
            psi = grown.amplitudes.copy()
            cur = cur.with_n_max(new_n_max)
            if states is not None:
                wider = np.zeros((n_samples + 1, trunc.dim), dtype=np.complex128)
                wider[:, : states.shape[1]] = states
                states = wider

    drift = np.abs(norm - 1.0)
    worst = int(np.argmax(drift))
    if drift[worst] > config.norm_tol:
        raise NormDriftError(float(drift[worst]), config.norm_tol,
                             float(times[worst]))

    return Trajectory(times, sz1, sz2, nbar, norm,
                      StateVector(psi, trunc), trunc.n_max, states)


def converge_cutoff(initial: StateVector, config: IntegratorConfig,
                    ops: Operators, tol: float = 1e-6) -> tuple[Trajectory, int]:
    """Double n_max until consecutive sigma_z series agree within tol.

    Returns the trajectory at the final (largest) cutoff together with its
    n_max.  Runs that abort on leakage simply trigger the next doubling.
    CutoffBoundError once a doubling would exceed config.max_n_max.
    """
    def attempt(cur_ops, state):
        try:
            return evolve(state, config, cur_ops)
        except TruncationOverflowError:
            return None

    cur_ops = ops
    state = initial
    prev = attempt(cur_ops, state)
    while True:
        n_next = 2 * cur_ops.trunc.n_max
        if n_next > config.max_n_max:
            raise CutoffBoundError(n_next, config.max_n_max)
        state = extend_truncation(state, n_next)
        cur_ops = cur_ops.with_n_max(n_next)
        nxt = attempt(cur_ops, state)
        if prev is not None and nxt is not None:
            diff = max(float(np.max(np.abs(nxt.sz1 - prev.sz1))),
                       float(np.max(np.abs(nxt.sz2 - prev.sz2))))
            if diff < tol:
                return nxt, cur_ops.trunc.n_max
        prev = nxt


def free_spectral_states(state: StateVector, ops: Operators, t0: float,
                         times: np.ndarray) -> np.ndarray:
    """Exact drive-free propagation: rows are psi(t) = e^{-iH(t-t0)} psi(t0).

    Dense eigendecomposition of the static Hamiltonian, so cost grows as
    dim^3 once plus dim^2 per requested time; no time-step error at all.
    Only valid on spans where the drive is off (t0 >= tau).
    """
    if ops.trunc.dim != state.trunc.dim:
        raise ValueError("operator/state dimension mismatch")
    if t0 < ops.params.tau:
        raise ValueError(f"spectral propagation needs the drive off: "
                         f"t0={t0} < tau={ops.params.tau}")
    evals, vecs = np.linalg.eigh(ops.h_tc.toarray())
    proj = vecs.conj().T @ state.amplitudes
    dts = np.asarray(times, dtype=float) - t0
    if np.any(dts < 0):
        raise ValueError("requested times precede the anchor t0")
    phases = np.exp(-1j * np.outer(dts, evals))
    return (phases * proj) @ vecs.T


def save_trajectory_csv(traj: Trajectory, path) -> None:
    """t,sz1,sz2,n,norm rows at full double precision."""
    with open(path, "w") as fh:
        fh.write("t,sz1,sz2,n,norm\n")
        for k in range(len(traj.times)):
            fh.write(f"{traj.times[k]:.17g},{traj.sz1[k]:.17g},"
                     f"{traj.sz2[k]:.17g},{traj.n[k]:.17g},{traj.norm[k]:.17g}\n")


def load_trajectory_csv(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}
