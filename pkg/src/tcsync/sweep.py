"""Grid scans of the qubit-qubit correlation over detuning and drive strength.

A sweep varies one relative detuning axis (either the second qubit's initial
angle or its coupling, both expressed as a fraction of the first qubit's
value) against a list of drive amplitudes, runs each cell to t_end and
reports the windowed Pearson coefficient of the two sigma_z series.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (CutoffBoundError, DivergenceError, NormDriftError,
                     TruncationOverflowError, UndefinedCorrelationError)
from .hamiltonian import Operators, SystemParams
from .hilbert import FockTruncation, prepare_initial
from .observables import pearson
from .propagator import IntegratorConfig, Trajectory, evolve, save_trajectory_csv

# series this close are symmetry-identical: report exactly 1 instead of
# feeding rounding noise to the correlation
IDENTICAL_SERIES_TOL = 1e-10

STATUS_OK = "ok"
STATUS_ZERO_VARIANCE = "zero-variance"
STATUS_TRUNCATION = "truncation-error"


@dataclass(frozen=True)
class SweepSpec:
    """One grid: axis_values x alpha0_values.

    axis="theta": cell angle theta2 = theta1*(1 - r), couplings balanced.
    axis="coupling": cell coupling g2 = g1*(1 - r), theta2 fixed.
    """

    axis: str
    axis_values: tuple
    alpha0_values: tuple
    theta1: float = math.pi / 4
    theta2: float = math.pi / 4
    params: SystemParams = SystemParams()
    integrator: IntegratorConfig = IntegratorConfig()
    n_max: int = 64
    leakage_tol: float = 0.02
    window_start: float = 500.0
    window: float = 1500.0

    def __post_init__(self):
        if self.axis not in ("theta", "coupling"):
            raise ValueError(f"axis must be 'theta' or 'coupling', got "
                             f"{self.axis!r}")
        if not self.axis_values or not self.alpha0_values:
            raise ValueError("axis_values and alpha0_values must be non-empty")

    def cell_setup(self, r: float, alpha0: float):
        if self.axis == "theta":
            th2 = self.theta1 * (1.0 - r)
            params = replace(self.params, alpha0=alpha0, g2=self.params.g1)
        else:
            th2 = self.theta2
            params = replace(self.params, alpha0=alpha0,
                             g2=self.params.g1 * (1.0 - r))
        return self.theta1, th2, params


@dataclass(frozen=True)
class SweepGrid:
    spec: SweepSpec
    pearson: np.ndarray      # (len(axis_values), len(alpha0_values)), signed
    n_max_used: np.ndarray   # int grid
    status: np.ndarray       # str grid

    @property
    def abs_pearson(self) -> np.ndarray:
        return np.abs(self.pearson)

    def row(self, r: float) -> int:
        vals = np.asarray(self.spec.axis_values, dtype=float)
        i = int(np.argmin(np.abs(vals - r)))
        if abs(vals[i] - r) > 1e-12 * max(1.0, abs(r)):
            raise KeyError(f"axis value {r} not on the grid")
        return i

    def best_alpha0(self, r: float) -> float:
        """Drive amplitude maximizing |pearson| along one axis row."""
        i = self.row(r)
        vals = self.abs_pearson[i]
        if np.all(np.isnan(vals)):
            raise ValueError(f"row {r}: no valid cells")
        return float(self.spec.alpha0_values[int(np.nanargmax(vals))])

    def to_csv(self, path) -> None:
        s = self.spec
        with open(path, "w") as fh:
            fh.write(f"# tcsync sweep axis={s.axis} theta1={s.theta1:.17g} "
                     f"window_start={s.window_start:.17g} "
                     f"window={s.window:.17g}\n")
            fh.write("axis_value,alpha0,pearson,abs_pearson,n_max_used,status\n")
            for i, r in enumerate(s.axis_values):
                for j, a in enumerate(s.alpha0_values):
                    p = self.pearson[i, j]
                    ps = f"{p:.17g}" if not math.isnan(p) else "nan"
                    ab = f"{abs(p):.17g}" if not math.isnan(p) else "nan"
                    fh.write(f"{r:.17g},{a:.17g},{ps},{ab},"
                             f"{int(self.n_max_used[i, j])},"
                             f"{self.status[i, j]}\n")


def _run_cell(spec: SweepSpec, r: float, alpha0: float, dump_dir):
    theta1, theta2, params = spec.cell_setup(r, alpha0)
    trunc = FockTruncation(spec.n_max, leakage_tol=spec.leakage_tol)
    ops = Operators.build(params, trunc)
    initial = prepare_initial(theta1, theta2, trunc)
    try:
        traj = evolve(initial, spec.integrator, ops)
    except (TruncationOverflowError, CutoffBoundError, NormDriftError,
            DivergenceError):
        return math.nan, spec.n_max, STATUS_TRUNCATION
    if dump_dir is not None:
        name = f"{spec.axis}{r:+.6g}_alpha{alpha0:.6g}.csv"
        save_trajectory_csv(traj, os.path.join(dump_dir, name))
    if float(np.max(np.abs(traj.sz1 - traj.sz2))) < IDENTICAL_SERIES_TOL:
        return 1.0, traj.n_max_used, STATUS_OK
    try:
        p = pearson(traj.times, traj.sz1, traj.sz2,
                    spec.window_start, spec.window)
    except UndefinedCorrelationError:
        return math.nan, traj.n_max_used, STATUS_ZERO_VARIANCE
    return p, traj.n_max_used, STATUS_OK


def run_sweep(spec: SweepSpec, threads: int = 1,
              dump_dir=None) -> SweepGrid:
    """Evaluate every grid cell; cells never raise, failures land in status."""
    if dump_dir is not None:
        os.makedirs(dump_dir, exist_ok=True)
    ni, nj = len(spec.axis_values), len(spec.alpha0_values)
    pear = np.full((ni, nj), math.nan)
    used = np.zeros((ni, nj), dtype=np.int64)
    stat = np.empty((ni, nj), dtype=object)
    cells = [(i, j) for i in range(ni) for j in range(nj)]

    def work(ij):
        i, j = ij
        return ij, _run_cell(spec, float(spec.axis_values[i]),
                             float(spec.alpha0_values[j]), dump_dir)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(ij) for ij in cells]
    for (i, j), (p, n_used, status) in results:
        pear[i, j] = p
        used[i, j] = n_used
        stat[i, j] = status
    return SweepGrid(spec, pear, used, stat)
