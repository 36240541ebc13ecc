"""Two qubits in a driven cavity: propagation, block analysis, synchrony.

The package simulates a pair of two-level systems coupled to one bosonic
mode whose boundary is parametrically modulated for a finite interval.
After the modulation stops, the state decomposes into small invariant
blocks with closed-form dynamics; comparing and classifying those blocks
explains when the two qubits oscillate in step.
"""

__version__ = "0.1.0"

from .analytic import (BalancedBlockCoeffs, BalancedVacuumCoeffs, GroundCoeff,
                       InteractionAmplitudes, SyncVerdict,
                       UnbalancedBlockCoeffs, UnbalancedVacuumCoeffs,
                       analytic_state, check_sync, check_sync_blocks,
                       dark_state_probability, delta_sigma_z, extract_blocks,
                       from_interaction_picture, load_coefficients_csv,
                       save_coefficients_csv, to_interaction_picture)
from .backend import backend_name
from .errors import (ConfigError, CutoffBoundError, DegenerateCouplingError,
                     DivergenceError, ExtractionError, NormDriftError,
                     TcsyncError, TruncationOverflowError,
                     UndefinedCorrelationError)
from .hamiltonian import Operators, SparseOperator, SystemParams
from .hilbert import (FockTruncation, QubitLevel, StateVector, basis_index,
                      prepare_initial)
from .observables import (mean_photon, pearson, sigma_z_expect,
                          sliding_pearson, windowed_mean)
from .propagator import (IntegratorConfig, Trajectory, converge_cutoff,
                         evolve, free_spectral_states, load_trajectory_csv,
                         save_trajectory_csv, step)
from .sweep import SweepGrid, SweepSpec, run_sweep

__all__ = [
    "__version__",
    "BalancedBlockCoeffs", "BalancedVacuumCoeffs", "GroundCoeff",
    "InteractionAmplitudes", "SyncVerdict", "UnbalancedBlockCoeffs",
    "UnbalancedVacuumCoeffs", "analytic_state", "check_sync",
    "check_sync_blocks", "dark_state_probability", "delta_sigma_z",
    "extract_blocks", "from_interaction_picture", "load_coefficients_csv",
    "save_coefficients_csv", "to_interaction_picture",
    "backend_name",
    "ConfigError", "CutoffBoundError", "DegenerateCouplingError",
    "DivergenceError", "ExtractionError", "NormDriftError", "TcsyncError",
    "TruncationOverflowError", "UndefinedCorrelationError",
    "Operators", "SparseOperator", "SystemParams",
    "FockTruncation", "QubitLevel", "StateVector", "basis_index",
    "prepare_initial",
    "mean_photon", "pearson", "sigma_z_expect", "sliding_pearson",
    "windowed_mean",
    "IntegratorConfig", "Trajectory", "converge_cutoff", "evolve",
    "free_spectral_states", "load_trajectory_csv", "save_trajectory_csv",
    "step",
    "SweepGrid", "SweepSpec", "run_sweep",
]
