"""Exception types shared across the package."""


class TcsyncError(Exception):
    """Base class for all package-specific errors."""


class TruncationOverflowError(TcsyncError):
    """Population reached the top of the truncated Fock ladder.

    Carries the time at which the leakage threshold was crossed and the
    cutoff in force at that moment.
    """

    def __init__(self, t, n_max, leakage):
        self.t = t
        self.n_max = n_max
        self.leakage = leakage
        super().__init__(
            f"truncation leakage {leakage:.3e} at t={t:g} with n_max={n_max}; "
            f"raise n_max or enable auto_extend"
        )


class CutoffBoundError(TcsyncError):
    """Cutoff convergence would exceed the configured n_max bound."""

    def __init__(self, n_max, bound):
        self.n_max = n_max
        self.bound = bound
        super().__init__(
            f"cutoff convergence reached n_max={n_max} > bound {bound}"
        )


class DivergenceError(TcsyncError):
    """The integrator produced a non-finite state."""

    def __init__(self, t, dt):
        self.t = t
        self.dt = dt
        super().__init__(
            f"non-finite state at t={t:g} (dt={dt:g}); reduce dt"
        )


class NormDriftError(TcsyncError):
    """State norm drifted beyond the configured tolerance."""

    def __init__(self, drift, tol, t):
        self.drift = drift
        self.tol = tol
        self.t = t
        super().__init__(
            f"norm drift {drift:.3e} exceeds tolerance {tol:.3e} at t={t:g}; "
            f"reduce dt or loosen norm_tol"
        )


class UndefinedCorrelationError(TcsyncError):
    """Pearson correlation requested for a zero-variance window."""


class DegenerateCouplingError(TcsyncError):
    """Unbalanced closed forms evaluated at g1 == g2."""


class ExtractionError(TcsyncError):
    """Block coefficient extraction failed validation."""


class ConfigError(TcsyncError):
    """Invalid or unknown configuration input."""
