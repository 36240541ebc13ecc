"""Expectation values and windowed correlation measures on sampled series."""
from __future__ import annotations

import numpy as np

from .errors import UndefinedCorrelationError
from .hilbert import StateVector, fock_numbers, sz_sign_vectors

_RANGE_TOL = 1e-12


def sigma_z_expect(state: StateVector, qubit: int) -> float:
    """<sigma_z> of qubit 1 or 2 (normalized by the state norm)."""
    if qubit not in (1, 2):
        raise ValueError(f"qubit must be 1 or 2, got {qubit}")
    pop = np.abs(state.amplitudes) ** 2
    s1, s2 = sz_sign_vectors(state.trunc)
    signs = s1 if qubit == 1 else s2
    total = pop.sum()
    if total == 0.0:
        raise ValueError("zero state has no expectation values")
    return float((signs * pop).sum() / total)


def mean_photon(state: StateVector) -> float:
    pop = np.abs(state.amplitudes) ** 2
    total = pop.sum()
    if total == 0.0:
        raise ValueError("zero state has no expectation values")
    return float((fock_numbers(state.trunc) * pop).sum() / total)


def window_slice(times: np.ndarray, t_start: float, delta: float) -> slice:
    """Samples with t_start <= t <= t_start+delta, snapped to the grid
    with a small slack so exact endpoints are kept despite rounding."""
    if delta <= 0.0:
        raise ValueError(f"window length must be positive, got {delta}")
    slack = 1e-9 * max(1.0, abs(t_start) + delta)
    i0 = int(np.searchsorted(times, t_start - slack, side="left"))
    i1 = int(np.searchsorted(times, t_start + delta + slack, side="right"))
    if i1 - i0 < 2:
        raise ValueError(
            f"window [{t_start}, {t_start + delta}] covers fewer than two "
            f"samples of the given time grid"
        )
    return slice(i0, i1)


def windowed_mean(times: np.ndarray, series: np.ndarray,
                  t_start: float, delta: float) -> float:
    sl = window_slice(times, t_start, delta)
    t = times[sl]
    return float(np.trapezoid(series[sl], t) / (t[-1] - t[0]))


def pearson(times: np.ndarray, x: np.ndarray, y: np.ndarray,
            t_start: float, delta: float) -> float:
    """Signed Pearson coefficient of two series over a time window.

    Means, variances and the covariance are trapezoid integrals over the
    window, so unevenly spaced grids are handled correctly.  A series
    whose range over the window is below ~1e-12 (relative) carries no
    phase information and raises UndefinedCorrelationError.
    """
    sl = window_slice(times, t_start, delta)
    t = times[sl]
    xv = np.asarray(x, dtype=float)[sl]
    yv = np.asarray(y, dtype=float)[sl]
    span = t[-1] - t[0]
    for name, v in (("first", xv), ("second", yv)):
        scale = max(1.0, float(np.max(np.abs(v))))
        if float(np.max(v) - np.min(v)) <= _RANGE_TOL * scale:
            raise UndefinedCorrelationError(
                f"{name} series is constant over the window "
                f"[{t_start}, {t_start + delta}]"
            )
    dx = xv - np.trapezoid(xv, t) / span
    dy = yv - np.trapezoid(yv, t) / span
    cov = np.trapezoid(dx * dy, t)
    vx = np.trapezoid(dx * dx, t)
    vy = np.trapezoid(dy * dy, t)
    if vx <= 0.0 or vy <= 0.0:
        raise UndefinedCorrelationError(
            "zero variance over the window despite nonzero range"
        )
    return float(np.clip(cov / np.sqrt(vx * vy), -1.0, 1.0))


def sliding_pearson(times: np.ndarray, x: np.ndarray, y: np.ndarray,
                    t_starts: np.ndarray, delta: float) -> np.ndarray:
    """pearson() evaluated for each window start; NaN where undefined."""
    out = np.empty(len(t_starts))
    for i, t0 in enumerate(t_starts):
        try:
            out[i] = pearson(times, x, y, float(t0), delta)
        except UndefinedCorrelationError:
            out[i] = np.nan
    return out
