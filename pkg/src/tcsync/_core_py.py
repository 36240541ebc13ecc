"""Pure numpy/scipy propagation core.

Implements the same span contract as the compiled module tcsync._core:
classical RK4 on dpsi/dt = -i (H_TC + alpha(t) D) psi over a merged CSR
pattern, with periodic sampling of <sigma_z^1>, <sigma_z^2>, <n>, the
squared norm, and the top-two-Fock-level leakage.

Used automatically when the compiled extension is unavailable (or when
TCSYNC_FORCE_FALLBACK is set); semantics are identical, speed is not.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

BACKEND_NAME = "python"

#: span exit codes
OK, LEAKED, NONFINITE = 0, 1, 2

#: absolute slack when testing stage times against tau, so the stage that
#: lands on the drive boundary sees the drive despite i*dt rounding
TAU_SLACK = 1e-10


def _weights(dim):
    i = np.arange(dim)
    s1 = np.where((i >> 1) & 1, 1.0, -1.0)
    s2 = np.where(i & 1, 1.0, -1.0)
    m = (i >> 2).astype(float)
    return s1, s2, m


def state_reductions(psi, leak_lo):
    """(norm2, sz1, sz2, n, leak) of a raw amplitude vector.

    Expectations are normalized by the current norm; leak is the relative
    population of the top two Fock levels (indices >= leak_lo).
    """
    p = np.abs(psi) ** 2
    norm2 = float(p.sum())
    s1, s2, m = _weights(len(psi))
    with np.errstate(invalid="ignore"):
        return (norm2, float(s1 @ p) / norm2, float(s2 @ p) / norm2,
                float(m @ p) / norm2, float(p[leak_lo:].sum()) / norm2)


def rk4_span(psi, indptr, indices, hvals, dvals, dt, step_offset, n_samples,
             steps_per_sample, alpha0, omega_d, tau, leak_lo, leak_tol,
             renormalize, sz1_out, sz2_out, n_out, norm_out, sample_offset,
             states_out=None):
    """Advance psi in place by n_samples blocks of steps_per_sample RK4 steps.

    Time at global step index j is j*dt; this span starts at j=step_offset.
    After each block the reductions are recorded at sample_offset + s in the
    output arrays (and optionally the raw state in states_out).  Returns
    (status, samples_done); on LEAKED the offending sample is recorded and
    psi holds that sample's state so the caller can resume after extending
    the ladder.
    """
    dim = len(psi)
    H = sp.csr_matrix((hvals, indices, indptr), shape=(dim, dim))
    D = sp.csr_matrix((dvals, indices, indptr), shape=(dim, dim))
    s1w, s2w, mw = _weights(dim)
    tau_guard = tau + TAU_SLACK
    half, sixth = dt / 2.0, dt / 6.0

    def alpha(t):
        if alpha0 != 0.0 and t <= tau_guard:
            return alpha0 * math.cos(omega_d * t)
        return 0.0

    def rhs(t, y):
        a = alpha(t)
        if a == 0.0:
            return -1j * (H @ y)
        return -1j * (H @ y + a * (D @ y))

    y = psi
    for s in range(n_samples):
        base = step_offset + s * steps_per_sample
        for it in range(steps_per_sample):
            t = (base + it) * dt
            k1 = rhs(t, y)
            k2 = rhs(t + half, y + half * k1)
            k3 = rhs(t + half, y + half * k2)
            k4 = rhs(t + dt, y + dt * k3)
            y += sixth * (k1 + 2.0 * (k2 + k3) + k4)

        p = np.abs(y) ** 2
        norm2 = float(p.sum())
        if not math.isfinite(norm2) or norm2 == 0.0:
            return NONFINITE, s
        k = sample_offset + s
        norm_out[k] = math.sqrt(norm2)
        sz1_out[k] = float(s1w @ p) / norm2
        sz2_out[k] = float(s2w @ p) / norm2
        n_out[k] = float(mw @ p) / norm2
        if float(p[leak_lo:].sum()) / norm2 > leak_tol:
            if states_out is not None:
                states_out[k] = y
            return LEAKED, s + 1
        # norm column always reports the pre-renormalization value
        if renormalize:
            y *= 1.0 / math.sqrt(norm2)
        if states_out is not None:
            states_out[k] = y
    return OK, n_samples
