# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled propagation core.

Same span contract as tcsync._core_py (which is the reference for the
semantics): fused RK4 stepping over the merged CSR pattern with in-loop
sampling, the whole span running without the GIL.
"""
import numpy as np

cimport cython
from libc.math cimport cos, sqrt, isfinite

BACKEND_NAME = "compiled"

OK, LEAKED, NONFINITE = 0, 1, 2

cdef int _OK = 0, _LEAKED = 1, _NONFINITE = 2
cdef double TAU_SLACK = 1e-10


cdef inline double _alpha(double t, double alpha0, double omega_d,
                          double tau_guard) noexcept nogil:
    if alpha0 != 0.0 and t <= tau_guard:
        return alpha0 * cos(omega_d * t)
    return 0.0


cdef inline void _deriv(Py_ssize_t dim, const long long[::1] indptr,
                        const long long[::1] indices, const double[::1] hvals,
                        const double[::1] dvals, double a,
                        const double complex[::1] y,
                        double complex[::1] out) noexcept nogil:
    # out = -i (H + a D) y ; H, D share one pattern and are real
    cdef Py_ssize_t i, k
    cdef double ar, ai, v
    cdef double complex yj
    for i in range(dim):
        ar = 0.0
        ai = 0.0
        if a == 0.0:
            for k in range(indptr[i], indptr[i + 1]):
                yj = y[indices[k]]
                v = hvals[k]
                ar += v * yj.real
                ai += v * yj.imag
        else:
            for k in range(indptr[i], indptr[i + 1]):
                yj = y[indices[k]]
                v = hvals[k] + a * dvals[k]
                ar += v * yj.real
                ai += v * yj.imag
        out[i] = ai - 1j * ar


def rk4_span(double complex[::1] psi,
             long long[::1] indptr, long long[::1] indices,
             double[::1] hvals, double[::1] dvals,
             double dt, long long step_offset, Py_ssize_t n_samples,
             Py_ssize_t steps_per_sample, double alpha0, double omega_d,
             double tau, Py_ssize_t leak_lo, double leak_tol,
             bint renormalize,
             double[::1] sz1_out, double[::1] sz2_out, double[::1] n_out,
             double[::1] norm_out, Py_ssize_t sample_offset,
             states_out=None):
    """See tcsync._core_py.rk4_span; identical contract."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double complex[::1] k1 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(dim, dtype=np.complex128)
    cdef bint want_states = states_out is not None
    cdef double complex[:, ::1] states
    if want_states:
        states = states_out

    cdef double half = dt / 2.0
    cdef double sixth = dt / 6.0
    cdef double tau_guard = tau + TAU_SLACK
    cdef Py_ssize_t s, it, i, k
    cdef long long base
    cdef double t, a1, a2, a3
    cdef double p, norm2, acc1, acc2, accn, leak, scale
    cdef double complex amp
    cdef int status = _OK
    cdef Py_ssize_t done = 0

    with nogil:
        for s in range(n_samples):
            base = step_offset + (<long long> s) * steps_per_sample
            for it in range(steps_per_sample):
                t = (base + it) * dt
                a1 = _alpha(t, alpha0, omega_d, tau_guard)
                a2 = _alpha(t + half, alpha0, omega_d, tau_guard)
                a3 = _alpha(t + dt, alpha0, omega_d, tau_guard)
                _deriv(dim, indptr, indices, hvals, dvals, a1, psi, k1)
                for i in range(dim):
                    tmp[i] = psi[i] + half * k1[i]
                _deriv(dim, indptr, indices, hvals, dvals, a2, tmp, k2)
                for i in range(dim):
                    tmp[i] = psi[i] + half * k2[i]
                _deriv(dim, indptr, indices, hvals, dvals, a2, tmp, k3)
                for i in range(dim):
                    tmp[i] = psi[i] + dt * k3[i]
                _deriv(dim, indptr, indices, hvals, dvals, a3, tmp, k4)
                for i in range(dim):
                    psi[i] = psi[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])

            norm2 = 0.0
            acc1 = 0.0
            acc2 = 0.0
            accn = 0.0
            leak = 0.0
            for i in range(dim):
                amp = psi[i]
                p = amp.real * amp.real + amp.imag * amp.imag
                norm2 += p
                if (i >> 1) & 1:
                    acc1 += p
                else:
                    acc1 -= p
                if i & 1:
                    acc2 += p
                else:
                    acc2 -= p
                accn += (<double> (i >> 2)) * p
                if i >= leak_lo:
                    leak += p
            if not isfinite(norm2) or norm2 == 0.0:
                status = _NONFINITE
                done = s
                break
            k = sample_offset + s
            norm_out[k] = sqrt(norm2)
            sz1_out[k] = acc1 / norm2
            sz2_out[k] = acc2 / norm2
            n_out[k] = accn / norm2
            if leak / norm2 > leak_tol:
                if want_states:
                    for i in range(dim):
                        states[k, i] = psi[i]
                status = _LEAKED
                done = s + 1
                break
            # norm column always reports the pre-renormalization value
            if renormalize:
                scale = 1.0 / sqrt(norm2)
                for i in range(dim):
                    psi[i] = psi[i] * scale
            if want_states:
                for i in range(dim):
                    states[k, i] = psi[i]
            done = s + 1

    return status, done
