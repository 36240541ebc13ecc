"""Contract tests for the span kernels; the Python version is the reference
and the compiled one must match it bit-for-bit in behaviour."""
import math

import numpy as np
import pytest
import scipy.linalg

from tcsync import backend
from tcsync import _core_py
from tcsync.hamiltonian import Operators, SystemParams
from tcsync.hilbert import FockTruncation, prepare_initial


def make_case(n_max=10, alpha0=0.05, g2=0.041):
    params = SystemParams(alpha0=alpha0, g2=g2, tau=500.0)
    trunc = FockTruncation(n_max, leakage_tol=0.5)
    ops = Operators.build(params, trunc)
    psi0 = prepare_initial(0.7, 1.2, trunc).amplitudes.copy()
    return params, trunc, ops, psi0


def run_span(impl, ops, psi0, dt, n_samples, sps, leak_tol=0.5,
             renorm=False, want_states=False, step_offset=0,
             sample_offset=0):
    p = ops.params
    dim = psi0.size
    total = n_samples + sample_offset
    sz1 = np.zeros(total)
    sz2 = np.zeros(total)
    nbar = np.zeros(total)
    norm = np.zeros(total)
    states = np.zeros((total, dim), dtype=np.complex128) if want_states else None
    psi = psi0.copy()
    indptr, indices, hvals, dvals = ops.merged
    status, did = impl(psi, indptr, indices, hvals, dvals, dt, step_offset,
                       n_samples, sps, p.alpha0, p.omega_d, p.tau,
                       dim - 8, leak_tol, renorm, sz1, sz2, nbar, norm,
                       sample_offset, states)
    return status, did, psi, sz1, sz2, nbar, norm, states


def test_state_reductions_match_numpy():
    rng = np.random.default_rng(3)
    trunc = FockTruncation(9)
    psi = rng.normal(size=trunc.dim) + 1j * rng.normal(size=trunc.dim)
    norm2, sz1, sz2, nbar, leak = backend.state_reductions(psi, trunc.dim - 8)
    pop = np.abs(psi) ** 2
    i = np.arange(trunc.dim)
    s1 = np.where((i >> 1) & 1, 1.0, -1.0)
    s2 = np.where(i & 1, 1.0, -1.0)
    assert norm2 == pytest.approx(pop.sum(), rel=1e-14)
    assert sz1 == pytest.approx((s1 * pop).sum() / pop.sum(), rel=1e-13)
    assert sz2 == pytest.approx((s2 * pop).sum() / pop.sum(), rel=1e-13)
    assert nbar == pytest.approx(((i >> 2) * pop).sum() / pop.sum(), rel=1e-13)
    assert leak == pytest.approx(pop[trunc.dim - 8:].sum() / pop.sum(),
                                 rel=1e-13)


def test_single_step_matches_expm_and_converges_at_order_four():
    # drive off: constant H, so the matrix exponential is an exact oracle
    params, trunc, ops, psi0 = make_case(alpha0=0.0)
    h = ops.h_tc.toarray()

    def one_step(dt):
        _, _, psi, *_ = run_span(_core_py.rk4_span, ops, psi0, dt, 1, 1)
        return psi

    for dt in (0.1, 0.05):
        exact = scipy.linalg.expm(-1j * h * dt) @ psi0
        err = np.max(np.abs(one_step(dt) - exact))
        assert err < 1e-6
    e1 = np.max(np.abs(one_step(0.1) - scipy.linalg.expm(-1j * h * 0.1) @ psi0))
    e2 = np.max(np.abs(one_step(0.05) - scipy.linalg.expm(-1j * h * 0.05) @ psi0))
    ratio = e1 / e2
    assert 20 < ratio < 45  # local truncation error scales like dt^5


def test_driven_span_matches_dense_reference():
    # independent dense RK4 with explicit time-dependent H(t)
    params, trunc, ops, psi0 = make_case(n_max=6, alpha0=0.04)
    h = ops.h_tc.toarray()
    d = ops.drive.toarray()
    dt, n_steps = 0.02, 50

    def rhs(t, y):
        a = params.alpha0 * math.cos(params.omega_d * t) if t <= params.tau else 0.0
        return -1j * ((h + a * d) @ y)

    y = psi0.copy()
    for k in range(n_steps):
        t = k * dt
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    _, _, psi, *_ = run_span(_core_py.rk4_span, ops, psi0, dt, 1, n_steps)
    assert np.max(np.abs(psi - y)) < 1e-13


@pytest.mark.skipif(backend.backend_name() == "python",
                    reason="compiled backend not built")
def test_compiled_matches_python_reference():
    params, trunc, ops, psi0 = make_case(n_max=14, alpha0=0.05)
    py = run_span(_core_py.rk4_span, ops, psi0, 0.01, 8, 25,
                  want_states=True)
    cy = run_span(backend.get_span_impl("compiled"), ops, psi0, 0.01, 8, 25,
                  want_states=True)
    assert py[0] == cy[0] and py[1] == cy[1]
    assert np.max(np.abs(py[2] - cy[2])) < 1e-14
    for a, b in zip(py[3:7], cy[3:7]):
        assert np.allclose(a, b, atol=1e-13)
    assert np.max(np.abs(py[7] - cy[7])) < 1e-14


def test_time_offset_continuation_is_seamless():
    # one long span == two chained spans with a step offset
    params, trunc, ops, psi0 = make_case(alpha0=0.03)
    s_all = run_span(_core_py.rk4_span, ops, psi0, 0.01, 6, 10)
    s_a = run_span(_core_py.rk4_span, ops, psi0, 0.01, 3, 10)
    s_b = run_span(_core_py.rk4_span, ops, s_a[2], 0.01, 3, 10,
                   step_offset=30, sample_offset=3)
    assert np.max(np.abs(s_all[2] - s_b[2])) < 1e-14
    joined = np.concatenate([s_a[3][:3], s_b[3][3:]])
    assert np.allclose(s_all[3], joined, atol=1e-14)


def test_drive_active_through_tau_step_boundary():
    # a span crossing tau keeps the cos envelope on the tau stage itself;
    # compare against dense stepping with the same rule
    params = SystemParams(alpha0=0.05, tau=0.5)
    trunc = FockTruncation(6, leakage_tol=0.5)
    ops = Operators.build(params, trunc)
    psi0 = prepare_initial(0.7, 1.2, trunc).amplitudes.copy()
    h = ops.h_tc.toarray()
    d = ops.drive.toarray()
    dt = 0.01

    def rhs(t, y):
        a = params.alpha0 * math.cos(t) if t <= params.tau + 1e-10 else 0.0
        return -1j * ((h + a * d) @ y)

    y = psi0.copy()
    for k in range(100):  # crosses tau=0.5 at step 50
        t = k * dt
        k1 = rhs(t, y)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    _, _, psi, *_ = run_span(_core_py.rk4_span, ops, psi0, dt, 1, 100)
    assert np.max(np.abs(psi - y)) < 1e-13


def test_leak_abort_reports_offending_sample():
    # strong drive, tiny cutoff, tight leak tolerance: must stop early
    params, trunc, ops, psi0 = make_case(n_max=4, alpha0=0.3)
    status, did, psi, sz1, _, _, norm, states = run_span(
        _core_py.rk4_span, ops, psi0, 0.01, 200, 50, leak_tol=1e-6,
        want_states=True)
    assert status == _core_py.LEAKED
    assert 0 < did < 200
    # the recorded aborting state is exactly what psi holds
    assert np.array_equal(states[did - 1], psi)
    norm2, *_rest = backend.state_reductions(psi, trunc.dim - 8)
    assert _rest[-1] > 1e-6
    # untouched tail left at zero
    assert np.all(norm[did:] == 0.0)


def test_nonfinite_abort():
    params, trunc, ops, psi0 = make_case(n_max=4, alpha0=0.0)
    psi0[0] = np.nan
    status, did, *_ = run_span(_core_py.rk4_span, ops, psi0, 0.01, 5, 10)
    assert status == _core_py.NONFINITE
    assert did == 0


def test_renormalize_mode_records_raw_norm_then_rescales():
    params, trunc, ops, psi0 = make_case(n_max=8, alpha0=0.15)
    status, did, psi, _, _, _, norm, states = run_span(
        _core_py.rk4_span, ops, psi0, 0.05, 4, 20, renorm=True,
        want_states=True)
    assert status == _core_py.OK
    # per-interval drift is recorded, not cumulative
    assert np.all(norm > 0.9)
    for k in range(4):
        assert np.linalg.norm(states[k]) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.skipif(backend.backend_name() == "python",
                    reason="compiled backend not built")
def test_compiled_matches_python_on_abort_paths():
    params, trunc, ops, psi0 = make_case(n_max=4, alpha0=0.3)
    args = dict(dt=0.01, n_samples=200, sps=50, leak_tol=1e-6)
    py = run_span(_core_py.rk4_span, ops, psi0, args["dt"], args["n_samples"],
                  args["sps"], leak_tol=args["leak_tol"])
    cy = run_span(backend.get_span_impl("compiled"), ops, psi0, args["dt"],
                  args["n_samples"], args["sps"], leak_tol=args["leak_tol"])
    assert py[0] == cy[0] == _core_py.LEAKED
    assert py[1] == cy[1]
    assert np.max(np.abs(py[2] - cy[2])) < 1e-13
