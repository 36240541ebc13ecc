import math

import numpy as np
import pytest

from tcsync.hilbert import (FockTruncation, QubitLevel, StateVector,
                            basis_index, extend_truncation, fock_numbers,
                            index_labels, prepare_initial, reduce_truncation,
                            sz_sign_vectors, total_excitations)

G, E = QubitLevel.G, QubitLevel.E


def test_qubit_level_sigma_z():
    assert E.sigma_z == 1
    assert G.sigma_z == -1


def test_truncation_dim_and_validation():
    assert FockTruncation(5).dim == 24
    with pytest.raises(ValueError):
        FockTruncation(1)
    with pytest.raises(ValueError):
        FockTruncation(4, leakage_tol=1.0)
    with pytest.raises(ValueError):
        FockTruncation(4, leakage_tol=-0.1)


def test_basis_index_layout():
    trunc = FockTruncation(3)
    assert basis_index(G, G, 0, trunc) == 0
    assert basis_index(G, E, 0, trunc) == 1
    assert basis_index(E, G, 0, trunc) == 2
    assert basis_index(E, E, 0, trunc) == 3
    assert basis_index(G, G, 2, trunc) == 8
    assert basis_index(E, E, 3, trunc) == 15
    with pytest.raises(ValueError):
        basis_index(G, G, 4, trunc)
    with pytest.raises(ValueError):
        basis_index(G, G, -1, trunc)


def test_index_labels_roundtrip():
    trunc = FockTruncation(6)
    for i in range(trunc.dim):
        q1, q2, m = index_labels(i)
        assert basis_index(q1, q2, m, trunc) == i


def test_sign_and_number_vectors():
    trunc = FockTruncation(4)
    s1, s2 = sz_sign_vectors(trunc)
    n = fock_numbers(trunc)
    tot = total_excitations(trunc)
    for i in range(trunc.dim):
        q1, q2, m = index_labels(i)
        assert s1[i] == q1.sigma_z
        assert s2[i] == q2.sigma_z
        assert n[i] == m
        assert tot[i] == m + int(q1) + int(q2)


def test_state_vector_is_read_only():
    trunc = FockTruncation(2)
    psi = np.zeros(trunc.dim, dtype=complex)
    psi[0] = 1.0
    state = StateVector(psi, trunc)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 0.5
    psi[0] = 0.0  # the constructor copied; the state must not see this
    assert state.amplitudes[0] == 1.0
    with pytest.raises(ValueError):
        StateVector(np.zeros(3, dtype=complex), trunc)


def test_prepare_initial_product_structure():
    trunc = FockTruncation(4)
    t1, t2 = 0.3, 1.1
    state = prepare_initial(t1, t2, trunc)
    assert state.norm == pytest.approx(1.0, abs=1e-15)
    assert state.amplitudes[0] == pytest.approx(math.cos(t1) * math.cos(t2))
    assert state.amplitudes[1] == pytest.approx(math.cos(t1) * math.sin(t2))
    assert state.amplitudes[2] == pytest.approx(math.sin(t1) * math.cos(t2))
    assert state.amplitudes[3] == pytest.approx(math.sin(t1) * math.sin(t2))
    assert np.all(state.amplitudes[4:] == 0.0)


def test_extend_and_reduce_truncation():
    trunc = FockTruncation(3, leakage_tol=1e-6)
    state = prepare_initial(0.4, 0.9, trunc)
    big = extend_truncation(state, 7)
    assert big.trunc.n_max == 7
    assert big.trunc.leakage_tol == 1e-6
    assert np.array_equal(big.amplitudes[: trunc.dim], state.amplitudes)
    assert np.all(big.amplitudes[trunc.dim:] == 0.0)
    back = reduce_truncation(big, 3)
    assert np.array_equal(back.amplitudes, state.amplitudes)
    with pytest.raises(ValueError):
        extend_truncation(state, 2)
    with pytest.raises(ValueError):
        reduce_truncation(state, 5)


def test_reduce_truncation_guards_population():
    trunc = FockTruncation(4)
    psi = np.zeros(trunc.dim, dtype=complex)
    psi[0] = 1.0
    psi[basis_index(G, G, 4, trunc)] = 1e-3
    state = StateVector(psi, trunc)
    with pytest.raises(ValueError):
        reduce_truncation(state, 2, drop_tol=1e-12)
    ok = reduce_truncation(state, 2, drop_tol=1e-5)
    assert ok.trunc.n_max == 2
