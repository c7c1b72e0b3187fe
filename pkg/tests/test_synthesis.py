import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccsynth.circuit import PairClass, circuit_unitary, embed_matrix, merge_adjacent
from ccsynth.gates import CZ, H, I2, I4, I8, SWAP, X, Z
from ccsynth.linalg import NotUnitaryError, phase_distance, random_unitary
from ccsynth.structure import detect_controlled
from ccsynth.synthesis import (
    FREDKIN,
    ccu_matrix,
    classify_ccu,
    lower_bound,
    make_target,
    sqrt_unitary,
    synth_ccu,
    synth_ccu_five,
    synth_ccu_four,
    synth_ccu_one,
    synth_fredkin,
    v_gate,
    w_gate,
)
from oracles import FREDKIN_LITERAL, basis, lower_bound_brute, swap_qubits


@pytest.mark.parametrize("n,expected", [(2, 1), (3, 6), (4, 27), (5, 112)])
def test_lower_bound(n, expected):
    assert lower_bound(n) == expected == lower_bound_brute(n)


def test_lower_bound_large_n_exact():
    for n in range(2, 30):
        assert lower_bound(n) == lower_bound_brute(n) if n < 12 else lower_bound(n) == -(-(4**n - 3 * n - 1) // 9)


def test_lower_bound_rejects_small_n():
    with pytest.raises(ValueError):
        lower_bound(1)


def test_classify_toffoli():
    c = classify_ccu(X)
    assert (c.theta1, c.theta2) == pytest.approx((0, np.pi), abs=1e-12)
    assert c.det_phase == pytest.approx(np.pi, abs=1e-12)
    assert c.count == 5


def test_classify_det_one():
    c = classify_ccu(np.diag([np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)]))
    assert c.count == 4
    assert min(c.det_phase, 2 * np.pi - c.det_phase) < 1e-12


def test_classify_scalar_and_identity():
    c = classify_ccu(np.exp(1j * np.pi / 3) * I2)
    assert c.count == 1
    assert (c.theta1, c.theta2) == pytest.approx((np.pi / 3, np.pi / 3), abs=1e-12)
    assert classify_ccu(I2).count == 0


def test_classify_eigen_invariant(rng):
    for _ in range(100):
        u = random_unitary(2, rng)
        c = classify_ccu(u)
        lam = np.exp(1j * np.array([c.theta1, c.theta2]))
        np.testing.assert_allclose(c.basis_change @ np.diag(lam) @ c.basis_change.conj().T, u, atol=1e-9)


def test_classify_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        classify_ccu(np.diag([1, 2]))


def test_scalar_u_is_a_single_ab_gate():
    # V(t, t) = W(t)_AB (x) I_C by direct expansion
    t = np.pi / 3
    np.testing.assert_allclose(v_gate(t, t), np.kron(w_gate(t), I2), atol=1e-15)


def test_sqrt_unitary_examples():
    w = sqrt_unitary(X)
    np.testing.assert_allclose(w, 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]), atol=1e-12)
    np.testing.assert_allclose(w @ w, X, atol=1e-12)
    np.testing.assert_allclose(sqrt_unitary(I2), I2, atol=1e-12)
    np.testing.assert_allclose(sqrt_unitary(np.diag([1, np.exp(0.8j)])), np.diag([1, np.exp(0.4j)]), atol=1e-12)


def test_sqrt_unitary_random(rng):
    for _ in range(200):
        u = random_unitary(2, rng)
        w = sqrt_unitary(u)
        assert np.linalg.norm(w @ w - u) < 1e-10
        assert np.linalg.norm(w.conj().T @ w - I2) < 1e-10


def test_five_gate_toffoli():
    c = synth_ccu_five(X)
    assert [g.pair for g in c] == [PairClass.BC, PairClass.AB, PairClass.BC, PairClass.AB, PairClass.AC]
    assert phase_distance(circuit_unitary(c), make_target("toffoli").unitary) < 1e-9
    assert len(merge_adjacent(c)) == 5


def test_five_gate_identity_collapses():
    c = synth_ccu_five(I2)
    np.testing.assert_allclose(circuit_unitary(c), I8, atol=1e-12)
    assert len(merge_adjacent(c)) == 0


def test_five_gate_cc_z():
    c = synth_ccu_five(Z)
    np.testing.assert_allclose(sqrt_unitary(Z), np.diag([1, 1j]), atol=1e-12)
    assert phase_distance(circuit_unitary(c), np.diag([1, 1, 1, 1, 1, 1, 1, -1])) < 1e-9


def test_four_gate_zero():
    np.testing.assert_allclose(circuit_unitary(synth_ccu_four(0.0)), I8, atol=1e-12)


def test_four_gate_quarter_turn():
    c = synth_ccu_four(np.pi / 2)
    assert len(c) == 4
    expected = np.diag([1, 1, 1, 1, 1, 1, -1j, 1j])
    assert phase_distance(circuit_unitary(c), expected) < 1e-9
    np.testing.assert_allclose(v_gate(-np.pi / 2, np.pi / 2), expected, atol=1e-15)


def test_four_gate_half_turn():
    c = synth_ccu_four(np.pi)
    target = v_gate(-np.pi, np.pi)
    assert phase_distance(target, v_gate(np.pi, np.pi)) < 1e-12
    assert phase_distance(target, np.kron(CZ, I2)) < 1e-12
    assert phase_distance(circuit_unitary(c), target) < 1e-9


def test_four_gate_conjugation_identity():
    # U_BC (W_C (x) I_B) U_BC^dag = diag(e^{it/2}, e^{-it/2}, e^{-it/2}, e^{it/2}) in (B, C) order
    t = 0.9
    c = synth_ccu_four(t)
    u_bc = c.gates[2].matrix
    w_c = np.kron(I2, np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]))
    lhs = u_bc @ w_c @ u_bc.conj().T
    np.testing.assert_allclose(lhs, np.diag(np.exp(0.5j * t * np.array([1, -1, -1, 1]))), atol=1e-12)


def test_one_gate_examples():
    c = synth_ccu_one(np.pi)
    np.testing.assert_allclose(c.gates[0].matrix, CZ, atol=1e-15)
    assert len(merge_adjacent(synth_ccu_one(0.0))) == 0
    np.testing.assert_allclose(
        circuit_unitary(synth_ccu_one(np.pi / 2)), np.diag([1, 1, 1, 1, 1, 1, 1j, 1j]), atol=1e-15
    )


def test_synth_ccu_examples():
    c = synth_ccu(X)
    assert len(c) == 5
    assert phase_distance(circuit_unitary(c), ccu_matrix(X)) < 1e-9
    u = H @ np.diag([np.exp(-0.35j), np.exp(0.35j)]) @ H
    assert classify_ccu(u).count == 4
    c = synth_ccu(u)
    assert len(c) == 4
    assert phase_distance(circuit_unitary(c), ccu_matrix(u)) < 1e-9
    assert len(synth_ccu(I2)) == 0


def test_synth_ccu_random_blockwise(rng):
    for i in range(500):
        u = random_unitary(2, rng)
        if i % 5 == 0:
            u = u / np.sqrt(np.linalg.det(u))  # force the det-1 family
        cls = classify_ccu(u)
        c = synth_ccu(u)
        assert len(c) == cls.count
        full = circuit_unitary(c)
        # align global phase, then check each control block
        overlap = np.vdot(ccu_matrix(u), full)
        full = full * np.exp(-1j * np.angle(overlap))
        for block in range(3):
            np.testing.assert_allclose(full[2 * block : 2 * block + 2, 2 * block : 2 * block + 2], I2, atol=1e-9)
        np.testing.assert_allclose(full[6:, 6:], u, atol=1e-9)
        assert phase_distance(full, ccu_matrix(u)) < 1e-9
        if cls.count == 4:
            assert abs(np.linalg.det(u) - 1) < 1e-9
        elif cls.count == 5:
            assert abs(np.linalg.det(u) - 1) >= 1e-9


def test_synth_ccu_count_one_family():
    for t in (0.2, 2.0, 5.5):
        u = np.exp(1j * t) * I2
        c = synth_ccu(u)
        assert len(c) == 1
        assert phase_distance(circuit_unitary(c), ccu_matrix(u)) < 1e-9


def test_fredkin_construction():
    c = synth_fredkin()
    assert len(c) == 5
    assert phase_distance(circuit_unitary(c), FREDKIN_LITERAL) < 1e-9
    raw = synth_fredkin(merge=False)
    assert len(raw) == 7
    assert phase_distance(circuit_unitary(raw), FREDKIN_LITERAL) < 1e-9
    out = circuit_unitary(c) @ basis(0b110)
    assert abs(abs(out[0b101]) - 1) < 1e-9


def test_make_target():
    np.testing.assert_allclose(make_target("ccu-diag", 0, np.pi).unitary, np.diag([1, 1, 1, 1, 1, 1, 1, -1]), atol=1e-15)
    np.testing.assert_array_equal(make_target("fredkin").unitary, FREDKIN_LITERAL)
    np.testing.assert_allclose(make_target("w", 0.0).unitary, I4)
    np.testing.assert_allclose(make_target("swap").unitary, SWAP)
    np.testing.assert_allclose(make_target("r", 0.3, 0.4).unitary, np.diag([1, 1, np.exp(0.3j), np.exp(0.4j)]))
    with pytest.raises(ValueError):
        make_target("peres")
    with pytest.raises(ValueError):
        make_target("w")


def test_v_gate_is_controlled_r():
    t1, t2 = 0.3, 2.2
    form = detect_controlled(v_gate(t1, t2), "A")
    np.testing.assert_allclose(form.block1, make_target("r", t1, t2).unitary)


def test_fredkin_symmetries():
    assert np.array_equal(FREDKIN, FREDKIN.T)
    s_bc = swap_qubits(1, 2)
    np.testing.assert_array_equal(s_bc, embed_matrix("BC", SWAP))
    assert np.linalg.norm(s_bc @ FREDKIN @ s_bc - FREDKIN) < 1e-12


GRID = [(t1, t2) for t1 in np.linspace(-3, 3, 5) for t2 in np.linspace(-2.5, 3.5, 5)]


@pytest.mark.parametrize("t1,t2", GRID)
def test_v_gate_ab_symmetry_and_reduction(t1, t2):
    s_ab = swap_qubits(0, 1)
    v = v_gate(t1, t2)
    assert np.linalg.norm(s_ab @ v @ s_ab - v) < 1e-12
    w = embed_matrix("AB", w_gate(-t1))
    reduced = make_target("ccu-diag", 0, t2 - t1).unitary
    assert np.linalg.norm(reduced - v @ w) < 1e-10
    assert np.linalg.norm(reduced - w @ v) < 1e-10


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(0.001, 2 * np.pi - 0.001))
def test_four_gate_any_angle(theta):
    c = synth_ccu_four(theta)
    assert phase_distance(circuit_unitary(c), v_gate(-theta, theta)) < 1e-9
    assert len(merge_adjacent(c)) == 4
