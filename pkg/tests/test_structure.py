import numpy as np
import pytest

from ccsynth.circuit import TwoQubitGate, embed
from ccsynth.gates import CNOT, CZ, I2, I4, P0, P1, SWAP, X, Z
from ccsynth.linalg import NotUnitaryError, phase_distance, random_unitary
from ccsynth.structure import (
    detect_controlled,
    factor_controlled_pair,
    has_local_spectrum,
    interaction,
    kak_decompose,
    kak_reconstruct,
    KakDecomposition,
    product_state_in_span,
)
from ccsynth.synthesis import r_gate, v_gate
from oracles import FREDKIN_LITERAL, canonical_gate, makhlin_invariants

S2 = np.sqrt(2)


def offdiag_norms(u, qubit):
    """Norms of the |0><1| and |1><0| blocks for ``qubit`` by direct index scan."""
    n01 = n10 = 0.0
    for r in range(8):
        for s in range(8):
            br, bs = (r >> (2 - qubit)) & 1, (s >> (2 - qubit)) & 1
            if br == 0 and bs == 1:
                n01 += abs(u[r, s]) ** 2
            elif br == 1 and bs == 0:
                n10 += abs(u[r, s]) ** 2
    return np.sqrt(n01), np.sqrt(n10)


def test_fredkin_controlled_on_a():
    form = detect_controlled(FREDKIN_LITERAL, "A")
    np.testing.assert_array_equal(form.block0, I4)
    np.testing.assert_array_equal(form.block1, SWAP)


def test_fredkin_not_controlled_on_b_or_c():
    for q, label in ((1, "B"), (2, "C")):
        assert max(offdiag_norms(FREDKIN_LITERAL, q)) > 0.5
        assert detect_controlled(FREDKIN_LITERAL, label) is None


def test_v_gate_controlled_on_each_qubit():
    t1, t2 = 0.7, -1.9
    form = detect_controlled(v_gate(t1, t2), "A")
    np.testing.assert_allclose(form.block0, I4)
    np.testing.assert_allclose(form.block1, r_gate(t1, t2))
    for label in "BC":
        assert detect_controlled(v_gate(t1, t2), label) is not None


def test_detect_controlled_unknown_label():
    with pytest.raises(ValueError):
        detect_controlled(FREDKIN_LITERAL, "D")


def test_detect_controlled_two_qubit():
    form = detect_controlled(CNOT, "A")
    np.testing.assert_array_equal(form.block1, X)
    assert detect_controlled(CNOT, "B") is None


def test_detect_controlled_on_embedded_ab(rng):
    for _ in range(50):
        p, q = random_unitary(2, rng), random_unitary(2, rng)
        g = TwoQubitGate("AB", np.kron(P0, p) + np.kron(P1, q))
        form = detect_controlled(embed(g), "A")
        assert form is not None
        np.testing.assert_allclose(form.block0, np.kron(p, I2), atol=1e-12)
        np.testing.assert_allclose(form.block1, np.kron(q, I2), atol=1e-12)


def test_product_state_basis_span():
    w = product_state_in_span([1, 0, 0, 0], [0, 0, 0, 1])
    # roots are a = 0 or b = 0; the larger-|a| rule picks |00>
    np.testing.assert_allclose(w.state, [1, 0, 0, 0], atol=1e-12)


def test_product_state_bell_span():
    # det of reshape(a phi+ + b phi-) = (a^2 - b^2) / 2, roots b = +-a
    phi_p = np.array([1, 0, 0, 1]) / S2
    phi_m = np.array([1, 0, 0, -1]) / S2
    w = product_state_in_span(phi_p, phi_m)
    np.testing.assert_allclose(w.coeffs, (1 / S2, 1 / S2), atol=1e-12)
    np.testing.assert_allclose(w.state, [1, 0, 0, 0], atol=1e-12)


def test_product_state_degenerate_quadratic():
    w = product_state_in_span([1, 0, 0, 0], [0, 1, 0, 0])
    np.testing.assert_allclose(w.coeffs, (1, 0), atol=1e-12)


def test_product_state_dependent_inputs():
    with pytest.raises(ValueError):
        product_state_in_span([1, 0, 0, 0], [2, 0, 0, 0])


def test_product_state_random_spans(rng):
    for _ in range(1000):
        basis = random_unitary(4, rng)[:, :2]
        w = product_state_in_span(basis[:, 0], basis[:, 1])
        assert abs(np.linalg.norm(w.state) - 1) < 1e-12
        # in span: residual after projecting onto the 2-d subspace
        assert np.linalg.norm(w.state - basis @ (basis.conj().T @ w.state)) < 1e-9
        np.testing.assert_allclose(w.coeffs[0] * basis[:, 0] + w.coeffs[1] * basis[:, 1], w.state, atol=1e-12)
        assert np.linalg.svd(w.state.reshape(2, 2), compute_uv=False)[1] < 1e-9
        assert np.linalg.norm(np.kron(*w.factors) - w.state) < 1e-9


def test_factor_controlled_pair_cz_cz():
    # direct expansion: CZ(A,B) CZ(A,C) = |0><0| I I + |1><1| Z Z
    prod = embed(TwoQubitGate("AB", CZ)) @ embed(TwoQubitGate("AC", CZ))
    np.testing.assert_array_equal(np.diag(prod).real, [1, 1, 1, 1, 1, -1, -1, 1])
    v1, v2, w1, w2 = factor_controlled_pair(TwoQubitGate("AB", CZ), TwoQubitGate("AC", CZ))
    for got, ref in ((v1, I2), (v2, Z), (w1, I2), (w2, Z)):
        assert phase_distance(got, ref) < 1e-12
    np.testing.assert_allclose(np.kron(v2, w2), np.kron(Z, Z), atol=1e-12)
    assert abs(np.linalg.det(v2) - 1) < 1e-12


def test_factor_controlled_pair_single_cnot():
    v1, v2, w1, w2 = factor_controlled_pair(TwoQubitGate("AB", CNOT), TwoQubitGate("AC", I4))
    for got, ref in ((v1, I2), (v2, X), (w1, I2), (w2, I2)):
        assert phase_distance(got, ref) < 1e-12
    np.testing.assert_allclose(np.kron(v2, w2), np.kron(X, I2), atol=1e-12)


def test_factor_controlled_pair_generic_is_none(rng):
    for _ in range(20):
        ab = TwoQubitGate("AB", random_unitary(4, rng))
        ac = TwoQubitGate("AC", random_unitary(4, rng))
        prod = embed(ab) @ embed(ac)
        assert max(offdiag_norms(prod, 0)) > 1e-6
        assert factor_controlled_pair(ab, ac) is None


def test_factor_controlled_pair_wrong_tags():
    with pytest.raises(ValueError):
        factor_controlled_pair(TwoQubitGate("AC", I4), TwoQubitGate("AB", I4))


@pytest.mark.parametrize("theta", [0.4, 1.3, 3.0])
def test_local_spectrum_w_tensor_identity(theta):
    w = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    ok, phases = has_local_spectrum(np.kron(w, I2))
    assert ok
    assert {round(p, 9) for p in phases} == {round(theta / 2, 9), round(2 * np.pi - theta / 2, 9)}


def test_local_spectrum_swap_false():
    assert np.allclose(sorted(np.linalg.eigvals(SWAP).real), [-1, 1, 1, 1])
    assert has_local_spectrum(SWAP) == (False, None)


def test_local_spectrum_r_gate_false():
    assert not has_local_spectrum(r_gate(0.5, 1.7))[0]
    # spectrum {1, 1, e^{it1}, e^{it2}} pairs up only when the two phases coincide
    assert has_local_spectrum(r_gate(0.5, 0.5))[0]


def test_local_spectrum_random_locals(rng):
    for _ in range(100):
        w = random_unitary(2, rng)
        assert has_local_spectrum(np.kron(w, I2))[0]
        assert has_local_spectrum(np.kron(I2, w))[0]


def test_local_spectrum_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        has_local_spectrum(np.diag([1, 1, 1, 2]))


def test_interaction_matches_expm_oracle(rng):
    for _ in range(10):
        a = rng.uniform(-2, 2, 3)
        np.testing.assert_allclose(interaction(a), canonical_gate(*a), atol=1e-12)


def test_expm_oracle_for_cnot_and_swap():
    # SWAP = e^{-i pi/4} exp(i pi/4 (XX + YY + ZZ)) exactly
    assert phase_distance(canonical_gate(np.pi / 4, np.pi / 4, np.pi / 4), SWAP) < 1e-12
    # CNOT is locally equivalent to exp(i pi/4 XX): equal local invariants
    np.testing.assert_allclose(makhlin_invariants(CNOT), makhlin_invariants(canonical_gate(np.pi / 4, 0, 0)), atol=1e-12)


def test_kak_identity():
    k = kak_decompose(I4)
    np.testing.assert_allclose(k.alpha, (0, 0, 0), atol=1e-12)
    assert phase_distance(kak_reconstruct(k), I4) < 1e-12


def test_kak_cnot_and_swap():
    k = kak_decompose(CNOT)
    np.testing.assert_allclose(k.alpha, (np.pi / 4, 0, 0), atol=1e-8)
    assert phase_distance(kak_reconstruct(k), CNOT) < 1e-9
    k = kak_decompose(SWAP)
    np.testing.assert_allclose(k.alpha, (np.pi / 4,) * 3, atol=1e-8)
    assert phase_distance(kak_reconstruct(k), SWAP) < 1e-9


def test_kak_reconstruct_examples():
    eye = np.eye(2, dtype=complex)
    np.testing.assert_allclose(kak_reconstruct(KakDecomposition(eye, eye, eye, eye, (0, 0, 0), 0.0)), I4)
    swap_like = kak_reconstruct(KakDecomposition(eye, eye, eye, eye, (np.pi / 4,) * 3, 0.0))
    assert phase_distance(swap_like, SWAP) < 1e-12


def in_weyl_chamber(alpha, tol=1e-12):
    ax, ay, az = alpha
    return np.pi / 4 + tol >= ax >= ay - tol and ay + tol >= abs(az)


def test_kak_random_unitaries(rng):
    worst = 0.0
    for _ in range(1000):
        u = random_unitary(4, rng)
        k = kak_decompose(u)
        worst = max(worst, phase_distance(kak_reconstruct(k), u))
        assert in_weyl_chamber(k.alpha)
        for m in (k.u_a, k.u_b, k.v_a, k.v_b):
            assert abs(np.linalg.det(m) - 1) < 1e-10
    assert worst < 1e-9


def test_kak_recovers_interior_alpha(rng):
    for _ in range(200):
        ax = rng.uniform(0.02, np.pi / 4 - 0.02)
        ay = rng.uniform(0.01, ax - 0.005) if ax > 0.02 else ax / 2
        az = rng.uniform(-ay + 0.005, ay - 0.005)
        locals_ = [random_unitary(2, rng) for _ in range(4)]
        u = np.kron(locals_[0], locals_[1]) @ canonical_gate(ax, ay, az) @ np.kron(locals_[2], locals_[3])
        k = kak_decompose(u)
        np.testing.assert_allclose(k.alpha, (ax, ay, az), atol=1e-8)


@pytest.mark.parametrize(
    "alpha",
    [(np.pi / 4, 0.3, -0.2), (np.pi / 4, np.pi / 4, -np.pi / 4), (0.5, 0.5, 0.5), (0.3, 0.0, 0.0), (0.4, 0.4, -0.1)],
)
def test_kak_chamber_boundaries(alpha, rng):
    u = np.kron(random_unitary(2, rng), random_unitary(2, rng)) @ canonical_gate(*alpha)
    k = kak_decompose(u)
    assert phase_distance(kak_reconstruct(k), u) < 1e-9
    assert in_weyl_chamber(k.alpha)


def test_kak_rejects_non_unitary():
    with pytest.raises(NotUnitaryError):
        kak_decompose(np.diag([1, 1, 1, 2]))
