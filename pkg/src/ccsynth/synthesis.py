"""Gate-count bounds, CC-u classification and the explicit constructions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, PairClass, TwoQubitGate, merge_adjacent
from .gates import CNOT, I2, I4, I8, P0, P1, SWAP, X, controlled, reverse_controlled
from .linalg import UNITARY_TOL, dagger, eig_unitary, require_unitary

PHASE_TOL = 1e-9

# optimality provenance tags
TRIVIAL = "trivial"
FOUR_GATE_BOUND = "four-gate-lower-bound+construction"
FIVE_GATE_BOUND = "five-gate-lower-bound+construction"


@dataclass(frozen=True)
class CcuClass:
    theta1: float
    theta2: float
    det_phase: float
    count: int
    basis_change: np.ndarray
    optimality: str

    def to_dict(self) -> dict:
        return {
            "theta1": self.theta1,
            "theta2": self.theta2,
            "det_phase": self.det_phase,
            "count": self.count,
            "basis_change": [[[z.real, z.imag] for z in row] for row in self.basis_change.tolist()],
            "optimality": self.optimality,
        }


@dataclass(frozen=True)
class GateCatalogEntry:
    name: str
    unitary: np.ndarray


def lower_bound(n: int) -> int:
    """Two-qubit gates needed for a generic n-qubit unitary: ceil((4^n - 3n - 1) / 9)."""
    if n < 2:
        raise ValueError(f"lower bound needs n >= 2, got {n}")
    num = 4**n - 3 * n - 1
    return -(-num // 9)


def sqrt_unitary(u) -> np.ndarray:
    """Principal square root: every eigenphase in [0, 2*pi) is halved."""
    u = require_unitary(u, UNITARY_TOL)
    spec, p = eig_unitary(u)
    return p @ np.diag(np.exp(0.5j * spec.phases)) @ dagger(p)


def _close(z1: complex, z2: complex) -> bool:
    return abs(z1 - z2) < PHASE_TOL


def classify_ccu(u) -> CcuClass:
    u = require_unitary(u, UNITARY_TOL)
    if u.shape != (2, 2):
        raise ValueError("expected a one-qubit unitary")
    spec, p = eig_unitary(u)
    t1, t2 = (float(t) for t in spec.phases)
    e1, e2 = spec.eigenvalues
    det_phase = float(np.mod(t1 + t2, 2 * np.pi))
    if _close(e1, 1) and _close(e2, 1):
        count, prov = 0, TRIVIAL
    elif _close(e1, e2):
        count, prov = 1, TRIVIAL
    elif _close(e1 * e2, 1):
        count, prov = 4, FOUR_GATE_BOUND
    else:
        count, prov = 5, FIVE_GATE_BOUND
    if len(spec.multiplicities) == 1:
        p = np.eye(2, dtype=complex)
    return CcuClass(t1, t2, det_phase, count, p, prov)


def ccu_matrix(u) -> np.ndarray:
    """``I - |11><11| (x) (I - u)`` on A, B (controls) and C (target)."""
    out = I8.copy()
    out[6:, 6:] = np.asarray(u, dtype=complex)
    return out


def w_gate(theta: float) -> np.ndarray:
    """Two-qubit controlled phase ``diag(1, 1, 1, e^{i theta})``."""
    return np.diag([1, 1, 1, np.exp(1j * theta)]).astype(complex)


def r_gate(theta1: float, theta2: float) -> np.ndarray:
    return np.diag([1, 1, np.exp(1j * theta1), np.exp(1j * theta2)]).astype(complex)


def v_gate(theta1: float, theta2: float) -> np.ndarray:
    """Doubly-controlled diagonal phase: identity except ``e^{i t1}, e^{i t2}`` at |110>, |111>."""
    return ccu_matrix(np.diag([np.exp(1j * theta1), np.exp(1j * theta2)]))


FREDKIN = np.kron(P0, I4) + np.kron(P1, SWAP)
TOFFOLI = ccu_matrix(X)


def make_target(name: str, *params: float) -> GateCatalogEntry:
    """Named targets: fredkin, toffoli, swap, ccu-diag(t1, t2), w(t), r(t1, t2)."""
    key = name.lower().replace("_", "-")
    arity = {"fredkin": 0, "toffoli": 0, "swap": 0, "ccu-diag": 2, "v": 2, "w": 1, "r": 2}
    if key not in arity:
        raise ValueError(f"unknown target {name!r}")
    if len(params) != arity[key]:
        raise ValueError(f"target {name!r} takes {arity[key]} angle(s), got {len(params)}")
    if key == "fredkin":
        m = FREDKIN.copy()
    elif key == "toffoli":
        m = TOFFOLI.copy()
    elif key == "swap":
        m = SWAP.copy()
    elif key in ("ccu-diag", "v"):
        m = v_gate(*params)
    elif key == "w":
        m = w_gate(*params)
    else:
        m = r_gate(*params)
    label = name if not params else f"{name}({', '.join(f'{p:.17g}' for p in params)})"
    return GateCatalogEntry(label, m)


# ---------------------------------------------------------------------------
# constructions


def synth_ccu_five(u) -> Circuit:
    """Five-gate circuit for controlled-controlled-u using ``W = sqrt(u)``.

    Temporal order: CW(B->C), CNOT(A->B), CW^dag(B->C), CNOT(A->B), CW(A->C).
    """
    u = require_unitary(u, UNITARY_TOL)
    w = sqrt_unitary(u)
    cw = controlled(w)
    cwd = controlled(dagger(w))
    return Circuit(
        (
            TwoQubitGate(PairClass.BC, cw, "CW"),
            TwoQubitGate(PairClass.AB, CNOT, "CNOT"),
            TwoQubitGate(PairClass.BC, cwd, "CW^dag"),
            TwoQubitGate(PairClass.AB, CNOT, "CNOT"),
            TwoQubitGate(PairClass.AC, cw, "CW"),
        )
    )


# B-anticontrolled NOT on C; conjugates W_C (x) I_B into diag(e^{it/2}, e^{-it/2}, e^{-it/2}, e^{it/2})
ANTI_CNOT_BC = np.kron(P0, X) + np.kron(P1, I2)


def synth_ccu_four(theta: float) -> Circuit:
    """Four-gate circuit for ``V(-theta, theta)``, i.e. CC-diag(e^{-i theta}, e^{i theta}).

    Temporal order: U_BC^dag, CW(A->C), U_BC, CW(A->C) with
    ``W = diag(e^{-i theta/2}, e^{i theta/2})``.
    """
    w = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    cw = controlled(w)
    return Circuit(
        (
            TwoQubitGate(PairClass.BC, dagger(ANTI_CNOT_BC), "U_BC^dag"),
            TwoQubitGate(PairClass.AC, cw, "CW"),
            TwoQubitGate(PairClass.BC, ANTI_CNOT_BC, "U_BC"),
            TwoQubitGate(PairClass.AC, cw, "CW"),
        )
    )


def synth_ccu_one(theta: float) -> Circuit:
    """``V(theta, theta)`` is a controlled phase on A, B alone."""
    return Circuit((TwoQubitGate(PairClass.AB, w_gate(theta), "W"),))


def _conjugate_target(c: Circuit, p: np.ndarray) -> Circuit:
    """Implement ``(I (x) I (x) p) U (I (x) I (x) p^dag)`` by folding the
    locals into the first and last gates, both of which must touch C."""
    gates = list(c.gates)
    first, last = gates[0], gates[-1]
    if PairClass.AB in (first.pair, last.pair):
        raise ValueError("first and last gates must act on C")
    local_in = np.kron(I2, dagger(p))
    local_out = np.kron(I2, p)
    gates[0] = TwoQubitGate(first.pair, first.matrix @ local_in, first.label)
    if len(gates) == 1:
        gates[0] = TwoQubitGate(first.pair, local_out @ gates[0].matrix, first.label)
    else:
        gates[-1] = TwoQubitGate(last.pair, local_out @ last.matrix, last.label)
    return Circuit(tuple(gates))


def synth_ccu(u) -> Circuit:
    """Gate-count-optimal circuit for controlled-controlled-u."""
    u = require_unitary(u, UNITARY_TOL)
    cls = classify_ccu(u)
    if cls.count == 0:
        return Circuit(())
    if cls.count == 1:
        lam = np.exp(1j * cls.theta1)
        return synth_ccu_one(float(np.angle(lam)))
    if cls.count == 4:
        # split the residual determinant phase evenly between the two eigenphases
        drift = np.angle(np.exp(1j * (cls.theta1 + cls.theta2)))
        theta = cls.theta2 - drift / 2
        return _conjugate_target(synth_ccu_four(theta), cls.basis_change)
    return synth_ccu_five(u)


def fredkin_figure() -> Circuit:
    """Seven-box Fredkin sequence with ``V^2 = X``, before merging."""
    v = sqrt_unitary(X)
    cnot_cb = reverse_controlled(X)
    cv = controlled(v)
    cvd = controlled(dagger(v))
    return Circuit(
        (
            TwoQubitGate(PairClass.BC, cnot_cb, "CNOT(C->B)"),
            TwoQubitGate(PairClass.BC, cv, "CV(B->C)"),
            TwoQubitGate(PairClass.AC, cv, "CV(A->C)"),
            TwoQubitGate(PairClass.AB, CNOT, "CNOT(A->B)"),
            TwoQubitGate(PairClass.BC, cvd, "CV^dag(B->C)"),
            TwoQubitGate(PairClass.BC, cnot_cb, "CNOT(C->B)"),
            TwoQubitGate(PairClass.AB, CNOT, "CNOT(A->B)"),
        )
    )


def synth_fredkin(merge: bool = True) -> Circuit:
    c = fredkin_figure()
    return merge_adjacent(c) if merge else c
