"""Circuits of two-qubit gates on the three-qubit register (A, B, C).

Basis state ``|abc>`` has index ``4a + 2b + c``. A circuit's gate list is in
temporal order, so its unitary is ``G_n ... G_2 G_1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .gates import I4, I8
from .linalg import UNITARY_TOL, dagger, phase_distance, unitarity_error

QUBITS = ("A", "B", "C")
DROP_TOL = 1e-12


class PairClass(str, Enum):
    AB = "AB"
    AC = "AC"
    BC = "BC"

    @property
    def qubits(self) -> tuple[int, int]:
        return _PAIR_QUBITS[self]


_PAIR_QUBITS = {PairClass.AB: (0, 1), PairClass.AC: (0, 2), PairClass.BC: (1, 2)}


class CircuitParseError(ValueError):
    """Malformed circuit document. ``location`` points at the offending element."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class GateValidationError(ValueError):
    def __init__(self, message: str, index: int | None = None):
        prefix = f"gate {index}: " if index is not None else ""
        super().__init__(prefix + message)
        self.index = index


@dataclass(frozen=True, eq=False)
class TwoQubitGate:
    pair: PairClass
    matrix: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pair = PairClass(self.pair)
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise GateValidationError(f"matrix must be 4x4, got {m.shape}")
        err = unitarity_error(m)
        if err > UNITARY_TOL:
            raise GateValidationError(f"matrix is not unitary (error {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "matrix", m)

    def dagger(self) -> TwoQubitGate:
        label = None if self.label is None else self.label + "^dag"
        return TwoQubitGate(self.pair, dagger(self.matrix), label)

    def __eq__(self, other):
        if not isinstance(other, TwoQubitGate):
            return NotImplemented
        return (
            self.pair == other.pair
            and self.label == other.label
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None


@dataclass(frozen=True)
class StructureSignature:
    pairs: tuple[PairClass, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(PairClass(p) for p in self.pairs))

    @property
    def k(self) -> int:
        return len(self.pairs)

    def __str__(self):
        return "-".join(p.value for p in self.pairs)


@dataclass(frozen=True)
class Circuit:
    gates: tuple[TwoQubitGate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        gates = tuple(self.gates)
        for i, g in enumerate(gates):
            if not isinstance(g, TwoQubitGate):
                raise GateValidationError(f"expected TwoQubitGate, got {type(g).__name__}", i)
        object.__setattr__(self, "gates", gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def signature(self) -> StructureSignature:
        return StructureSignature(tuple(g.pair for g in self.gates))

    def unitary(self) -> np.ndarray:
        return circuit_unitary(self)

    def inverse(self) -> Circuit:
        return Circuit(tuple(g.dagger() for g in reversed(self.gates)))


def embed_matrix(pair: PairClass | str, m: np.ndarray) -> np.ndarray:
    """Lift a 4x4 operator on ``pair`` to 8x8, identity on the remaining qubit."""
    pair = PairClass(pair)
    m = np.asarray(m, dtype=complex)
    if pair is PairClass.AB:
        return np.kron(m, np.eye(2))
    if pair is PairClass.BC:
        return np.kron(np.eye(2), m)
    # AC: out[a b c, a' b' c'] = m[a c, a' c'] delta(b, b')
    t = m.reshape(2, 2, 2, 2)
    return np.einsum("acxz,by->abcxyz", t, np.eye(2)).reshape(8, 8)


def embed(g: TwoQubitGate) -> np.ndarray:
    return embed_matrix(g.pair, g.matrix)


def circuit_unitary(c: Circuit | Iterable[TwoQubitGate]) -> np.ndarray:
    """Product of embedded gates, last gate leftmost."""
    u = I8.copy()
    for g in c:
        u = embed(g) @ u
    return u


def _is_identity(m: np.ndarray) -> bool:
    return phase_distance(m, I4) < DROP_TOL


def merge_adjacent(c: Circuit, drop_identities: bool = True) -> Circuit:
    """Multiply runs of consecutive gates on the same pair into single gates.

    Gates equal to the identity up to phase are dropped when ``drop_identities``
    is set, which can make new neighbours mergeable; the pass repeats until no
    two adjacent gates share a pair.
    """
    out: list[TwoQubitGate] = []
    for g in c.gates:
        if out and out[-1].pair == g.pair:
            prev = out.pop()
            labels = [lbl for lbl in (prev.label, g.label) if lbl]
            g = TwoQubitGate(g.pair, g.matrix @ prev.matrix, "*".join(labels) or None)
        if drop_identities and _is_identity(g.matrix):
            continue
        # dropping can expose a new same-pair neighbour, handled on the next pass
        out.append(g)
    merged = Circuit(tuple(out))
    if any(a.pair == b.pair for a, b in zip(merged.gates, merged.gates[1:])):
        return merge_adjacent(merged, drop_identities)
    return merged


def dof_count(sig: StructureSignature | Sequence[PairClass] | int, n: int = 3) -> int:
    """Real parameter count ``9k + 3n`` of a k-gate circuit on n qubits."""
    k = sig if isinstance(sig, int) else len(getattr(sig, "pairs", sig))
    if n < 2:
        raise ValueError("need at least two qubits")
    return 9 * k + 3 * n


# ---------------------------------------------------------------------------
# serialization


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "qubits": list(QUBITS),
        "gates": [
            {"pair": g.pair.value, "label": g.label, "matrix": _encode_matrix(g.matrix)}
            for g in c.gates
        ],
    }


def serialize(c: Circuit, indent: int | None = None) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(circuit_to_dict(c), indent=indent)


def _number(x, loc: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise CircuitParseError("expected a number", loc)
    return float(x)


def decode_matrix(data, loc: str = "$", shape: tuple[int, int] | None = (4, 4)) -> np.ndarray:
    """Decode a nested list of ``[re, im]`` pairs (or bare reals) into a complex matrix."""
    if not isinstance(data, list) or not data:
        raise CircuitParseError("matrix must be a non-empty list of rows", loc)
    rows = []
    for i, row in enumerate(data):
        rloc = f"{loc}[{i}]"
        if not isinstance(row, list):
            raise CircuitParseError("matrix row must be a list", rloc)
        vals = []
        for j, entry in enumerate(row):
            eloc = f"{rloc}[{j}]"
            if isinstance(entry, list):
                if len(entry) != 2:
                    raise CircuitParseError("complex entry must be [re, im]", eloc)
                vals.append(complex(_number(entry[0], eloc), _number(entry[1], eloc)))
            else:
                vals.append(complex(_number(entry, eloc), 0.0))
        rows.append(vals)
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise CircuitParseError("ragged matrix", loc)
    m = np.array(rows, dtype=complex)
    if shape is not None and m.shape != shape:
        raise CircuitParseError(f"expected a {shape[0]}x{shape[1]} matrix, got {m.shape[0]}x{m.shape[1]}", loc)
    return m


def circuit_from_dict(doc) -> Circuit:
    if not isinstance(doc, dict):
        raise CircuitParseError("document must be a JSON object")
    qubits = doc.get("qubits", list(QUBITS))
    if list(qubits) != list(QUBITS):
        raise CircuitParseError(f"qubits must be {list(QUBITS)}", "$.qubits")
    gates_doc = doc.get("gates")
    if not isinstance(gates_doc, list):
        raise CircuitParseError("missing 'gates' list", "$.gates")
    gates = []
    for i, gd in enumerate(gates_doc):
        loc = f"$.gates[{i}]"
        if not isinstance(gd, dict):
            raise CircuitParseError("gate must be an object", loc)
        pair = gd.get("pair")
        try:
            pair = PairClass(pair)
        except ValueError:
            raise CircuitParseError(f"unknown pair {pair!r}; expected one of AB, AC, BC", loc + ".pair") from None
        label = gd.get("label")
        if label is not None and not isinstance(label, str):
            raise CircuitParseError("label must be a string or null", loc + ".label")
        m = decode_matrix(gd.get("matrix"), loc + ".matrix")
        try:
            gates.append(TwoQubitGate(pair, m, label))
        except GateValidationError as exc:
            raise GateValidationError(str(exc), i) from None
    return Circuit(tuple(gates))


def parse(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return circuit_from_dict(doc)


def export_listing(c: Circuit) -> str:
    """Human-readable QASM-like listing. Matrices are referenced by name, not inlined."""
    lines = ["// three-qubit register, |abc> -> 4a+2b+c", "qreg q[3]; // A=q[0] B=q[1] C=q[2]"]
    defs = []
    for i, g in enumerate(c.gates):
        name = f"m{i}"
        a, b = g.pair.qubits
        lines.append(f"{g.label or 'u4'} q[{a}], q[{b}]; // pair {g.pair.value}, matrix {name}")
        defs.append(f"// {name} = " + np.array2string(g.matrix, precision=6, max_line_width=200).replace("\n", "\n//      "))
    return "\n".join(lines + defs) + "\n"
