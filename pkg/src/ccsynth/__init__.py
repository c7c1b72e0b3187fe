"""Optimal two-qubit-gate synthesis and verification for three-qubit gates."""

from .circuit import (
    Circuit,
    PairClass,
    StructureSignature,
    TwoQubitGate,
    circuit_unitary,
    dof_count,
    embed,
    merge_adjacent,
    parse,
    serialize,
)
from .linalg import infidelity, is_unitary, phase_distance
from .synthesis import (
    FREDKIN,
    TOFFOLI,
    classify_ccu,
    lower_bound,
    make_target,
    synth_ccu,
    synth_fredkin,
)

__version__ = "0.1.0"
