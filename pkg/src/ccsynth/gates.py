"""Fixed one- and two-qubit matrices used across the package."""

import numpy as np

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
I8 = np.eye(8, dtype=complex)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_PHASE = np.diag([1, 1j]).astype(complex)

P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)

PAULIS = (I2, X, Y, Z)

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def controlled(u: np.ndarray) -> np.ndarray:
    """Two-qubit controlled-u, control on the first (slow) qubit."""
    return np.kron(P0, I2) + np.kron(P1, u)


def reverse_controlled(u: np.ndarray) -> np.ndarray:
    """Two-qubit controlled-u with control on the second qubit, target on the first."""
    return np.kron(I2, P0) + np.kron(u, P1)


CNOT = controlled(X)
CZ = controlled(Z)
