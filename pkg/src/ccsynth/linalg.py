"""Dense complex linear algebra for 2-, 4- and 8-dimensional operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

UNITARY_TOL = 1e-10
EQUAL_TOL = 1e-9
RANK1_TOL = 1e-8
CLUSTER_GAP = 1e-8

TWO_PI = 2.0 * np.pi


class DimensionError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class NotUnitaryError(ValueError):
    """A matrix that must be unitary is not, within tolerance."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by phase in [0, 2*pi), plus cluster multiplicities."""

    eigenvalues: np.ndarray
    multiplicities: tuple[int, ...]

    @property
    def phases(self) -> np.ndarray:
        return _phase_0_2pi(self.eigenvalues)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def _require_same_shape(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise DimensionError(f"shape mismatch: {u.shape} vs {v.shape}")


def dagger(m) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def tensor(a, b) -> np.ndarray:
    """Kronecker product; ``a`` indexes the slow (most significant) factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def tensor_all(*factors) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def unitarity_error(m) -> float:
    m = as_matrix(m)
    _require_square(m)
    return float(np.linalg.norm(dagger(m) @ m - np.eye(m.shape[0]), "fro"))


def is_unitary(m, tol: float = UNITARY_TOL) -> bool:
    """True iff ``||m^dag m - I||_F <= tol``. Raises DimensionError if not square."""
    return unitarity_error(m) <= tol


def require_unitary(m, tol: float = UNITARY_TOL, what: str = "matrix") -> np.ndarray:
    m = as_matrix(m)
    err = unitarity_error(m)
    if err > tol:
        raise NotUnitaryError(f"{what} is not unitary (||m^dag m - I||_F = {err:.3g} > {tol:g})")
    return m


def _phase_0_2pi(z) -> np.ndarray:
    ph = np.mod(np.angle(z), TWO_PI)
    # -0.0 and tiny negative angles fold to just below 2*pi; pull them back to 0
    return np.where(ph > TWO_PI - 1e-12, 0.0, ph)


def _clusters(phases: np.ndarray) -> list[int]:
    """Multiplicities of consecutive sorted phases closer than CLUSTER_GAP (circularly)."""
    n = len(phases)
    if n == 0:
        return []
    mult = [1]
    for i in range(1, n):
        if phases[i] - phases[i - 1] < CLUSTER_GAP:
            mult[-1] += 1
        else:
            mult.append(1)
    if len(mult) > 1 and (phases[0] + TWO_PI - phases[-1]) < CLUSTER_GAP:
        mult[0] += mult.pop()
    return mult


def eig_unitary(m, tol: float = UNITARY_TOL) -> tuple[Spectrum, np.ndarray]:
    """Diagonalize a unitary as ``m = P diag(lam) P^dag`` with ``P`` unitary.

    Uses the complex Schur form, which is diagonal for normal matrices, so the
    eigenvectors of a degenerate cluster come out orthonormal. Eigenvalues are
    renormalized onto the unit circle and sorted by phase in [0, 2*pi).
    """
    m = require_unitary(m, tol)
    t, z = scipy.linalg.schur(m, output="complex")
    lam = np.diag(t).copy()
    lam /= np.abs(lam)
    phases = _phase_0_2pi(lam)
    order = np.argsort(phases, kind="stable")
    lam, z, phases = lam[order], z[:, order], phases[order]
    return Spectrum(lam, tuple(_clusters(phases))), z


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""
    h = as_matrix(h)
    _require_square(h)
    if np.linalg.norm(h - dagger(h)) > EQUAL_TOL * max(1.0, np.linalg.norm(h)):
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigh(h)


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def phase_distance(u, v) -> float:
    """``min_phi ||u - e^{i phi} v||_F``.

    Closed form: ``||u||^2 + ||v||^2 - 2 |tr(v^dag u)|`` under the square root,
    attained at ``phi = arg tr(v^dag u)``.
    """
    u, v = as_matrix(u), as_matrix(v)
    _require_same_shape(u, v)
    overlap = np.vdot(v, u)  # tr(v^dag u)
    phi = np.angle(overlap) if abs(overlap) > 0 else 0.0
    return float(np.linalg.norm(u - np.exp(1j * phi) * v, "fro"))


def infidelity(u, v) -> float:
    """``1 - |tr(u^dag v)| / d``, clipped to [0, 1]."""
    u, v = as_matrix(u), as_matrix(v)
    _require_same_shape(u, v)
    _require_square(u)
    val = 1.0 - abs(np.vdot(u, v)) / u.shape[0]
    return float(min(1.0, max(0.0, val)))


def realign(m) -> np.ndarray:
    """Rearrange a 4x4 operator so that ``a (x) b`` maps to ``vec(a) vec(b)^T``."""
    m = as_matrix(m)
    if m.shape != (4, 4):
        raise DimensionError(f"expected 4x4, got {m.shape}")
    return m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def nearest_product_factorization(m) -> tuple[np.ndarray, np.ndarray, float]:
    """Best rank-1 split ``m ~ a (x) b`` of a 4x4 operator.

    Returns ``(a, b, residual)`` where residual is the second singular value of
    the realigned matrix; a value below RANK1_TOL certifies an exact product.
    The scalar is split evenly between the two factors.
    """
    r = realign(m)
    uu, s, vh = np.linalg.svd(r)
    root = np.sqrt(s[0])
    a = (root * uu[:, 0]).reshape(2, 2)
    b = (root * vh[0, :]).reshape(2, 2)
    return a, b, float(s[1])


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
