"""Dense complex linear-algebra helpers shared by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; the helpers
here only add the validation and the tolerance conventions used across
the package.
"""

from __future__ import annotations

import numpy as np

# relative tolerance for reconstruction / orthonormality checks
EPS_ORTHO = 1e-10
# singular values below EPS_RANK * sigma_max count as zero
EPS_RANK = 1e-12


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array, raising otherwise."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains NaN or Inf entries")
    return a


def svd(m):
    """Singular value decomposition ``m = u @ diag(s) @ vh``.

    Thin decomposition: for an ``r x c`` input, ``u`` is ``r x k`` and
    ``vh`` is ``k x c`` with ``k = min(r, c)``. Singular values are
    returned in descending order.

    Raises
    ------
    InvalidInputError
        If ``m`` has non-finite entries.
    """
    a = as_cmatrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return u, s, vh


def numerical_rank(singular_values) -> int:
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > EPS_RANK * s[0]))


def kron(a, b) -> np.ndarray:
    """Kronecker product; entry ``[ia*rb + ib, ja*cb + jb] = a[ia, ja] * b[ib, jb]``."""
    return np.kron(as_cmatrix(a, "a"), as_cmatrix(b, "b"))


def unitarity_defect(m) -> float:
    """Frobenius norm of ``m^dagger m - 1``."""
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"unitarity_defect needs a square matrix, got {a.shape}")
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


def is_unitary(m, tol: float = EPS_ORTHO) -> bool:
    return unitarity_defect(m) <= tol * max(1.0, np.sqrt(np.asarray(m).shape[0]))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
