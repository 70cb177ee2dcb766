"""Two-qudit pure states, electron-pair resource states and their entanglement.

A two-qudit state is stored as its coefficient matrix ``psi`` with
``psi[i_a, i_b] = <i_a, i_b | psi>``; row-major flattening of ``psi`` gives
the state vector. Local operators act as ``O_a @ psi @ O_b.T``.

Computational index ``i`` corresponds to the magnetic quantum number
``m = I - i`` with ``I = (d - 1) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .kernel import EPS_ORTHO, EPS_RANK, InvalidInputError, as_cmatrix, numerical_rank, svd

# norm^2 tolerance on states that must be normalized
NORM_TOL = 1e-6
# two entanglement values closer than this are the same value
E_GROUP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TwoQuditState:
    """Pure (possibly sub-normalized) state of two qudits of dimensions ``d_a x d_b``."""

    psi: np.ndarray

    def __post_init__(self):
        a = as_cmatrix(self.psi, "psi")
        n2 = float(np.vdot(a, a).real)
        if not (0.0 < n2 <= 1.0 + 1e-9):
            raise InvalidInputError(f"squared norm must lie in (0, 1], got {n2:.3e}")
        object.__setattr__(self, "psi", a)

    @property
    def d_a(self) -> int:
        return self.psi.shape[0]

    @property
    def d_b(self) -> int:
        return self.psi.shape[1]

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.psi, self.psi).real)

    def normalized(self) -> "TwoQuditState":
        return TwoQuditState(self.psi / np.sqrt(self.norm2))

    def vector(self) -> np.ndarray:
        return self.psi.reshape(-1)

    @classmethod
    def from_vector(cls, vec, d_a: int, d_b: int) -> "TwoQuditState":
        return cls(np.asarray(vec, dtype=complex).reshape(d_a, d_b))


@dataclass(frozen=True, eq=False)
class SchmidtData:
    """Schmidt decomposition ``psi = left @ diag(coefficients) @ right.T``.

    Only the ``rank`` non-negligible terms are kept, so ``left`` is
    ``d_a x rank`` and ``right`` is ``d_b x rank``.
    """

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def chi(self) -> np.ndarray:
        """Squared Schmidt coefficients."""
        return self.coefficients**2


def schmidt(state: TwoQuditState) -> SchmidtData:
    """Schmidt decomposition of a two-qudit state via the SVD of ``psi``."""
    psi = state.psi if isinstance(state, TwoQuditState) else as_cmatrix(state, "psi")
    u, s, vh = svd(psi)
    if s.size == 0 or s[0] <= EPS_RANK:
        raise InvalidInputError("cannot Schmidt-decompose the zero state")
    r = numerical_rank(s)
    return SchmidtData(coefficients=s[:r], left_basis=u[:, :r], right_basis=vh[:r].T)


def shannon_entropy(probs) -> float:
    """Base-2 Shannon entropy with ``0 log 0 = 0``."""
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def schmidt_spectrum(psi) -> np.ndarray:
    """Squared singular values of ``psi``, descending, zeros included."""
    s = np.linalg.svd(as_cmatrix(psi, "psi"), compute_uv=False)
    return s**2


def entanglement(state: TwoQuditState) -> float:
    """Entropy of entanglement in ebits.

    The state must be normalized; sub-normalized branch states have to be
    normalized by the caller first.
    """
    psi = state.psi if isinstance(state, TwoQuditState) else as_cmatrix(state, "psi")
    chi = schmidt_spectrum(psi)
    total = chi.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise InvalidInputError(f"entanglement() needs a normalized state, norm^2 = {total:.9f}")
    # clip round-off zeros so they do not contribute -0 * log(tiny)
    chi = chi[chi > EPS_RANK * chi[0]]
    return shannon_entropy(chi / chi.sum())


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


@dataclass(frozen=True, eq=False)
class TwoQubitResource:
    """Electron-pair state ``sum c[ja, jb] |ja, jb>`` stored as the 2x2 matrix ``phi``."""

    phi: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        a = as_cmatrix(self.phi, "phi_ee")
        if a.shape != (2, 2):
            raise InvalidInputError(f"resource matrix must be 2x2, got {a.shape}")
        n2 = float(np.vdot(a, a).real)
        if abs(n2 - 1.0) > EPS_ORTHO:
            raise InvalidInputError(f"resource state must be normalized, norm^2 = {n2:.12f}")
        object.__setattr__(self, "phi", a)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.phi))

    @property
    def lambdas(self) -> tuple[float, float]:
        """Squared Schmidt coefficients ``(lambda_+, lambda_-)``."""
        root = np.sqrt(max(0.25 - abs(self.det) ** 2, 0.0))
        return 0.5 + root, 0.5 - root

    @property
    def is_maximally_entangled(self) -> bool:
        return abs(abs(self.det) - 0.5) < 1e-9

    @classmethod
    def psi_plus(cls) -> "TwoQubitResource":
        return cls(np.array([[0, 1], [1, 0]]) / np.sqrt(2), "psi+")

    @classmethod
    def psi_minus(cls) -> "TwoQubitResource":
        return cls(np.array([[0, 1], [-1, 0]]) / np.sqrt(2), "psi-")

    @classmethod
    def phi_plus(cls) -> "TwoQubitResource":
        return cls(np.array([[1, 0], [0, 1]]) / np.sqrt(2), "phi+")

    @classmethod
    def phi_minus(cls) -> "TwoQubitResource":
        return cls(np.array([[1, 0], [0, -1]]) / np.sqrt(2), "phi-")

    @classmethod
    def cluster(cls) -> "TwoQubitResource":
        """``(|0+> + |1->) / sqrt 2``."""
        return cls(np.array([[1, 1], [1, -1]]) / 2, "cluster")

    @classmethod
    def product00(cls) -> "TwoQubitResource":
        return cls(np.array([[1, 0], [0, 0]]), "00")

    @classmethod
    def from_name(cls, name: str) -> "TwoQubitResource":
        try:
            return _NAMED[name]()
        except KeyError:
            raise InvalidInputError(
                f"unknown resource {name!r}; choose from {sorted(_NAMED)}"
            ) from None

    @classmethod
    def with_entanglement(cls, ebits: float) -> "TwoQubitResource":
        """``cos t |00> + sin t |11>`` with the requested entanglement (0 < ebits <= 1)."""
        if not 0.0 < ebits <= 1.0:
            raise InvalidInputError(f"ebits must be in (0, 1], got {ebits}")
        if ebits == 1.0:
            lam = 0.5
        else:
            lam = brentq(lambda x: binary_entropy(x) - ebits, 1e-15, 0.5)
        return cls(np.diag([np.sqrt(1 - lam), np.sqrt(lam)]), f"E={ebits:g}")


_NAMED = {
    "psi+": TwoQubitResource.psi_plus,
    "psi-": TwoQubitResource.psi_minus,
    "phi+": TwoQubitResource.phi_plus,
    "phi-": TwoQubitResource.phi_minus,
    "cluster": TwoQubitResource.cluster,
}

RESOURCE_NAMES = tuple(_NAMED)


def two_qubit_entanglement(res: TwoQubitResource) -> float:
    """Entanglement of an electron pair from ``|det phi|`` alone."""
    return shannon_entropy(res.lambdas)


def plus_vector(d: int) -> np.ndarray:
    """Uniform superposition ``|+_d>`` of a single qudit."""
    if d < 2:
        raise InvalidInputError(f"qudit dimension must be >= 2, got {d}")
    return np.full(d, 1 / np.sqrt(d), dtype=complex)


def plus_state(d: int) -> TwoQuditState:
    """Product state ``|+_d> (x) |+_d>``."""
    v = plus_vector(d)
    return TwoQuditState(np.outer(v, v))


def qudit_bell(d: int) -> TwoQuditState:
    """Maximally entangled ``sum_i |i, i> / sqrt d``."""
    if d < 2:
        raise InvalidInputError(f"qudit dimension must be >= 2, got {d}")
    return TwoQuditState(np.eye(d, dtype=complex) / np.sqrt(d))


def max_ebits(d: int) -> float:
    return float(np.log2(d))


def random_state(d_a: int, d_b: int, rng: np.random.Generator) -> TwoQuditState:
    z = rng.standard_normal((d_a, d_b)) + 1j * rng.standard_normal((d_a, d_b))
    return TwoQuditState(z / np.linalg.norm(z))


def random_resource(rng: np.random.Generator) -> TwoQubitResource:
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return TwoQubitResource(z / np.linalg.norm(z), "random")
