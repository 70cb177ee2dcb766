"""Effective Hamiltonians of defect centres and the exchange-hyperfine correction.

Energies are plain floats in whatever unit the caller chooses; only
ratios enter the entanglement estimates.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, polar

from .gates import IterationSpec, NodeParams, outcome_tree
from .kernel import InvalidInputError
from .schemes import Scheme, leaf_statistics, optimize_phases
from .states import plus_state


def spin_operators(s: float):
    """``(S_z, S_+, S_-)`` for spin ``s`` in the basis ``m = s, s-1, ..., -s``."""
    n = int(round(2 * s + 1))
    if n < 1 or abs(n - (2 * s + 1)) > 1e-12:
        raise InvalidInputError(f"spin must be a non-negative half-integer, got {s}")
    m = s - np.arange(n)
    sp = np.zeros((n, n))
    for i in range(1, n):
        sp[i - 1, i] = math.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    return np.diag(m), sp, sp.T.copy()


# --- NV-type centres ---------------------------------------------------------


@dataclass(frozen=True)
class NVTypeParams:
    """Electron spin ``S`` with zero-field splitting, coupled to nuclear spin ``I``.

    ``qubit_levels = (m_s, m_s')`` selects the electron levels playing the
    qubit states 0 and 1.
    """

    S: float = 1.0
    I: float = 1.0
    D: float = 1.0
    gammaB: float = 0.0
    A_par: float = 1.0
    A_perp: float = 0.0
    qubit_levels: tuple = (1, 0)

    def __post_init__(self):
        ms, ms2 = self.qubit_levels
        if ms == ms2 or abs(ms) > self.S or abs(ms2) > self.S:
            raise InvalidInputError(f"invalid qubit levels {self.qubit_levels} for S={self.S}")

    @property
    def A_net(self) -> float:
        return (self.qubit_levels[0] - self.qubit_levels[1]) * self.A_par


def second_order_correction(params: NVTypeParams, zeeman_in_denominator: bool = False):
    """Second-order corrections ``(h0, h1)`` from the flip-flop hyperfine term.

    Uses ``H2_mm' = 1/2 sum_l V_ml V_lm' [1/(e_m - e_l) + 1/(e_m' - e_l)]``
    with ``V = (A_perp/2)(S_- I_+ + S_+ I_-)`` and the electron energies
    ``e_ms = D m_s^2 (+ gammaB m_s)``; ``l`` runs over the other electron
    levels. Returns ``(2I+1) x (2I+1)`` matrices in energy units.

    Raises
    ------
    InvalidInputError
        If a nonzero coupling meets a vanishing energy denominator.
    """
    sz, sp, sm = spin_operators(params.S)
    _, ip, im = spin_operators(params.I)
    ms = np.diag(sz)
    n_i = ip.shape[0]
    eps = params.D * ms**2 + (params.gammaB * ms if zeeman_in_denominator else 0.0)
    v = params.A_perp / 2 * (np.kron(sm, ip) + np.kron(sp, im))
    e0 = np.repeat(eps, n_i)
    out = []
    for q in params.qubit_levels:
        si = int(np.argmin(np.abs(ms - q)))
        idx = range(si * n_i, (si + 1) * n_i)
        others = [l for l in range(len(e0)) if l // n_i != si]
        h = np.zeros((n_i, n_i))
        for a, m in enumerate(idx):
            for b, mp in enumerate(idx):
                acc = 0.0
                for l in others:
                    w = v[m, l] * v[l, mp]
                    if w == 0:
                        continue
                    if e0[m] == e0[l] or e0[mp] == e0[l]:
                        raise InvalidInputError(
                            f"degenerate denominator between m_s={ms[si]:g} and "
                            f"m_s={ms[l // n_i]:g}"
                        )
                    acc += 0.5 * w * (1 / (e0[m] - e0[l]) + 1 / (e0[mp] - e0[l]))
                h[a, b] = acc
        out.append(h)
    return out[0], out[1]


def zeta(params: NVTypeParams) -> float:
    """``A_perp^2 / (A_par D)``."""
    return params.A_perp**2 / (params.A_par * params.D)


def corrected_node(d: int, xi: float, zeta_value: float) -> NodeParams:
    """Node with ``S = 1``, ``I = (d-1)/2`` and flip-flop correction of strength ``zeta``.

    Works in units ``A_par = A_perp = 1`` so that ``D = 1/zeta``.
    """
    if zeta_value == 0:
        return NodeParams(d, xi)
    p = NVTypeParams(S=1, I=(d - 1) / 2, D=1 / zeta_value, A_par=1.0, A_perp=1.0)
    h0, h1 = second_order_correction(p)
    return NodeParams(d, xi, (np.diag(h0) / p.A_net, np.diag(h1) / p.A_net))


def _iterations(scheme) -> list[IterationSpec]:
    its = list(scheme.iterations if isinstance(scheme, Scheme) else scheme)
    for s in its:
        for phi in (s.phi_a, s.phi_b):
            if not -1e-12 <= phi <= 2 * math.pi + 1e-12:
                raise InvalidInputError("phases must lie in the first period [0, 2 pi]")
    return its


def entanglement_reduction(d: int, scheme, zeta_value: float, xi: float = 0.0,
                           initial=None) -> float:
    """Relative shortfall ``1 - <E>/log2 d`` with the corrected conditional evolution.

    ``scheme`` is a :class:`Scheme` or a sequence of iterations; ``<E>``
    is conditioned on the postselection rules it carries.
    """
    its = _iterations(scheme)
    if initial is None:
        initial = scheme.initial if isinstance(scheme, Scheme) else plus_state(d)
    node = corrected_node(d, xi, zeta_value)
    st = leaf_statistics(outcome_tree(initial, its, (node, node)), d)
    return 1.0 - st.expected_ebits / st.max_ebits


def optimal_reduction(d: int, resource, phases: Sequence[float], postselect, zeta_value: float,
                      xi: float = 0.0) -> tuple[tuple, float]:
    """Shortfall after locally re-optimizing the phases for the corrected model."""
    node = corrected_node(d, xi, zeta_value)
    objective = "expected" if postselect in (None, "none") else "postselected"
    res = optimize_phases(d, resource, xi, objective, seed_phases=phases,
                          postselect=postselect, nodes=(node, node), scan=False)
    return res.phases, 1.0 - res.stats.expected_ebits / res.stats.max_ebits


# --- GeV centre --------------------------------------------------------------


@dataclass(frozen=True)
class GeVParams:
    """Spin-orbit coupling ``lam``, complex strain ``strain = alpha - i beta``."""

    lam: float
    strain: complex = 0.0
    gammaB: float = 0.0
    A_par: float = 0.0
    A_perp: float = 0.0
    I: float = 4.5

    def __post_init__(self):
        if self.lam <= 0:
            raise InvalidInputError("spin-orbit coupling must be positive")


@dataclass(frozen=True, eq=False)
class GeVResult:
    """Lower-block effective Hamiltonian and its comparison with the target.

    ``residual`` is the norm of the second-order level shifts generated by
    the off-diagonal part of ``h_low``; neglecting it yields the target
    ``gammaB S_z + A_par S_z I_z``. ``diagonal_deviation`` compares the
    diagonal with the target up to a constant and is informational only.
    """

    h_full: np.ndarray
    h_low: np.ndarray
    target: np.ndarray
    off_diagonal_norm: float
    residual: float
    diagonal_deviation: float
    flipflop: np.ndarray
    flipflop_matrix_form: np.ndarray
    regime_ok: bool
    notes: tuple = field(default_factory=tuple)


def gev_electron_hamiltonian(p: GeVParams) -> np.ndarray:
    """Basis ``e+ up, e- down, e- up, e+ down``."""
    eps = complex(p.strain)
    lam, gb = p.lam, p.gammaB
    return 0.5 * np.array([
        [lam + gb, 0, 2 * eps, 0],
        [0, lam - gb, 0, 2 * eps.conjugate()],
        [2 * eps.conjugate(), 0, -lam + gb, 0],
        [0, 2 * eps, 0, -lam - gb],
    ], dtype=complex)


def gev_effective(p: GeVParams) -> GeVResult:
    """Block-diagonalize the electron space and compare the lower block with the target.

    The lower block ``{e- up, e+ down}`` is obtained exactly by the direct
    rotation that maps the unperturbed block onto the low-energy
    eigenspace (polar factor of their overlap).
    """
    he = gev_electron_hamiltonian(p)
    iz, ip, im = spin_operators(p.I)
    n_i = iz.shape[0]
    sz = np.diag([0.5, -0.5, 0.5, -0.5])
    sp = np.zeros((4, 4))
    sp[2, 1] = 1  # e- down -> e- up
    sp[0, 3] = 1  # e+ down -> e+ up
    h = (np.kron(he, np.eye(n_i)) + p.A_par * np.kron(sz, iz)
         + p.A_perp / 2 * (np.kron(sp, im) + np.kron(sp.T, ip)))
    w, v = eigh(h)
    n = 2 * n_i
    b0 = np.zeros((4 * n_i, n))
    b0[2 * n_i:, :] = np.eye(n)
    up, _ = polar(b0.T @ v[:, :n])
    h_low = up @ np.diag(w[:n]) @ up.conj().T

    s_low = np.diag([0.5, -0.5])
    target = p.gammaB * np.kron(s_low, np.eye(n_i)) + p.A_par * np.kron(s_low, iz)
    diag = np.real(np.diag(h_low))
    off = h_low - np.diag(np.diag(h_low))
    shifts = np.zeros(n)
    for i in range(n):
        for l in range(n):
            if i != l and abs(off[i, l]) > 0:
                gap = diag[i] - diag[l]
                if gap != 0:
                    shifts[i] += abs(off[i, l]) ** 2 / gap
    dev = diag - np.real(np.diag(target))
    dev -= dev.mean()
    # <e+ down, m+1 | H | e- up, m>; raising m lowers the basis index by one
    ff = np.array([h_low[n_i + k - 1, k] for k in range(1, n_i)])
    ff_form = np.array([-(p.A_perp / p.lam) * complex(p.strain) * ip[k - 1, k]
                        for k in range(1, n_i)])

    notes = []
    eps = abs(complex(p.strain))
    if abs(p.gammaB) > 0.1 * p.lam or eps > 0.1 * p.lam:
        notes.append("gammaB or |strain| not small against lambda")
    if p.A_par and (eps * p.A_perp / p.lam) ** 2 > 0.1 * abs(p.gammaB * p.A_par):
        notes.append("(|strain| A_perp / lambda)^2 not small against |gammaB A_par|")
    res_norm = float(np.linalg.norm(shifts))
    for msg in notes:
        warnings.warn(f"{msg}; residual = {res_norm:.3e}", RuntimeWarning, stacklevel=2)
    return GeVResult(h, h_low, target, float(np.linalg.norm(off)), res_norm,
                     float(np.linalg.norm(dev)), ff, ff_form, not notes, tuple(notes))


def gev_hyperfine_tensor(p: GeVParams) -> np.ndarray:
    """Analytic effective hyperfine tensor of the lower block, ``strain = alpha - i beta``."""
    alpha = complex(p.strain).real
    beta = -complex(p.strain).imag
    r = p.A_perp / p.lam
    return np.array([
        [-alpha * r, -beta * r, 0.0],
        [beta * r, -alpha * r, 0.0],
        [0.0, 0.0, p.A_par],
    ])


# --- V in SiC ----------------------------------------------------------------

S11_GHZ = 251e3
S11P_GHZ = 230e3
LAMBDA11Z_GHZ = 529.0


@dataclass(frozen=True)
class VSiCParams:
    """Reduced hyperfine constants in MHz and the strain mixing angle.

    ``a11z`` and ``a11z_pp`` default to the values fixed by the unstrained
    (232 MHz) and fully mixed (201 MHz) limits. The remaining constants
    have no published magnitude here and default to zero.
    """

    theta1: float = 0.0
    a11z: float = 201.0
    a11z_pp: float = -15.5
    a11x: float = 0.0
    a11x_p: float = 0.0
    a11z_p: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.theta1 <= math.pi / 2 + 1e-12:
            raise InvalidInputError(f"theta1 must lie in [0, pi/2], got {self.theta1}")


@dataclass(frozen=True, eq=False)
class VSiCTensor:
    A: np.ndarray
    elements: dict
    unconstrained: tuple


def vsic_hyperfine(p: VSiCParams) -> VSiCTensor:
    """Hyperfine tensor of the ground doublet for strain along ``x``."""
    c, s = math.cos(p.theta1), math.sin(p.theta1)
    el = {
        "zz": p.a11z - 2 * p.a11z_pp * c,
        "zx": p.a11x_p * s,
        "xy": -p.a11x * (1 + c),
        "xz": p.a11x_p * (1 - c),
        "xx": -p.a11z_p * s,
    }
    a = np.array([
        [el["xx"] + el["xy"], 0.0, el["xz"]],
        [0.0, el["xx"] - el["xy"], 0.0],
        [-el["zx"], 0.0, el["zz"]],
    ])
    flags = tuple(name for name, val in (("a11x", p.a11x), ("a11x_p", p.a11x_p),
                                         ("a11z_p", p.a11z_p)) if val == 0.0)
    return VSiCTensor(a, el, flags)


def vsic_constants_from_endpoints(azz_0: float = 232.0, azz_half_pi: float = 201.0):
    """``(a11z, a11z_pp)`` reproducing ``a^zz`` at ``theta1 = 0`` and ``pi/2``."""
    return azz_half_pi, (azz_half_pi - azz_0) / 2


def theta_from_strain(eps_xz: float, eps_yy: float = 0.0, eps_xx: float = 0.0,
                      s11: float = S11_GHZ, s11_p: float = S11P_GHZ,
                      lambda11z: float = LAMBDA11Z_GHZ) -> float:
    """Strain mixing angle from ``tan theta1 = 2 eps11x / lambda11z`` (GHz units)."""
    e11 = s11 * eps_xz + s11_p * (eps_yy - eps_xx) / 2
    theta = math.atan(2 * e11 / lambda11z)
    if theta < 0:
        raise InvalidInputError("strain gives a negative mixing angle")
    return theta
