"""Checks and solvers for the transferability conditions.

Covers complete deterministic transfer, the allowed phase indices of the
deterministic scheme, and the conditions under which a final round turns a
state with rank above ``d/2`` into a maximally entangled one.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .gates import OutcomeNode
from .kernel import InvalidInputError, as_cmatrix, svd
from .states import TwoQuditState, TwoQubitResource, schmidt

COND_TOL = 1e-9


# --- complete deterministic transfer ----------------------------------------


@dataclass(frozen=True)
class CompleteTransferReport:
    ok: bool
    residual_a: float
    residual_b: float
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_complete_transfer(prev: TwoQuditState, ua0, ua1, ub0, ub1) -> CompleteTransferReport:
    """Whether both nodes map the previous Schmidt vectors to two orthogonal sets.

    The residuals are ``||V_K^+ U_{K,0}^+ U_{K,1} V_K||_F`` with ``V_K``
    the Schmidt bases of ``prev``.
    """
    sd = schmidt(prev)
    gates = [as_cmatrix(g, n) for g, n in ((ua0, "Ua0"), (ua1, "Ua1"), (ub0, "Ub0"), (ub1, "Ub1"))]
    if gates[0].shape != (prev.d_a,) * 2 or gates[2].shape != (prev.d_b,) * 2:
        raise InvalidInputError("gate shapes do not match the state")
    res = []
    for u0, u1, v in ((gates[0], gates[1], sd.left_basis), (gates[2], gates[3], sd.right_basis)):
        res.append(float(np.linalg.norm(v.conj().T @ u0.conj().T @ u1 @ v)))
    if sd.rank > min(prev.d_a, prev.d_b) // 2:
        return CompleteTransferReport(False, res[0], res[1], "rank exceeds d/2")
    ok = res[0] < COND_TOL and res[1] < COND_TOL
    return CompleteTransferReport(ok, res[0], res[1], "" if ok else "Schmidt images overlap")


# --- allowed indices ---------------------------------------------------------


def _phase_sum(d: int, theta: float) -> complex:
    m = (d - 1) / 2 - np.arange(d)
    return complex(np.exp(-1j * m * theta).sum())


def allowed_indices(d: int, previous_k: Sequence[int] = ()) -> set[int]:
    """Phase indices ``k`` (``phi = 2 pi k / d``) giving another complete transfer.

    ``k`` is allowed when ``sum_m exp(-i m (2 pi/d)(k + sum tau_mu k_mu))``
    vanishes for every ``tau`` in ``{-1, 0, 1}^len(previous_k)``.
    """
    if d < 2:
        raise InvalidInputError(f"qudit dimension must be >= 2, got {d}")
    prev = [int(k) for k in previous_k]
    if any(not 1 <= k <= d - 1 for k in prev):
        raise InvalidInputError(f"previous indices must lie in 1..{d - 1}")
    out = set()
    taus = list(itertools.product((-1, 0, 1), repeat=len(prev)))
    for k in range(1, d):
        if all(
            abs(_phase_sum(d, 2 * math.pi / d * (k + sum(t * q for t, q in zip(tau, prev)))))
            < COND_TOL
            for tau in taus
        ):
            out.add(k)
    return out


# --- maximal-entanglement conditions for a final round ------------------------


@dataclass(frozen=True)
class PairingReport:
    paired_epsilons: tuple
    has_central_element: bool
    pairing_ok: bool
    residual: float


@dataclass(frozen=True)
class BlockStructureReport:
    blocks: tuple
    antidiagonal_ok: tuple
    leakage: tuple


@dataclass(frozen=True)
class RealForm:
    """Resource rotated to real coefficients by electron phase gates.

    ``phi_real = exp(i gamma) diag(1, e^{i alpha_a}) phi diag(1, e^{i alpha_b})``;
    the matching transformed unitaries are ``e^{-i alpha_K} U_K``.
    """

    phi_real: np.ndarray
    alpha_a: float
    alpha_b: float
    gamma: float


@dataclass(frozen=True)
class BlockCheck:
    block: int
    eps_bar: float
    kind: str
    expected: float
    values: tuple
    residual: float


@dataclass(frozen=True)
class MaxEntReport:
    resource_maximally_entangled: bool
    pairing: PairingReport
    blocks: BlockStructureReport
    real_form: RealForm | None
    c: float
    sigma: tuple
    p_eq: float
    regime: str
    gen3a_residual: float
    gen3a_swapped_residual: float
    gen3b_residual: float
    gen3b_swapped_residual: float
    block_checks: tuple = field(default_factory=tuple)

    @property
    def all_ok(self) -> bool:
        return (
            self.resource_maximally_entangled
            and self.pairing.pairing_ok
            and all(self.blocks.antidiagonal_ok)
            and max(self.gen3a_residual, self.gen3a_swapped_residual,
                    self.gen3b_residual, self.gen3b_swapped_residual) < COND_TOL
            and all(b.residual < COND_TOL for b in self.block_checks)
        )


def pairing_report(s_diag) -> PairingReport:
    """Pairs ``1/d +- eps_i`` of the sorted diagonal plus the central ``1/d`` for odd ``d``."""
    s = np.sort(np.asarray(s_diag, dtype=float))[::-1]
    d = len(s)
    devs, eps = [], []
    for i in range(d // 2):
        devs.append(abs(s[i] + s[d - 1 - i] - 2 / d))
        eps.append((s[i] - s[d - 1 - i]) / 2)
    central = d % 2 == 1
    if central:
        devs.append(abs(s[d // 2] - 1 / d))
    res = max(devs) if devs else 0.0
    return PairingReport(tuple(float(e) for e in eps), central, bool(res < COND_TOL), float(res))


def _blocks(s: np.ndarray) -> list[list[int]]:
    blocks = [[0]]
    for i in range(1, len(s)):
        if abs(s[i] - s[i - 1]) <= COND_TOL:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return blocks


def block_structure(s_down: np.ndarray, *ucal) -> BlockStructureReport:
    """Leakage of each unitary outside the pattern allowed by ``U^+ S_down U = S_up``."""
    s_up = s_down[::-1]
    mask = np.abs(s_down[:, None] - s_up[None, :]) > COND_TOL
    leak = tuple(float(np.linalg.norm(np.where(mask, u, 0))) for u in ucal)
    return BlockStructureReport(
        tuple(tuple(b) for b in _blocks(s_down)), tuple(x < COND_TOL for x in leak), leak
    )


def real_form(res: TwoQubitResource) -> RealForm | None:
    """Rotate a resource to real coefficients by relative electron phases, if possible.

    Solves ``theta_ij + gamma + i alpha_a + j alpha_b = 0 (mod pi)`` over the
    nonzero entries; returns ``None`` when no solution exists.
    """
    c = res.phi
    idx = [(i, j) for i in (0, 1) for j in (0, 1) if abs(c[i, j]) > COND_TOL]
    design = np.array([[1.0, i, j] for i, j in idx])
    theta = np.array([np.angle(c[i, j]) for i, j in idx])
    for shifts in itertools.product((0.0, math.pi), repeat=len(idx)):
        sol = np.linalg.lstsq(design, -(theta + np.array(shifts)), rcond=None)[0]
        gamma, alpha_a, alpha_b = (float(x) for x in sol)
        rot = np.exp(1j * gamma) * np.diag([1, np.exp(1j * alpha_a)]) @ c @ np.diag(
            [1, np.exp(1j * alpha_b)])
        if np.all(np.abs(rot.imag) < COND_TOL):
            return RealForm(rot.real.copy(), alpha_a, alpha_b, gamma)
    return None


def _sigma_and_c(phi: np.ndarray) -> tuple[float, tuple]:
    c = abs(phi[0, 0])
    sig = [1.0 if v >= 0 else -1.0 for v in (phi[0, 0], phi[0, 1], phi[1, 0], phi[1, 1])]
    # free signs on zero entries are fixed so that the product is -1
    zeros = [i for i, v in enumerate(phi.reshape(-1)) if abs(v) < COND_TOL]
    if zeros and np.prod(sig) > 0:
        sig[zeros[0]] *= -1
    return float(c), tuple(sig)


def _gen3(ua, ub, s_down, c, kappa_c, sigma_bar, d):
    root = np.diag(np.sqrt(np.clip(s_down * s_down[::-1], 0, None)))
    comm = ua @ (ub + ub.conj().T).T - (ub + ub.conj().T).T @ ua
    ra = float(np.linalg.norm(kappa_c * root @ comm))
    inner = c**2 * ua @ ub.T - (0.5 - c**2) * ua @ ub.conj()
    lhs = root @ (inner + inner.conj().T)
    t = np.trace(lhs).real / d
    rb = float(np.linalg.norm(lhs - t * np.eye(d)))
    p_eq = (t * d / sigma_bar + 1) / 2
    return ra, rb, p_eq


def _block_checks(ua, ub, s_down, c, sigma_bar, p_eq, d) -> list[BlockCheck]:
    blocks = _blocks(s_down)
    n = len(blocks)
    out = []
    for i, bi in enumerate(blocks):
        bj = blocks[n - 1 - i]
        eps_bar = float(s_down[bi[0]] - 1 / d)
        if abs(abs(eps_bar) - 1 / d) < COND_TOL:
            continue  # outermost blocks of a rank-deficient state carry no constraint
        zeta = sigma_bar * (p_eq - 0.5) / math.sqrt(max(1 - d**2 * eps_bar**2, 0.0))
        a_p = ua[np.ix_(bi, bj)]
        a_m = ua[np.ix_(bj, bi)]
        b_p = ub[np.ix_(bi, bj)]
        b_m = ub[np.ix_(bj, bi)]
        if abs(c - 1 / math.sqrt(2)) < COND_TOL:
            checks = [("phi-bell", a_p @ b_p.T, zeta)]
        elif c < COND_TOL:
            checks = [("psi-bell", a_p @ b_m.conj(), zeta)]
        elif abs(c - 0.5) < COND_TOL:
            checks = [("cluster-eig", a_p @ (b_p - b_m.conj().T).T, 2 * zeta)]
            lhs = a_p @ (b_p + b_m.conj().T).T - (b_m + b_p.conj().T).T @ a_m
            out.append(BlockCheck(i, eps_bar, "cluster-commutator", 0.0, (),
                                  float(np.linalg.norm(lhs))))
        else:
            checks = []
        for kind, mat, target in checks:
            ev = np.linalg.eigvals(mat).real
            out.append(BlockCheck(i, eps_bar, kind, float(target), tuple(float(x) for x in ev),
                                  float(np.abs(ev - target).max())))
    return out


def check_maxent_conditions(s_diag, ucal_a, ucal_b, resource: TwoQubitResource) -> MaxEntReport:
    """Evaluate the conditions for a final round to reach maximal entanglement.

    Parameters
    ----------
    s_diag : sequence of float
        Squared Schmidt coefficients of the previous state padded with
        zeros to length ``d``; sorted in descending order internally.
    ucal_a, ucal_b : (d, d) array
        ``Q^+ U_1 U_0^+ Q`` of each node, see :func:`calU_from_gates`.
    resource : TwoQubitResource
        Resource of the final round. Complex resources are first rotated
        to real coefficients and the unitaries rephased accordingly.
    """
    s = np.sort(np.asarray(s_diag, dtype=float))[::-1]
    d = len(s)
    if abs(s.sum() - 1) > 1e-9:
        raise InvalidInputError("diagonal must sum to 1")
    ua = as_cmatrix(ucal_a, "ucal_a")
    ub = as_cmatrix(ucal_b, "ucal_b")
    if ua.shape != (d, d) or ub.shape != (d, d):
        raise InvalidInputError(f"unitaries must be {d}x{d}")
    maxent = resource.is_maximally_entangled
    pairing = pairing_report(s)
    blocks = block_structure(s, ua, ub)
    rf = real_form(resource)
    rank = int(np.count_nonzero(s > COND_TOL))
    regime = ("complete" if np.all(s * s[::-1] < COND_TOL)
              else "rank-deficient" if rank < d else "full-rank")
    if rf is None:
        nan = float("nan")
        return MaxEntReport(maxent, pairing, blocks, None, nan, (), nan, regime, nan, nan, nan, nan)
    ua_r = np.exp(-1j * rf.alpha_a) * ua
    ub_r = np.exp(-1j * rf.alpha_b) * ub
    c, sig = _sigma_and_c(rf.phi_real)
    kappa_c = c * math.sqrt(max(0.5 - c**2, 0.0))
    sigma_bar = sig[0] * sig[3] if c > COND_TOL else -sig[1] * sig[2]
    ra, rb, p_eq = _gen3(ua_r, ub_r, s, c, kappa_c, sigma_bar, d)
    # a <-> b swap exchanges sigma_01 and sigma_10, which leaves c and sigma_bar unchanged
    ra2, rb2, _ = _gen3(ub_r, ua_r, s, c, kappa_c, sigma_bar, d)
    checks = _block_checks(ua_r, ub_r, s, c, sigma_bar, p_eq, d)
    checks += _block_checks(ub_r, ua_r, s, c, sigma_bar, p_eq, d)
    return MaxEntReport(maxent, pairing, blocks, rf, c, sig, float(p_eq), regime,
                        ra, ra2, rb, rb2, tuple(checks))


def calU_from_gates(prev: TwoQuditState, u0, u1, node: str = "a", tol: float = COND_TOL):
    """``Q^+ U_1 U_0^+ Q`` with ``Q = [U_0 V, V_perp]`` for one node.

    Returns ``(ucal, s_diag)`` where ``s_diag`` is the previous squared
    Schmidt spectrum padded with zeros to the size of ``Q``.
    """
    sd = schmidt(prev)
    v = sd.left_basis if node == "a" else sd.right_basis
    u0 = as_cmatrix(u0, "U0")
    u1 = as_cmatrix(u1, "U1")
    first = u0 @ v
    img = u1 @ v
    rest = img - first @ (first.conj().T @ img)
    u, s, _ = svd(rest)
    perp = u[:, s > tol]
    q = np.hstack([first, perp])
    ucal = q.conj().T @ u1 @ u0.conj().T @ q
    s_diag = np.concatenate([sd.chi, np.zeros(perp.shape[1])])
    return ucal, s_diag


def d3_calU_solution(xi: float, alpha: float = 0.0, which: int = 1) -> np.ndarray:
    """The two antidiagonal solutions for ``d = 3`` (``phi = pi/2`` or ``phi = pi``)."""
    e = np.exp(1j * alpha)
    if which == 1:
        m = np.array([[0, 0, e], [0, 1, 0], [-1 / e, 0, 0]])
        return np.exp(1j * xi * math.pi / 2) * m
    if which == 2:
        m = np.array([[0, 0, e], [0, -1, 0], [1 / e, 0, 0]])
        return np.exp(1j * xi * math.pi) * m
    raise InvalidInputError("which must be 1 or 2")


# --- resource coefficient for the d = 3 final round --------------------------


@dataclass(frozen=True)
class ResourceSolution:
    kind: str  # "none", "one" or "all"
    c: float | None = None


def solve_resource_c(xi_a: float, xi_b: float, phi_a: float, phi_b: float,
                     tol: float = 1e-12) -> ResourceSolution:
    """Solve ``c^2 cos(A) - (1/2 - c^2) cos(B) = 0`` for ``c`` in ``[0, 1/sqrt 2]``.

    ``A = xi_a phi_a + xi_b phi_b`` and ``B = xi_a phi_a - xi_b phi_b``.
    """
    ca = math.cos(xi_a * phi_a + xi_b * phi_b)
    cb = math.cos(xi_a * phi_a - xi_b * phi_b)
    den = ca + cb
    if abs(den) < tol:
        return ResourceSolution("all") if abs(cb) < tol else ResourceSolution("none")
    c2 = cb / (2 * den)
    if -tol <= c2 <= 0.5 + tol:
        return ResourceSolution("one", math.sqrt(min(max(c2, 0.0), 0.5)))
    return ResourceSolution("none")


def schmidt_product_check(prev_coeffs, resource: TwoQubitResource,
                          leaves: Sequence[OutcomeNode], tol: float = COND_TOL) -> bool:
    """Each leaf spectrum equals ``{lambda_+ chi_k} U {lambda_- chi_k}``.

    ``prev_coeffs`` are the previous squared Schmidt coefficients ``chi``.
    """
    chi = np.asarray(prev_coeffs, dtype=float)
    lp, lm = resource.lambdas
    want = np.sort(np.concatenate([lp * chi, lm * chi]))[::-1]
    for lf in leaves:
        got = np.linalg.svd(lf.state.psi, compute_uv=False) ** 2
        n = max(len(want), len(got))
        a = np.pad(want, (0, n - len(want)))
        b = np.pad(got, (0, n - len(got)))
        if np.abs(a - b).max() > tol:
            return False
    return True
