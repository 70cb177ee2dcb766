"""Phase sets, named schemes, outcome statistics and phase optimization."""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .gates import (
    IterationSpec,
    NodeParams,
    OutcomeNode,
    outcome_tree,
    transfer_diagonals,
    unitary_diagonal,
)
from .kernel import InvalidInputError
from .states import (
    E_GROUP_TOL,
    TwoQuditState,
    TwoQubitResource,
    max_ebits,
    plus_state,
    schmidt_spectrum,
)


@dataclass(frozen=True)
class SchemeStats:
    """Statistics over the surviving leaves of an outcome tree.

    ``expected_ebits`` and ``std_dev`` are conditioned on survival, i.e.
    weighted by leaf probability divided by ``success_probability``.
    ``merged_leaf_count`` counts distinct ``(P, E)`` pairs.
    """

    expected_ebits: float
    max_ebits: float
    distinct_E_count: int
    std_dev: float
    success_probability: float
    leaf_count: int
    merged_leaf_count: int

    @property
    def ratio(self) -> float:
        return self.expected_ebits / self.max_ebits


def count_distinct(values, tol: float = E_GROUP_TOL) -> int:
    """Number of groups after chaining sorted values that differ by at most ``tol``."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(v) > tol))


def _count_distinct_pairs(ps, es, tol: float) -> int:
    groups: list[tuple[float, float]] = []
    for p, e in sorted(zip(ps, es)):
        if not any(abs(p - gp) <= tol and abs(e - ge) <= tol for gp, ge in groups):
            groups.append((p, e))
    return len(groups)


def leaf_statistics(leaves: Sequence[OutcomeNode], d: int) -> SchemeStats:
    if not leaves:
        raise InvalidInputError("no surviving leaves")
    p = np.array([lf.probability for lf in leaves])
    e = np.array([lf.ebits for lf in leaves])
    total = float(p.sum())
    w = p / total
    mean = float(w @ e)
    var = float(w @ (e - mean) ** 2)
    n_distinct = count_distinct(e)
    std = 0.0 if n_distinct == 1 else math.sqrt(max(var, 0.0))
    return SchemeStats(
        expected_ebits=mean,
        max_ebits=max_ebits(d),
        distinct_E_count=n_distinct,
        std_dev=std,
        success_probability=total,
        leaf_count=len(leaves),
        merged_leaf_count=_count_distinct_pairs(p, e, E_GROUP_TOL),
    )


def _nodes(d: int, xi: float, nodes=None):
    if nodes is not None:
        return nodes
    n = NodeParams(d, xi)
    return (n, n)


@dataclass(frozen=True)
class Scheme:
    """Ordered iterations together with the initial nuclear state.

    ``status`` is ``"ok"`` or ``"warning"``; on a warning ``message``
    explains why and ``predicted_shortfall`` gives ``1 - E/E_d``.
    """

    iterations: tuple
    initial: TwoQuditState
    status: str = "ok"
    message: str = ""
    predicted_shortfall: float = 0.0

    @property
    def d(self) -> int:
        return self.initial.d_a

    def leaves(self, xi: float = 0.0, nodes=None) -> list[OutcomeNode]:
        return outcome_tree(self.initial, self.iterations, _nodes(self.d, xi, nodes))

    def stats(self, xi: float = 0.0, nodes=None) -> SchemeStats:
        return leaf_statistics(self.leaves(xi, nodes), self.d)


def nu_max(d: int) -> int:
    """Rounds needed for maximal entanglement, ``ceil(log2 d)``."""
    if d < 2:
        raise InvalidInputError(f"qudit dimension must be >= 2, got {d}")
    return (d - 1).bit_length()


def deterministic_phase_set(d: int) -> list[float]:
    """``phi_nu = 2^nu pi / d`` for ``nu = 1 .. floor(log2 d)``."""
    if d < 2:
        raise InvalidInputError(f"qudit dimension must be >= 2, got {d}")
    n = d.bit_length() - 1
    return [2**nu * math.pi / d for nu in range(1, n + 1)]


def power_of_two_phase_set(d: int, p: Sequence[int] | None = None) -> list[float]:
    """``phi_nu = (2 pi / 2^nu)(2 p_nu + 1)`` for ``nu = 1 .. ceil(log2 d)``."""
    n = nu_max(d)
    p = [0] * n if p is None else list(p)
    if len(p) != n or any(int(x) != x or x < 0 for x in p):
        raise InvalidInputError(f"p must hold {n} non-negative integers")
    return [2 * math.pi / 2**nu * (2 * int(k) + 1) for nu, k in enumerate(p, start=1)]


def make_scheme(d: int, resource: TwoQubitResource, phases, postselect="none", initial=None) -> Scheme:
    its = tuple(IterationSpec(resource, phi, None, postselect) for phi in phases)
    return Scheme(its, plus_state(d) if initial is None else initial)


# --- constructed d = 3 scheme ------------------------------------------------


def d3_initial_state(alpha: float = 0.0) -> TwoQuditState:
    """Product state from which the d = 3 scheme reaches success probability 1/2."""
    row = np.array([1, -math.sqrt(2) * np.exp(1j * alpha), 1]) / (2 * math.sqrt(3))
    return TwoQuditState(np.outer(row, np.ones(3)))


def d3_target_intermediate(theta: float = 0.0) -> np.ndarray:
    """State required before the last round, with a free phase on the centre."""
    r2 = math.sqrt(2)
    return np.array([[-1, 0, 1], [0, r2 * np.exp(1j * theta), 0], [1, 0, -1]]) / math.sqrt(6)


def _d3_iterations(variant: str):
    if variant == "psi+":
        first = IterationSpec(TwoQubitResource.psi_plus(), math.pi, None, "equal")
    elif variant == "psi-":
        first = IterationSpec(TwoQubitResource.psi_minus(), math.pi, None, "unequal")
    else:
        raise InvalidInputError(f"variant must be 'psi+' or 'psi-', got {variant!r}")
    return (first, IterationSpec(TwoQubitResource.cluster(), math.pi / 2))


def constructed_d3_scheme(xi: float, variant: str = "psi+") -> Scheme:
    """Two-round d = 3 scheme with success probability 1/2 at even integer ``xi``.

    For other ``xi`` the resource condition of the final round fails; the
    scheme is still returned, with ``status="warning"`` and the computed
    conditional shortfall ``1 - <E>/log2 3``.
    """
    its = _d3_iterations(variant)
    initial = d3_initial_state()
    even = abs(xi / 2 - round(xi / 2)) < 1e-12
    if even:
        return Scheme(its, initial)
    st = leaf_statistics(outcome_tree(initial, its, _nodes(3, xi)), 3)
    shortfall = 1.0 - st.expected_ebits / st.max_ebits
    msg = f"xi = {xi} is not an even integer; last-round resource condition unmet"
    warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return Scheme(its, initial, "warning", msg, shortfall)


# --- statistics table -------------------------------------------------------

FAMILIES = ("bell", "cluster")


def cluster_xi_unit(d: int) -> int:
    """Cluster and Phi resources need ``xi`` to be a multiple of this."""
    return 2 ** (nu_max(d) - 1)


def table1_row(d: int, resource_family: str = "bell", xi: float = 20.0,
               resource: TwoQubitResource | None = None) -> SchemeStats:
    """Statistics of the power-of-two phase set without postselection.

    ``resource_family`` is ``"bell"`` (default resource Psi+) or
    ``"cluster"``. Resources other than Psi+- need ``xi`` to be an integer
    multiple of ``2^(nu_max - 1)``.
    """
    if resource_family not in FAMILIES:
        raise InvalidInputError(f"resource_family must be one of {FAMILIES}")
    if resource is None:
        resource = (TwoQubitResource.psi_plus() if resource_family == "bell"
                    else TwoQubitResource.cluster())
    if resource.name not in ("psi+", "psi-"):
        unit = cluster_xi_unit(d)
        if abs(xi / unit - round(xi / unit)) > 1e-12:
            raise InvalidInputError(
                f"xi-tuning rule violated: for resource {resource.name} at d={d}, xi must be "
                f"an integer multiple of 2^(nu_max-1) = {unit}, got {xi}"
            )
    scheme = make_scheme(d, resource, power_of_two_phase_set(d))
    return scheme.stats(xi)


def snap_xi(xi: float, unit: int) -> float:
    """Nearest integer multiple of ``unit``."""
    return float(unit * round(xi / unit))


def table1(d_values=range(2, 17), xi: float = 20.0) -> list[dict]:
    """All rows for both families; cluster rows snap ``xi`` to a valid multiple."""
    rows = []
    for d in d_values:
        xc = snap_xi(xi, cluster_xi_unit(d))
        b = table1_row(d, "bell", xi)
        c = table1_row(d, "cluster", xc)
        rows.append({"d": d, "nu_max": nu_max(d), "E_d": b.max_ebits, "bell": b,
                     "cluster": c, "xi_bell": xi, "xi_cluster": xc})
    return rows


# --- sweeps ------------------------------------------------------------------


def sweep_expected_E(d: int, resource: TwoQubitResource, xi: float, fixed_phases=(),
                     points: int = 361, postselect="none", period: float = 2 * math.pi,
                     nodes=None) -> list[dict]:
    """Scan the phase of round ``len(fixed_phases) + 1`` over one period.

    Each row holds the scanned phase, the accumulated phase (sum of all
    phases so far), the conditional ``<E>``, the success probability and
    the per-leaf probabilities and entanglements in record order.
    """
    if points < 2:
        raise InvalidInputError("need at least 2 grid points")
    nd = _nodes(d, xi, nodes)
    base = sum(fixed_phases)
    rows = []
    for i in range(points):
        phi = period * i / (points - 1)
        its = [IterationSpec(resource, f, None, postselect) for f in (*fixed_phases, phi)]
        leaves = outcome_tree(plus_state(d), its, nd)
        st = leaf_statistics(leaves, d)
        rows.append({
            "phi": phi,
            "accumulated": base + phi,
            "expected_E": st.expected_ebits,
            "success": st.success_probability,
            "leaves": [(lf.record, lf.probability, lf.ebits) for lf in leaves],
        })
    return rows


# --- optimization ------------------------------------------------------------

OBJECTIVES = ("expected", "postselected")


@dataclass(frozen=True)
class OptimizationResult:
    phases: tuple
    stats: SchemeStats
    objective: float
    seed_phases: tuple
    seed_objective: float

    @property
    def improved(self) -> bool:
        return self.objective > self.seed_objective + 1e-12


def _tree_summary(initial: np.ndarray, its, nodes) -> tuple[float, float]:
    """Success probability and conditional ``<E>`` without building leaf objects.

    All effective gates are diagonal, so a record's unnormalized final
    state is the elementwise product of its gate diagonals with the
    initial matrix; leaves are handled as one stacked array.
    """
    na, nb = nodes
    stack = initial[None]
    for spec in its:
        branches = _branch_factor_stack(spec, na, nb)
        stack = (branches[None] * stack[:, None]).reshape(-1, *initial.shape)
    p = np.einsum("kij,kij->k", stack.conj(), stack).real
    keep = p > 1e-20
    s = np.linalg.svd(stack[keep], compute_uv=False) ** 2
    chi = s / s.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.where(chi > 0, chi * np.log2(chi), 0.0).sum(axis=1)
    total = float(p[keep].sum())
    return total, float(p[keep] @ ent) / total


def _branch_factor_stack(spec: IterationSpec, na: NodeParams, nb: NodeParams) -> np.ndarray:
    da = [unitary_diagonal(na, j, spec.phi_a) for j in (0, 1)]
    db = [unitary_diagonal(nb, j, spec.phi_b) for j in (0, 1)]
    return np.stack([transfer_diagonals(spec.resource, da, db, *o) for o in spec.kept_outcomes])


def _objective_fn(d, resource, xi, objective, postselect, p_weight, nodes, initial):
    if objective not in OBJECTIVES:
        raise InvalidInputError(f"objective must be one of {OBJECTIVES}")
    rules = [postselect or "none"] if isinstance(postselect, str) or postselect is None else list(postselect)
    nd = _nodes(d, xi, nodes)
    init = plus_state(d) if initial is None else initial

    def iterations(phases):
        if objective == "expected":
            rl = ["none"] * len(phases)
        elif len(rules) == len(phases):
            rl = rules
        elif len(rules) == 1:
            rl = rules * len(phases)
        else:
            raise InvalidInputError("need one postselection rule or one per round")
        return [IterationSpec(resource, f, None, r) for f, r in zip(phases, rl)]

    def stats(phases):
        return leaf_statistics(outcome_tree(init, iterations(phases), nd), d)

    def value(phases):
        total, mean = _tree_summary(init.psi, iterations(phases), nd)
        return mean + p_weight * total

    return value, stats


def _scan_coordinate(f, x, k, grid_points):
    """Best point of ``f`` along coordinate ``k`` over one full period around ``x[k]``."""
    c = x[k]
    offsets = np.linspace(-math.pi, math.pi, grid_points, endpoint=False)
    vals = []
    for o in offsets:
        y = x.copy()
        y[k] = c + o
        vals.append(f(y))
    vals = np.array(vals)
    top = vals.max()
    # candidates within round-off of the maximum: nearest first, then lower phase
    cand = [i for i in range(len(offsets)) if vals[i] >= top - 1e-12]
    best = min(cand, key=lambda i: (round(abs(offsets[i]), 9), offsets[i]))
    h = 2 * math.pi / grid_points

    def g(t):
        y = x.copy()
        y[k] = t
        return -f(y)

    lo, hi = c + offsets[best] - h, c + offsets[best] + h
    res = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    y = x.copy()
    if -res.fun >= top:
        y[k] = res.x
    else:
        y[k] = c + offsets[best]
    return y


def optimize_phases(d: int, resource: TwoQubitResource, xi: float = 20.0,
                    objective: str = "expected", seed_phases=None, postselect="equal",
                    p_weight: float = 0.0, nodes=None, initial=None, free=None,
                    grid_points: int = 360, sweeps: int = 3, scan: bool = True,
                    ) -> OptimizationResult:
    """Maximize ``<E>`` (or the postselected ``E``) over the phase vector.

    Each sweep visits the free coordinates in turn: a grid scan over one
    period picks the best basin (ties go to the candidate nearest the
    current value, then to the lower phase), and a bounded scalar search
    refines it. A Nelder-Mead polish over the free phases follows. The
    result is never worse than the seed.

    Parameters
    ----------
    objective : {"expected", "postselected"}
        ``"expected"`` runs every round without postselection.
        ``"postselected"`` applies ``postselect`` (one rule or one rule per
        round) and maximizes the entanglement conditioned on survival.
    p_weight : float
        Optional weight of the success probability added to the objective.
    free : sequence of int, optional
        Indices of the phases to optimize; the others stay at the seed.
    scan : bool
        Disable to refine only locally around the seed.
    """
    seed = np.array(power_of_two_phase_set(d) if seed_phases is None else seed_phases, float)
    free = list(range(len(seed))) if free is None else sorted(set(int(k) for k in free))
    if any(k < 0 or k >= len(seed) for k in free):
        raise InvalidInputError(f"free indices must lie in [0, {len(seed)})")
    f, stats = _objective_fn(d, resource, xi, objective, postselect, p_weight, nodes, initial)
    f0 = f(seed)
    x = seed.copy()
    for _ in range(sweeps):
        prev = x.copy()
        for k in free:
            if scan:
                x = _scan_coordinate(f, x, k, grid_points)
            else:
                def g(t, k=k):
                    y = x.copy()
                    y[k] = t
                    return -f(y)
                r = minimize_scalar(g, bracket=(x[k] - 0.05, x[k] + 0.05))
                if -r.fun > f(x):
                    x[k] = r.x
        if np.allclose(prev, x, atol=1e-9):
            break

    def embed(z):
        y = x.copy()
        y[free] = z
        return y

    if free:
        polish = minimize(lambda z: -f(embed(z)), x[free], method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if -polish.fun > f(x):
            x = embed(polish.x)
    if f(x) < f0:
        x = seed
    return OptimizationResult(tuple(float(v) for v in x), stats(x), float(f(x)),
                              tuple(float(v) for v in seed), float(f0))


# --- deterministic d = 3 preparation search ---------------------------------


@dataclass(frozen=True)
class PreparationSearch:
    phi: float
    xi_unit: float
    spectrum: tuple
    residual: float


def d3_cluster_spectrum_residual(phi: float, xi: float) -> tuple[float, np.ndarray]:
    """Worst deviation of any leaf's Schmidt spectrum from ``(2/3, 1/3, 0)``.

    One cluster-resource round at equal phases from ``|+3>|+3>``.
    """
    target = np.array([2 / 3, 1 / 3, 0.0])
    leaves = outcome_tree(plus_state(3), [IterationSpec(TwoQubitResource.cluster(), phi)],
                          _nodes(3, xi))
    worst, spec = 0.0, None
    for lf in leaves:
        chi = schmidt_spectrum(lf.state.psi)
        dev = float(np.abs(chi - target).max())
        if spec is None or dev > worst:
            worst, spec = dev, chi
    return worst, spec


def search_d3_cluster_preparation(phi_guess: float = 1.7125, width: float = 0.05) -> PreparationSearch:
    """Find a phase and ``xi`` with ``xi * phi = pi`` giving spectrum ``(2/3, 1/3, 0)``.

    Only ``xi phi`` modulo ``2 pi`` enters, so every integer multiple of the
    returned ``xi_unit`` works as well.
    """
    def cost(phi):
        return d3_cluster_spectrum_residual(phi, math.pi / phi)[0]

    res = minimize_scalar(cost, bounds=(phi_guess - width, phi_guess + width), method="bounded",
                          options={"xatol": 1e-12})
    phi = float(res.x)
    worst, chi = d3_cluster_spectrum_residual(phi, math.pi / phi)
    return PreparationSearch(phi, math.pi / phi, tuple(float(c) for c in chi), worst)
