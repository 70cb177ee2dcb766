"""Conditional phase gates of a node and the effective entanglement-transfer gate.

One transfer iteration entangles the two electron qubits in a resource
state, lets each electron imprint a conditional phase on its nuclear qudit,
then measures both electrons in the X basis. Tracing out the electrons
leaves the nuclear pair in one of four (unnormalized) branch states.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .kernel import InvalidInputError, as_cmatrix, kron
from .states import TwoQuditState, TwoQubitResource, entanglement

# eta[j, j'] = -1 only for j = 0, j' = 1
ETA = np.array([[1.0, -1.0], [1.0, 1.0]])
OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))
# branches with conditional probability at or below this are dropped
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class NodeParams:
    """Model of one node.

    Parameters
    ----------
    d : int
        Qudit dimension.
    xi : float
        Electron splitting over the net Ising coupling.
    correction : tuple of two arrays, optional
        Diagonal corrections ``(h0, h1)`` to the conditional Hamiltonians,
        in units of the net Ising coupling. ``None`` means the ideal model.
    """

    d: int
    xi: float = 0.0
    correction: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise InvalidInputError(f"qudit dimension must be an integer >= 2, got {self.d}")
        if not np.isfinite(self.xi):
            raise InvalidInputError("xi must be finite")
        if self.correction is not None:
            h0, h1 = (np.asarray(h, dtype=float).reshape(-1) for h in self.correction)
            if h0.shape != (self.d,) or h1.shape != (self.d,):
                raise InvalidInputError("correction diagonals must have length d")
            object.__setattr__(self, "correction", (h0, h1))

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers ``I, I-1, ..., -I`` in basis order."""
        return (self.d - 1) / 2 - np.arange(self.d)


def unitary_diagonal(node: NodeParams, j: int, phi: float) -> np.ndarray:
    sign = 1.0 if j == 0 else -1.0
    h = sign * (node.m_values + node.xi) / 2
    if node.correction is not None:
        h = h + node.correction[j]
    return np.exp(-1j * phi * h)


def conditional_unitary(node: NodeParams, j: int, phi: float) -> np.ndarray:
    """Nuclear evolution conditioned on electron qubit value ``j``.

    Returns the diagonal ``d x d`` matrix with entries
    ``exp(-i (-1)^j phi (m + xi) / 2)``.
    """
    if j not in (0, 1):
        raise InvalidInputError(f"qubit value must be 0 or 1, got {j}")
    return np.diag(unitary_diagonal(node, j, float(phi)))


def transfer_gate(res: TwoQubitResource, ua0, ua1, ub0, ub1, j_a: int, j_b: int) -> np.ndarray:
    """Effective gate ``T_{ja jb}`` on the two-qudit space.

    ``T = 1/2 sum_{j'a j'b} eta[ja, j'a] eta[jb, j'b] c[j'a, j'b] U_{a,j'a} (x) U_{b,j'b}``.
    It is not unitary in general.
    """
    ua = (as_cmatrix(ua0, "Ua0"), as_cmatrix(ua1, "Ua1"))
    ub = (as_cmatrix(ub0, "Ub0"), as_cmatrix(ub1, "Ub1"))
    for group, label in ((ua, "a"), (ub, "b")):
        if group[0].shape != group[1].shape or group[0].shape[0] != group[0].shape[1]:
            raise InvalidInputError(f"node {label} gates must be square with matching shapes")
    c = res.phi
    t = np.zeros((ua[0].shape[0] * ub[0].shape[0],) * 2, dtype=complex)
    for ja2, jb2 in OUTCOMES:
        w = ETA[j_a, ja2] * ETA[j_b, jb2] * c[ja2, jb2]
        if w != 0:
            t += w * kron(ua[ja2], ub[jb2])
    return t / 2


def transfer_diagonals(res: TwoQubitResource, da: Sequence, db: Sequence, j_a: int, j_b: int):
    """Diagonal of ``T_{ja jb}`` reshaped to ``d_a x d_b`` for diagonal gates.

    ``da`` and ``db`` are the pairs of diagonals ``(U_0, U_1)`` for each node.
    """
    c = res.phi
    out = 0
    for ja2, jb2 in OUTCOMES:
        w = ETA[j_a, ja2] * ETA[j_b, jb2] * c[ja2, jb2]
        if w != 0:
            out = out + w * np.outer(da[ja2], db[jb2])
    return np.asarray(out, dtype=complex) / 2


def _resolve_postselect(rule) -> frozenset:
    if rule is None or rule == "none":
        return frozenset(OUTCOMES)
    if rule == "equal":
        return frozenset({(0, 0), (1, 1)})
    if rule == "unequal":
        return frozenset({(0, 1), (1, 0)})
    if isinstance(rule, str):
        raise InvalidInputError(f"unknown postselection rule {rule!r}")
    keep = frozenset(tuple(int(x) for x in o) for o in rule)
    if not keep or not keep <= set(OUTCOMES):
        raise InvalidInputError(f"postselection set must be a non-empty subset of {OUTCOMES}")
    return keep


@dataclass(frozen=True)
class IterationSpec:
    """One transfer iteration.

    ``phi_b`` defaults to ``phi_a``. ``postselect`` is ``"none"``,
    ``"equal"`` (ja = jb), ``"unequal"`` or an explicit set of outcome pairs.
    """

    resource: TwoQubitResource
    phi_a: float
    phi_b: float | None = None
    postselect: object = "none"

    def __post_init__(self):
        if self.phi_b is None:
            object.__setattr__(self, "phi_b", self.phi_a)
        if not (np.isfinite(self.phi_a) and np.isfinite(self.phi_b)):
            raise InvalidInputError("phases must be finite")
        object.__setattr__(self, "phi_a", float(self.phi_a))
        object.__setattr__(self, "phi_b", float(self.phi_b))
        _resolve_postselect(self.postselect)

    @property
    def kept_outcomes(self) -> tuple:
        keep = _resolve_postselect(self.postselect)
        return tuple(o for o in OUTCOMES if o in keep)

    def with_phases(self, phi_a: float, phi_b: float | None = None) -> "IterationSpec":
        return IterationSpec(self.resource, phi_a, phi_b, self.postselect)


@dataclass(frozen=True, eq=False)
class OutcomeNode:
    """A leaf of the measurement-outcome tree.

    ``probability`` is the absolute probability of the whole record and
    ``state`` is normalized.
    """

    record: tuple
    probability: float
    state: TwoQuditState
    ebits: float


def _node_pair(nodes, d_a: int, d_b: int):
    if isinstance(nodes, NodeParams):
        nodes = (nodes, nodes)
    na, nb = nodes
    if (na.d, nb.d) != (d_a, d_b):
        raise InvalidInputError(
            f"node dimensions {(na.d, nb.d)} do not match the state shape {(d_a, d_b)}"
        )
    return na, nb


def branch_matrices(psi: np.ndarray, spec: IterationSpec, nodes) -> dict:
    """Unnormalized branch coefficient matrices for every kept outcome."""
    na, nb = _node_pair(nodes, *psi.shape)
    da = [unitary_diagonal(na, j, spec.phi_a) for j in (0, 1)]
    db = [unitary_diagonal(nb, j, spec.phi_b) for j in (0, 1)]
    return {
        o: transfer_diagonals(spec.resource, da, db, *o) * psi for o in spec.kept_outcomes
    }


def _expand(parent_record, parent_p, psi, spec, nodes) -> list[OutcomeNode]:
    leaves = []
    for o, branch in branch_matrices(psi, spec, nodes).items():
        q = float(np.vdot(branch, branch).real)
        if q <= PRUNE_TOL:
            continue
        st = TwoQuditState(branch / np.sqrt(q))
        leaves.append(OutcomeNode(parent_record + (o,), parent_p * q, st, entanglement(st)))
    return leaves


def apply_iteration(state: TwoQuditState, spec: IterationSpec, nodes) -> list[OutcomeNode]:
    """Apply one iteration; one leaf per kept outcome with nonzero probability.

    Leaf probabilities are those of the individual outcomes ``P_{ja jb}``.
    """
    if abs(state.norm2 - 1.0) > 1e-9:
        raise InvalidInputError("apply_iteration needs a normalized state")
    return _expand((), 1.0, state.psi, spec, nodes)


def outcome_tree(initial: TwoQuditState, scheme: Iterable[IterationSpec], nodes) -> list[OutcomeNode]:
    """Leaves after running every iteration of ``scheme`` from ``initial``.

    Leaves are in lexicographic order of their outcome records. Their
    probabilities add up to the overall postselection success probability.
    """
    if abs(initial.norm2 - 1.0) > 1e-9:
        raise InvalidInputError("outcome_tree needs a normalized initial state")
    leaves = [OutcomeNode((), 1.0, initial, entanglement(initial))]
    for spec in scheme:
        nxt = []
        for leaf in leaves:
            nxt.extend(_expand(leaf.record, leaf.probability, leaf.state.psi, spec, nodes))
        leaves = nxt
    return leaves
