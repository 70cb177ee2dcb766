"""Photonic entangling of the electron qubits and multi-node qudit chains."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .gates import IterationSpec, NodeParams, PRUNE_TOL, transfer_diagonals, unitary_diagonal
from .kernel import InvalidInputError
from .schemes import power_of_two_phase_set
from .states import TwoQubitResource, plus_vector

# beam splitter acting on the one-photon mode amplitudes (channel 1, channel 2);
# the minus sign sits on the channel-1 to channel-2 transmission
_B = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2)
BS_IN = _B.T
BS_OUT = _B
# amplitude picked up on reflection from a cavity whose qubit is |0>
REFLECT_PHASE = -1.0

MAX_AMPLITUDES = 65536


@dataclass(frozen=True, eq=False)
class InterferometerState:
    """Amplitudes ``amp[ph1, ph2, e_a, e_b]`` plus the probability lost to the sink."""

    amplitudes: np.ndarray
    sink: float = 0.0

    @property
    def total_probability(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2)) + self.sink

    def component(self, ph1: int, ph2: int) -> np.ndarray:
        return self.amplitudes[ph1, ph2]


def _qubit(sign: str) -> np.ndarray:
    if sign not in ("+", "-"):
        raise InvalidInputError(f"qubit sign must be '+' or '-', got {sign!r}")
    return np.array([1.0, 1.0 if sign == "+" else -1.0]) / np.sqrt(2)


def _beam_splitter(st: InterferometerState, b: np.ndarray) -> InterferometerState:
    # one photon: only (1,0) and (0,1) are populated
    modes = np.stack([st.amplitudes[1, 0], st.amplitudes[0, 1]])
    out = np.tensordot(b, modes, axes=1)
    amp = np.zeros_like(st.amplitudes)
    amp[1, 0], amp[0, 1] = out[0], out[1]
    return InterferometerState(amp, st.sink)


def _cavities(st: InterferometerState) -> InterferometerState:
    amp = st.amplitudes.copy()
    # channel 1 meets node a, channel 2 meets node b; qubit 1 scatters the photon away
    lost = np.sum(np.abs(amp[1, 0, 1, :]) ** 2) + np.sum(np.abs(amp[0, 1, :, 1]) ** 2)
    amp[1, 0, 1, :] = 0
    amp[0, 1, :, 1] = 0
    amp[1, 0] *= REFLECT_PHASE
    amp[0, 1] *= REFLECT_PHASE
    return InterferometerState(amp, st.sink + float(lost))


@dataclass(frozen=True, eq=False)
class PhotonicResult:
    resource: TwoQubitResource
    success_probability: float
    bright_probability: float
    lost_probability: float
    stages: dict


def run_photonic(init_a: str = "+", init_b: str = "+") -> PhotonicResult:
    """Single-photon interference between two cavities with a click at the dark port.

    Returns the normalized projected qubit state and its probability.
    """
    amp = np.zeros((2, 2, 2, 2), dtype=complex)
    amp[1, 0] = np.outer(_qubit(init_a), _qubit(init_b))
    s0 = InterferometerState(amp)
    s1 = _beam_splitter(s0, BS_IN)
    s2 = _cavities(s1)
    s3 = _beam_splitter(s2, BS_OUT)
    dark = s3.component(0, 1)
    p = float(np.sum(np.abs(dark) ** 2))
    bright = float(np.sum(np.abs(s3.component(1, 0)) ** 2))
    res = TwoQubitResource(dark / np.sqrt(p), f"photonic({init_a},{init_b})")
    stages = {"initial": s0, "after_bs1": s1, "after_cavities": s2, "after_bs2": s3}
    return PhotonicResult(res, p, bright, s3.sink, stages)


def fidelity(res: TwoQubitResource, target: TwoQubitResource) -> float:
    return float(abs(np.vdot(target.phi, res.phi)) ** 2)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def resource_from_photonic(base: TwoQubitResource, drive: str = "none") -> TwoQubitResource:
    """Apply an optional local pulse to a photonically generated Psi state.

    ``"pi"`` flips qubit a and turns Psi into Phi; ``"pi_half"`` rotates
    qubit b about y by ``-pi/2`` and turns Psi+ into the cluster state.
    """
    phi = base.phi
    if drive == "none":
        out = phi
    elif drive == "pi":
        out = np.array([[0, 1], [1, 0]]) @ phi
    elif drive == "pi_half":
        out = phi @ _ry(-np.pi / 2).T
    else:
        raise InvalidInputError(f"drive must be 'none', 'pi' or 'pi_half', got {drive!r}")
    return TwoQubitResource(out, f"{base.name}+{drive}")


# --- multi-node chains -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MultiQuditState:
    """Pure state of ``M`` qudits of dimension ``d`` as a ``(d,) * M`` tensor."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim < 1 or len(set(a.shape)) != 1:
            raise InvalidInputError("amplitudes must have shape (d,) * M")
        if a.size > MAX_AMPLITUDES:
            raise InvalidInputError(f"state has {a.size} amplitudes, capacity is {MAX_AMPLITUDES}")
        if not np.all(np.isfinite(a)):
            raise InvalidInputError("amplitudes contain NaN or Inf")
        n2 = float(np.vdot(a, a).real)
        if not 0 < n2 <= 1 + 1e-9:
            raise InvalidInputError(f"squared norm must lie in (0, 1], got {n2:.3e}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def M(self) -> int:
        return self.amplitudes.ndim

    @property
    def d(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @classmethod
    def plus(cls, M: int, d: int) -> "MultiQuditState":
        if d**M > MAX_AMPLITUDES:
            raise InvalidInputError(f"d^M = {d**M} exceeds capacity {MAX_AMPLITUDES}")
        v = plus_vector(d)
        t = v
        for _ in range(M - 1):
            t = np.multiply.outer(t, v)
        return cls(t)

    @classmethod
    def ghz(cls, M: int, d: int) -> "MultiQuditState":
        if d**M > MAX_AMPLITUDES:
            raise InvalidInputError(f"d^M = {d**M} exceeds capacity {MAX_AMPLITUDES}")
        t = np.zeros((d,) * M, dtype=complex)
        for i in range(d):
            t[(i,) * M] = 1 / np.sqrt(d)
        return cls(t)


@dataclass(frozen=True, eq=False)
class MultiLeaf:
    record: tuple
    probability: float
    state: MultiQuditState


def _pair_factor(d: int, M: int, pair, spec: IterationSpec, nodes, outcome) -> np.ndarray:
    k, kp = pair
    na = nodes[k] if isinstance(nodes, Sequence) else nodes
    nb = nodes[kp] if isinstance(nodes, Sequence) else nodes
    da = [unitary_diagonal(na, j, spec.phi_a) for j in (0, 1)]
    db = [unitary_diagonal(nb, j, spec.phi_b) for j in (0, 1)]
    t = transfer_diagonals(spec.resource, da, db, *outcome)
    shape = [1] * M
    shape[k] = d
    shape[kp] = d
    if k < kp:
        return t.reshape(shape)
    return t.T.reshape(shape)


def _check_pair(state: MultiQuditState, pair) -> tuple[int, int]:
    k, kp = (int(x) for x in pair)
    if k == kp or not (0 <= k < state.M and 0 <= kp < state.M):
        raise InvalidInputError(f"pair {pair} invalid for {state.M} nodes")
    return k, kp


def apply_pair_iteration(state: MultiQuditState, pair, spec: IterationSpec,
                         nodes: NodeParams | Sequence[NodeParams] | None = None) -> list[MultiLeaf]:
    """One transfer iteration between nodes ``pair = (K, K')``; identity elsewhere.

    ``spec.phi_a`` acts on node ``K`` and ``spec.phi_b`` on ``K'``. Leaf
    probabilities are the conditional outcome probabilities.
    """
    k, kp = _check_pair(state, pair)
    nodes = NodeParams(state.d) if nodes is None else nodes
    leaves = []
    for o in spec.kept_outcomes:
        br = state.amplitudes * _pair_factor(state.d, state.M, (k, kp), spec, nodes, o)
        q = float(np.vdot(br, br).real) / state.norm2
        if q <= PRUNE_TOL:
            continue
        leaves.append(MultiLeaf((o,), q, MultiQuditState(br / np.sqrt(q * state.norm2))))
    return leaves


def chain_tree(initial: MultiQuditState, steps, nodes=None) -> list[MultiLeaf]:
    """Run ``steps``, a sequence of ``(pair, IterationSpec)``, and return all leaves.

    Leaf probabilities are absolute; they add up to the success probability.
    """
    leaves = [MultiLeaf((), 1.0, initial)]
    for pair, spec in steps:
        nxt = []
        for lf in leaves:
            for child in apply_pair_iteration(lf.state, pair, spec, nodes):
                nxt.append(MultiLeaf(lf.record + ((tuple(pair),) + child.record),
                                     lf.probability * child.probability, child.state))
        leaves = nxt
    return leaves


def ghz_fidelity(state: MultiQuditState) -> float:
    """``|<GHZ|psi>|^2`` for a normalized state; insensitive to a global phase."""
    if abs(state.norm2 - 1) > 1e-9:
        raise InvalidInputError("ghz_fidelity needs a normalized state")
    g = MultiQuditState.ghz(state.M, state.d)
    return float(abs(np.vdot(g.amplitudes, state.amplitudes)) ** 2)


def ghz_chain_steps(M: int, d: int, resource: TwoQubitResource | None = None,
                    postselect="equal", order=None) -> list:
    """Power-of-two phase set applied to neighbouring pairs ``(0,1), (1,2), ...``."""
    resource = TwoQubitResource.psi_plus() if resource is None else resource
    pairs = [(i, i + 1) for i in range(M - 1)] if order is None else list(order)
    return [(p, IterationSpec(resource, phi, None, postselect))
            for p in pairs for phi in power_of_two_phase_set(d)]
