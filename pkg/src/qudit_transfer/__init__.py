"""Simulation of entanglement accumulation between two or more memory qudits."""

from .kernel import InvalidInputError
from .states import TwoQuditState, TwoQubitResource, entanglement, plus_state, qudit_bell
from .gates import IterationSpec, NodeParams, OutcomeNode, apply_iteration, outcome_tree

__all__ = [
    "InvalidInputError",
    "IterationSpec",
    "NodeParams",
    "OutcomeNode",
    "TwoQuditState",
    "TwoQubitResource",
    "apply_iteration",
    "entanglement",
    "outcome_tree",
    "plus_state",
    "qudit_bell",
]

__version__ = "0.1.0"
