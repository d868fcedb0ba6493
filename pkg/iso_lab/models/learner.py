"""
Learner state types

One optimistic Hedge state per (player, context). The bank is immutable: an
update builds a new bank that shares every untouched state object with the old
one.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..utils.errors import InvalidParameterError
from ..utils.validators import LOSS_TOLERANCE, validate_eta


@dataclass(frozen=True)
class ContextLearnerState:
    """Sufficient statistic of one context's optimistic Hedge learner"""

    cumulative_loss: np.ndarray
    optimism_hint: np.ndarray
    updates_applied: int = 0

    def __post_init__(self):
        cumulative = np.array(self.cumulative_loss, dtype=np.float64, copy=True)
        hint = np.array(self.optimism_hint, dtype=np.float64, copy=True)
        if cumulative.ndim != 1 or cumulative.shape != hint.shape:
            raise InvalidParameterError("cumulative_loss and optimism_hint must be vectors of equal length")
        if self.updates_applied < 0:
            raise InvalidParameterError("updates_applied must be non-negative")
        if not (np.all(np.isfinite(cumulative)) and np.all(np.isfinite(hint))):
            raise InvalidParameterError("learner state must be finite")
        if np.any(np.abs(hint) > 1.0 + LOSS_TOLERANCE):
            raise InvalidParameterError(
                "optimism_hint must lie in [-1, 1]",
                suggestion="the hint is the last loss vector, whose entries are bounded by 1",
            )
        # each update adds a loss in [-1, 1]; the slack covers the loss tolerance and rounding
        if np.any(np.abs(cumulative) > self.updates_applied * (1.0 + 2 * LOSS_TOLERANCE)):
            raise InvalidParameterError(
                f"cumulative_loss exceeds updates_applied={self.updates_applied} in magnitude"
            )
        cumulative.setflags(write=False)
        hint.setflags(write=False)
        object.__setattr__(self, "cumulative_loss", cumulative)
        object.__setattr__(self, "optimism_hint", hint)

    @classmethod
    def fresh(cls, num_actions: int) -> "ContextLearnerState":
        return cls(np.zeros(num_actions), np.zeros(num_actions), 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContextLearnerState):
            return NotImplemented
        return (
            self.updates_applied == other.updates_applied
            and np.array_equal(self.cumulative_loss, other.cumulative_loss)
            and np.array_equal(self.optimism_hint, other.optimism_hint)
        )


@dataclass(frozen=True)
class LearnerBank:
    """J x m matrix of context learners sharing one step size"""

    states: Tuple[Tuple[ContextLearnerState, ...], ...]
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", validate_eta(self.eta))
        states = tuple(tuple(row) for row in self.states)
        if not states or not states[0]:
            raise InvalidParameterError("a learner bank needs at least one player and one context")
        widths = {len(row) for row in states}
        if len(widths) != 1:
            raise InvalidParameterError("every player must hold the same number of context learners")
        object.__setattr__(self, "states", states)

    @property
    def num_players(self) -> int:
        return len(self.states)

    @property
    def num_contexts(self) -> int:
        return len(self.states[0])

    def state(self, player: int, context: int) -> ContextLearnerState:
        return self.states[player][context]
