"""
Game model types

A latent-context bilinear game: player j pays <phi^j(a), z> for joint action a
under context z. Joint actions are indexed lexicographically with player 0 as
the most significant digit, so features[j] reshaped to (K,)*J + (d,) is indexed
by the joint action tuple directly.
"""

from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from ..utils.errors import AssumptionViolationError, InvalidParameterError
from ..utils.validators import SIMPLEX_TOLERANCE, validate_loss_entries, validate_positive_int

ASSUMPTION_TOLERANCE = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GameSpec:
    """Static game definition"""

    num_players: int
    actions_per_player: int
    feature_dim: int
    features: np.ndarray  # (J, K**J, d)
    contexts: np.ndarray  # (m, d)

    def __post_init__(self):
        validate_positive_int(self.num_players, "num_players", minimum=2)
        validate_positive_int(self.actions_per_player, "actions_per_player", minimum=2)
        validate_positive_int(self.feature_dim, "feature_dim", minimum=1)

        features = np.asarray(self.features, dtype=np.float64)
        contexts = np.asarray(self.contexts, dtype=np.float64)
        expected = (self.num_players, self.num_joint_actions, self.feature_dim)
        if features.shape != expected:
            raise InvalidParameterError(f"features must have shape {expected}, got {features.shape}")
        if contexts.ndim != 2 or contexts.shape[0] < 1 or contexts.shape[1] != self.feature_dim:
            raise InvalidParameterError(
                f"contexts must have shape (m>=1, {self.feature_dim}), got {contexts.shape}"
            )
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(contexts))):
            raise InvalidParameterError("features and contexts must be finite")

        # (J, K**J, m) table of every cost the game can produce
        costs = features @ contexts.T
        violations = np.argwhere(np.abs(costs) > 1.0 + ASSUMPTION_TOLERANCE)
        if violations.size:
            player, flat_action, context = (int(v) for v in violations[0])
            raise AssumptionViolationError(
                player=player,
                joint_action=self.joint_action(flat_action),
                context=context,
                value=float(costs[player, flat_action, context]),
            )

        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "contexts", _frozen(contexts))

    @property
    def num_joint_actions(self) -> int:
        return self.actions_per_player ** self.num_players

    @property
    def num_contexts(self) -> int:
        return int(self.contexts.shape[0])

    def joint_action(self, flat_index: int) -> Tuple[int, ...]:
        """Joint action tuple for a lexicographic flat index"""
        shape = (self.actions_per_player,) * self.num_players
        return tuple(int(a) for a in np.unravel_index(flat_index, shape))

    def flat_index(self, joint_action: Sequence[int]) -> int:
        """Lexicographic flat index of a joint action tuple"""
        shape = (self.actions_per_player,) * self.num_players
        return int(np.ravel_multi_index(tuple(joint_action), shape))

    def feature_tensor(self, player: int) -> np.ndarray:
        """features[player] viewed as a (K,)*J + (d,) tensor"""
        shape = (self.actions_per_player,) * self.num_players + (self.feature_dim,)
        return self.features[player].reshape(shape)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GameSpec):
            return NotImplemented
        return (
            self.num_players == other.num_players
            and self.actions_per_player == other.actions_per_player
            and self.feature_dim == other.feature_dim
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.contexts, other.contexts)
        )

    __hash__ = None


@dataclass(frozen=True)
class MixedStrategy:
    """Probability vector over one player's actions"""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 1:
            raise InvalidParameterError(f"probs must be a non-empty vector, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidParameterError(f"probs must be finite and non-negative: {probs.tolist()}")
        total = float(probs.sum())
        if abs(total - 1.0) > SIMPLEX_TOLERANCE:
            raise InvalidParameterError(
                f"probs sum to {total!r}, expected 1 within {SIMPLEX_TOLERANCE}"
            )
        if total != 1.0:
            probs = probs / total
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def uniform(cls, num_actions: int) -> "MixedStrategy":
        return cls(np.full(num_actions, 1.0 / num_actions))

    @classmethod
    def pure(cls, num_actions: int, action: int) -> "MixedStrategy":
        probs = np.zeros(num_actions)
        probs[action] = 1.0
        return cls(probs)

    @property
    def num_actions(self) -> int:
        return int(self.probs.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedStrategy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True)
class JointProfile:
    """Independent mixed play w^1 x ... x w^J"""

    strategies: Tuple[MixedStrategy, ...]

    def __post_init__(self):
        strategies = tuple(self.strategies)
        if not strategies:
            raise InvalidParameterError("a joint profile needs at least one strategy")
        if any(not isinstance(s, MixedStrategy) for s in strategies):
            raise InvalidParameterError("every profile entry must be a MixedStrategy")
        object.__setattr__(self, "strategies", strategies)

    def __len__(self) -> int:
        return len(self.strategies)

    def __iter__(self) -> Iterator[MixedStrategy]:
        return iter(self.strategies)

    def __getitem__(self, player: int) -> MixedStrategy:
        return self.strategies[player]

    def without(self, player: int) -> Tuple[MixedStrategy, ...]:
        """Opponent strategies in player order"""
        return self.strategies[:player] + self.strategies[player + 1:]


@dataclass(frozen=True)
class LossVector:
    """Per-action loss vector with entries in [-1, 1]"""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(validate_loss_entries(self.values)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LossVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None
