"""
Prediction service

Context processes (how nature picks Z_t), per-player context predictors (how
each player guesses it) and the mistake ledger that counts mispredictions.

Noisy and random predictors draw from counter-based streams keyed by
(seed, player, round), so a prediction never depends on execution order.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..models.config import ContextProcessConfig, PredictorConfig
from ..utils import random_streams
from ..utils.errors import ConfigurationError, InvalidParameterError, LedgerConflictError
from ..utils.validators import validate_index, validate_positive_int, validate_transition_matrix

logger = logging.getLogger(__name__)


# ==================== Context processes ====================

def context_sequence(
    config: ContextProcessConfig,
    num_contexts: int,
    horizon: int,
    seed: int = 0,
) -> np.ndarray:
    """
    Realized contexts Z_0..Z_{T-1}

    Args:
        config: Context process settings
        num_contexts: m
        horizon: T
        seed: Run seed, mixed with the process seed for markov chains

    Returns:
        int64 array of length T

    Raises:
        ConfigurationError: process settings inconsistent with m or T
    """
    horizon = validate_positive_int(horizon, "horizon")
    if config.kind == "cycle":
        order = list(config.order) if config.order else list(range(num_contexts))
        _check_contexts(order, num_contexts, "context_process.order")
        return np.resize(np.asarray(order, dtype=np.int64), horizon)

    if config.kind == "script":
        if len(config.sequence) < horizon:
            raise ConfigurationError(
                f"context_process.sequence has {len(config.sequence)} entries, horizon is {horizon}"
            )
        _check_contexts(config.sequence[:horizon], num_contexts, "context_process.sequence")
        return np.asarray(config.sequence[:horizon], dtype=np.int64)

    try:
        transition = validate_transition_matrix(config.transition, num_contexts)
    except InvalidParameterError as e:
        raise ConfigurationError(f"context_process.transition: {e.message}")
    if config.initial >= num_contexts:
        raise ConfigurationError(f"context_process.initial={config.initial} but m={num_contexts}")
    stream_seed = random_streams.derive_seed(seed, config.seed)
    cumulative = np.cumsum(transition, axis=1)
    sequence = np.empty(horizon, dtype=np.int64)
    sequence[0] = config.initial
    for t in range(1, horizon):
        u = random_streams.stream(stream_seed, random_streams.CONTEXT_TAG, t).random()
        row = cumulative[sequence[t - 1]]
        sequence[t] = min(int(np.searchsorted(row, u, side="right")), num_contexts - 1)
    return sequence


def _check_contexts(values: Sequence[int], num_contexts: int, field: str) -> None:
    bad = [v for v in values if not 0 <= v < num_contexts]
    if bad:
        raise ConfigurationError(f"{field} contains {bad[0]}, contexts are 0..{num_contexts - 1}")


# ==================== Predictors ====================

def validate_predictor(config: PredictorConfig, num_contexts: int, horizon: int, field: str = "predictors") -> None:
    """
    Check a predictor against the game and horizon

    Raises:
        ConfigurationError: noisy with p > 0 and m = 1, or a short or
            out-of-range script
    """
    if config.kind == "noisy" and config.p > 0 and num_contexts < 2:
        raise ConfigurationError(
            f"{field}: noisy prediction with p={config.p} needs at least two contexts",
            suggestion="Use p=0 or the oracle predictor for single-context games"
        )
    if config.kind == "scripted":
        if len(config.sequence) < horizon:
            raise ConfigurationError(
                f"{field}.sequence has {len(config.sequence)} entries, horizon is {horizon}"
            )
        _check_contexts(config.sequence[:horizon], num_contexts, f"{field}.sequence")


class ContextPredictor:
    """
    One predictor configuration bound to a game size and a stream seed

    The realized context is consulted only by the oracle and noisy kinds;
    majority and scripted are functions of the history prefix alone.
    """

    def __init__(self, config: PredictorConfig, num_contexts: int, seed: int = 0, shared_stream: bool = False):
        self.config = config
        self.num_contexts = validate_positive_int(num_contexts, "num_contexts")
        self.stream_seed = random_streams.derive_seed(seed, config.seed)
        self.shared_stream = shared_stream
        if config.kind == "noisy" and config.p > 0 and num_contexts < 2:
            raise ConfigurationError(f"noisy prediction with p={config.p} needs at least two contexts")

    def _stream(self, tag: int, player: int, round_index: int) -> np.random.Generator:
        return random_streams.stream(
            self.stream_seed, tag, round_index, 0 if self.shared_stream else player
        )

    def predict(self, player: int, round_index: int, realized_context: int, history: Optional[Sequence[int]] = None) -> int:
        """
        Predicted context for one player and round

        Args:
            player: Player index
            round_index: 0-based round
            realized_context: Z_t (read by oracle and noisy only)
            history: Z_0..Z_{t-1}

        Returns:
            Context index
        """
        kind = self.config.kind
        if kind == "oracle":
            return int(realized_context)

        if kind == "noisy":
            rng = self._stream(random_streams.NOISE_TAG, player, round_index)
            if rng.random() >= self.config.p:
                return int(realized_context)
            other = int(rng.integers(self.num_contexts - 1))
            return other if other < realized_context else other + 1

        if kind == "scripted":
            return int(self.config.sequence[round_index])

        if kind == "random":
            rng = self._stream(random_streams.RANDOM_PREDICTION_TAG, player, round_index)
            return int(rng.integers(self.num_contexts))

        # majority: argmax breaks ties to the lowest index, empty history -> 0
        if history is None or len(history) == 0:
            return 0
        counts = np.bincount(np.asarray(history, dtype=np.int64), minlength=self.num_contexts)
        return int(np.argmax(counts))


def predict(
    config: PredictorConfig,
    player: int,
    round_index: int,
    realized_context: int,
    history: Optional[Sequence[int]],
    num_contexts: int,
    seed: int = 0,
) -> int:
    """Functional form of ContextPredictor.predict"""
    return ContextPredictor(config, num_contexts, seed).predict(player, round_index, realized_context, history)


# ==================== Mistake ledger ====================

class MistakeLedger:
    """
    Misprediction flags for a T x J run

    Each (round, player) cell is written exactly once.
    """

    def __init__(self, horizon: int, num_players: int):
        self.horizon = validate_positive_int(horizon, "horizon")
        self.num_players = validate_positive_int(num_players, "num_players")
        # -1 marks an unwritten cell
        self._flags = np.full((self.horizon, self.num_players), -1, dtype=np.int8)
        self.per_player_mistakes = np.zeros(self.num_players, dtype=np.int64)

    def record_and_count(self, round_index: int, player: int, predicted: int, realized: int) -> bool:
        """
        Record one prediction outcome

        Returns:
            True if the prediction was wrong

        Raises:
            InvalidParameterError: round or player out of range
            LedgerConflictError: cell already written
        """
        round_index = validate_index(round_index, self.horizon, "round")
        player = validate_index(player, self.num_players, "player")
        if self._flags[round_index, player] != -1:
            raise LedgerConflictError(round_index, player)
        mistake = int(predicted) != int(realized)
        self._flags[round_index, player] = int(mistake)
        self.per_player_mistakes[player] += int(mistake)
        return mistake

    @property
    def per_round_flags(self) -> np.ndarray:
        """T x J booleans; unwritten cells read as False"""
        return self._flags == 1

    @property
    def complete(self) -> bool:
        return bool(np.all(self._flags >= 0))
