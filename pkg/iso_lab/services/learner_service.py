"""
Learner service

Per-context optimistic Hedge learners and the ISO-GRPO round: every player
plays from the learner of its predicted context and updates the learner of the
realized context. All other learners are left untouched.

A learner stores cumulative loss L and hint m (the last loss seen in the same
context) and plays softmax(-eta * (L + m)).
"""

import logging
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import numpy as np
import yaml
from scipy.special import softmax

from ..models.game import GameSpec, JointProfile, LossVector, MixedStrategy
from ..models.learner import ContextLearnerState, LearnerBank
from ..utils.errors import FileParseError, InvalidParameterError
from ..utils.validators import validate_index, validate_loss_entries, validate_positive_int
from . import game_service

logger = logging.getLogger(__name__)

SNAPSHOT_VERSION = 1


def new_bank(num_players: int, num_contexts: int, num_actions: int, eta: float) -> LearnerBank:
    """Bank of fresh learners: zero cumulative loss, zero hint"""
    num_players = validate_positive_int(num_players, "num_players")
    num_contexts = validate_positive_int(num_contexts, "num_contexts")
    num_actions = validate_positive_int(num_actions, "num_actions", minimum=2)
    fresh = ContextLearnerState.fresh(num_actions)
    states = tuple(tuple(fresh for _ in range(num_contexts)) for _ in range(num_players))
    return LearnerBank(states=states, eta=eta)


def hedge_distribution(state: ContextLearnerState, eta: float) -> MixedStrategy:
    """Optimistic Hedge play of a single learner state"""
    # softmax subtracts the max logit before exponentiating
    logits = -eta * (state.cumulative_loss + state.optimism_hint)
    return MixedStrategy(softmax(logits))


def current_distribution(bank: LearnerBank, player: int, context: int) -> MixedStrategy:
    """
    Distribution the (player, context) learner would play now

    Raises:
        InvalidParameterError: index out of range
    """
    player = validate_index(player, bank.num_players, "player")
    context = validate_index(context, bank.num_contexts, "context")
    return hedge_distribution(bank.states[player][context], bank.eta)


def apply_update(bank: LearnerBank, player: int, realized_context: int, loss: LossVector) -> LearnerBank:
    """
    Feed one loss vector to the (player, realized_context) learner

    The cumulative loss grows by the loss and the hint becomes the loss. The
    returned bank shares every other state object with the input bank.

    Raises:
        InvalidParameterError: index out of range or loss entry outside [-1, 1]
    """
    player = validate_index(player, bank.num_players, "player")
    realized_context = validate_index(realized_context, bank.num_contexts, "realized_context")
    values = loss.values if isinstance(loss, LossVector) else validate_loss_entries(loss)

    state = bank.states[player][realized_context]
    if values.shape != state.cumulative_loss.shape:
        raise InvalidParameterError(
            f"loss has {values.size} entries, learner has {state.cumulative_loss.size} actions"
        )
    updated = ContextLearnerState(
        cumulative_loss=state.cumulative_loss + values,
        optimism_hint=values,
        updates_applied=state.updates_applied + 1,
    )
    row = bank.states[player]
    new_row = row[:realized_context] + (updated,) + row[realized_context + 1:]
    states = bank.states[:player] + (new_row,) + bank.states[player + 1:]
    return LearnerBank(states=states, eta=bank.eta)


def iso_grpo_round(
    bank: LearnerBank,
    predictions: Sequence[int],
    realized_context: int,
    spec: GameSpec,
) -> Tuple[JointProfile, Tuple[LossVector, ...], LearnerBank]:
    """
    One simultaneous round of ISO-GRPO

    Args:
        bank: Learners before the round
        predictions: Predicted context of every player
        realized_context: Context nature selected
        spec: Game definition

    Returns:
        (profile played, loss vector of every player, bank after the round)
    """
    if len(predictions) != spec.num_players or bank.num_players != spec.num_players:
        raise InvalidParameterError(
            f"expected {spec.num_players} predictions and players, "
            f"got {len(predictions)} predictions for a bank of {bank.num_players}"
        )
    profile = JointProfile(tuple(
        current_distribution(bank, player, predicted)
        for player, predicted in enumerate(predictions)
    ))
    losses = game_service.loss_vectors_for_profile(spec, profile, realized_context)
    for player, loss in enumerate(losses):
        bank = apply_update(bank, player, realized_context, loss)
    return profile, losses, bank


def pooled_round(
    bank: LearnerBank,
    realized_context: int,
    spec: GameSpec,
) -> Tuple[JointProfile, Tuple[LossVector, ...], LearnerBank]:
    """
    One round of a context-blind baseline

    Every player holds a single learner (slot 0) that plays and absorbs every
    loss regardless of context.
    """
    if bank.num_contexts != 1:
        raise InvalidParameterError("pooled play needs a bank with a single context slot")
    profile = JointProfile(tuple(
        current_distribution(bank, player, 0) for player in range(spec.num_players)
    ))
    losses = game_service.loss_vectors_for_profile(spec, profile, realized_context)
    for player, loss in enumerate(losses):
        bank = apply_update(bank, player, 0, loss)
    return profile, losses, bank


# ==================== Snapshots ====================

def bank_to_snapshot(bank: LearnerBank) -> Dict:
    """Plain-data snapshot of a bank (floats kept at full precision)"""
    return {
        "snapshot_version": SNAPSHOT_VERSION,
        "eta": float(bank.eta),
        "players": [
            {
                "player": player,
                "contexts": [
                    {
                        "context": context,
                        "cumulative_loss": [float(v) for v in state.cumulative_loss],
                        "optimism_hint": [float(v) for v in state.optimism_hint],
                        "updates_applied": int(state.updates_applied),
                    }
                    for context, state in enumerate(row)
                ],
            }
            for player, row in enumerate(bank.states)
        ],
    }


def bank_from_snapshot(snapshot: Dict) -> LearnerBank:
    """
    Rebuild a bank from bank_to_snapshot output

    Raises:
        InvalidParameterError: malformed snapshot
    """
    try:
        if snapshot.get("snapshot_version") != SNAPSHOT_VERSION:
            raise InvalidParameterError(
                f"unsupported snapshot_version {snapshot.get('snapshot_version')!r}"
            )
        rows = []
        for player_entry in sorted(snapshot["players"], key=lambda p: p["player"]):
            contexts = sorted(player_entry["contexts"], key=lambda c: c["context"])
            rows.append(tuple(
                ContextLearnerState(
                    cumulative_loss=np.asarray(c["cumulative_loss"], dtype=np.float64),
                    optimism_hint=np.asarray(c["optimism_hint"], dtype=np.float64),
                    updates_applied=int(c["updates_applied"]),
                )
                for c in contexts
            ))
        return LearnerBank(states=tuple(rows), eta=float(snapshot["eta"]))
    except (KeyError, TypeError, AttributeError) as e:
        raise InvalidParameterError(f"malformed bank snapshot: {e}")


def save_bank(bank: LearnerBank, path: Union[str, Path]) -> None:
    """Write a YAML snapshot of the bank"""
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(bank_to_snapshot(bank), f, sort_keys=False)
    logger.debug("bank snapshot written to %s", path)


def load_bank(path: Union[str, Path]) -> LearnerBank:
    """
    Read a YAML bank snapshot

    Raises:
        FileParseError: unreadable YAML
        InvalidParameterError: malformed snapshot
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            snapshot = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise FileParseError(str(path), str(e))
    if not isinstance(snapshot, dict):
        raise FileParseError(str(path), "snapshot is not a mapping")
    return bank_from_snapshot(snapshot)
