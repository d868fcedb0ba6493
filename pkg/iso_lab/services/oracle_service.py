"""
Oracle service

Brute-force re-derivations of game and metric quantities for small instances.
Nothing here calls game_service or metrics_service: the code reads raw feature
tables and traces with plain Python loops so disagreements point at real bugs.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..models.game import GameSpec, JointProfile
from ..models.trace import RoundRecord
from ..utils.errors import InvalidParameterError, LimitExceededError


@dataclass(frozen=True)
class SmallInstanceLimit:
    """Largest instance the oracles accept"""

    max_joint_actions: int = 4096
    max_rounds: int = 512


DEFAULT_LIMIT = SmallInstanceLimit()


def _check_rounds(trace: Sequence[RoundRecord], limit: SmallInstanceLimit) -> None:
    if not trace:
        raise InvalidParameterError("trace is empty")
    if len(trace) > limit.max_rounds:
        raise LimitExceededError(f"trace has {len(trace)} rounds, oracle limit is {limit.max_rounds}")


def brute_expected_cost(
    spec: GameSpec,
    player: int,
    profile: JointProfile,
    context: int,
    limit: SmallInstanceLimit = DEFAULT_LIMIT,
) -> float:
    """
    Expected cost by looping over every joint action

    Raises:
        LimitExceededError: more than limit.max_joint_actions joint actions
    """
    num_players = spec.num_players
    num_actions = spec.actions_per_player
    if num_actions ** num_players > limit.max_joint_actions:
        raise LimitExceededError(
            f"{num_actions ** num_players} joint actions exceed the oracle limit {limit.max_joint_actions}"
        )
    z = [float(v) for v in spec.contexts[context]]
    total = 0.0
    for joint in itertools.product(range(num_actions), repeat=num_players):
        weight = 1.0
        for j, action in enumerate(joint):
            weight *= float(profile.strategies[j].probs[action])
        flat = 0
        for action in joint:
            flat = flat * num_actions + action
        phi = spec.features[player][flat]
        cost = 0.0
        for i in range(spec.feature_dim):
            cost += float(phi[i]) * z[i]
        total += weight * cost
    return total


def _simplex_grid(num_actions: int, steps: int):
    # stars and bars: every composition of `steps` into num_actions parts
    for bars in itertools.combinations(range(steps + num_actions - 1), num_actions - 1):
        previous = -1
        parts = []
        for bar in bars:
            parts.append(bar - previous - 1)
            previous = bar
        parts.append(steps + num_actions - 1 - previous - 1)
        yield parts


def grid_comparator(
    trace: Sequence[RoundRecord],
    player: int,
    context: int,
    resolution: float,
    limit: SmallInstanceLimit = DEFAULT_LIMIT,
) -> Tuple[List[float], float]:
    """
    Minimise the summed in-context loss over a simplex grid

    Args:
        trace: Run trace
        player: Player index
        context: Realized context whose subsequence is used
        resolution: Grid spacing, at least 0.01

    Returns:
        (grid strategy, summed loss of that strategy)

    Raises:
        LimitExceededError: K > 4, resolution < 0.01, or trace too long
    """
    _check_rounds(trace, limit)
    num_actions = len(trace[0].losses[player].values)
    if num_actions > 4:
        raise LimitExceededError(f"grid comparator supports K <= 4, got {num_actions}")
    if resolution < 0.01:
        raise LimitExceededError(f"grid resolution {resolution} is finer than 0.01")

    summed = [0.0] * num_actions
    for record in trace:
        if record.realized_context != context:
            continue
        for k in range(num_actions):
            summed[k] += float(record.losses[player].values[k])

    steps = int(round(1.0 / resolution))
    grid = np.array(list(_simplex_grid(num_actions, steps)), dtype=np.float64) / steps
    values = grid @ np.array(summed)
    index = int(np.argmin(values))
    return grid[index].tolist(), float(values[index])


def exhaustive_cce_gap(trace: Sequence[RoundRecord], limit: SmallInstanceLimit = DEFAULT_LIMIT) -> float:
    """
    Largest average gain of any player from any fixed pure deviation

    Raises:
        LimitExceededError: trace longer than limit.max_rounds
    """
    _check_rounds(trace, limit)
    horizon = len(trace)
    num_players = len(trace[0].losses)
    gap = -math.inf
    for j in range(num_players):
        num_actions = len(trace[0].losses[j].values)
        for deviation in range(num_actions):
            total = 0.0
            for record in trace:
                loss = record.losses[j].values
                probs = record.strategies[j].probs
                played = 0.0
                for k in range(num_actions):
                    played += float(probs[k]) * float(loss[k])
                total += played - float(loss[deviation])
            gap = max(gap, total / horizon)
    return gap
