"""
Game service

Exact expected losses of latent-context bilinear games under independent mixed
play, plus the named game generators used by the experiment harness.

All functions are pure; GameSpec and MixedStrategy are immutable.
"""

from typing import Optional, Sequence

import numpy as np

from ..models.game import GameSpec, JointProfile, LossVector, MixedStrategy
from ..utils.errors import InvalidParameterError
from ..utils.validators import validate_index, validate_positive_int


def _check_opponents(spec: GameSpec, player: int, opponents: Sequence[MixedStrategy]) -> None:
    if len(opponents) != spec.num_players - 1:
        raise InvalidParameterError(
            f"expected {spec.num_players - 1} opponent strategies, got {len(opponents)}"
        )
    for position, strategy in enumerate(opponents):
        if not isinstance(strategy, MixedStrategy):
            raise InvalidParameterError(f"opponent {position} is not a MixedStrategy")
        if strategy.num_actions != spec.actions_per_player:
            raise InvalidParameterError(
                f"opponent {position} has {strategy.num_actions} actions, expected {spec.actions_per_player}"
            )


def _check_profile(spec: GameSpec, profile: JointProfile) -> None:
    if len(profile) != spec.num_players:
        raise InvalidParameterError(
            f"profile has {len(profile)} strategies, expected {spec.num_players}"
        )
    for player, strategy in enumerate(profile):
        if strategy.num_actions != spec.actions_per_player:
            raise InvalidParameterError(
                f"strategy of player {player} has {strategy.num_actions} actions, "
                f"expected {spec.actions_per_player}"
            )


def expected_feature_matrix(
    spec: GameSpec,
    player: int,
    opponents: Sequence[MixedStrategy],
) -> np.ndarray:
    """
    Expected feature matrix of one player against independent opponents

    Args:
        spec: Game definition
        player: Player index
        opponents: J-1 opponent strategies in player order

    Returns:
        (d, K) matrix whose column k is E[phi^player(a_k, a^-player)]

    Raises:
        InvalidParameterError: bad player index or opponent list
    """
    player = validate_index(player, spec.num_players, "player")
    _check_opponents(spec, player, opponents)

    # (K_player, K_opp1, ..., K_oppJ-1, d); contracting axis 1 each time walks
    # the opponents in player order
    tensor = np.moveaxis(spec.feature_tensor(player), player, 0)
    for strategy in opponents:
        tensor = np.tensordot(tensor, strategy.probs, axes=([1], [0]))
    return np.ascontiguousarray(tensor.T)


def loss_vector(
    spec: GameSpec,
    player: int,
    opponents: Sequence[MixedStrategy],
    context: int,
) -> LossVector:
    """
    Per-action loss vector Phi^j(w^-j)^T z

    Raises:
        InvalidParameterError: bad player, opponents or context index
    """
    context = validate_index(context, spec.num_contexts, "context")
    matrix = expected_feature_matrix(spec, player, opponents)
    return LossVector(matrix.T @ spec.contexts[context])


def expected_cost(spec: GameSpec, player: int, profile: JointProfile, context: int) -> float:
    """
    Expected cost E_{a~w}[<phi^player(a), z>] by enumeration of all joint actions

    Raises:
        InvalidParameterError: bad player, profile or context index
    """
    player = validate_index(player, spec.num_players, "player")
    context = validate_index(context, spec.num_contexts, "context")
    _check_profile(spec, profile)

    joint = profile[0].probs
    for strategy in profile.strategies[1:]:
        joint = np.multiply.outer(joint, strategy.probs)
    costs = spec.features[player] @ spec.contexts[context]
    return float(joint.reshape(-1) @ costs)


def loss_vectors_for_profile(spec: GameSpec, profile: JointProfile, context: int) -> tuple:
    """Loss vector of every player against the rest of the profile"""
    _check_profile(spec, profile)
    return tuple(
        loss_vector(spec, player, profile.without(player), context)
        for player in range(spec.num_players)
    )


# ==================== Game construction ====================

def build_game(
    players: int,
    actions: int,
    dim: int,
    features: Sequence,
    contexts: Sequence[Sequence[float]],
) -> GameSpec:
    """
    Build a GameSpec from plain nested lists

    Args:
        players: J
        actions: K
        dim: d
        features: per player, either a flat list of K**J * d numbers in
            lexicographic joint-action order or a list of K**J vectors of length d
        contexts: m vectors of length d

    Raises:
        InvalidParameterError: shape mismatch
        AssumptionViolationError: some |<phi, z>| exceeds 1
    """
    players = validate_positive_int(players, "players", minimum=2)
    actions = validate_positive_int(actions, "actions", minimum=2)
    dim = validate_positive_int(dim, "dim", minimum=1)
    joint_actions = actions ** players

    if len(features) != players:
        raise InvalidParameterError(f"features must list {players} players, got {len(features)}")
    table = []
    for player, block in enumerate(features):
        array = np.asarray(block, dtype=np.float64)
        if array.size != joint_actions * dim:
            raise InvalidParameterError(
                f"features[{player}] has {array.size} numbers, expected {joint_actions} x {dim}"
            )
        table.append(array.reshape(joint_actions, dim))

    context_array = np.asarray(contexts, dtype=np.float64)
    if context_array.ndim == 1 and dim == 1:
        context_array = context_array.reshape(-1, 1)
    return GameSpec(
        num_players=players,
        actions_per_player=actions,
        feature_dim=dim,
        features=np.stack(table),
        contexts=context_array,
    )


def random_bilinear(players: int, actions: int, dim: int, contexts: int, seed: int) -> GameSpec:
    """
    Random bilinear game rescaled so that max |<phi, z>| = 1
    """
    players = validate_positive_int(players, "players", minimum=2)
    actions = validate_positive_int(actions, "actions", minimum=2)
    dim = validate_positive_int(dim, "dim", minimum=1)
    contexts = validate_positive_int(contexts, "contexts", minimum=1)

    rng = np.random.default_rng(seed)
    features = rng.uniform(-1.0, 1.0, size=(players, actions ** players, dim))
    context_vectors = rng.uniform(-1.0, 1.0, size=(contexts, dim))
    scale = float(np.max(np.abs(features @ context_vectors.T)))
    if scale > 0:
        features = features / scale
    return GameSpec(players, actions, dim, features, context_vectors)


def zero_sum_2p(actions: int = 2, seed: Optional[int] = None) -> GameSpec:
    """
    Two-player zero-sum game with a single context

    Without a seed and with two actions this is matching pennies, whose unique
    equilibrium is uniform play.
    """
    actions = validate_positive_int(actions, "actions", minimum=2)
    if seed is None:
        if actions != 2:
            raise InvalidParameterError("the seedless zero-sum game is matching pennies (actions=2)")
        matrix = np.array([[1.0, -1.0], [-1.0, 1.0]])
    else:
        matrix = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(actions, actions))
        matrix /= np.max(np.abs(matrix))
    flat = matrix.reshape(-1, 1)
    return GameSpec(2, actions, 1, np.stack([flat, -flat]), np.array([[1.0]]))


def cyclic_context_demo() -> GameSpec:
    """
    Two players, three actions, two contexts

    The first feature is a rock-paper-scissors interaction, the second an
    own-action bias (-1, 0, 1). Context (0.5, 0.5) favours action 0 and context
    (0.5, -0.5) favours action 2, so routing play to the wrong context is costly.
    """
    rps = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])
    bias = np.array([-1.0, 0.0, 1.0])
    features = np.zeros((2, 9, 2))
    for a0 in range(3):
        for a1 in range(3):
            index = a0 * 3 + a1
            features[0, index] = (rps[a0, a1], bias[a0])
            features[1, index] = (rps[a1, a0], bias[a1])
    contexts = np.array([[0.5, 0.5], [0.5, -0.5]])
    return GameSpec(2, 3, 2, features, contexts)


def regime_switch(players: int = 2, actions: int = 2, contexts: int = 2) -> GameSpec:
    """
    Own-action losses that depend only on the context

    Context z charges -1 for action z mod K and +1 for every other action, so
    loss vectors are constant within a context and each context prefers a
    different action when contexts <= actions.
    """
    players = validate_positive_int(players, "players", minimum=2)
    actions = validate_positive_int(actions, "actions", minimum=2)
    contexts = validate_positive_int(contexts, "contexts", minimum=1)

    # feature k of own action a is the cost under context k
    own = np.ones((actions, contexts))
    for z in range(contexts):
        own[z % actions, z] = -1.0
    shape = (actions,) * players
    features = np.zeros((players, actions ** players, contexts))
    for flat in range(actions ** players):
        joint = np.unravel_index(flat, shape)
        for player in range(players):
            features[player, flat] = own[joint[player]]
    return GameSpec(players, actions, contexts, features, np.eye(contexts))
