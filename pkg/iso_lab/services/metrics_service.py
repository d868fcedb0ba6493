"""
Metrics service

Comparators, contextual and external regret, within-context variation, the
contextual regret bound and its step-size rule, and the coarse correlated
equilibrium gap of a finished trace.

Every function takes the full trace and an optional horizon; a trace whose
rounds are not exactly 0..T-1 is rejected.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..models.game import MixedStrategy
from ..models.trace import RegretSplit, RoundRecord, RunMetrics, RvuBound
from ..utils.errors import BoundViolationError, InvalidParameterError, TraceError
from ..utils.validators import validate_eta

ETA_FLOOR = 1e-6
AUDIT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PlayerTrace:
    """Column view of one player's part of a trace"""

    contexts: np.ndarray     # (T,)
    predictions: np.ndarray  # (T,)
    strategies: np.ndarray   # (T, K)
    losses: np.ndarray       # (T, K)


@dataclass(frozen=True)
class CceReport:
    """Empirical coarse correlated equilibrium gap"""

    per_player: Tuple[float, ...]
    epsilon: float
    bound_rhs: float
    bound_rhs_max: float


def check_trace(trace: Sequence[RoundRecord], horizon: Optional[int] = None) -> int:
    """
    Validate that a trace is complete

    Returns:
        T

    Raises:
        TraceError: empty trace, rounds not 0..T-1, or length != horizon
    """
    if not trace:
        raise TraceError("trace is empty")
    if horizon is not None and len(trace) != horizon:
        raise TraceError(
            f"trace has {len(trace)} rounds, horizon is {horizon}",
            suggestion="Metrics are only defined on complete runs"
        )
    for expected, record in enumerate(trace):
        if record.round != expected:
            raise TraceError(f"trace round {record.round} found at position {expected}")
    return len(trace)


def player_trace(trace: Sequence[RoundRecord], player: int, horizon: Optional[int] = None) -> PlayerTrace:
    """Stack one player's strategies and losses into arrays"""
    check_trace(trace, horizon)
    num_players = len(trace[0].losses)
    if not 0 <= player < num_players:
        raise InvalidParameterError(f"player={player} out of range for {num_players} players")
    return PlayerTrace(
        contexts=np.fromiter((r.realized_context for r in trace), dtype=np.int64, count=len(trace)),
        predictions=np.fromiter((r.predictions[player] for r in trace), dtype=np.int64, count=len(trace)),
        strategies=np.stack([r.strategies[player].probs for r in trace]),
        losses=np.stack([r.losses[player].values for r in trace]),
    )


def _comparator_action(losses: np.ndarray) -> int:
    # argmin returns the lowest index on ties; empty subsequence -> action 0
    if losses.shape[0] == 0:
        return 0
    return int(np.argmin(losses.sum(axis=0)))


def _comparator_actions(view: PlayerTrace, num_contexts: int) -> np.ndarray:
    return np.array([
        _comparator_action(view.losses[view.contexts == z]) for z in range(num_contexts)
    ], dtype=np.int64)


def _num_contexts(view: PlayerTrace, num_contexts: Optional[int]) -> int:
    return num_contexts if num_contexts is not None else int(view.contexts.max()) + 1


def best_per_context_comparator(
    trace: Sequence[RoundRecord],
    player: int,
    context: int,
    horizon: Optional[int] = None,
) -> MixedStrategy:
    """
    Best fixed strategy on the subsequence of rounds whose realized context is `context`

    The objective is linear, so the minimiser is the vertex on the action with
    the smallest summed loss (lowest index on ties).
    """
    view = player_trace(trace, player, horizon)
    action = _comparator_action(view.losses[view.contexts == context])
    return MixedStrategy.pure(view.losses.shape[1], action)


def instantaneous_regret(
    trace: Sequence[RoundRecord],
    player: int,
    num_contexts: Optional[int] = None,
    horizon: Optional[int] = None,
) -> np.ndarray:
    """Per-round <w_t, l_t> - <pi*(Z_t), l_t>"""
    view = player_trace(trace, player, horizon)
    return _instantaneous(view, _num_contexts(view, num_contexts))


def _instantaneous(view: PlayerTrace, num_contexts: int) -> np.ndarray:
    comparators = _comparator_actions(view, num_contexts)
    played = np.einsum("tk,tk->t", view.strategies, view.losses)
    reference = view.losses[np.arange(view.losses.shape[0]), comparators[view.contexts]]
    return played - reference


def contextual_regret(trace: Sequence[RoundRecord], player: int, horizon: Optional[int] = None) -> float:
    """Regret against the best per-context fixed comparator"""
    return float(instantaneous_regret(trace, player, horizon=horizon).sum())


def external_regret(trace: Sequence[RoundRecord], player: int, horizon: Optional[int] = None) -> float:
    """Regret against the best single fixed action over the whole horizon"""
    view = player_trace(trace, player, horizon)
    return _external(view)


def _external(view: PlayerTrace) -> float:
    played = float(np.einsum("tk,tk->", view.strategies, view.losses))
    return played - float(view.losses.sum(axis=0).min())


def within_context_variation(
    trace: Sequence[RoundRecord],
    player: int,
    context: int,
    horizon: Optional[int] = None,
) -> float:
    """Sum of inf-norm differences of consecutive in-context loss vectors"""
    view = player_trace(trace, player, horizon)
    return float(_step_norms(view, context).sum())


def within_context_squared_variation(
    trace: Sequence[RoundRecord],
    player: int,
    context: int,
    horizon: Optional[int] = None,
) -> float:
    """Sum of squared inf-norm differences of consecutive in-context loss vectors"""
    view = player_trace(trace, player, horizon)
    return float(np.square(_step_norms(view, context)).sum())


def first_loss_norm(trace: Sequence[RoundRecord], player: int, context: int, horizon: Optional[int] = None) -> float:
    """Inf-norm of the first loss vector seen in a context (0 if never realized)"""
    view = player_trace(trace, player, horizon)
    return _first_norm(view, context)


def _step_norms(view: PlayerTrace, context: int) -> np.ndarray:
    losses = view.losses[view.contexts == context]
    if losses.shape[0] <= 1:
        return np.zeros(0)
    return np.abs(np.diff(losses, axis=0)).max(axis=1)


def _first_norm(view: PlayerTrace, context: int) -> float:
    losses = view.losses[view.contexts == context]
    return float(np.abs(losses[0]).max()) if losses.shape[0] else 0.0


def rvu_bound(
    num_contexts: int,
    num_actions: int,
    eta: float,
    mistakes: int,
    variations: Sequence[float],
    first_loss_norms: Optional[Sequence[float]] = None,
    squared_variations: Optional[Sequence[float]] = None,
) -> RvuBound:
    """
    Terms of the contextual regret bound

    term_a = m log K / eta, term_b = 2 L_T / eta, term_c = eta * sum Var.
    total_slack2 doubles term_c. When first-loss norms and squared variations
    are given, total_certified = m log K / eta + 2 L_T
    + (eta / 2) * sum_z (||l_first||^2 + Q_z), which optimistic Hedge with a
    last-loss hint provably satisfies.

    Raises:
        InvalidParameterError: eta outside (0, 1]
    """
    eta = validate_eta(eta)
    term_a = math.log(num_actions) / eta * num_contexts
    term_b = 2.0 / eta * mistakes
    term_c = eta * float(sum(variations))
    certified = None
    if first_loss_norms is not None and squared_variations is not None:
        stability = sum(n * n for n in first_loss_norms) + float(sum(squared_variations))
        certified = term_a + 2.0 * mistakes + eta / 2.0 * stability
    return RvuBound(
        term_a=term_a,
        term_b=term_b,
        term_c=term_c,
        total=term_a + term_b + term_c,
        total_slack2=term_a + term_b + 2.0 * term_c,
        total_certified=certified,
    )


def eta_rule(num_contexts: int, num_actions: int, mistakes: float, sum_variation: float) -> float:
    """
    Step size min(1, sqrt((m log K + L_T) / (sum Var + 1))), floored at 1e-6
    """
    if min(num_contexts, mistakes, sum_variation) < 0:
        raise InvalidParameterError("eta_rule inputs must be non-negative")
    value = math.sqrt((num_contexts * math.log(num_actions) + mistakes) / (sum_variation + 1.0))
    return min(1.0, max(ETA_FLOOR, value))


def cce_epsilon(trace: Sequence[RoundRecord], horizon: Optional[int] = None, num_contexts: Optional[int] = None) -> CceReport:
    """
    Coarse correlated equilibrium gap of the empirical play distribution

    epsilon = max_j external_regret_j / T. bound_rhs is the sum form
    (1/T) sum_j contextual_regret_j and bound_rhs_max the max form; since
    contextual regret dominates external regret player by player,
    epsilon <= bound_rhs_max always holds and is asserted.

    Raises:
        BoundViolationError: epsilon exceeds the max-form bound
    """
    horizon_t = check_trace(trace, horizon)
    num_players = len(trace[0].losses)
    views = [player_trace(trace, j) for j in range(num_players)]
    per_player = tuple(_external(v) / horizon_t for v in views)
    contextual = [
        float(_instantaneous(v, _num_contexts(v, num_contexts)).sum()) / horizon_t for v in views
    ]
    report = CceReport(
        per_player=per_player,
        epsilon=max(per_player),
        bound_rhs=sum(contextual),
        bound_rhs_max=max(contextual),
    )
    if report.epsilon > report.bound_rhs_max + AUDIT_TOLERANCE:
        raise BoundViolationError(
            f"cce epsilon {report.epsilon!r} exceeds max contextual regret / T {report.bound_rhs_max!r}"
        )
    return report


def regret_split(
    trace: Sequence[RoundRecord],
    player: int,
    num_contexts: Optional[int] = None,
    horizon: Optional[int] = None,
) -> RegretSplit:
    """Contextual regret split by mistake flag and by realized context"""
    view = player_trace(trace, player, horizon)
    contexts = _num_contexts(view, num_contexts)
    terms = _instantaneous(view, contexts)
    mistakes = view.predictions != view.contexts
    return RegretSplit(
        correct=float(terms[~mistakes].sum()),
        mistakes=float(terms[mistakes].sum()),
        per_context=tuple(float(terms[view.contexts == z].sum()) for z in range(contexts)),
    )


def compute_run_metrics(
    trace: Sequence[RoundRecord],
    eta: float,
    num_contexts: int,
    mistakes: Sequence[int],
    horizon: Optional[int] = None,
) -> RunMetrics:
    """All metrics of a finished run"""
    horizon_t = check_trace(trace, horizon)
    num_players = len(trace[0].losses)
    num_actions = trace[0].losses[0].values.size

    contextual: List[float] = []
    external: List[float] = []
    variation: List[List[float]] = []
    bounds: List[RvuBound] = []
    averages: List[List[float]] = []
    for player in range(num_players):
        view = player_trace(trace, player)
        contextual.append(float(_instantaneous(view, num_contexts).sum()))
        external.append(_external(view))
        steps = [_step_norms(view, z) for z in range(num_contexts)]
        per_context = [float(s.sum()) for s in steps]
        variation.append(per_context)
        bounds.append(rvu_bound(
            num_contexts,
            num_actions,
            eta,
            int(mistakes[player]),
            per_context,
            first_loss_norms=[_first_norm(view, z) for z in range(num_contexts)],
            squared_variations=[float(np.square(s).sum()) for s in steps],
        ))
        averages.append(view.strategies.mean(axis=0).tolist())

    cce = cce_epsilon(trace, num_contexts=num_contexts)
    return RunMetrics(
        horizon=horizon_t,
        eta=eta,
        mistakes=[int(m) for m in mistakes],
        contextual_regret=contextual,
        external_regret=external,
        variation=variation,
        bounds=bounds,
        cce_epsilon=cce.epsilon,
        cce_bound_rhs=cce.bound_rhs,
        cce_bound_rhs_max=cce.bound_rhs_max,
        average_strategies=averages,
    )
