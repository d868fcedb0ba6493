"""
Trace and metric types
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from .game import JointProfile, LossVector


@dataclass(frozen=True)
class RoundRecord:
    """One round of play: context, predictions, strategies and losses"""

    round: int
    realized_context: int
    predictions: Tuple[int, ...]
    strategies: JointProfile
    losses: Tuple[LossVector, ...]


@dataclass(frozen=True)
class RvuBound:
    """Terms of the contextual regret bound for one player"""

    term_a: float
    term_b: float
    term_c: float
    total: float
    total_slack2: float
    total_certified: Optional[float] = None


@dataclass(frozen=True)
class RegretSplit:
    """Contextual regret partitioned by routing outcome and by realized context"""

    correct: float
    mistakes: float
    per_context: Tuple[float, ...]

    @property
    def total(self) -> float:
        return self.correct + self.mistakes


@dataclass
class RunMetrics:
    """Everything measured on one finished run"""

    horizon: int
    eta: float
    mistakes: List[int]
    contextual_regret: List[float]
    external_regret: List[float]
    variation: List[List[float]]
    bounds: List[RvuBound]
    cce_epsilon: float
    cce_bound_rhs: float
    cce_bound_rhs_max: float
    average_strategies: List[List[float]] = field(default_factory=list)

    @property
    def stated_bound_ok(self) -> bool:
        return all(r <= b.total for r, b in zip(self.contextual_regret, self.bounds))

    @property
    def slack2_bound_ok(self) -> bool:
        return all(r <= b.total_slack2 for r, b in zip(self.contextual_regret, self.bounds))

    @property
    def certified_bound_ok(self) -> bool:
        return all(
            b.total_certified is not None and r <= b.total_certified + 1e-9
            for r, b in zip(self.contextual_regret, self.bounds)
        )

    def as_dict(self) -> Dict:
        return {
            "horizon": self.horizon,
            "eta": self.eta,
            "mistakes": list(self.mistakes),
            "contextual_regret": list(self.contextual_regret),
            "external_regret": list(self.external_regret),
            "variation": [list(v) for v in self.variation],
            "bounds": [asdict(b) for b in self.bounds],
            "cce_epsilon": self.cce_epsilon,
            "cce_bound_rhs": self.cce_bound_rhs,
            "cce_bound_rhs_max": self.cce_bound_rhs_max,
            "stated_bound_ok": self.stated_bound_ok,
            "slack2_bound_ok": self.slack2_bound_ok,
            "certified_bound_ok": self.certified_bound_ok,
        }
