"""
Domain models

Numeric game objects are frozen dataclasses over read-only numpy arrays; the
run configuration schema is a tree of pydantic models.
"""
from .game import GameSpec, JointProfile, LossVector, MixedStrategy
from .learner import ContextLearnerState, LearnerBank
from .trace import RegretSplit, RoundRecord, RunMetrics, RvuBound

__all__ = [
    "GameSpec",
    "JointProfile",
    "LossVector",
    "MixedStrategy",
    "ContextLearnerState",
    "LearnerBank",
    "RegretSplit",
    "RoundRecord",
    "RunMetrics",
    "RvuBound",
]
