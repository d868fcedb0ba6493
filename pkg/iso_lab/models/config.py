"""
Pydantic models for run configuration files

A run configuration is one YAML document with schema_version 1. See
docs/CONFIG_SCHEMA.md for the full field reference.
"""

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import settings

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class InlineGame(_Strict):
    """Game written out in full"""
    players: int = Field(..., ge=2, description="Number of players J")
    actions: int = Field(..., ge=2, description="Actions per player K")
    dim: int = Field(..., ge=1, description="Feature dimension d")
    contexts: List[List[float]] = Field(..., min_length=1, description="Context vectors")
    features: List[List[Union[float, List[float]]]] = Field(
        ..., description="Per player, K**J feature vectors in lexicographic joint-action order (flat or nested)"
    )


class GameConfig(_Strict):
    """Where the game comes from: a file, an inline definition or a named generator"""
    path: Optional[str] = Field(None, description="YAML game file")
    inline: Optional[InlineGame] = Field(None, description="Inline game")
    generator: Optional[Literal["random_bilinear", "zero_sum_2p", "cyclic_context_demo", "regime_switch"]] = Field(
        None, description="Named game generator"
    )
    players: int = Field(2, ge=2, description="J for generators")
    actions: int = Field(2, ge=2, description="K for generators")
    dim: int = Field(2, ge=1, description="d for random_bilinear")
    contexts: int = Field(1, ge=1, description="m for random_bilinear and regime_switch")
    seed: Optional[int] = Field(None, ge=0, description="Generator seed; pins the game across run seeds, defaults to the run seed")

    @model_validator(mode="after")
    def _one_source(self):
        sources = [s for s in (self.path, self.inline, self.generator) if s is not None]
        if len(sources) != 1:
            raise ValueError("exactly one of path, inline or generator must be given")
        return self


class PredictorConfig(_Strict):
    """How one player predicts the context"""
    kind: Literal["oracle", "noisy", "scripted", "majority", "random"] = Field(
        "oracle", description="Predictor family"
    )
    p: float = Field(0.0, ge=0.0, le=1.0, description="Corruption probability for noisy")
    sequence: Optional[List[int]] = Field(None, description="Predicted contexts per round for scripted")
    seed: int = Field(0, ge=0, description="Stream seed for noisy and random, combined with the run seed")

    @model_validator(mode="after")
    def _scripted_needs_sequence(self):
        if self.kind == "scripted" and not self.sequence:
            raise ValueError("scripted predictors need a non-empty sequence")
        return self


class ContextProcessConfig(_Strict):
    """How nature draws Z_t"""
    kind: Literal["cycle", "markov", "script"] = Field("cycle", description="Context process")
    order: Optional[List[int]] = Field(None, description="Cycle order; defaults to 0..m-1")
    transition: Optional[List[List[float]]] = Field(None, description="Markov transition matrix")
    initial: int = Field(0, ge=0, description="Markov initial context")
    seed: int = Field(0, ge=0, description="Markov stream seed, combined with the run seed")
    sequence: Optional[List[int]] = Field(None, description="Explicit context script")

    @model_validator(mode="after")
    def _kind_fields(self):
        if self.kind == "markov" and self.transition is None:
            raise ValueError("markov context process needs a transition matrix")
        if self.kind == "script" and not self.sequence:
            raise ValueError("script context process needs a non-empty sequence")
        return self


class SweepConfig(_Strict):
    """One sweep axis"""
    axis: Literal["p", "eta"] = Field(..., description="Swept parameter")
    values: List[float] = Field(..., min_length=1, description="Values of the axis")


class RunConfig(_Strict):
    """Complete experiment configuration"""
    schema_version: Literal[1] = Field(..., description="Configuration schema version")
    game: GameConfig
    horizon: int = Field(..., ge=1, description="Number of rounds T")
    eta: Union[float, Literal["rule"]] = Field(..., description="Step size in (0, 1] or 'rule'")
    routing: Literal["predicted", "oracle", "pooled"] = Field(
        "predicted", description="Which learner plays each round"
    )
    context_process: ContextProcessConfig = Field(default_factory=ContextProcessConfig)
    predictors: Union[PredictorConfig, List[PredictorConfig]] = Field(
        default_factory=PredictorConfig, description="One config for all players or one per player"
    )
    shared_prediction_stream: bool = Field(False, description="All players draw from player 0's stream")
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    sweep: Optional[SweepConfig] = None
    output: str = Field(default_factory=lambda: settings.OUTPUT_DIR, description="Output directory (ISO_LAB_OUTPUT_DIR)")
    audit: bool = Field(True, description="Raise on trace inconsistency or certified-bound failure")

    @field_validator("eta")
    @classmethod
    def _eta_range(cls, value):
        if value != "rule" and not 0.0 < float(value) <= 1.0:
            raise ValueError("eta must lie in (0, 1] or be 'rule'")
        return value

    @field_validator("seeds")
    @classmethod
    def _seeds_non_negative(cls, value):
        if any(seed < 0 for seed in value):
            raise ValueError("seeds must be non-negative")
        return value

    @model_validator(mode="after")
    def _sweep_values(self):
        if self.sweep is None:
            return self
        if self.sweep.axis == "eta" and any(not 0.0 < v <= 1.0 for v in self.sweep.values):
            raise ValueError("eta sweep values must lie in (0, 1]")
        if self.sweep.axis == "p" and any(not 0.0 <= v <= 1.0 for v in self.sweep.values):
            raise ValueError("p sweep values must lie in [0, 1]")
        return self

    def predictor_for(self, player: int) -> PredictorConfig:
        if isinstance(self.predictors, list):
            return self.predictors[player]
        return self.predictors
