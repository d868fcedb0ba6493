from __future__ import annotations

from pathlib import Path
from typing import Any, Callable

import numpy as np
import pytest

from iso_lab.models.config import RunConfig
from iso_lab.models.game import GameSpec, JointProfile, MixedStrategy
from iso_lab.services import game_service
from iso_lab.services.cache_service import get_cache

REPO_ROOT = Path(__file__).resolve().parent.parent


def _base_config() -> dict[str, Any]:
    return {
        "schema_version": 1,
        "game": {"generator": "regime_switch", "players": 2, "actions": 2, "contexts": 2},
        "horizon": 200,
        "eta": 0.1,
        "context_process": {"kind": "cycle"},
        "predictors": {"kind": "oracle"},
        "seeds": [0],
    }


@pytest.fixture(autouse=True)
def _fresh_game_cache():
    get_cache().clear()
    yield
    get_cache().clear()


@pytest.fixture
def make_config() -> Callable[..., RunConfig]:
    """Build a RunConfig from the regime-switch defaults plus top-level overrides"""

    def build(**overrides: Any) -> RunConfig:
        data = _base_config()
        data.update(overrides)
        return RunConfig.model_validate(data)

    return build


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def matching_pennies() -> GameSpec:
    return game_service.zero_sum_2p()


@pytest.fixture
def demo_game() -> GameSpec:
    return game_service.cyclic_context_demo()


@pytest.fixture
def regime_game() -> GameSpec:
    return game_service.regime_switch(players=2, actions=2, contexts=2)


@pytest.fixture
def random_profile(rng) -> Callable[[GameSpec], JointProfile]:
    def draw(game: GameSpec) -> JointProfile:
        return JointProfile(tuple(
            MixedStrategy(rng.dirichlet(np.ones(game.actions_per_player)))
            for _ in range(game.num_players)
        ))

    return draw


@pytest.fixture
def repo_root() -> Path:
    return REPO_ROOT
