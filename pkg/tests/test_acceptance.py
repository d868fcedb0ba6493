"""
End-to-end audits over many seeded runs
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from iso_lab.services import oracle_service
from iso_lab.services.experiment_service import ExperimentService
from iso_lab.services.parser_service import ParserService

pytestmark = pytest.mark.slow


def test_slack2_bound_holds_on_every_seeded_run(make_config, record_property):
    service = ExperimentService()
    rng = np.random.default_rng(2000)
    runs = 200
    stated_ok = cce_sum_ok = 0
    for seed in range(runs):
        contexts = int(rng.choice([1, 2, 3]))
        kind = str(rng.choice(["oracle", "noisy_0", "noisy_0.3"])) if contexts > 1 else "oracle"
        predictors = {"kind": "oracle"} if kind == "oracle" else {"kind": "noisy", "p": float(kind.split("_")[1])}
        config = make_config(
            game={
                "generator": "random_bilinear",
                "players": 2,
                "actions": int(rng.choice([2, 3, 4])),
                "dim": 3,
                "contexts": contexts,
            },
            horizon=2000,
            eta=float(rng.choice([0.1, 0.5, 1.0])),
            context_process={"kind": "cycle"},
            predictors=predictors,
        )

        metrics = service.run_single(config, seed, write=False).metrics

        assert metrics.slack2_bound_ok, f"seed {seed}"
        assert metrics.certified_bound_ok, f"seed {seed}"
        assert metrics.cce_epsilon <= metrics.cce_bound_rhs_max + 1e-9
        stated_ok += metrics.stated_bound_ok
        cce_sum_ok += metrics.cce_epsilon <= metrics.cce_bound_rhs + 1e-9

    record_property("stated_bound_fraction", stated_ok / runs)
    record_property("cce_sum_form_fraction", cce_sum_ok / runs)


def test_certified_bound_holds_on_larger_games(make_config):
    service = ExperimentService()
    rng = np.random.default_rng(77)
    for seed in range(200):
        players = int(rng.integers(2, 4))
        actions = int(rng.integers(2, 5))
        contexts = int(rng.integers(1, 4))
        p = float(rng.choice([0.0, 0.1, 0.3])) if contexts > 1 else 0.0
        config = make_config(
            game={"generator": "random_bilinear", "players": players, "actions": actions, "dim": 3, "contexts": contexts},
            horizon=300,
            eta=float(rng.choice([0.05, 0.2, 0.6, 1.0])),
            context_process={"kind": "cycle"},
            predictors={"kind": "noisy", "p": p},
        )

        metrics = service.run_single(config, seed, write=False).metrics

        assert metrics.certified_bound_ok, f"seed {seed}"
        assert metrics.cce_epsilon <= metrics.cce_bound_rhs_max + 1e-9
        for ctx, ext in zip(metrics.contextual_regret, metrics.external_regret):
            assert ctx >= ext - 1e-9


def test_regret_grows_with_mistakes(make_config):
    horizon = 2000
    service = ExperimentService()
    contexts = [t % 2 for t in range(horizon)]
    mistakes, regrets = [], []
    for tenths in range(5):
        predictions = [1 - z if t % 10 < tenths else z for t, z in enumerate(contexts)]
        config = make_config(
            horizon=horizon,
            context_process={"kind": "script", "sequence": contexts},
            predictors={"kind": "scripted", "sequence": predictions},
        )
        metrics = service.run_single(config, 0, write=False).metrics
        mistakes.append(metrics.mistakes[0])
        regrets.append(metrics.contextual_regret[0])

    assert mistakes == [0, 200, 400, 600, 800]
    assert all(later > earlier for earlier, later in zip(regrets, regrets[1:]))
    # each misrouted round costs close to the full loss range
    for l_t, regret in zip(mistakes, regrets):
        assert regret >= 1.9 * l_t - 20
    slope = np.polyfit(mistakes, regrets, 1)[0]
    assert 1.8 <= slope <= 2.0 + 1e-9


def test_regret_increases_with_prediction_noise(make_config, repo_root):
    levels = ParserService(str(repo_root)).load_run_config("config/noise_sweep.yaml").sweep.values
    assert levels == [0.0, 0.1, 0.3, 0.5, 0.7]

    horizon = 2000
    service = ExperimentService()
    means, pairs = [], []
    for p in levels:
        regrets, rates = [], []
        for seed in range(20):
            config = make_config(horizon=horizon, predictors={"kind": "noisy", "p": p})
            metrics = service.run_single(config, seed, write=False).metrics
            regrets.append(metrics.contextual_regret[0])
            rates.append(np.mean(metrics.mistakes) / horizon)
        assert abs(np.mean(rates) - p) <= 0.02, f"p={p}"
        means.append(float(np.mean(regrets)))
        pairs.extend((p, v) for v in regrets)

    assert all(later > earlier for earlier, later in zip(means, means[1:]))
    assert spearmanr(levels, means).statistic == pytest.approx(1.0)
    assert spearmanr([p for p, _ in pairs], [v for _, v in pairs]).statistic >= 0.9


def test_matching_pennies_self_play_stays_at_equilibrium(make_config):
    config = make_config(game={"generator": "zero_sum_2p"}, horizon=3000, eta=0.05)

    metrics = ExperimentService().run_single(config, 0, write=False).metrics

    for average in metrics.average_strategies:
        assert average == pytest.approx([0.5, 0.5], abs=1e-9)
    assert metrics.cce_epsilon <= 1e-9


def test_zero_sum_self_play_approaches_coarse_correlated_equilibrium(make_config, record_property):
    eta, players, actions = 0.05, 2, 3
    service = ExperimentService()
    epsilons = {}
    for horizon in (2500, 10000):
        config = make_config(
            game={"generator": "zero_sum_2p", "actions": actions, "seed": 5},
            horizon=horizon,
            eta=eta,
            predictors={"kind": "oracle"},
        )
        metrics = service.run_single(config, 0, write=False).metrics
        epsilons[horizon] = metrics.cce_epsilon

        slack2 = max(
            math.log(actions) / eta + 2 * eta * sum(variation) for variation in metrics.variation
        )
        assert metrics.cce_epsilon <= slack2 / horizon * players + 1e-9
        assert metrics.cce_epsilon <= max(b.total_certified for b in metrics.bounds) / horizon + 1e-9

    assert epsilons[10000] < 0.02
    # reported: the gap should roughly halve when the horizon quadruples
    record_property("cce_decay_ok", epsilons[10000] <= 4 * epsilons[2500] / 2)
    record_property("cce_epsilon_2500", epsilons[2500])
    record_property("cce_epsilon_10000", epsilons[10000])


def test_oracles_agree_on_random_runs(make_config):
    service = ExperimentService()
    for seed in range(20):
        config = make_config(
            game={"generator": "random_bilinear", "players": 2, "actions": 3, "dim": 2, "contexts": 2},
            horizon=100,
            eta=0.3,
            predictors={"kind": "random"},
        )
        game = service.resolve_game(config, seed)
        result = service.run_single(config, seed, write=False)
        trace = result.simulation.trace
        assert oracle_service.exhaustive_cce_gap(trace) == pytest.approx(result.metrics.cce_epsilon, abs=1e-12)
        for record in trace[::10]:
            for player in range(2):
                brute = oracle_service.brute_expected_cost(game, player, record.strategies, record.realized_context)
                assert brute == pytest.approx(
                    float(record.strategies[player].probs @ record.losses[player].values), abs=1e-12
                )


def test_static_recovery_through_the_harness(make_config):
    eta = 0.1
    config = make_config(
        game={"generator": "regime_switch", "contexts": 1},
        horizon=3000,
        eta=eta,
    )

    metrics = ExperimentService().run_single(config, 0, write=False).metrics

    for regret in metrics.contextual_regret:
        assert regret <= math.log(2) / eta + eta / 2
