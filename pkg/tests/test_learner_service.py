from __future__ import annotations

import math

import numpy as np
import pytest

from iso_lab.models.game import LossVector, MixedStrategy
from iso_lab.models.learner import ContextLearnerState, LearnerBank
from iso_lab.services import learner_service
from iso_lab.utils.errors import FileParseError, InvalidParameterError


def _static_regret(num_actions: int, eta: float, loss: np.ndarray, horizon: int) -> float:
    """Regret of one learner fed the same loss every round"""
    bank = learner_service.new_bank(num_players=1, num_contexts=1, num_actions=num_actions, eta=eta)
    played = 0.0
    for _ in range(horizon):
        strategy = learner_service.current_distribution(bank, 0, 0)
        played += float(strategy.probs @ loss)
        bank = learner_service.apply_update(bank, 0, 0, LossVector(loss))
    return played - horizon * float(loss.min())


def test_fresh_learners_play_uniform():
    bank = learner_service.new_bank(num_players=2, num_contexts=3, num_actions=4, eta=0.5)

    for player in range(2):
        for context in range(3):
            np.testing.assert_allclose(
                learner_service.current_distribution(bank, player, context).probs, np.full(4, 0.25)
            )


def test_update_counts_loss_twice_through_hint():
    bank = learner_service.new_bank(num_players=1, num_contexts=1, num_actions=2, eta=0.5)

    bank = learner_service.apply_update(bank, 0, 0, LossVector(np.array([1.0, -1.0])))

    expected = np.exp([-1.0, 1.0]) / np.exp([-1.0, 1.0]).sum()
    np.testing.assert_allclose(learner_service.current_distribution(bank, 0, 0).probs, expected, rtol=1e-12)
    state = bank.state(0, 0)
    np.testing.assert_array_equal(state.cumulative_loss, [1.0, -1.0])
    np.testing.assert_array_equal(state.optimism_hint, [1.0, -1.0])
    assert state.updates_applied == 1


def test_update_shares_untouched_states():
    bank = learner_service.new_bank(num_players=2, num_contexts=2, num_actions=2, eta=0.3)
    bank = learner_service.apply_update(bank, 1, 1, LossVector(np.array([0.2, 0.1])))

    updated = learner_service.apply_update(bank, 0, 1, LossVector(np.array([0.5, -0.5])))

    assert updated.states[1] is bank.states[1]
    assert updated.states[0][0] is bank.states[0][0]
    assert updated.states[0][1] is not bank.states[0][1]
    assert bank.state(0, 1) == ContextLearnerState.fresh(2)


def test_round_plays_predicted_and_updates_realized(demo_game):
    bank = learner_service.new_bank(2, demo_game.num_contexts, 3, eta=0.4)
    bank = learner_service.apply_update(bank, 0, 1, LossVector(np.array([1.0, 0.0, -1.0])))
    before = bank

    profile, losses, after = learner_service.iso_grpo_round(bank, (1, 0), 0, demo_game)

    assert profile[0] == learner_service.current_distribution(before, 0, 1)
    assert profile[1] == learner_service.current_distribution(before, 1, 0)
    # only the realized-context learners move
    assert after.states[0][1] is before.states[0][1]
    assert after.states[1][1] is before.states[1][1]
    assert after.state(0, 0).updates_applied == 1
    assert after.state(1, 0).updates_applied == 1
    np.testing.assert_array_equal(after.state(0, 0).optimism_hint, losses[0].values)


def test_round_is_simultaneous(demo_game):
    bank = learner_service.new_bank(2, 2, 3, eta=1.0)

    profile, losses, _ = learner_service.iso_grpo_round(bank, (0, 0), 1, demo_game)

    # both players still play the fresh uniform strategy in round one
    assert profile[0] == MixedStrategy.uniform(3)
    assert profile[1] == MixedStrategy.uniform(3)


def test_pooled_round_needs_single_slot(demo_game):
    with pytest.raises(InvalidParameterError):
        learner_service.pooled_round(learner_service.new_bank(2, 2, 3, eta=0.1), 0, demo_game)

    pooled = learner_service.new_bank(2, 1, 3, eta=0.1)
    _, _, pooled = learner_service.pooled_round(pooled, 1, demo_game)
    assert pooled.state(0, 0).updates_applied == 1


def test_bad_indices_and_losses_are_rejected():
    bank = learner_service.new_bank(2, 2, 2, eta=0.1)

    with pytest.raises(InvalidParameterError):
        learner_service.current_distribution(bank, 2, 0)
    with pytest.raises(InvalidParameterError):
        learner_service.apply_update(bank, 0, 5, LossVector(np.zeros(2)))
    with pytest.raises(InvalidParameterError):
        learner_service.apply_update(bank, 0, 0, np.array([1.5, 0.0]))
    with pytest.raises(InvalidParameterError):
        learner_service.apply_update(bank, 0, 0, LossVector(np.zeros(3)))


def test_eta_must_lie_in_unit_interval():
    with pytest.raises(InvalidParameterError):
        learner_service.new_bank(1, 1, 2, eta=0.0)
    with pytest.raises(InvalidParameterError):
        learner_service.new_bank(1, 1, 2, eta=1.5)


def test_distribution_survives_large_cumulative_loss():
    state = ContextLearnerState(
        cumulative_loss=np.array([1e6, -1e6, 0.0]),
        optimism_hint=np.zeros(3),
        updates_applied=10**6,
    )

    probs = learner_service.hedge_distribution(state, 1.0).probs

    assert np.all(np.isfinite(probs))
    assert probs[1] == pytest.approx(1.0)


@pytest.mark.parametrize("eta", [0.05, 0.25, 1.0])
@pytest.mark.parametrize("num_actions", [2, 3])
def test_static_game_regret_within_certified_bound(eta, num_actions):
    loss = np.linspace(-1.0, 1.0, num_actions)

    for horizon in (1, 10, 100, 1000):
        regret = _static_regret(num_actions, eta, loss, horizon)
        assert regret <= math.log(num_actions) / eta + eta / 2 + 1e-12


def test_static_game_regret_within_log_k_over_eta_for_small_eta():
    regret = _static_regret(2, 0.25, np.array([-1.0, 1.0]), 2000)

    assert regret == pytest.approx(2.54, abs=0.01)
    assert regret <= math.log(2) / 0.25


def test_snapshot_round_trip_is_bit_exact(tmp_path, demo_game):
    bank = learner_service.new_bank(2, 2, 3, eta=0.3)
    for t in range(7):
        _, _, bank = learner_service.iso_grpo_round(bank, (t % 2, (t + 1) % 2), t % 2, demo_game)

    path = tmp_path / "bank.yaml"
    learner_service.save_bank(bank, path)
    restored = learner_service.load_bank(path)

    assert isinstance(restored, LearnerBank)
    assert restored.eta == bank.eta
    for player in range(2):
        for context in range(2):
            assert restored.state(player, context) == bank.state(player, context)


def test_load_bank_rejects_malformed_files(tmp_path):
    broken = tmp_path / "broken.yaml"
    broken.write_text("players: [\n", encoding="utf-8")
    with pytest.raises(FileParseError):
        learner_service.load_bank(broken)

    with pytest.raises(InvalidParameterError):
        learner_service.bank_from_snapshot({"snapshot_version": 99})
    with pytest.raises(InvalidParameterError):
        learner_service.bank_from_snapshot({"snapshot_version": 1, "eta": 0.1})


def test_long_random_run_only_moves_realized_context_learners(demo_game):
    rng = np.random.default_rng(9)
    bank = learner_service.new_bank(2, demo_game.num_contexts, 3, eta=0.5)

    for _ in range(10_000):
        predictions = tuple(int(c) for c in rng.integers(0, 2, size=2))
        realized = int(rng.integers(0, 2))
        _, losses, after = learner_service.iso_grpo_round(bank, predictions, realized, demo_game)
        for player in range(2):
            for context in range(2):
                if context == realized:
                    before_state, after_state = bank.state(player, context), after.state(player, context)
                    assert after_state.updates_applied == before_state.updates_applied + 1
                    np.testing.assert_array_equal(
                        after_state.cumulative_loss, before_state.cumulative_loss + losses[player].values
                    )
                else:
                    assert after.states[player][context] is bank.states[player][context]
        bank = after


@pytest.mark.parametrize("eta", [0.1, 1.0])
def test_distribution_stays_valid_after_many_unit_updates(eta):
    rng = np.random.default_rng(3)
    bank = learner_service.new_bank(num_players=1, num_contexts=1, num_actions=3, eta=eta)
    # action 0 always wins, the others see random signs
    for t in range(100_000):
        loss = np.concatenate(([-1.0], rng.choice([-1.0, 1.0], size=2)))
        bank = learner_service.apply_update(bank, 0, 0, LossVector(loss))
        if t % 10_000 == 0:
            probs = learner_service.current_distribution(bank, 0, 0).probs
            assert np.all(np.isfinite(probs)) and np.all(probs >= 0.0)
            assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    probs = learner_service.current_distribution(bank, 0, 0).probs
    assert np.all(np.isfinite(probs)) and np.all(probs >= 0.0)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert probs[0] == pytest.approx(1.0)
    assert bank.state(0, 0).updates_applied == 100_000


def test_identical_inputs_give_bit_identical_banks(demo_game):
    def play() -> LearnerBank:
        rng = np.random.default_rng(41)
        bank = learner_service.new_bank(2, 2, 3, eta=0.7)
        for _ in range(500):
            predictions = tuple(int(c) for c in rng.integers(0, 2, size=2))
            _, _, bank = learner_service.iso_grpo_round(bank, predictions, int(rng.integers(0, 2)), demo_game)
        return bank

    first, second = play(), play()

    assert learner_service.bank_to_snapshot(first) == learner_service.bank_to_snapshot(second)
    for player in range(2):
        for context in range(2):
            a, b = first.state(player, context), second.state(player, context)
            assert a.cumulative_loss.tobytes() == b.cumulative_loss.tobytes()
            assert a.optimism_hint.tobytes() == b.optimism_hint.tobytes()
            assert a.updates_applied == b.updates_applied


def test_out_of_range_states_are_rejected():
    with pytest.raises(InvalidParameterError):
        ContextLearnerState(np.zeros(2), np.array([1.5, 0.0]), updates_applied=1)
    with pytest.raises(InvalidParameterError):
        ContextLearnerState(np.array([3.0, 0.0]), np.zeros(2), updates_applied=2)
    with pytest.raises(InvalidParameterError):
        ContextLearnerState(np.array([np.nan, 0.0]), np.zeros(2), updates_applied=2)

    snapshot = learner_service.bank_to_snapshot(learner_service.new_bank(1, 1, 2, eta=0.1))
    snapshot["players"][0]["contexts"][0]["cumulative_loss"] = [5.0, 0.0]
    with pytest.raises(InvalidParameterError):
        learner_service.bank_from_snapshot(snapshot)
