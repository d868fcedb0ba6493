"""
Experiment tools

CLI-facing facade over the harness. Methods never raise: failures come back as
{"success": False, "error": {...}} with the error's exit status attached.
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..config import settings
from ..models.config import RunConfig
from ..services import game_service, metrics_service, oracle_service
from ..services.experiment_service import ExperimentService, config_digest
from ..utils.errors import BoundViolationError, InvalidParameterError, IsoLabError
from ..utils.validators import validate_positive_int

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-12


def _failure(error: Dict[str, Any], exit_code: int) -> Dict[str, Any]:
    return {"success": False, "exit_code": exit_code, "error": error}


class ExperimentTools:
    """Experiment tools"""

    def __init__(self, project_root: Optional[str] = None):
        """
        Initialize the tools

        Args:
            project_root: Base directory for config-relative paths
        """
        self.service = ExperimentService(project_root)

    def _guard(self, action: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
        try:
            return {**action(), "success": True, "exit_code": 0}
        except IsoLabError as e:
            return _failure(e.to_dict(), e.exit_code)
        except OSError as e:
            return _failure({"code": "IO_ERROR", "message": str(e)}, 3)
        except Exception as e:
            logger.exception("unexpected failure")
            return _failure({"code": "INTERNAL_ERROR", "message": str(e)}, 2)

    def load_config(
        self,
        config_path: str,
        seed: Optional[int] = None,
        out: Optional[str] = None,
    ) -> RunConfig:
        """Read a run configuration and apply command-line overrides"""
        config = self.service.parser.load_run_config(config_path)
        updates: Dict[str, Any] = {}
        if seed is not None:
            if seed < 0:
                raise InvalidParameterError(f"--seed must be non-negative, got {seed}")
            updates["seeds"] = [seed]
        if out is not None:
            updates["output"] = out
        return config.model_copy(update=updates) if updates else config

    def run(self, config_path: str, seed: Optional[int] = None, out: Optional[str] = None) -> Dict[str, Any]:
        """
        Run one configuration for every configured seed

        Returns:
            Per-seed run ids, L_T, contextual regrets and bound checks

        Example:
            >>> tools = ExperimentTools()
            >>> result = tools.run("config/demo_run.yaml", seed=3)
            >>> print(result["runs"][0]["contextual_regret"])
        """
        def action() -> Dict[str, Any]:
            config = self.load_config(config_path, seed, out)
            runs: List[Dict[str, Any]] = []
            files: List[str] = []
            for run_seed in config.seeds:
                run_config = config if len(config.seeds) == 1 else config.model_copy(
                    update={"output": str(Path(config.output) / f"seed_{run_seed}")}
                )
                result = self.service.run_single(run_config, run_seed)
                metrics = result.metrics
                runs.append({
                    "run_id": result.run_id,
                    "seed": run_seed,
                    "eta": result.eta,
                    "mistakes": metrics.mistakes,
                    "contextual_regret": metrics.contextual_regret,
                    "external_regret": metrics.external_regret,
                    "certified_bound": [b.total_certified for b in metrics.bounds],
                    "certified_bound_ok": metrics.certified_bound_ok,
                    "slack2_bound_ok": metrics.slack2_bound_ok,
                    "cce_epsilon": metrics.cce_epsilon,
                })
                files.extend(str(f) for f in result.files)
            return {"runs": runs, "files": files}

        return self._guard(action)

    def sweep(
        self,
        config_path: str,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        threads: Optional[int] = None,
    ) -> Dict[str, Any]:
        """
        Run every (sweep value, seed) cell of a configuration

        A sweep with failed cells still writes the other cells and returns
        success False with exit status 2.
        """
        def action() -> Dict[str, Any]:
            config = self.load_config(config_path, seed, out)
            workers = validate_positive_int(threads if threads is not None else settings.THREADS, "threads")
            result = self.service.run_sweep(config, threads=workers)
            return {
                "cells": len(config.sweep.values) * len(config.seeds),
                "rows": len(result.rows),
                "failures": result.failures,
                "files": [str(f) for f in result.files],
            }

        outcome = self._guard(action)
        if outcome["success"] and outcome["failures"]:
            outcome.update({
                "success": False,
                "exit_code": 2,
                "error": {
                    "code": "CELL_FAILURES",
                    "message": f"{len(outcome['failures'])} sweep cell(s) failed, see failures.csv",
                },
            })
        return outcome

    def validate(self, config_path: str, seed: Optional[int] = None) -> Dict[str, Any]:
        """
        Check a configuration and its game without running anything

        Returns:
            Game dimensions and the configuration digest
        """
        def action() -> Dict[str, Any]:
            config = self.load_config(config_path, seed)
            game = self.service.validate(config, config.seeds[0])
            return {
                "digest": config_digest(config),
                "game": {
                    "players": game.num_players,
                    "actions": game.actions_per_player,
                    "dim": game.feature_dim,
                    "contexts": game.num_contexts,
                    "max_abs_cost": float(np.max(np.abs(game.features @ game.contexts.T))),
                },
            }

        return self._guard(action)

    def oracle_check(self, config_path: str, seed: Optional[int] = None, resolution: float = 0.05) -> Dict[str, Any]:
        """
        Cross-check one in-memory run against the brute-force oracles

        Compares expected costs round by round, the CCE gap, and the vertex
        comparator against a simplex grid search.
        """
        def action() -> Dict[str, Any]:
            config = self.load_config(config_path, seed)
            run_seed = config.seeds[0]
            game = self.service.validate(config, run_seed)
            eta = 1.0 if config.eta == "rule" else float(config.eta)
            limit = oracle_service.SmallInstanceLimit(
                settings.ORACLE_MAX_JOINT_ACTIONS, settings.ORACLE_MAX_ROUNDS
            )
            simulation = self.service.simulate(config, game, eta, run_seed)
            trace = simulation.trace
            if len(trace) > limit.max_rounds:
                trace = trace[:limit.max_rounds]

            cost_gap = 0.0
            for record in trace:
                for j in range(game.num_players):
                    brute = oracle_service.brute_expected_cost(
                        game, j, record.strategies, record.realized_context, limit
                    )
                    fast = game_service.expected_cost(game, j, record.strategies, record.realized_context)
                    cost_gap = max(cost_gap, abs(brute - fast))

            cce_gap = abs(
                oracle_service.exhaustive_cce_gap(trace, limit)
                - metrics_service.cce_epsilon(trace, num_contexts=game.num_contexts).epsilon
            )

            comparator_gap = 0.0
            if game.actions_per_player <= 4:
                for j in range(game.num_players):
                    view = metrics_service.player_trace(trace, j)
                    for z in range(game.num_contexts):
                        vertex = metrics_service.best_per_context_comparator(trace, j, z)
                        vertex_value = float(vertex.probs @ view.losses[view.contexts == z].sum(axis=0))
                        _, grid_value = oracle_service.grid_comparator(trace, j, z, resolution, limit)
                        # the grid contains every vertex, so it can only tie or lose
                        comparator_gap = max(comparator_gap, vertex_value - grid_value)

            checks = {
                "expected_cost": cost_gap,
                "cce_epsilon": cce_gap,
                "comparator": comparator_gap,
            }
            failed = [name for name, gap in checks.items() if gap > ORACLE_TOLERANCE]
            if failed:
                raise BoundViolationError(f"oracle disagreement on {', '.join(failed)}: {checks}")
            return {"rounds": len(trace), "max_abs_gap": checks}

        return self._guard(action)
