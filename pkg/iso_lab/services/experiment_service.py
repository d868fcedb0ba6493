"""
Experiment service

Drives the interaction protocol end to end: nature draws Z_t, every player
predicts it, ISO-GRPO learners play and update, and the finished trace is
turned into metrics and output files. Sweeps run independent (value, seed)
cells, optionally in worker processes, and merge their rows in a single writer.
"""

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..models.config import RunConfig
from ..models.game import GameSpec
from ..models.learner import LearnerBank
from ..models.trace import RoundRecord, RunMetrics
from ..utils.errors import BoundViolationError, ConfigurationError, IsoLabError, TraceError
from . import game_service, learner_service, metrics_service, output_service, prediction_service
from .cache_service import get_cache
from .parser_service import ParserService

logger = logging.getLogger(__name__)

PILOT_ETA = 1.0
TRACE_TOLERANCE = 1e-12


@dataclass
class SimulationResult:
    """In-memory outcome of one pass over the horizon"""

    trace: List[RoundRecord]
    mistakes: List[int]
    bank: LearnerBank


@dataclass
class RunResult:
    """Outcome of run_single"""

    run_id: str
    seed: int
    eta: float
    noise: float
    game: GameSpec
    simulation: SimulationResult
    metrics: RunMetrics
    rows: List[List[Any]]
    files: List[Path] = field(default_factory=list)
    pilot: Optional["RunResult"] = None


@dataclass
class SweepResult:
    """Outcome of run_sweep"""

    header: List[str]
    rows: List[List[Any]]
    failures: List[Dict[str, Any]]
    files: List[Path] = field(default_factory=list)


def config_digest(config: RunConfig) -> str:
    """SHA-256 of the canonical configuration, ignoring seeds and output"""
    payload = config.model_dump(mode="json", exclude={"seeds", "output"})
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def noise_level(config: RunConfig, num_players: int) -> float:
    """Largest corruption probability among noisy predictors"""
    levels = [
        config.predictor_for(j).p for j in range(num_players)
        if config.predictor_for(j).kind == "noisy"
    ]
    return max(levels, default=0.0)


def apply_sweep_value(config: RunConfig, value: float) -> RunConfig:
    """Configuration of one sweep cell"""
    if config.sweep is None:
        raise ConfigurationError("sweep: no sweep axis configured")
    if config.sweep.axis == "eta":
        return config.model_copy(update={"eta": float(value), "sweep": None})
    if isinstance(config.predictors, list):
        predictors = [p.model_copy(update={"kind": "noisy", "p": float(value)}) for p in config.predictors]
    else:
        predictors = config.predictors.model_copy(update={"kind": "noisy", "p": float(value)})
    return config.model_copy(update={"predictors": predictors, "sweep": None})


class ExperimentService:
    """Experiment harness"""

    def __init__(self, project_root: Optional[str] = None):
        """
        Initialize the harness

        Args:
            project_root: Base directory for relative game paths
        """
        self.project_root = project_root
        self.parser = ParserService(project_root)
        self.cache = get_cache()

    # ==================== Setup ====================

    def resolve_game(self, config: RunConfig, seed: int) -> GameSpec:
        """
        Game of a run

        Generators without their own seed use the run seed, so each seed of a
        suite plays a different random game; a fixed game seed pins the game.
        """
        game_config = config.game
        generator_seed = game_config.seed if game_config.seed is not None else seed
        key_payload = game_config.model_dump(mode="json")
        if game_config.generator == "random_bilinear" or (
            game_config.generator == "zero_sum_2p" and game_config.seed is not None
        ):
            key_payload["effective_seed"] = generator_seed
        if game_config.path is not None:
            # same relative path under another root, or an edited file, is another game
            resolved = self.parser.resolve(game_config.path).resolve()
            key_payload["resolved_path"] = str(resolved)
            try:
                key_payload["mtime_ns"] = resolved.stat().st_mtime_ns
            except OSError:
                key_payload["mtime_ns"] = None
        key = hashlib.sha256(json.dumps(key_payload, sort_keys=True).encode("utf-8")).hexdigest()
        cached = self.cache.get(key)
        if cached is not None:
            return cached

        if game_config.path is not None:
            game = self.parser.load_game_file(game_config.path)
        elif game_config.inline is not None:
            game = self.parser.parse_game(game_config.inline.model_dump(), source="game.inline")
        elif game_config.generator == "random_bilinear":
            game = game_service.random_bilinear(
                game_config.players, game_config.actions, game_config.dim, game_config.contexts, generator_seed
            )
        elif game_config.generator == "zero_sum_2p":
            game = game_service.zero_sum_2p(game_config.actions, game_config.seed)
        elif game_config.generator == "cyclic_context_demo":
            game = game_service.cyclic_context_demo()
        else:
            game = game_service.regime_switch(game_config.players, game_config.actions, game_config.contexts)
        self.cache.set(key, game)
        return game

    def validate(self, config: RunConfig, seed: int = 0) -> GameSpec:
        """
        Check a configuration against its game without running it

        Raises:
            ConfigurationError: predictors or context process inconsistent with the game
            AssumptionViolationError: the game violates the bounded-cost assumption
        """
        game = self.resolve_game(config, seed)
        if isinstance(config.predictors, list) and len(config.predictors) != game.num_players:
            raise ConfigurationError(
                f"predictors lists {len(config.predictors)} entries, game has {game.num_players} players"
            )
        for j in range(game.num_players):
            field_path = f"predictors[{j}]" if isinstance(config.predictors, list) else "predictors"
            prediction_service.validate_predictor(
                config.predictor_for(j), game.num_contexts, config.horizon, field=field_path
            )
        prediction_service.context_sequence(config.context_process, game.num_contexts, config.horizon, seed)
        return game

    # ==================== Round loop ====================

    def simulate(self, config: RunConfig, game: GameSpec, eta: float, seed: int) -> SimulationResult:
        """Play config.horizon rounds and return the trace"""
        horizon = config.horizon
        num_players = game.num_players
        contexts = prediction_service.context_sequence(config.context_process, game.num_contexts, horizon, seed)
        predictors = [
            prediction_service.ContextPredictor(
                config.predictor_for(j), game.num_contexts, seed, config.shared_prediction_stream
            )
            for j in range(num_players)
        ]
        ledger = prediction_service.MistakeLedger(horizon, num_players)
        pooled = config.routing == "pooled"
        bank = learner_service.new_bank(
            num_players, 1 if pooled else game.num_contexts, game.actions_per_player, eta
        )

        trace: List[RoundRecord] = []
        for t in range(horizon):
            realized = int(contexts[t])
            if config.routing == "oracle":
                predictions = (realized,) * num_players
            else:
                history = contexts[:t]
                predictions = tuple(
                    predictor.predict(j, t, realized, history) for j, predictor in enumerate(predictors)
                )
            for j, predicted in enumerate(predictions):
                ledger.record_and_count(t, j, predicted, realized)

            if pooled:
                profile, losses, bank = learner_service.pooled_round(bank, realized, game)
            else:
                profile, losses, bank = learner_service.iso_grpo_round(bank, predictions, realized, game)
            trace.append(RoundRecord(t, realized, predictions, profile, losses))

        return SimulationResult(trace=trace, mistakes=ledger.per_player_mistakes.tolist(), bank=bank)

    @staticmethod
    def audit_trace(game: GameSpec, trace: Sequence[RoundRecord]) -> None:
        """
        Recompute every stored loss from stored strategies and Z_t

        Raises:
            TraceError: a stored loss differs by more than 1e-12
        """
        for record in trace:
            for j, stored in enumerate(record.losses):
                recomputed = game_service.loss_vector(
                    game, j, record.strategies.without(j), record.realized_context
                )
                if np.max(np.abs(recomputed.values - stored.values)) > TRACE_TOLERANCE:
                    raise TraceError(f"round {record.round}, player {j}: stored loss differs from recomputation")

    # ==================== Runs ====================

    def _execute(
        self,
        config: RunConfig,
        game: GameSpec,
        eta: float,
        seed: int,
        run_id: str,
        output_dir: Optional[Path],
    ) -> RunResult:
        simulation = self.simulate(config, game, eta, seed)
        if config.audit:
            self.audit_trace(game, simulation.trace)
        metrics = metrics_service.compute_run_metrics(
            simulation.trace, eta, game.num_contexts, simulation.mistakes, horizon=config.horizon
        )
        if config.audit and config.routing != "pooled" and not metrics.certified_bound_ok:
            raise BoundViolationError(f"run {run_id}: contextual regret exceeds the certified bound")

        noise = noise_level(config, game.num_players)
        row = output_service.summary_row(
            run_id, seed, game.num_players, game.actions_per_player, game.num_contexts, noise, metrics
        )
        result = RunResult(
            run_id=run_id, seed=seed, eta=eta, noise=noise, game=game,
            simulation=simulation, metrics=metrics, rows=[row],
        )
        if output_dir is not None:
            regrets = [
                metrics_service.instantaneous_regret(simulation.trace, j, num_contexts=game.num_contexts)
                for j in range(game.num_players)
            ]
            result.files.append(output_service.write_trace(
                output_dir / f"trace_{run_id}.csv", simulation.trace, regrets
            ))
            result.files.append(output_service.write_yaml_atomic(
                output_dir / f"bank_{run_id}.yaml", learner_service.bank_to_snapshot(simulation.bank)
            ))
        logger.info(
            "run %s finished: eta=%.6g L_T=%s contextual regret=%s",
            run_id, eta, metrics.mistakes, [round(r, 6) for r in metrics.contextual_regret]
        )
        return result

    def run_cell(self, config: RunConfig, seed: int, output_dir: Optional[Path]) -> RunResult:
        """
        One run without summary writing: pilot pass first when eta is 'rule'
        """
        game = self.validate(config, seed)
        run_id = f"{config_digest(config)[:10]}-s{seed}"
        pilot = None
        if config.eta == "rule":
            pilot = self._execute(config, game, PILOT_ETA, seed, f"{run_id}-pilot", output_dir)
            variations = [sum(v) for v in pilot.metrics.variation]
            eta = min(
                metrics_service.eta_rule(game.num_contexts, game.actions_per_player, l_t, var)
                for l_t, var in zip(pilot.metrics.mistakes, variations)
            )
            logger.info("run %s: eta rule chose %.6g from pilot L_T=%s", run_id, eta, pilot.metrics.mistakes)
        else:
            eta = float(config.eta)
        result = self._execute(config, game, eta, seed, run_id, output_dir)
        if pilot is not None:
            result.pilot = pilot
            result.rows = pilot.rows + result.rows
            result.files = pilot.files + result.files
        return result

    def run_single(self, config: RunConfig, seed: int, write: bool = True) -> RunResult:
        """
        Run one configuration for one seed

        Writes trace_<run_id>.csv, bank_<run_id>.yaml, summary.csv and
        config_echo.yaml into config.output when write is true.
        """
        output_dir = Path(config.output) if write else None
        logger.info("run started: seed=%d horizon=%d routing=%s", seed, config.horizon, config.routing)
        result = self.run_cell(config, seed, output_dir)
        if output_dir is not None:
            header = output_service.summary_header(result.game.num_players, result.game.num_contexts)
            result.files.append(output_service.write_summary(output_dir / "summary.csv", header, result.rows))
            result.files.append(self.write_config_echo(config, output_dir))
        return result

    def run_sweep(self, config: RunConfig, threads: int = 1, write: bool = True) -> SweepResult:
        """
        Run every (sweep value, seed) cell

        Cells are independent; with threads > 1 they run in worker processes.
        Rows are ordered by (value, seed) and followed by mean/stderr rows per
        value. Failed cells are reported, not raised.
        """
        if config.sweep is None:
            raise ConfigurationError("sweep: the configuration has no sweep axis")
        output_dir = Path(config.output) if write else None
        values = sorted(config.sweep.values)
        seeds = sorted(config.seeds)
        cells = [(value, seed) for value in values for seed in seeds]
        jobs = [
            (apply_sweep_value(config, value).model_dump(mode="json"), seed, self.project_root,
             str(output_dir) if output_dir else None)
            for value, seed in cells
        ]
        logger.info("sweep over %s: %d cells, %d worker(s)", config.sweep.axis, len(cells), threads)

        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as executor:
                outcomes = list(executor.map(_run_cell_job, jobs))
        else:
            outcomes = [_run_cell_job(job) for job in jobs]

        header: Optional[List[str]] = None
        rows: List[List[Any]] = []
        per_value: Dict[float, List[List[Any]]] = {}
        failures: List[Dict[str, Any]] = []
        files: List[Path] = []
        for (value, seed), outcome in zip(cells, outcomes):
            if "error" in outcome:
                logger.error("sweep cell %s=%g seed=%d failed: %s", config.sweep.axis, value, seed, outcome["error"]["message"])
                failures.append({"axis": config.sweep.axis, "value": value, "seed": seed, **outcome["error"]})
                continue
            header = header or outcome["header"]
            rows.extend(outcome["rows"])
            per_value.setdefault(value, []).append(outcome["rows"][-1])
            files.extend(Path(f) for f in outcome["files"])

        if header is not None:
            for value in values:
                if value in per_value:
                    label = f"{config.sweep.axis}={value:g}"
                    rows.extend(output_service.aggregate_rows(label, per_value[value], header))
        result = SweepResult(header=header or [], rows=rows, failures=failures, files=files)

        if output_dir is not None:
            if header is not None:
                files.append(output_service.write_summary(output_dir / "summary.csv", header, rows))
            if failures:
                failure_header = ["axis", "value", "seed", "code", "message"]
                files.append(output_service.write_summary(
                    output_dir / "failures.csv",
                    failure_header,
                    [[f.get(k) for k in failure_header] for f in failures],
                ))
            files.append(self.write_config_echo(config, output_dir))
        return result

    @staticmethod
    def write_config_echo(config: RunConfig, output_dir: Path) -> Path:
        """Canonical configuration with its digest"""
        return output_service.write_yaml_atomic(
            output_dir / "config_echo.yaml",
            {"digest": config_digest(config), "config": config.model_dump(mode="json")},
        )


def _run_cell_job(job: Tuple[Dict[str, Any], int, Optional[str], Optional[str]]) -> Dict[str, Any]:
    """Worker entry point for one sweep cell"""
    config_data, seed, project_root, output_dir = job
    try:
        config = RunConfig.model_validate(config_data)
        service = ExperimentService(project_root)
        result = service.run_cell(config, seed, Path(output_dir) if output_dir else None)
        return {
            "header": output_service.summary_header(result.game.num_players, result.game.num_contexts),
            "rows": result.rows,
            "files": [str(f) for f in result.files],
        }
    except IsoLabError as e:
        return {"error": e.to_dict()}
    except Exception as e:
        return {"error": {"code": "INTERNAL_ERROR", "message": str(e)}}
