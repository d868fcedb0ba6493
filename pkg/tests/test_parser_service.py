from __future__ import annotations

import pytest
import yaml

from iso_lab.config import settings
from iso_lab.services import game_service
from iso_lab.services.parser_service import ParserService
from iso_lab.utils.errors import AssumptionViolationError, ConfigurationError, FileParseError


def _write(path, data) -> str:
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def test_demo_game_file_matches_generator(repo_root):
    parser = ParserService(str(repo_root))

    game = parser.load_game_file("config/games/demo_game.yaml")

    assert game == game_service.cyclic_context_demo()


def test_missing_and_unreadable_files(tmp_path):
    parser = ParserService(str(tmp_path))

    with pytest.raises(FileParseError):
        parser.load_game_file("absent.yaml")

    (tmp_path / "bad.yaml").write_text("players: [2\n", encoding="utf-8")
    with pytest.raises(FileParseError):
        parser.load_game_file("bad.yaml")

    (tmp_path / "list.yaml").write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(FileParseError):
        parser.load_game_file("list.yaml")


def test_missing_keys_are_listed(tmp_path):
    path = _write(tmp_path / "game.yaml", {"players": 2, "actions": 2})

    with pytest.raises(FileParseError) as excinfo:
        ParserService().load_game_file(path)

    assert "dim" in excinfo.value.message
    assert "features" in excinfo.value.message


def test_shape_errors_become_parse_errors(tmp_path):
    path = _write(tmp_path / "game.yaml", {
        "players": 2, "actions": 2, "dim": 1, "contexts": [[1.0]],
        "features": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]],
    })

    with pytest.raises(FileParseError):
        ParserService().load_game_file(path)


def test_assumption_violation_propagates(tmp_path):
    path = _write(tmp_path / "game.yaml", {
        "players": 2, "actions": 2, "dim": 1, "contexts": [[1.0], [0.5]],
        "features": [[0.0, 0.0, 0.0, 0.0], [0.0, 1.5, 0.0, 0.0]],
    })

    with pytest.raises(AssumptionViolationError) as excinfo:
        ParserService().load_game_file(path)

    assert (excinfo.value.player, excinfo.value.joint_action, excinfo.value.context) == (1, (0, 1), 0)


def test_run_config_errors_list_field_paths():
    with pytest.raises(ConfigurationError) as excinfo:
        ParserService.parse_run_config({
            "schema_version": 1,
            "game": {"generator": "zero_sum_2p"},
            "horizon": 0,
            "eta": 1.5,
            "bogus": True,
        })

    message = excinfo.value.message
    assert "horizon:" in message
    assert "eta:" in message
    assert "bogus:" in message


def test_run_config_requires_schema_version_and_one_game_source():
    with pytest.raises(ConfigurationError) as excinfo:
        ParserService.parse_run_config({"game": {"generator": "zero_sum_2p"}, "horizon": 5, "eta": 0.1})
    assert "schema_version" in excinfo.value.message

    with pytest.raises(ConfigurationError):
        ParserService.parse_run_config({
            "schema_version": 1,
            "game": {"generator": "zero_sum_2p", "path": "game.yaml"},
            "horizon": 5,
            "eta": 0.1,
        })


def test_sweep_values_are_checked_per_axis():
    base = {"schema_version": 1, "game": {"generator": "regime_switch"}, "horizon": 5, "eta": 0.1}

    with pytest.raises(ConfigurationError):
        ParserService.parse_run_config({**base, "sweep": {"axis": "eta", "values": [0.5, 1.5]}})
    with pytest.raises(ConfigurationError):
        ParserService.parse_run_config({**base, "sweep": {"axis": "p", "values": []}})

    config = ParserService.parse_run_config({**base, "sweep": {"axis": "p", "values": [0.0, 1.0]}})
    assert config.sweep.values == [0.0, 1.0]


def test_example_configs_are_valid(repo_root):
    parser = ParserService(str(repo_root))

    for name in ("demo_run.yaml", "noise_sweep.yaml", "eta_sweep.yaml"):
        config = parser.load_run_config(f"config/{name}")
        assert config.schema_version == 1

    assert parser.load_run_config("config/noise_sweep.yaml").sweep.axis == "p"


def test_output_directory_defaults_to_settings(monkeypatch):
    base = {"schema_version": 1, "game": {"generator": "regime_switch"}, "horizon": 5, "eta": 0.1}

    assert ParserService.parse_run_config(base).output == settings.OUTPUT_DIR
    monkeypatch.setattr(settings, "OUTPUT_DIR", "elsewhere/runs")
    assert ParserService.parse_run_config(base).output == "elsewhere/runs"
    assert ParserService.parse_run_config({**base, "output": "mine"}).output == "mine"
