"""
File parsing service

Loads YAML game files and run configurations. Game files use the keys
players, actions, dim, contexts and features (per player, the K**J feature
vectors in lexicographic joint-action order, flat or nested).
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import ValidationError

from ..models.config import RunConfig
from ..models.game import GameSpec
from ..utils.errors import ConfigurationError, FileParseError, InvalidParameterError
from . import game_service

logger = logging.getLogger(__name__)

GAME_KEYS = ("players", "actions", "dim", "contexts", "features")


class ParserService:
    """File parsing service"""

    def __init__(self, project_root: Optional[str] = None):
        """
        Initialize the parser

        Args:
            project_root: Base directory for relative paths, defaults to the
                current working directory
        """
        self.project_root = Path(project_root) if project_root else Path.cwd()

    def resolve(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.project_root / path

    def load_yaml(self, path: Union[str, Path]) -> Dict[str, Any]:
        """
        Read a YAML mapping

        Raises:
            FileParseError: missing file, invalid YAML or a non-mapping document
        """
        file_path = self.resolve(path)
        if not file_path.exists():
            raise FileParseError(str(file_path), "file does not exist")
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise FileParseError(str(file_path), str(e))
        if not isinstance(data, dict):
            raise FileParseError(str(file_path), "top level must be a mapping")
        return data

    def parse_game(self, data: Dict[str, Any], source: str = "<inline>") -> GameSpec:
        """
        Build a game from a parsed mapping

        Raises:
            FileParseError: missing keys or badly shaped entries
            AssumptionViolationError: some |<phi, z>| exceeds 1 (names the entry)
        """
        missing = [key for key in GAME_KEYS if key not in data]
        if missing:
            raise FileParseError(source, f"missing keys: {', '.join(missing)}")
        try:
            return game_service.build_game(
                players=data["players"],
                actions=data["actions"],
                dim=data["dim"],
                features=data["features"],
                contexts=data["contexts"],
            )
        except InvalidParameterError as e:
            raise FileParseError(source, e.message)
        except (TypeError, ValueError) as e:
            raise FileParseError(source, f"malformed numeric entry: {e}")

    def load_game_file(self, path: Union[str, Path]) -> GameSpec:
        """Read and validate a YAML game file"""
        data = self.load_yaml(path)
        game = self.parse_game(data, source=str(self.resolve(path)))
        logger.info(
            "loaded game %s: J=%d K=%d d=%d m=%d",
            path, game.num_players, game.actions_per_player, game.feature_dim, game.num_contexts
        )
        return game

    @staticmethod
    def parse_run_config(data: Dict[str, Any]) -> RunConfig:
        """
        Validate a run configuration mapping

        Raises:
            ConfigurationError: lists every failing field path
        """
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            problems = []
            for error in e.errors():
                location = ".".join(str(part) for part in error["loc"]) or "<root>"
                problems.append(f"{location}: {error['msg']}")
            raise ConfigurationError("invalid run configuration; " + "; ".join(problems))

    def load_run_config(self, path: Union[str, Path]) -> RunConfig:
        """Read and validate a YAML run configuration"""
        return self.parse_run_config(self.load_yaml(path))
