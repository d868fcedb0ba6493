"""
Process settings

Defaults that are not part of a run configuration. Values come from
environment variables prefixed ISO_LAB_ or from a .env file.
"""
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """iso-lab settings"""

    model_config = SettingsConfigDict(env_prefix="ISO_LAB_", env_file=".env", extra="ignore")

    # Output
    OUTPUT_DIR: str = "runs"
    FLOAT_DIGITS: int = 12

    # Sweep cells executed in parallel
    THREADS: int = 1

    # Logging
    LOG_LEVEL: str = "INFO"

    # Brute-force oracle limits
    ORACLE_MAX_JOINT_ACTIONS: int = 4096
    ORACLE_MAX_ROUNDS: int = 512

    # Validated games kept per process
    GAME_CACHE_SIZE: int = 32


# Create settings instance
settings = Settings()
