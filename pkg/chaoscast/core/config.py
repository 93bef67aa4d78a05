"""
chaoscast/core/config.py

Runtime configuration read from the environment (prefix ``CHAOSCAST_``) and an
optional ``.env`` file, plus the loader for TOML run manifests.
"""
import os
import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional

import toml
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from chaoscast import __version__

logger = logging.getLogger(__name__)


def load_toml_file(path: Path) -> Dict[str, Any]:
    """
    Reads a TOML document into a plain dictionary.

    Args:
        path: Location of the TOML file

    Returns:
        dict: Parsed document; the ``[run]`` table is unwrapped when present

    Raises:
        FileNotFoundError: If the file does not exist
        toml.TomlDecodeError: If the file is not valid TOML
    """
    logger.debug(f"Loading TOML file {path}")
    document = toml.load(str(path))
    return document.get("run", document)


class Config(BaseSettings):
    """Application configuration loaded from environment and static values."""

    model_config = SettingsConfigDict(
        env_prefix="CHAOSCAST_",
        env_file=".env",
        extra="ignore",
    )

    # Project metadata
    PROJECT_NAME: str = "chaoscast"
    PROJECT_DESCRIPTION: str = "Chaotic ODE forecasting benchmark"
    PROJECT_VERSION: str = __version__

    # Directories
    DATA: Path = Field(Path("data"), description="Root of the generated instance tree")
    RESULTS: Path = Field(Path("results"), description="Root for scores, tuned configs and reports")

    # Execution
    JOBS: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    MASTER_SEED: int = Field(42, ge=0)
    ASYNC_BACKEND: Literal["asyncio", "trio"] = "asyncio"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[Path] = None


# Singleton config instance
settings = Config()
