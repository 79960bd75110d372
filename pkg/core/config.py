"""
Lab Settings - Defaults < environment (LPPLAB_*) < key=value config file < flags
"""
import logging
import os
import sys
from enum import Enum
from pathlib import Path
from typing import Any

from dotenv import dotenv_values, find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core.exceptions import UsageError


ENV_PREFIX = "LPPLAB_"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class LabSettings(BaseModel):
    """Run-wide settings shared by every subcommand"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    workers: int = Field(default=1, ge=1)
    log_level: str = "WARNING"
    point_cap: float = Field(default=5e7, gt=0)
    k_trunc: float = Field(default=12.0, gt=0)
    psi: float = Field(default=4.0, gt=0)
    mesh_refine: int = Field(default=4, ge=1)
    output_format: OutputFormat = OutputFormat.JSON

    @field_validator("log_level", mode="before")
    @classmethod
    def _known_level(cls, value: Any) -> str:
        level = str(value).upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {value!r}")
        return level


SETTING_KEYS = frozenset(LabSettings.model_fields)


def env_settings(env_file: str | None = None) -> dict[str, str]:
    """LPPLAB_* variables, after loading a .env file if one is found"""
    path = env_file or find_dotenv(usecwd=True)
    if path:
        load_dotenv(path, override=False)
    values = {}
    for key in SETTING_KEYS:
        raw = os.environ.get(ENV_PREFIX + key.upper())
        if raw is not None and raw != "":
            values[key] = raw
    return values


def read_config_file(path: str | Path) -> dict[str, str]:
    """Plain key=value lines; '#' comments and blank lines are ignored"""
    target = Path(path)
    if not target.is_file():
        raise UsageError(f"config file not found: {target}")
    values = dotenv_values(target)
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise UsageError(f"{target}: keys without a value: {', '.join(missing)}")
    return {key.strip().lower().replace("-", "_"): value for key, value in values.items()}


def resolve_settings(*layers: dict[str, Any]) -> LabSettings:
    """Merge layers left to right (later wins), ignoring None values"""
    merged: dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if value is None:
                continue
            if key not in SETTING_KEYS:
                raise UsageError(f"unknown setting {key!r}")
            merged[key] = value
    try:
        return LabSettings(**merged)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())
        raise UsageError(f"invalid settings: {problems}") from e


def configure_logging(level: str) -> None:
    """Human logs to stderr only; stdout carries data"""
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
