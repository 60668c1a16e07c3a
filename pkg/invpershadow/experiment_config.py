"""
Experiment configuration files.

One `key = value` assignment per line, `#` starts a comment, list values are
comma separated.  Angles accept `pi` multiples such as `pi/2` or `2*pi`.
Every validation failure is reported as "line N: field 'x': message".
"""

from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator

from . import config
from .errors import ConfigError
from .logger_config import logger

SystemName = Literal["cat", "toral", "perturbed-cat", "rotation", "linear"]

_PI_MULTIPLE = re.compile(r"^([-+]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?$")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # dynamical system and orbit selection
    system: SystemName = "cat"
    matrix: Optional[list[float]] = None
    kappa: float = 0.05
    angle: float = math.pi / 2.0
    denominator: int = Field(default=1, ge=1)
    orbit_index: int = Field(default=0, ge=0)

    # adversaries
    lemma: Optional[int] = None
    d: Optional[float] = Field(default=None, gt=0.0)
    L: int = Field(default=10, ge=1)
    nu: int = Field(default=1, ge=1)
    chi: float = 2.0 * math.pi
    radii: list[float] = [1.0]
    bottom: list[float] = []
    l: int = Field(default=1, ge=1)
    theta: float = math.pi / 2.0
    w: list[float] = [1.0, 0.0]
    r_bar: float = Field(default=4.0, gt=0.0)
    tail: list[float] = []
    e0: Optional[list[float]] = None
    trials: int = Field(default=100, ge=1)
    delta: float = Field(default=1e-8, gt=0.0)

    # shadowing campaigns
    seeds: int = Field(default=200, ge=1)
    d_values: list[float] = [1e-3, 1e-4]
    method_period: int = Field(default=2, ge=1)
    window_periods: int = Field(default=4, ge=1)

    # sampling and execution
    samples: int = Field(default=config.DEFAULT_SAMPLE_COUNT, ge=1)
    psi_count: int = Field(default=50, ge=1)
    seed: int = config.MASTER_SEED
    workers: int = Field(default=config.WORKERS, ge=1)

    _lines: dict[str, int] = PrivateAttr(default_factory=dict)

    @field_validator("lemma")
    @classmethod
    def _known_lemma(cls, value):
        if value is not None and value not in (2, 3, 4):
            raise ValueError(f"must be 2, 3 or 4, got {value}")
        return value

    @field_validator("matrix")
    @classmethod
    def _square_matrix(cls, value):
        if value is not None:
            n = math.isqrt(len(value))
            if n == 0 or n * n != len(value):
                raise ValueError(f"needs n*n row-major entries, got {len(value)}")
        return value

    @field_validator("d_values")
    @classmethod
    def _defect_list(cls, value):
        if not value or any(v < 0 for v in value):
            raise ValueError("needs at least one non-negative defect")
        return value

    def line_of(self, name: str) -> int:
        return self._lines.get(name, 0)

    def error(self, name: str, message: str) -> ConfigError:
        """A ConfigError pointing at the line that set `name`."""
        return ConfigError(f"line {self.line_of(name)}: field '{name}': {message}")

    def matrix_rows(self) -> list[list[float]]:
        if self.matrix is None:
            raise self.error("matrix", f"system '{self.system}' needs a matrix")
        n = math.isqrt(len(self.matrix))
        return [self.matrix[i * n:(i + 1) * n] for i in range(n)]


def _list_fields() -> set[str]:
    return {name for name, info in ExperimentConfig.model_fields.items() if "list" in str(info.annotation)}


def parse_scalar(text: str) -> str | float:
    """Expand `k*pi/q` forms to floats; leave everything else for pydantic to coerce."""
    match = _PI_MULTIPLE.match(text.strip())
    if not match:
        return text.strip()
    factor = match.group(1)
    factor = 1.0 if factor in ("", "+") else -1.0 if factor == "-" else float(factor)
    divisor = float(match.group(2)) if match.group(2) else 1.0
    return factor * math.pi / divisor


def parse_config_text(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    list_fields = _list_fields()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in lines:
            raise ConfigError(f"line {lineno}: field '{key}': already set on line {lines[key]}")
        lines[key] = lineno
        if key in list_fields:
            values[key] = [parse_scalar(item) for item in value.split(",") if item.strip()]
        else:
            values[key] = parse_scalar(value)

    try:
        cfg = ExperimentConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        name = str(first["loc"][0]) if first["loc"] else "?"
        message = f"line {lines.get(name, 0)}: field '{name}': {first['msg']}"
        logger.error(f"Invalid configuration: {message}")
        raise ConfigError(message) from e
    cfg._lines = lines
    logger.debug(f"Parsed configuration with {len(lines)} fields")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    logger.info(f"Loading configuration from {path}")
    return parse_config_text(text)
