"""
Plain-text ``key = value`` configuration for the command line.

Recognised keys::

    seed = 42
    out_dir = results
    eq15_variant = squared        (alias: c23_variant)
    samples = 1000
    restarts = 20
    grid_points = 101
    tol.two-sided = 1e-8

Lines starting with ``#`` and blank lines are ignored.
"""

import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from qcodes import validators as vals

from ghz_lab.analytic import C23_VARIANTS
from ghz_lab.errors import ConfigError
from ghz_lab.harness.campaigns import DEFAULT_TOLERANCES

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CliConfig:
    seed: int = 42
    out_dir: Path = Path(".")
    eq15_variant: str = "squared"
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    samples: int | None = None
    restarts: int = 20
    grid_points: int = 101

    def tolerance(self, campaign: str) -> float:
        return self.tolerances[campaign]

    def override(self, **changes: Any) -> "CliConfig":
        """Copy with every non-None keyword applied (command-line flags win)."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


_FIELDS: dict[str, tuple[vals.Validator, Any]] = {
    "seed": (vals.Ints(min_value=0), int),
    "out_dir": (vals.Strings(min_length=1), Path),
    "eq15_variant": (vals.Enum(*C23_VARIANTS), str),
    "samples": (vals.Ints(min_value=1), int),
    "restarts": (vals.Ints(min_value=1), int),
    "grid_points": (vals.Ints(min_value=2), int),
}
_ALIASES = {"c23_variant": "eq15_variant"}
_tolerance_validator = vals.Numbers(min_value=0.0)


def _convert(raw: str, kind: Any) -> Any:
    return int(raw) if kind is int else raw


def parse_config(text: str, source: str = "<config>") -> CliConfig:
    values: dict[str, Any] = {}
    tolerances = dict(DEFAULT_TOLERANCES)
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        try:
            if key.startswith("tol."):
                campaign = key.removeprefix("tol.")
                if campaign not in DEFAULT_TOLERANCES:
                    raise ConfigError(f"{source}:{lineno}: unknown campaign {campaign!r}")
                value = float(raw)
                _tolerance_validator.validate(value)
                tolerances[campaign] = value
                continue
            key = _ALIASES.get(key, key)
            if key not in _FIELDS:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            validator, kind = _FIELDS[key]
            value = _convert(raw, kind)
            validator.validate(value)
            values[key] = Path(value) if kind is Path else value
        except ConfigError:
            raise
        except (ValueError, TypeError) as e:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {e}") from e
    return CliConfig(tolerances=tolerances, **values)


def load_config(path: str | os.PathLike | None) -> CliConfig:
    if path is None:
        return CliConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    config = parse_config(text, str(path))
    log.info("loaded config from %s", path)
    return config
