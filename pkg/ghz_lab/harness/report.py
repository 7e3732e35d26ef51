"""Verification reports and atomic file output."""

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from ghz_lab import __version__


def plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_atomic(path: str | os.PathLike, text: str, newline: str | None = None) -> Path:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


@dataclass
class VerificationReport:
    campaign: str
    seed: int | None
    samples: int
    tolerance: float
    per_sample: list[float]
    variant_flags: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)
    rows: list[dict[str, Any]] | None = None
    version: str = __version__
    timestamp: str | None = None

    @property
    def max_residual(self) -> float:
        return max(self.per_sample, default=0.0)

    @property
    def mean_residual(self) -> float:
        return float(np.mean(self.per_sample)) if self.per_sample else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def stamp(self) -> "VerificationReport":
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return self

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "campaign": self.campaign,
            "seed": self.seed,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "variant_flags": plain(self.variant_flags),
            "residuals": {
                "max": self.max_residual,
                "mean": self.mean_residual,
                "per_sample": plain(self.per_sample),
            },
        }
        if self.rows is not None:
            out["rows"] = plain(self.rows)
        out["pass"] = self.passed
        out["version"] = self.version
        out["details"] = plain(self.details)
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def write(self, path: str | os.PathLike) -> Path:
        return write_atomic(path, self.to_json())
