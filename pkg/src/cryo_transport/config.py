"""Experiment configuration: dataclass, flat ``key = value`` files, validation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import InvalidConfig
from .spectral import NUMERIC_N_MAX

COMMANDS = ("spectrum", "simulate", "classify", "imaging")
FORMATS = ("csv", "json")

# per-command defaults that differ from the dataclass defaults
_COMMAND_DEFAULTS = {
    "spectrum": {"format": "csv"},
    "simulate": {"n_frames": 2000, "h": 0.35, "seed": 42},
    "classify": {"n_frames": 2000, "h": 0.25, "seed": 1},
    "imaging": {"n_frames": 200, "h": 0.3, "seed": 7},
}


@dataclass
class ExperimentConfig:
    command: str = "simulate"
    seed: int = 0
    n_frames: int = 2000
    h: float = 0.35
    n_max: int = 4
    h_grid: str = "0:2:0.01"
    k: int = 20
    outlier_frac: float = 0.2
    threshold: float | None = None          # None -> 1 - h
    normalization: str = "degree"
    rescale: bool = True
    gap_tol: float = 0.15
    side: int = 64
    extent: float = 1.0
    n_angles: int = 72
    snr: float | None = None                # None -> clean images
    epsilon: float | None = None            # None -> calibrated from h
    refine: bool = False
    end_to_end: bool = False
    stack_out: str | None = None
    graph_out: str | None = None
    out: str | None = None
    format: str = "json"
    threads: int = 1

    @classmethod
    def for_command(cls, command: str, /, **overrides) -> "ExperimentConfig":
        if command not in COMMANDS:
            raise InvalidConfig("command", f"unknown command {command!r}")
        if overrides.pop("command", command) != command:
            raise InvalidConfig("command", f"config is for another command, not {command!r}")
        values = dict(_COMMAND_DEFAULTS[command])
        values.update(overrides)
        cfg = cls(command=command)
        cfg.update(values)
        return cfg

    def update(self, values: dict) -> None:
        names = {f.name: f for f in fields(self)}
        for key, raw in values.items():
            if key not in names:
                raise InvalidConfig(key, "unknown configuration key")
            setattr(self, key, _coerce(key, raw))

    @property
    def effective_threshold(self) -> float:
        return 1.0 - self.h if self.threshold is None else self.threshold

    def h_values(self) -> np.ndarray:
        return parse_h_grid(self.h_grid)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        """Check every parameter the selected command uses; raise on the first bad key."""
        c = self
        _require(c.command in COMMANDS, "command", f"must be one of {COMMANDS}")
        _require(isinstance(c.seed, int) and 0 <= c.seed < 2**64, "seed", "must be a u64")
        _require(c.format in FORMATS, "format", f"must be one of {FORMATS}")
        _require(c.threads >= 1, "threads", "must be >= 1")
        if c.command == "spectrum":
            _require(1 <= c.n_max <= NUMERIC_N_MAX, "n_max", f"must lie in [1, {NUMERIC_N_MAX}]")
            try:
                grid = c.h_values()
            except ValueError as exc:
                raise InvalidConfig("h_grid", str(exc)) from None
            _require(grid.size > 0 and np.all((grid >= 0) & (grid <= 2)), "h_grid",
                     "values must lie in [0, 2]")
            return c
        _require(_finite(c.h) and 0 < c.h <= 2, "h", "must lie in (0, 2]")
        _require(c.n_frames >= 2, "n_frames", "must be >= 2")
        if c.command == "simulate":
            _require(1 <= c.k <= c.n_frames, "k", "must lie in [1, n_frames]")
        if c.command in ("classify", "imaging"):
            _require(c.threshold is None or (_finite(c.threshold) and -1 < c.threshold < 1),
                     "threshold", "must lie in (-1, 1)")
            _require(c.normalization in ("degree", "none"), "normalization",
                     "must be 'degree' or 'none'")
            _require(_finite(c.gap_tol) and c.gap_tol >= -1, "gap_tol", "must be a finite number")
        if c.command == "classify":
            _require(_finite(c.outlier_frac) and 0 <= c.outlier_frac < 1, "outlier_frac",
                     "must lie in [0, 1)")
        if c.command == "imaging":
            _require(c.side >= 8, "side", "must be >= 8")
            _require(_finite(c.extent) and c.extent > 0, "extent", "must be positive")
            _require(c.n_angles >= 4, "n_angles", "must be >= 4")
            _require(c.snr is None or (c.snr > 0 and not math.isnan(c.snr)), "snr",
                     "must be positive")
            _require(c.epsilon is None or (_finite(c.epsilon) and c.epsilon >= 0), "epsilon",
                     "must be >= 0")
        return c


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def _require(ok: bool, key: str, message: str) -> None:
    if not ok:
        raise InvalidConfig(key, message)


_BOOL_KEYS = {"rescale", "refine", "end_to_end"}
_INT_KEYS = {"seed", "n_frames", "n_max", "k", "side", "n_angles", "threads"}
_FLOAT_KEYS = {"h", "outlier_frac", "gap_tol", "extent"}
_OPT_FLOAT_KEYS = {"threshold", "snr", "epsilon"}
_OPT_STR_KEYS = {"stack_out", "graph_out", "out"}


def _coerce(key, raw):
    try:
        if key in _BOOL_KEYS:
            if isinstance(raw, bool):
                return raw
            s = str(raw).strip().lower()
            if s in ("1", "true", "yes", "on"):
                return True
            if s in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if key in _INT_KEYS:
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError(f"not an integer: {raw!r}")
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _OPT_FLOAT_KEYS | _OPT_STR_KEYS:
            if raw is None or str(raw).strip().lower() in ("", "none"):
                return None
            return float(raw) if key in _OPT_FLOAT_KEYS else str(raw).strip()
        return str(raw).strip()
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(key, str(exc)) from None


def parse_h_grid(spec) -> np.ndarray:
    """``"start:stop:step"`` (inclusive stop) or a comma list such as ``"0,0.5,1"``."""
    if not isinstance(spec, str):
        return np.atleast_1d(np.asarray(spec, dtype=float))
    s = spec.strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid needs start:stop:step, got {spec!r}")
        start, stop, step = map(float, parts)
        if not step > 0 or stop < start:
            raise ValueError(f"bad range {spec!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        # integer multiples keep grid points such as 0.5 exact
        return np.round(start + step * np.arange(count), 12)
    vals = [float(v) for v in s.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty h grid")
    return np.array(vals)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; blank lines ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}", "expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_config_file(path) -> dict:
    return parse_config_text(Path(path).read_text())


def dump_config_text(cfg: ExperimentConfig) -> str:
    lines = []
    for k, v in cfg.to_dict().items():
        if v is None:
            v = "none"
        elif isinstance(v, float):
            v = "%.17g" % v
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
