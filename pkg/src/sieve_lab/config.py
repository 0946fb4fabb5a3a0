"""Experiment configuration and its flat ``key=value`` file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Optional, get_type_hints

EXPERIMENTS = (
    "clt",
    "lil",
    "coverage",
    "approx",
    "moments",
    "renewal-lil",
    "sup-lil",
    "strassen",
    "trace-dump",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one run.

    ``None`` means "the experiment's own default" (see :func:`resolved`).
    ``seed=0`` asks for an OS-entropy seed; the runner records the value it drew.
    """

    experiment: str = "trace-dump"
    law: str = "uniform"
    xi: str = "exp:1"
    eta: str = ""
    seed: int = 0
    replicates: Optional[int] = None
    j_max: Optional[int] = None
    j_min: int = 5
    n_exp: Optional[int] = None
    method: str = "balls"
    ball_budget: int = 10**8
    ks_bound: float = 0.05
    band_lo: Optional[float] = None
    band_hi: Optional[float] = None
    band_frac: float = 0.9
    pooled_min: float = 0.8
    abs_bound: float = 1.5
    abs_frac: float = 0.95
    grid_step: Optional[float] = None
    delta: float = 0.15
    eps: float = 0.25
    max_frac: float = 0.02
    ratio_bound: float = 3.0
    gaps: str = "2,4,8,16,32"
    y0: float = 0.0
    log_gaps: str = "2,3,4"
    log_y0: float = 8.0
    workers: int = 0
    out: str = ""

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


_DEFAULTS = {
    "clt": {"replicates": 2000, "n_exp": 12},
    "lil": {"replicates": 100, "j_max": 18, "band_lo": 0.4, "band_hi": 1.3, "grid_step": 0.25},
    "coverage": {"replicates": 100, "j_max": 18, "grid_step": 0.25},
    "approx": {"replicates": 100, "j_max": 18},
    "moments": {"replicates": 10_000},
    "renewal-lil": {"replicates": 50, "n_exp": 16, "band_lo": 0.3, "band_hi": 1.3},
    "sup-lil": {"replicates": 50, "n_exp": 16, "band_lo": 0.5, "band_hi": 1.2},
    "strassen": {"replicates": 50, "n_exp": 14, "grid_step": 0.01},
    "trace-dump": {"replicates": 1, "j_max": 3},
}


def resolved(cfg: ExperimentConfig) -> ExperimentConfig:
    """Copy of ``cfg`` with every ``None`` replaced by the experiment default."""
    fill = {k: v for k, v in _DEFAULTS[cfg.experiment].items() if getattr(cfg, k) is None}
    return dataclasses.replace(cfg, **fill)


def _field_types() -> dict[str, type]:
    hints = get_type_hints(ExperimentConfig)
    out = {}
    for f in fields(ExperimentConfig):
        tp = hints[f.name]
        args = getattr(tp, "__args__", None)
        out[f.name] = args[0] if args else tp  # Optional[X] -> X
    return out


FIELD_TYPES = _field_types()


def convert(key: str, text: str):
    """Typed value of ``text`` for field ``key``; empty text is ``None`` for optional fields."""
    if key not in FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    tp = FIELD_TYPES[key]
    text = text.strip()
    default = next(f.default for f in fields(ExperimentConfig) if f.name == key)
    if text == "" and tp is not str:
        if default is None:
            return None
        raise ConfigError(f"{key} needs a value")
    try:
        if tp is int:
            return int(text, 0)
        if tp is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"bad {tp.__name__} for {key}: {text!r}") from None
    return text


def emit(cfg: ExperimentConfig) -> str:
    """Config file text; :func:`parse` inverts it exactly."""
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            s = ""
        elif isinstance(v, float):
            s = repr(v)
        else:
            s = str(v)
        lines.append(f"{f.name}={s}")
    return "\n".join(lines) + "\n"


def parse_lines(text: str, source: str = "<config>") -> dict:
    """``key=value`` pairs from config text; ``#`` starts a comment line."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        try:
            out[key] = convert(key, value)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


def parse(text: str, source: str = "<config>") -> ExperimentConfig:
    return ExperimentConfig(**parse_lines(text, source))


def load(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh.read(), path)
