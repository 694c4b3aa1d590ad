"""Run configuration: a flat TOML file (``key = value`` lines, no tables)
whose values may be overridden from the command line."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .sampling import DEFAULT_MAX_K, PercentileBounds, Thresholds

MODES = ("tabular", "text", "graph")
STRATEGIES = ("user", "item", "hybrid")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    seed: int
    mode: str = "tabular"
    data: str | None = None
    labels_file: str | None = None
    edges: str | None = None
    binning: str | None = None
    continuous: list = field(default_factory=list)
    count: list = field(default_factory=list)
    label_column: str = "label"
    id_column: str | None = None
    text_column: str = "text"
    stopwords: str | None = None
    min_count: int = 2
    top_k: int = 20
    train_fraction: float = 2 / 3
    alpha: float = 1.0
    positive: str | None = None
    strategy: str = "user"
    confidence: float | None = None
    lower: float | None = None
    upper: float | None = None
    sigma1: float | None = None
    sigma2: float | None = None
    sigma3: float | None = None
    max_k: int = DEFAULT_MAX_K
    classes: list = field(default_factory=list)
    membership: str = "label"
    out: str = "out"
    base_dir: Path = field(default=Path("."), repr=False)

    def path(self, value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def bounds(self) -> PercentileBounds:
        if self.confidence is not None:
            return PercentileBounds.from_confidence(self.confidence)
        return PercentileBounds(self.lower, self.upper)

    def thresholds(self) -> Thresholds:
        return Thresholds(self.sigma1, self.sigma2, self.sigma3)

    def validate(self, strategy_needed: bool = False) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.alpha <= 0:
            raise ConfigError("alpha must be > 0")
        if self.membership not in ("label", "predicted"):
            raise ConfigError("membership must be 'label' or 'predicted'")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {', '.join(STRATEGIES)}")
        if strategy_needed:
            try:
                if self.strategy in ("user", "hybrid"):
                    if self.confidence is None and (self.lower is None or self.upper is None):
                        raise ConfigError(f"strategy {self.strategy!r} needs confidence or lower/upper")
                    self.bounds()
                if self.strategy in ("item", "hybrid"):
                    if self.sigma1 is None:
                        raise ConfigError(f"strategy {self.strategy!r} needs sigma1")
                    self.thresholds()
                if self.max_k < 2:
                    raise ConfigError("max_k must be >= 2")
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        return self


_FIELDS = {f.name: f for f in fields(RunConfig) if f.name != "base_dir"}
_ALIASES = {"class": "classes"}


def _coerce(name: str, value):
    default = RunConfig.__dataclass_fields__[name].default
    if name in ("seed", "min_count", "top_k", "max_k"):
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise ConfigError(f"{name} must be an integer")
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{name} must be an integer") from None
    if name in ("train_fraction", "alpha", "confidence", "lower", "upper", "sigma1", "sigma2", "sigma3"):
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} must be a number") from None
    if name in ("continuous", "count", "classes"):
        if isinstance(value, str):
            return [v.strip() for v in value.split(",") if v.strip()]
        if not isinstance(value, list):
            raise ConfigError(f"{name} must be a list")
        return [str(v) for v in value]
    if default is None or isinstance(default, str):
        return str(value)
    return value


def build_config(values: dict, base_dir: Path = Path(".")) -> RunConfig:
    kwargs = {}
    for key, value in values.items():
        name = _ALIASES.get(key, key)
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; {key!r} is a table")
        kwargs[name] = _coerce(name, value)
    if "seed" not in kwargs:
        raise ConfigError("seed is mandatory")
    return RunConfig(**kwargs, base_dir=base_dir)


def parse_override(text: str) -> tuple[str, object]:
    """``key=value`` where value is read as a TOML value, falling back to a bare string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = tomllib.loads(f"v = {raw.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw.strip()
    return key, value


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    values = {}
    base = Path(".")
    if path is not None:
        path = Path(path)
        try:
            values = tomllib.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        base = path.parent
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(values, base)
