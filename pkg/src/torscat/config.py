"""Run configuration: flat key=value files plus command-line overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .dirichlet import ScattererPosition, default_position
from .errors import ConfigError
from .lattice import TorusGeometry, named_constant
from .sieve import SieveParams

_DEFAULT_Y = default_position()


@dataclass(frozen=True)
class RunConfig:
    a4: str = "golden"           # named constant or decimal value of a^4
    generic: str = "auto"        # auto | true | false (irrationality assertion)
    delta: float = 0.1
    theta: float = 1.0 / 3.0
    epsilon: float = 0.1
    x_max: float = 5000.0
    generator: str = "midpoint"  # midpoint | secular | path to a CSV file
    coupling: float = 0.0
    regularization_scale: float = 1.0
    boundary: str = "torus"      # torus | dirichlet
    y1: float = _DEFAULT_Y.y1
    y2: float = _DEFAULT_Y.y2
    grid_n: int = 0              # 0 = automatic aliasing-free choice
    point_cap: int = 25_000_000
    brute_cap: int = 5000
    grid_cap: int = 1 << 27
    bins: int = 120
    output_dir: str = "out"
    seed: int = 0                # reserved for subset sampling; core math is deterministic
    plots: bool = True

    def geometry(self) -> TorusGeometry:
        if self.a4 in ("golden", "sqrt2"):
            return TorusGeometry.named(self.a4)
        try:
            value = float(self.a4)
        except ValueError as exc:
            raise ConfigError(f"a4 must be 'golden', 'sqrt2' or a decimal, got {self.a4!r}") from exc
        generic = {"auto": False, "true": True, "false": False}[self.generic]
        return TorusGeometry.from_a_fourth(value, generic=generic, label=self.a4)

    def sieve_params(self) -> SieveParams:
        try:
            return SieveParams(self.delta, self.theta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def position(self) -> ScattererPosition:
        try:
            return ScattererPosition(self.y1, self.y2, generic=True)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "RunConfig":
        if self.generic not in ("auto", "true", "false"):
            raise ConfigError(f"generic must be auto/true/false, got {self.generic!r}")
        if self.boundary not in ("torus", "dirichlet"):
            raise ConfigError(f"boundary must be torus or dirichlet, got {self.boundary!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.x_max <= 0:
            raise ConfigError(f"x_max must be positive, got {self.x_max}")
        if self.bins < 10:
            raise ConfigError(f"bins must be >= 10, got {self.bins}")
        for name in ("grid_n", "point_cap", "brute_cap", "grid_cap", "seed"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        self.geometry()
        self.sieve_params()
        if self.boundary == "dirichlet":
            self.position()
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Build a RunConfig from defaults, an optional file, then overrides."""
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        for ln, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{p}:{ln}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = _coerce(key.strip(), val)
    if overrides:
        for key, val in overrides.items():
            if val is None:
                continue
            values[key] = _coerce(key, str(val)) if isinstance(val, str) else val
    cfg = replace(RunConfig(), **values) if values else RunConfig()
    return cfg.validate()
