"""Solver configuration and the flat ``key=value`` config file format."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields, replace

from .kinetic.kernels import RESIDUAL_MODES
from .layout import LAYOUTS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    grid: str | None = None
    generate: str | None = "40x40"
    annulus: str | None = None
    jitter: float = 0.1
    seed: int = 0
    k: int = 8
    mach: float = 0.63
    aoa_deg: float = 2.0
    gamma: float = 1.4
    n_iterations: int = 100
    n_inner: int = 3
    cfl: float = 0.5
    layout: str = "soa"
    residual_mode: str = "fused"
    n_parts: int = 1
    n_workers: int = 1
    order: int = 2
    bump: float = 0.0
    bump_radius: float = 0.1
    out_prefix: str | None = None

    def __post_init__(self):
        if self.n_iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.n_inner < 1:
            raise ConfigError("inner iterations must be >= 1")
        if not self.cfl > 0:
            raise ConfigError("cfl must be positive")
        if not self.mach >= 0:
            raise ConfigError("mach must be >= 0")
        if not self.gamma > 1:
            raise ConfigError("gamma must exceed 1")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"layout must be one of {LAYOUTS}")
        if self.residual_mode not in RESIDUAL_MODES:
            raise ConfigError(f"residual mode must be one of {RESIDUAL_MODES}")
        if self.order not in (1, 2):
            raise ConfigError("order must be 1 or 2")
        if self.n_parts < 1 or self.n_workers < 1:
            raise ConfigError("parts and workers must be >= 1")
        if self.generate is not None:
            parse_grid_size(self.generate)
        if self.annulus is not None:
            parse_grid_size(self.annulus)
        if self.grid is None and self.annulus is None and self.generate is None:
            raise ConfigError("no point cloud source: give a grid file or a generator")

    def with_(self, **changes):
        return replace(self, **changes)


def parse_grid_size(spec):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", str(spec))
    if not m:
        raise ConfigError(f"grid size must look like NXxNY, got {spec!r}")
    return int(m.group(1)), int(m.group(2))


_FIELD_TYPES = {f.name: f.type for f in fields(SolverConfig)}
# config-file aliases matching the CLI flag names
_ALIASES = {"iters": "n_iterations", "inner": "n_inner", "parts": "n_parts",
            "workers": "n_workers", "aoa": "aoa_deg", "residual-mode": "residual_mode",
            "out-prefix": "out_prefix", "bump-radius": "bump_radius"}


def coerce(key, value):
    key = _ALIASES.get(key, key).replace("-", "_")
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    typ = _FIELD_TYPES[key]
    try:
        if "int" in typ:
            return key, int(value)
        if "float" in typ:
            return key, float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return key, value


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{no}: expected key=value")
            k, v = (t.strip() for t in line.split("=", 1))
            key, val = coerce(k, v)
            out[key] = val
    return out


def freestream_state(mach, aoa_deg, gamma=1.4):
    """Free stream with unit density and unit sound speed (p = 1/gamma)."""
    a = math.radians(aoa_deg)
    return (1.0, mach * math.cos(a), mach * math.sin(a), 1.0 / gamma)
