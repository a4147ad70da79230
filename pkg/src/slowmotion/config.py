"""Flat ``key = value`` run configuration.

Every key can be overridden on the command line, either as ``key=value`` or
as ``--key value``.  Unknown keys and out-of-domain values raise
:class:`ConfigError` naming the key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

from .core import FluxFunction, burgers_flux, power_flux


class ConfigError(ValueError):
    def __init__(self, key: str, msg: str) -> None:
        super().__init__(f"config key {key!r}: {msg}")
        self.key = key


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(p) for p in s.replace(";", ",").split(",") if p.strip())


@dataclass(frozen=True)
class RunConfig:
    eps: float = 0.08
    ell: float = 1.0
    n: int = 400
    dt: float | str = "auto"
    T: float = 200.0
    flux: str = "burgers"
    a0: float = 0.4
    shape: str = "scaled_sine"
    amplitude: float = 0.5
    k_max: int = 8
    output_dir: str = "out"
    orientation: str = "paper_u0meta"
    xi: float = 0.5
    state: str = "tanh"
    stride: float = 0.5
    snapshot_times: tuple[float, ...] = ()
    flame_front: bool = False
    eps_list: tuple[float, ...] = (0.08, 0.05)
    xi_list: tuple[float, ...] = (0.3, 0.5, 0.7)
    a0_list: tuple[float, ...] = ()
    delta: float = 0.05
    theta_source: str = "asymptotic"
    xi0: float = 0.4
    construction: str = "tanh_matched"
    branches: tuple[str, ...] = ("positive", "negative")
    with_h2_sums: bool = True
    sweep_command: str = "evolve"
    criteria: tuple[int, ...] = ()
    determinism: bool = True

    def flux_function(self) -> FluxFunction:
        return make_flux(self.flux)

    def dt_value(self) -> float | None:
        return None if self.dt == "auto" else float(self.dt)

    def with_overrides(self, pairs: dict[str, str]) -> "RunConfig":
        return parse_pairs(pairs, base=self)


def make_flux(name: str) -> FluxFunction:
    if name == "burgers":
        return burgers_flux()
    if name.startswith("power"):
        try:
            return power_flux(float(name[5:]))
        except ValueError as exc:
            raise ConfigError("flux", f"bad power exponent in {name!r}") from exc
    raise ConfigError("flux", f"unknown flux {name!r} (burgers or power<gamma>)")


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CHOICES = {
    "shape": ("scaled_sine", "piecewise_linear"),
    "orientation": ("paper_u0meta", "corollary"),
    "state": ("tanh", "zero", "exact_matched"),
    "theta_source": ("asymptotic", "spectral"),
    "construction": ("tanh_matched", "exact_matched"),
    "sweep_command": ("steady", "family", "spectrum", "evolve", "reduce"),
}


def _convert(key: str, raw: str) -> Any:
    typ = str(_FIELD_TYPES[key])
    raw = raw.strip()
    try:
        if key == "dt":
            return "auto" if raw == "auto" else float(raw)
        if key == "criteria":
            return tuple(int(p) for p in raw.replace(";", ",").split(",") if p.strip())
        if key == "branches":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        if typ.startswith("tuple"):
            return _floats(raw)
        if typ == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ == "int":
            return int(raw)
        if typ == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r} as {typ}") from exc
    return raw


def validate(cfg: RunConfig) -> RunConfig:
    def need(key: str, ok: bool, msg: str) -> None:
        if not ok:
            raise ConfigError(key, msg)

    need("eps", cfg.eps > 0.0 and math.isfinite(cfg.eps), "must be positive")
    need("ell", cfg.ell > 0.0, "must be positive")
    need("n", cfg.n >= 3, "need at least 3 interior nodes")
    need("dt", cfg.dt == "auto" or float(cfg.dt) > 0.0, "must be 'auto' or positive")
    need("T", cfg.T >= 0.0, "must be nonnegative")
    need("a0", 0.0 < cfg.a0 < cfg.ell, "must lie in (0, ell)")
    need("k_max", 1 <= cfg.k_max <= cfg.n, "must lie in [1, n]")
    need("xi", 0.0 <= cfg.xi <= cfg.ell, "must lie in [0, ell]")
    need("xi0", 0.0 <= cfg.xi0 <= cfg.ell, "must lie in [0, ell]")
    need("stride", cfg.stride > 0.0, "must be positive")
    need("delta", cfg.delta > 0.0, "must be positive")
    need("eps_list", all(e > 0.0 for e in cfg.eps_list), "entries must be positive")
    need("xi_list", all(0.0 <= x <= cfg.ell for x in cfg.xi_list), "entries must lie in [0, ell]")
    need("a0_list", all(0.0 < a < cfg.ell for a in cfg.a0_list), "entries must lie in (0, ell)")
    need("criteria", all(1 <= c <= 12 for c in cfg.criteria), "entries must lie in 1..12")
    need("snapshot_times", all(0.0 <= t <= cfg.T for t in cfg.snapshot_times), "entries must lie in [0, T]")
    need("branches", all(b in ("positive", "negative", "metastable", "ns") for b in cfg.branches),
         "entries must be positive, negative, metastable or ns")
    for key, choices in _CHOICES.items():
        need(key, getattr(cfg, key) in choices, f"must be one of {choices}")
    make_flux(cfg.flux)
    return cfg


def parse_pairs(pairs: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    base = base or RunConfig()
    updates: dict[str, Any] = {}
    for key, raw in pairs.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(key, "unknown key")
        updates[key] = _convert(key, raw)
    return validate(replace(base, **updates))


def parse_text(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno} is not key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load(path: str | Path | None, overrides: dict[str, str] | None = None) -> RunConfig:
    pairs: dict[str, str] = {}
    if path is not None:
        pairs.update(parse_text(Path(path).read_text(encoding="utf-8")))
    pairs.update(overrides or {})
    return parse_pairs(pairs)


def dump(cfg: RunConfig) -> str:
    """``key = value`` text that :func:`load` reads back to ``cfg``."""
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        lines.append(f"{f.name} = {','.join(map(str, v)) if isinstance(v, tuple) else v}")
    return "\n".join(lines) + "\n"
