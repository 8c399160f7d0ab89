"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple

import numpy as np

from .dynamics import AXIS_DISSIPATION, FAR_DISSIPATION, Thresholds, dissipation_profile
from .eos import CHAPLYGIN, POLYTROPIC, EosSpec
from .scenarios import PROFILES, ScenarioSpec

STUDIES = ("run", "sweep", "decay", "converge", "verify")


class ConfigError(ValueError):
    """Invalid configuration text or values."""


@dataclass(frozen=True)
class SimConfig:
    eos: str = CHAPLYGIN
    P0: float = 2.0
    B: float = 1.0
    gamma: float = 2.0
    A: Optional[float] = None
    epsilon: Optional[float] = None
    rho_profile: str = "bump"
    f_profile: str = "bump"
    g_profile: str = "bump"
    r0: float = 0.125
    n: int = 8192
    r_max: float = 16.0
    t_end: float = 10.0
    cfl: float = 0.4
    cadence: float = 0.1
    seed: int = 0
    min_cells_per_support: int = 64
    K: int = 2
    ko_axis: float = AXIS_DISSIPATION
    ko_far: float = FAR_DISSIPATION
    gradient_factor: float = 100.0
    dt_floor: Optional[float] = None
    snapshot_times: Tuple[float, ...] = ()
    study: str = "run"
    out: str = "out"
    run_id: str = ""
    epsilons: Tuple[float, ...] = (0.08, 0.056, 0.04, 0.028, 0.02)
    probe_time: float = 2.0
    refine: int = 1
    resolutions: Tuple[int, ...] = (1024, 2048, 4096)
    fit_lo: float = 20.0
    fit_hi: Optional[float] = None

    def __post_init__(self) -> None:
        if self.eos not in (CHAPLYGIN, POLYTROPIC):
            raise ConfigError(f"eos must be {CHAPLYGIN} or {POLYTROPIC}, got {self.eos!r}")
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ConfigError("epsilon must be nonnegative")
        for name in ("rho_profile", "f_profile", "g_profile"):
            if getattr(self, name) not in PROFILES:
                raise ConfigError(f"{name} must be one of {PROFILES}")
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)")
        if self.n < 8:
            raise ConfigError("n must be at least 8")
        if not self.r_max > 0 or not self.t_end >= 0:
            raise ConfigError("r_max must be positive and t_end nonnegative")
        if not self.cadence > 0:
            raise ConfigError("cadence must be positive")
        if not 0 <= self.K <= 2:
            raise ConfigError("K must be 0, 1 or 2")
        if self.study not in STUDIES:
            raise ConfigError(f"study must be one of {STUDIES}")
        if any(not 0 <= s <= self.t_end for s in self.snapshot_times):
            raise ConfigError("snapshot times must lie in [0, t_end]")
        if not (self.ko_axis >= 0 and self.ko_far >= 0):
            raise ConfigError("ko_axis and ko_far must be nonnegative")
        if self.gamma < 1:
            raise ConfigError("gamma must be at least 1")

    def eos_spec(self) -> EosSpec:
        if self.eos == CHAPLYGIN:
            return EosSpec.chaplygin(self.P0, self.B)
        return EosSpec.polytropic(self.gamma, self.A)

    def dissipation(self, grid) -> np.ndarray:
        """Kreiss-Oliger coefficient per sample for this configuration."""
        return dissipation_profile(grid, self.ko_axis, self.ko_far)

    def thresholds(self) -> Thresholds:
        return Thresholds(gradient_factor=self.gradient_factor, dt_floor=self.dt_floor)

    def scenario(self, epsilon: Optional[float] = None) -> ScenarioSpec:
        eps = self.epsilon if epsilon is None else epsilon
        if eps is None:
            raise ConfigError("epsilon is required for this study")
        return ScenarioSpec(
            eos=self.eos_spec(),
            epsilon=float(eps),
            rho_profile=self.rho_profile,
            f_profile=self.f_profile,
            g_profile=self.g_profile,
            r0=self.r0,
            n=self.n,
            r_max=self.r_max,
            t_end=self.t_end,
            cfl=self.cfl,
            cadence=self.cadence,
            seed=self.seed,
            min_cells_per_support=self.min_cells_per_support,
        )

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def digest(self) -> str:
        """Short hash of every setting that affects results (not ``out`` or ``run_id``)."""
        text = serialize(replace(self, out="", run_id=""))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


_FIELDS = {f.name: f for f in fields(SimConfig)}
_TUPLE_TYPES = {"snapshot_times": float, "epsilons": float, "resolutions": int}


def _convert(name: str, text: str):
    ftype = _FIELDS[name].type
    if name in _TUPLE_TYPES:
        conv = _TUPLE_TYPES[name]
        parts = [p.strip() for p in text.split(",") if p.strip()]
        return tuple(conv(p) for p in parts)
    if text.lower() == "none":
        if "Optional" in str(ftype):
            return None
        raise ValueError("None is not allowed here")
    if "int" in str(ftype) and "float" not in str(ftype):
        return int(text)
    if "float" in str(ftype):
        return float(text)
    return text


def parse_config(text: str) -> SimConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unset keys take defaults."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key}: {exc}") from None
    try:
        return SimConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize(config: SimConfig) -> str:
    """Every field as ``key = value``; ``parse_config`` reads it back unchanged."""
    return "".join(f"{f.name} = {_format(getattr(config, f.name))}\n" for f in fields(config))


def load_config(path) -> SimConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def config_from_manifest(text: str) -> SimConfig:
    """Recover the configuration echoed in a manifest, ignoring run-outcome keys."""
    keep = []
    for line in text.splitlines():
        key = line.split("#", 1)[0].partition("=")[0].strip()
        if key in _FIELDS:
            keep.append(line)
    return parse_config("\n".join(keep))
