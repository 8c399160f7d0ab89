"""Compactly supported initial data built from a smooth bump."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, replace

import numpy as np

from .dynamics import FieldState
from .eos import EosSpec, dot_c
from .grid import EVEN, RadialField, RadialGrid, make_grid

SUPPORT_RADIUS = 0.125
MIN_CELLS_PER_SUPPORT = 64

#: profile ids: "bump" uses b (even) or (r/r0) b (odd), "zero" vanishes,
#: "random" multiplies the bump by a seeded smooth polynomial
PROFILES = ("bump", "zero", "random")


class ConfigurationError(ValueError):
    """Raised for scenarios that cannot be set up as requested."""


def bump(r, r0: float = SUPPORT_RADIUS):
    """b(r) = exp(-1/(1 - (r/r0)^2)) inside r < r0, 0 outside (C-infinity)."""
    r = np.asarray(r, dtype=float)
    x = r / r0
    out = np.zeros_like(r)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@dataclass(frozen=True)
class ScenarioSpec:
    eos: EosSpec = EosSpec()
    epsilon: float = 0.02
    rho_profile: str = "bump"
    f_profile: str = "bump"
    g_profile: str = "bump"
    r0: float = SUPPORT_RADIUS
    n: int = 8192
    r_max: float = 16.0
    t_end: float = 10.0
    cfl: float = 0.4
    cadence: float = 1.0
    seed: int = 0
    min_cells_per_support: int = MIN_CELLS_PER_SUPPORT

    def __post_init__(self) -> None:
        if not self.epsilon >= 0:
            raise ConfigurationError("epsilon must be nonnegative")
        for name in ("rho_profile", "f_profile", "g_profile"):
            if getattr(self, name) not in PROFILES:
                raise ConfigurationError(f"unknown {name} {getattr(self, name)!r}")
        if not 0 < self.cfl < 1:
            raise ConfigurationError("cfl must lie in (0, 1)")
        if not (self.r0 > 0 and self.r_max > self.r0):
            raise ConfigurationError("need 0 < r0 < r_max")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be nonnegative")

    @property
    def grid(self) -> RadialGrid:
        return make_grid(self.r_max, self.n)

    def with_(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)

    def digest(self) -> str:
        """Short stable hash of every field, used to tag outputs."""
        items = asdict(self)
        text = ";".join(f"{k}={items[k]!r}" for k in sorted(items))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def _profile(kind: str, r, r0: float, odd: bool, rng) -> np.ndarray:
    if kind == "zero":
        return np.zeros_like(r)
    base = bump(r, r0)
    if odd:
        base = base * (r / r0)
    if kind == "random":
        # smooth even polynomial modulation in (r/r0)^2 keeps parity and support
        coeffs = rng.uniform(-0.5, 0.5, size=3)
        x2 = (r / r0) ** 2
        base = base * (1.0 + coeffs[0] + coeffs[1] * x2 + coeffs[2] * x2 * x2)
    return base


def make_initial_data(spec: ScenarioSpec):
    """Initial state and density for ``spec``; returns ``(FieldState, rho0)``."""
    grid = spec.grid
    cells = spec.r0 / grid.h
    if cells < spec.min_cells_per_support:
        raise ConfigurationError(
            f"support radius {spec.r0} spans {cells:.1f} cells, "
            f"need at least {spec.min_cells_per_support}"
        )
    rng = np.random.default_rng(spec.seed)
    r = grid.r
    eps = spec.epsilon
    rho0 = 1.0 + eps * _profile(spec.rho_profile, r, spec.r0, False, rng)
    f0 = eps * _profile(spec.f_profile, r, spec.r0, True, rng)
    g0 = eps * _profile(spec.g_profile, r, spec.r0, True, rng)
    if spec.eos.is_chaplygin:
        p0 = 1.0 / rho0 - 1.0
    else:
        p0 = np.asarray(dot_c(spec.eos, rho0), dtype=float)
    return FieldState(0.0, p0, f0, g0, grid), RadialField(grid, rho0, EVEN)


def initial_signal_speed(spec: ScenarioSpec) -> float:
    """Upper bound of |f| + c over the bump data (rest sound speed is 1)."""
    from .dynamics import max_signal_speed

    state, _ = make_initial_data(spec.with_(min_cells_per_support=0))
    return max(max_signal_speed(state, spec.eos), 1.0)
