"""Time integration of the axisymmetric Euler system.

The unknowns are ``p`` (``v = 1/rho - 1`` for a Chaplygin gas, the normalized
sound-speed variable ``c_dot`` for a polytropic gas), the radial velocity ``f``
and the swirl velocity ``g``.  The primitive (non-conservative) equations are
integrated with the method of lines: fourth-order central differences in r and
classical RK4 in t.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field, replace
from functools import lru_cache
from typing import Callable, List, Optional

import numpy as np

from .eos import EosSpec
from .grid import EVEN, ODD, RadialField, RadialGrid, ddr_values, ko_dissipation_values

log = logging.getLogger(__name__)

#: floor on 1 + v (Chaplygin) and on the sound speed (polytropic)
DENSITY_FLOOR = 1e-6

#: Kreiss-Oliger coefficients: strong in a layer next to the axis, where the
#: parity closure of the central stencil admits growing modes, and weak
#: elsewhere so that steep outgoing fronts are not smeared
AXIS_DISSIPATION = 0.3
FAR_DISSIPATION = 0.01
AXIS_LAYER = 0.5

COMPLETED = "Completed"
BLEW_UP = "BlewUp"
ABORTED = "Aborted"


class StateInvalid(ArithmeticError):
    """The state left the admissible set (vacuum, zero sound speed or NaN)."""

    def __init__(self, message: str, index: Optional[int] = None, r: Optional[float] = None):
        super().__init__(message if r is None else f"{message} at r={r:.6g} (index {index})")
        self.index = index
        self.r = r


@dataclass(frozen=True, eq=False)
class FieldState:
    t: float
    p: np.ndarray
    f: np.ndarray
    g: np.ndarray
    grid: RadialGrid

    @classmethod
    def rest(cls, grid: RadialGrid, t: float = 0.0) -> "FieldState":
        return cls(t, grid.zeros(), grid.zeros(), grid.zeros(), grid)

    def fields(self):
        return (
            RadialField(self.grid, self.p, EVEN),
            RadialField(self.grid, self.f, ODD),
            RadialField(self.grid, self.g, ODD),
        )

    def scaled(self, c: float) -> "FieldState":
        return FieldState(self.t, c * self.p, c * self.f, c * self.g, self.grid)

    def is_rest(self) -> bool:
        return not (np.any(self.p) or np.any(self.f) or np.any(self.g))


def sound_speed_field(state: FieldState, eos: EosSpec) -> np.ndarray:
    """Local sound speed: sqrt(B)(1 + v) for Chaplygin, 1 + (gamma-1)/2 c_dot otherwise."""
    if eos.is_chaplygin:
        return math.sqrt(eos.B) * (1.0 + state.p)
    return 1.0 + eos.kappa * state.p


def check_state(state: FieldState, eos: EosSpec) -> None:
    """Raise :class:`StateInvalid` on NaN, vacuum or vanishing sound speed."""
    if eos.is_chaplygin:
        base = 1.0 + state.p
        what = "density floor violated (1 + v too small)"
    else:
        base = 1.0 + eos.kappa * state.p
        what = "sound speed floor violated"
    bad = ~(base >= DENSITY_FLOOR)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise StateInvalid(what, j, float(state.grid.r[j]))
    for name in ("f", "g"):
        arr = getattr(state, name)
        if not np.all(np.isfinite(arr)):
            j = int(np.argmax(~np.isfinite(arr)))
            raise StateInvalid(f"non-finite {name}", j, float(state.grid.r[j]))


def _check_polytropic(eos: EosSpec) -> None:
    if not eos.is_chaplygin and abs(eos.A * eos.gamma - 1.0) > 1e-14:
        raise ValueError("polytropic dynamics assume the normalization A = 1/gamma")


def rhs(state: FieldState, eos: EosSpec, stencil: str = "central4"):
    """Time derivatives ``(dp/dt, df/dt, dg/dt)`` as raw arrays (even, odd, odd)."""
    check_state(state, eos)
    _check_polytropic(eos)
    grid = state.grid
    h, r = grid.h, grid.r
    p, f, g = state.p, state.f, state.g
    pr = ddr_values(p, h, EVEN, stencil)
    fr = ddr_values(f, h, ODD, stencil)
    gr = ddr_values(g, h, ODD, stencil)
    f_over_r = f / r
    g_over_r = g / r
    divf = fr + f_over_r
    if eos.is_chaplygin:
        one_v = 1.0 + p
        dp = one_v * divf - f * pr
        df = eos.B * one_v * pr - f * fr + g * g_over_r
    else:
        c = 1.0 + eos.kappa * p
        dp = -f * pr - c * divf
        df = -f * fr - c * pr + g * g_over_r
    dg = -f * (gr + g_over_r)
    return dp, df, dg


def rhs_fields(state: FieldState, eos: EosSpec):
    """:func:`rhs` wrapped as :class:`RadialField` values."""
    dp, df, dg = rhs(state, eos)
    grid = state.grid
    return RadialField(grid, dp, EVEN), RadialField(grid, df, ODD), RadialField(grid, dg, ODD)


def max_signal_speed(state: FieldState, eos: EosSpec) -> float:
    return float(np.max(np.abs(state.f) + sound_speed_field(state, eos)))


def cfl_dt(state: FieldState, eos: EosSpec, cfl: float = 0.4) -> float:
    if not 0 < cfl < 1:
        raise ValueError("cfl must lie in (0, 1)")
    speed = max_signal_speed(state, eos)
    if not speed > 0:
        return cfl * state.grid.h
    return cfl * state.grid.h / speed


@lru_cache(maxsize=16)
def _profile(grid: RadialGrid, axis: float, far: float, layer: float) -> np.ndarray:
    r_a = max(layer, 128.0 * grid.h)
    u = np.clip((2.0 * r_a - grid.r) / r_a, 0.0, 1.0)
    sigma = far + (axis - far) * u * u * (3.0 - 2.0 * u)
    sigma.setflags(write=False)
    return sigma


def dissipation_profile(
    grid: RadialGrid, axis: float = AXIS_DISSIPATION, far: float = FAR_DISSIPATION, layer: float = AXIS_LAYER
) -> np.ndarray:
    """Coefficient ``axis`` for r below max(layer, 128 h), blending to ``far`` at twice that radius.

    A blend narrower than about 100 cells lets a grid-scale mode grow just
    outside the layer, hence the floor in units of h.
    """
    return _profile(grid, float(axis), float(far), float(layer))


def _tendency(state: FieldState, eos: EosSpec, stencil: str, dissipation):
    dp, df, dg = rhs(state, eos, stencil)
    if dissipation is None:
        dissipation = dissipation_profile(state.grid)
    if np.any(dissipation):
        h = state.grid.h
        dp = dp + ko_dissipation_values(state.p, h, EVEN, dissipation)
        df = df + ko_dissipation_values(state.f, h, ODD, dissipation)
        dg = dg + ko_dissipation_values(state.g, h, ODD, dissipation)
    return dp, df, dg


def step_rk4(
    state: FieldState,
    eos: EosSpec,
    dt: float,
    stencil: str = "central4",
    dissipation=None,
) -> FieldState:
    """One classical RK4 step of ``rhs`` plus Kreiss-Oliger dissipation.

    Stage states are validated by :func:`rhs`; ``dissipation=0`` gives the
    bare method of lines.
    """
    grid = state.grid
    t, p, f, g = state.t, state.p, state.f, state.g
    k1 = _tendency(state, eos, stencil, dissipation)
    s = FieldState(t + 0.5 * dt, p + 0.5 * dt * k1[0], f + 0.5 * dt * k1[1], g + 0.5 * dt * k1[2], grid)
    k2 = _tendency(s, eos, stencil, dissipation)
    s = FieldState(t + 0.5 * dt, p + 0.5 * dt * k2[0], f + 0.5 * dt * k2[1], g + 0.5 * dt * k2[2], grid)
    k3 = _tendency(s, eos, stencil, dissipation)
    s = FieldState(t + dt, p + dt * k3[0], f + dt * k3[1], g + dt * k3[2], grid)
    k4 = _tendency(s, eos, stencil, dissipation)
    w = dt / 6.0
    return FieldState(
        t + dt,
        p + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        f + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        g + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        grid,
    )


@dataclass(frozen=True)
class Thresholds:
    """Blow-up triggers.

    ``gradient_factor`` multiplies ``1 +`` the initial maximal gradient;
    ``dt_floor`` defaults to ``1e-10 h``.  ``resolution_limit`` fires when the
    steepest front spans fewer than ``resolution_limit`` cells (gradient times
    h exceeds the local oscillation amplitude over that many cells); set to 0
    to disable.
    """

    gradient_factor: float = 100.0
    dt_floor: Optional[float] = None
    resolution_limit: float = 0.0

    def floor_for(self, grid: RadialGrid) -> float:
        return self.dt_floor if self.dt_floor is not None else 1e-10 * grid.h


def max_gradient(state: FieldState) -> float:
    h = state.grid.h
    gp = np.max(np.abs(ddr_values(state.p, h, EVEN)))
    gf = np.max(np.abs(ddr_values(state.f, h, ODD)))
    return float(max(gp, gf))


def unresolved_fraction(state: FieldState) -> float:
    """max |h ddr(p)| relative to the amplitude of p (1 means a one-cell jump)."""
    h = state.grid.h
    amp = float(np.max(np.abs(state.p)))
    if amp == 0.0:
        return 0.0
    return float(np.max(np.abs(ddr_values(state.p, h, EVEN)))) * h / amp


def detect_blowup(
    state: FieldState,
    initial: FieldState,
    thresholds: Thresholds = Thresholds(),
    eos: Optional[EosSpec] = None,
    cfl: float = 0.4,
    initial_gradient: Optional[float] = None,
) -> bool:
    g0 = max_gradient(initial) if initial_gradient is None else initial_gradient
    try:
        if eos is not None:
            check_state(state, eos)
        if not (np.all(np.isfinite(state.p)) and np.all(np.isfinite(state.f))):
            return True
        if max_gradient(state) > thresholds.gradient_factor * (g0 + 1.0):
            return True
        if eos is not None and cfl_dt(state, eos, cfl) < thresholds.floor_for(state.grid):
            return True
        if thresholds.resolution_limit > 0 and unresolved_fraction(state) > 1.0 / thresholds.resolution_limit:
            return True
    except StateInvalid:
        return True
    return False


def support_radius(state: FieldState, tol: float) -> float:
    """Largest node radius where any field exceeds ``tol`` in magnitude (0 if none)."""
    mask = (np.abs(state.p) > tol) | (np.abs(state.f) > tol) | (np.abs(state.g) > tol)
    if not np.any(mask):
        return 0.0
    j = state.grid.n - 1 - int(np.argmax(mask[::-1]))
    return float(state.grid.r[j])


@dataclass
class RunOutcome:
    status: str
    T_end: float
    blowup_time: Optional[float] = None
    max_gradient_history: List[tuple] = dc_field(default_factory=list)
    ledger: object = None
    message: str = ""
    final_state: Optional[FieldState] = None
    steps: int = 0
    snapshots: list = dc_field(default_factory=list)


def integrate(
    state: FieldState,
    eos: EosSpec,
    t_end: float,
    cfl: float = 0.4,
    thresholds: Thresholds = Thresholds(),
    cadence: Optional[int] = None,
    on_diagnostic: Optional[Callable[[FieldState], None]] = None,
    support_tol: Optional[float] = None,
    support_margin_cells: int = 5,
    stencil: str = "central4",
    dissipation=None,
    fixed_dt: Optional[float] = None,
    snapshot_times=(),
    on_snapshot: Optional[Callable[[int, FieldState], None]] = None,
) -> RunOutcome:
    """Advance ``state`` to ``t_end`` or until blow-up is detected.

    ``on_diagnostic`` is called on the initial state and then every ``cadence``
    steps (default ``max(1, floor(0.1/dt))`` from the first step size) and at
    the final time.  Snapshot times are hit exactly by shortening the step.
    """
    grid = state.grid
    initial = state
    g0 = max_gradient(initial)
    amp0 = max(np.max(np.abs(state.p)), np.max(np.abs(state.f)), np.max(np.abs(state.g)))
    if support_tol is None:
        support_tol = 1e-10 * amp0
    limit_r = grid.r[max(grid.n - 1 - support_margin_cells, 0)]
    out = RunOutcome(status=COMPLETED, T_end=state.t)
    out.max_gradient_history.append((state.t, g0))
    pending = sorted(float(s) for s in snapshot_times if s <= t_end)
    snap_index = 0
    while pending and pending[0] <= state.t:
        if on_snapshot:
            on_snapshot(snap_index, state)
        snap_index += 1
        pending.pop(0)
    if on_diagnostic:
        on_diagnostic(state)
    if state.is_rest():
        # exact fixed point: stepping would only reproduce zeros
        state = replace(state, t=float(t_end))
        if on_diagnostic:
            on_diagnostic(state)
        while pending:
            if on_snapshot:
                on_snapshot(snap_index, replace(state, t=pending[0]))
            snap_index += 1
            pending.pop(0)
        out.T_end = state.t
        out.final_state = state
        return out

    steps = 0
    dt_floor = thresholds.floor_for(grid)
    while state.t < t_end:
        try:
            dt = fixed_dt if fixed_dt is not None else cfl_dt(state, eos, cfl)
        except StateInvalid as exc:
            return _finish(out, BLEW_UP, state, str(exc), steps)
        if dt < dt_floor:
            return _finish(out, BLEW_UP, state, "time step below floor", steps)
        if cadence is None:
            cadence = max(1, int(math.floor(0.1 / dt)))
        target = t_end
        if pending and pending[0] < target:
            target = pending[0]
        dt = min(dt, target - state.t)
        try:
            new = step_rk4(state, eos, dt, stencil, dissipation)
            if target - new.t < 1e-12 * max(1.0, abs(target)):
                new = replace(new, t=target)
            check_state(new, eos)
            if not np.all(np.isfinite(new.p)):
                raise StateInvalid("non-finite p")
        except (StateInvalid, FloatingPointError) as exc:
            return _finish(out, BLEW_UP, state, str(exc), steps)
        state = new
        steps += 1
        gm = max_gradient(state)
        out.max_gradient_history.append((state.t, gm))
        if detect_blowup(state, initial, thresholds, eos, cfl, initial_gradient=g0):
            return _finish(out, BLEW_UP, state, "blow-up trigger", steps)
        if support_radius(state, support_tol) >= limit_r:
            return _finish(out, ABORTED, state, "perturbation reached the outer boundary", steps)
        while pending and pending[0] <= state.t:
            if on_snapshot:
                on_snapshot(snap_index, state)
            snap_index += 1
            pending.pop(0)
        if on_diagnostic and (steps % cadence == 0 or state.t >= t_end):
            on_diagnostic(state)
    return _finish(out, COMPLETED, state, "", steps)


def _finish(out: RunOutcome, status: str, state: FieldState, message: str, steps: int) -> RunOutcome:
    out.status = status
    out.T_end = state.t
    out.message = message
    out.final_state = state
    out.steps = steps
    if status == BLEW_UP:
        out.blowup_time = state.t
    if message:
        log.info("run stopped at t=%.6g: %s (%s)", state.t, status, message)
    return out


def run(config, **kwargs) -> RunOutcome:
    """Integrate the scenario described by a :class:`SimConfig`, filling its energy ledger.

    See :func:`radial_euler.experiments.run_config` for the keyword options.
    """
    from .experiments import run_config

    return run_config(config, **kwargs)
