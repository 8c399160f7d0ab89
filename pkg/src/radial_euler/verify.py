"""Fast invariant suite behind ``radial-euler verify`` (small fixed scenarios)."""

from __future__ import annotations

import math
import tempfile
from pathlib import Path
from typing import Callable, List, Tuple

import numpy as np
from scipy import integrate as spi
from scipy.special import gamma as gamma_fn

from .analysis.audits import ghost_energy_audit
from .analysis.derivatives import build_derivative_table
from .analysis.energies import data_size_epsilon, energy_E, energy_X, energy_Y, vorticity_W
from .analysis.transforms import compute_G_values, q_terms
from .analysis.weights import cutoffs, ghost_q
from .config import parse_config, serialize
from .dynamics import FieldState, integrate, step_rk4
from .eos import EosSpec
from .experiments import convergence_study
from .grid import EVEN, ddr_values, make_grid
from .io import read_snapshot, write_snapshot
from .scenarios import ScenarioSpec, bump, make_initial_data

Check = Tuple[str, bool, str]


def _rest_fixed_point() -> Check:
    grid = make_grid(1.0, 64)
    state = FieldState.rest(grid)
    for eos in (EosSpec(), EosSpec.polytropic(2.0)):
        s = state
        for _ in range(5):
            s = step_rk4(s, eos, 0.005)
        if not (np.array_equal(s.p, state.p) and np.array_equal(s.f, state.f) and np.array_equal(s.g, state.g)):
            return "rest_fixed_point", False, f"rest state moved under {eos.kind}"
    return "rest_fixed_point", True, "rest state is a bitwise fixed point for both gases"


def _swirl_free_preserved() -> Check:
    spec = ScenarioSpec(epsilon=0.05, g_profile="zero", n=512, r_max=1.0, t_end=0.2)
    state, _ = make_initial_data(spec)
    out = integrate(state, spec.eos, 0.2)
    ok = bool(np.all(out.final_state.g == 0.0))
    return "swirl_free_preserved", ok, f"max |g| after {out.steps} steps = {np.max(np.abs(out.final_state.g)):.3g}"


def _q_forms() -> Check:
    rng = np.random.default_rng(7)
    grid = make_grid(2.0, 200)
    worst = 0.0
    for _ in range(100):
        c = rng.uniform(-0.5, 0.5, size=6)
        r = grid.r
        v = c[0] * np.exp(-(r / (0.3 + abs(c[1]))) ** 2)
        f = c[2] * r * np.exp(-(r - c[3]) ** 2)
        g = c[4] * r * np.exp(-((r / (0.4 + abs(c[5]))) ** 2))
        q1, q2, n1, n2 = q_terms(FieldState(0.0, v, f, g, grid))
        for a, b in ((q1, n1), (q2, n2)):
            scale = max(np.max(np.abs(a)), 1e-300)
            worst = max(worst, float(np.max(np.abs(a - b)) / scale))
    return "q_form_equivalence", worst <= 1e-12, f"max relative difference {worst:.2e}"


def _partition() -> Check:
    grid = make_grid(40.0, 4000)
    worst = 0.0
    for t in (0.0, 1.0, 17.3, 250.0):
        cut = cutoffs(grid, t)
        worst = max(worst, float(np.max(np.abs(cut.chi0.samples + cut.chi1.samples - 1.0))))
    return "cutoff_partition", worst == 0.0, f"max |chi0 + chi1 - 1| = {worst:.1e}"


def _g_transform() -> Check:
    grid = make_grid(1.0, 8192)
    g = 0.3 * (grid.r / 0.125) * bump(grid.r)
    state = FieldState(0.0, np.zeros(grid.n), np.zeros(grid.n), g, grid)
    G = compute_G_values(state)

    def integrand(x):
        return (0.3 * (x / 0.125) * bump(np.array([x]))[0]) ** 2 / x

    worst = 0.0
    for j in range(0, 1024, 64):
        ref = spi.quad(integrand, grid.r[j], 0.125, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        worst = max(worst, abs(G[j] - ref))
    resid = np.max(np.abs(ddr_values(G, grid.h, EVEN) + g * g / grid.r))
    ok = worst <= 1e-6 and resid <= 1e-6 and np.all(G[grid.r > 0.125 + 2 * grid.h] == 0.0)
    return "g_transform", bool(ok), f"oracle error {worst:.2e}, ODE residual {resid:.2e}"


def _ghost_value() -> Check:
    exact = -0.5 * math.sqrt(math.pi) * gamma_fn(0.125) / gamma_fn(0.625)
    err = abs(ghost_q(0.0) - exact)
    return "ghost_weight_q0", err <= 1e-8, f"|q(0) - closed form| = {err:.2e}"


def _order() -> Check:
    # a wide bump keeps these small grids in the asymptotic range
    spec = ScenarioSpec(epsilon=0.05, r0=0.5, n=1024, r_max=2.0, t_end=0.5)
    rep = convergence_study(spec, (1024, 2048, 4096))
    return "scheme_order", rep.min_order >= 3.5, f"min observed order {rep.min_order:.2f}"


def _homogeneity() -> Check:
    spec = ScenarioSpec(epsilon=1.0, n=512, r_max=1.0)
    state, rho0 = make_initial_data(spec)
    base = data_size_epsilon(state, rho0, 2)
    c = 0.02
    s2, rho2 = make_initial_data(spec.with_(epsilon=c))
    scaled = data_size_epsilon(FieldState(0.0, s2.p, s2.f, s2.g, s2.grid), rho2, 2)
    worst = abs(scaled - c * base) / (c * base)
    table = build_derivative_table(s2, spec.eos, 2)
    cut = cutoffs(s2.grid, 0.5)
    for fn in (lambda t: energy_E(t, 2), lambda t: energy_X(t, cut, 2),
               lambda t: energy_Y(t, cut, 2), lambda t: vorticity_W(t, 2)):
        a, b = fn(table), fn(table.scaled(-3.0))
        if a > 0:
            worst = max(worst, abs(b - 3.0 * a) / (3.0 * a))
    return "homogeneity", worst <= 1e-12, f"max relative deviation {worst:.2e}"


def _ghost_audit() -> Check:
    spec = ScenarioSpec(epsilon=1e-6, n=1024, r_max=2.0, t_end=0.75)
    state, _ = make_initial_data(spec)
    dt = 0.4 * spec.grid.h
    times = np.arange(0.25, 0.75 + 1e-9, 16 * dt)
    snaps: List[FieldState] = []
    integrate(state, spec.eos, float(times[-1]), fixed_dt=dt, snapshot_times=times,
              on_snapshot=lambda i, s: snaps.append(s))
    audit = ghost_energy_audit(snaps, spec.eos)
    return "ghost_identity", audit.max_normalized <= 2e-2, f"max normalized residual {audit.max_normalized:.2e} at n = 1024"


def _round_trips() -> Check:
    cfg = parse_config("eos = polytropic\ngamma = 2\nepsilon = 0.05\nsnapshot_times = 0.5, 1\nt_end = 1\n")
    ok = parse_config(serialize(cfg)) == cfg and cfg.eos_spec().A == 0.5
    grid = make_grid(1.0, 32)
    rng = np.random.default_rng(1)
    state = FieldState(0.1 + 1e-17, rng.normal(size=32), rng.normal(size=32) * 1e-300, rng.normal(size=32) * 1e200, grid)
    with tempfile.TemporaryDirectory() as d:
        path = write_snapshot(state, EosSpec(), Path(d) / "snap_x_0")
        back, _ = read_snapshot(path)
    ok = ok and back.t == state.t and all(np.array_equal(getattr(back, k), getattr(state, k)) for k in "pfg")
    return "round_trips", bool(ok), "config and snapshot text round-trip exactly"


CHECKS: List[Callable[[], Check]] = [
    _rest_fixed_point,
    _swirl_free_preserved,
    _q_forms,
    _partition,
    _g_transform,
    _ghost_value,
    _order,
    _homogeneity,
    _ghost_audit,
    _round_trips,
]


def run_checks() -> List[Check]:
    results = []
    for fn in CHECKS:
        try:
            results.append(fn())
        except Exception as exc:  # a crashing check is a failed check
            results.append((fn.__name__.lstrip("_"), False, f"raised {type(exc).__name__}: {exc}"))
    return results
