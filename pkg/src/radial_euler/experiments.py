"""Run orchestration and the headline studies: lifespan, decay, convergence, conservation."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .analysis.audits import EnergyLedger, FitError, _ghost_terms, fit_decay
from .analysis.diagnostics import PROBES, diagnostics_row, mass
from .analysis.transforms import specific_vorticity
from .config import SimConfig
from .dynamics import (
    ABORTED,
    AXIS_DISSIPATION,
    BLEW_UP,
    COMPLETED,
    FAR_DISSIPATION,
    FieldState,
    RunOutcome,
    Thresholds,
    dissipation_profile,
    integrate,
    max_signal_speed,
    support_radius,
)
from .eos import EosSpec
from .grid import EVEN, ODD, UsageError, ddr_values, l2, restrict_to_coarse
from .scenarios import ConfigurationError, ScenarioSpec, make_initial_data


class SweepError(RuntimeError):
    """A member run of a sweep did not produce a usable result."""


# -- single runs --------------------------------------------------------------

def required_r_max(spec: ScenarioSpec, t_end: float, factor: float = 1.1) -> float:
    """Smallest r_max that keeps the perturbation inside the grid up to ``t_end``."""
    state, _ = make_initial_data(spec.with_(min_cells_per_support=0, n=max(spec.n, 64)))
    speed = max(max_signal_speed(state, spec.eos), 1.0)
    r_supp = support_radius(state, 0.0) + state.grid.h if not state.is_rest() else 0.0
    return r_supp + factor * t_end * speed


def _diag_times(t_end: float, cadence: float) -> List[float]:
    count = int(math.floor(t_end / cadence + 1e-9))
    times = [i * cadence for i in range(count + 1)]
    if t_end - times[-1] > 1e-9 * max(1.0, t_end):
        times.append(t_end)
    return times


def _attach_ghost_residuals(ledger: EnergyLedger, terms: List[tuple]) -> None:
    """Normalized order-zero ghost identity residual for every ledger row.

    Interior rows with equally spaced neighbours use a centered difference of
    the energy against Simpson-averaged source terms; the first and last rows
    use second-order one-sided differences.  Rows where no equally spaced
    triple exists (fewer than three rows, uneven spacing) record 0.
    """
    ts = ledger.column("t")
    n = len(ts)
    for row in ledger.rows:
        row["ghost_residual"] = 0.0
    if n < 3:
        return
    F = np.array([x[0] for x in terms])
    R = np.array([x[1] - x[2] for x in terms])

    def put(i, dF):
        scale = max(abs(dF), abs(terms[i][1]), abs(terms[i][2]))
        ledger.rows[i]["ghost_residual"] = abs(dF + R[i]) / scale if scale > 0 else 0.0

    def even(i, j, k):
        return np.isclose(ts[j] - ts[i], ts[k] - ts[j], rtol=1e-9, atol=0.0)

    for i in range(1, n - 1):
        if not even(i - 1, i, i + 1):
            continue
        d = ts[i + 1] - ts[i]
        dF = (F[i + 1] - F[i - 1]) / (2.0 * d)
        avg = (R[i - 1] + 4.0 * R[i] + R[i + 1]) / 6.0
        scale = max(abs(dF), abs(terms[i][1]), abs(terms[i][2]))
        ledger.rows[i]["ghost_residual"] = abs(dF + avg) / scale if scale > 0 else 0.0
    if even(0, 1, 2):
        d = ts[1] - ts[0]
        put(0, (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * d))
    if even(n - 3, n - 2, n - 1):
        d = ts[-1] - ts[-2]
        put(n - 1, (3.0 * F[-1] - 4.0 * F[-2] + F[-3]) / (2.0 * d))


def run_config(
    config: SimConfig,
    snapshot_dir: Optional[Path] = None,
    keep_states: bool = False,
    check_domain: bool = True,
    dissipation=None,
    stencil: str = "central4",
) -> RunOutcome:
    """Integrate one scenario and fill its energy ledger at the configured cadence."""
    from .io import snapshot_path, write_snapshot

    eos = config.eos_spec()
    spec = config.scenario()
    state, _ = make_initial_data(spec)
    if check_domain and not state.is_rest():
        need = required_r_max(spec, config.t_end)
        if spec.r_max < need:
            raise ConfigurationError(
                f"r_max = {spec.r_max} is too small for t_end = {config.t_end}; need >= {need:.4g}"
            )
    if dissipation is None:
        dissipation = config.dissipation(spec.grid)
    diag_times = _diag_times(config.t_end, config.cadence)
    snap_set = sorted(set(float(s) for s in config.snapshot_times))
    all_times = sorted(set(diag_times) | set(snap_set))
    diag_set = set(diag_times)
    ledger = EnergyLedger(probe_names=list(PROBES) if config.K >= 1 else [])
    ghost_terms: List[tuple] = []
    states: List[FieldState] = []
    written = []
    run_id = config.run_id or config.digest()

    def on_snapshot(_index: int, st: FieldState) -> None:
        if st.t in diag_set:
            ledger.append(diagnostics_row(st, eos, config.K))
            ghost_terms.append(_ghost_terms(st) if eos.is_chaplygin else (0.0, 0.0, 0.0))
            if keep_states:
                states.append(st)
        if snapshot_dir is not None and st.t in snap_set:
            idx = snap_set.index(st.t)
            written.append(write_snapshot(st, eos, snapshot_path(snapshot_dir, run_id, idx)))

    out = integrate(
        state,
        eos,
        config.t_end,
        cfl=config.cfl,
        thresholds=config.thresholds(),
        snapshot_times=all_times,
        on_snapshot=on_snapshot,
        stencil=stencil,
        dissipation=dissipation,
    )
    if eos.is_chaplygin:
        _attach_ghost_residuals(ledger, ghost_terms)
    out.ledger = ledger
    out.snapshots = states if keep_states else written
    return out


# -- lifespan -----------------------------------------------------------------

@dataclass
class LifespanResult:
    epsilon: float
    T: float
    method: str
    n: int
    r_max: float
    probe_time: float
    slope_probe: float
    status: str
    T_refined: Optional[float] = None

    @property
    def refinement_change(self) -> Optional[float]:
        if self.T_refined is None:
            return None
        return abs(self.T_refined - self.T) / self.T


def burgers_blowup_time(state: FieldState, eos: EosSpec) -> tuple:
    """Blow-up time predicted by the asymptotic Burgers equation of the outgoing wave.

    Along outgoing characteristics U = sqrt(r) Z+ obeys
    ``U_tau + ((gamma+1)/4) U U_sigma = 0`` in tau = 2 sqrt(t), sigma = r - t,
    so the steepest compressive slope ``m = -min U_sigma`` on the outgoing
    front breaks at ``tau* = tau + 4/((gamma+1) m)``.  Returns ``(T, min U_sigma)``.
    """
    grid = state.grid
    r, t = grid.r, state.t
    if t <= 0:
        raise UsageError("the Burgers predictor needs t > 0")
    dz = ddr_values(state.f, grid.h, ODD) + ddr_values(state.p, grid.h, EVEN)
    front = r > 0.5 * t
    us = float(np.min(np.sqrt(r[front]) * dz[front]))
    if not us < 0:
        return math.inf, us
    k = 0.25 * (eos.gamma + 1.0)
    tau = 2.0 * math.sqrt(t) + 1.0 / (k * -us)
    return 0.25 * tau * tau, us


def lifespan_probe(
    spec: ScenarioSpec,
    probe_time: float = 2.0,
    thresholds: Thresholds = Thresholds(),
    ko: tuple = (AXIS_DISSIPATION, FAR_DISSIPATION),
) -> LifespanResult:
    """Estimate T_eps for one polytropic scenario.

    The run is resolved up to ``probe_time``; if the gradient trigger fires
    earlier its time is reported, otherwise the Burgers predictor is applied
    to the state at ``probe_time``.  ``spec.r_max`` is replaced by the
    smallest domain that contains the wave at the probe time.
    """
    if spec.eos.is_chaplygin:
        raise UsageError("lifespan studies need a polytropic equation of state")
    r_max = required_r_max(spec, probe_time, factor=1.5)
    spec = spec.with_(r_max=r_max)
    state, _ = make_initial_data(spec)
    holder = {}

    def grab(_i, st):
        holder["state"] = st

    out = integrate(state, spec.eos, probe_time, cfl=spec.cfl, thresholds=thresholds,
                    snapshot_times=[probe_time], on_snapshot=grab,
                    dissipation=dissipation_profile(spec.grid, *ko))
    if out.status == ABORTED:
        raise SweepError(f"epsilon = {spec.epsilon}: run aborted ({out.message})")
    if out.status == BLEW_UP:
        return LifespanResult(spec.epsilon, float(out.blowup_time), "trigger", spec.n, r_max,
                              probe_time, math.nan, out.status)
    T, us = burgers_blowup_time(holder["state"], spec.eos)
    return LifespanResult(spec.epsilon, T, "burgers", spec.n, r_max, probe_time, us, out.status)


def fit_lifespan(epsilons: Sequence[float], T: Sequence[float]) -> dict:
    """Slope of log T against log eps and tau0^2 = median(eps^2 T)."""
    e = np.asarray(epsilons, dtype=float)
    T = np.asarray(T, dtype=float)
    if e.size < 2 or not np.all(np.isfinite(T)) or np.any(T <= 0):
        raise FitError("lifespan fit needs at least two finite positive lifespans")
    slope, intercept = np.polyfit(np.log(e), np.log(T), 1)
    return {"slope": float(slope), "intercept": float(intercept), "tau0_sq": float(np.median(e * e * T))}


def _probe_job(args):
    spec, probe_time, thresholds, refine, ko = args
    res = lifespan_probe(spec, probe_time, thresholds, ko)
    if refine:
        fine = lifespan_probe(spec.with_(n=2 * spec.n), probe_time, thresholds, ko)
        res.T_refined = fine.T
    return res


def lifespan_sweep(
    base: ScenarioSpec,
    epsilons: Sequence[float],
    probe_time: float = 2.0,
    thresholds: Thresholds = Thresholds(),
    refine: bool = False,
    jobs: int = 1,
    ko: tuple = (AXIS_DISSIPATION, FAR_DISSIPATION),
) -> dict:
    """T_eps over a family of amplitudes, with the log-log slope and tau0^2."""
    if base.eos.is_chaplygin:
        raise UsageError("lifespan_sweep needs a polytropic equation of state")
    eps = sorted(float(e) for e in epsilons)
    if len(eps) < 4:
        raise UsageError(f"lifespan_sweep needs at least 4 epsilon values, got {len(eps)}")
    if eps[0] <= 0 or eps[-1] / eps[0] < 4.0:
        raise UsageError("epsilon values must be positive and span a factor of at least 4")
    tasks = [(base.with_(epsilon=e), probe_time, thresholds, refine, tuple(ko)) for e in eps]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_probe_job, tasks))
    else:
        results = [_probe_job(t) for t in tasks]
    results.sort(key=lambda r: r.epsilon)
    fit = fit_lifespan([r.epsilon for r in results], [r.T for r in results])
    return {"rows": results, **fit}


# -- decay --------------------------------------------------------------------

DECAY_PROBES = {
    "near_dr_vf": -1.5,
    "near_dr_f_weighted": 0.0,
    "inner_dt_vv": -1.99,
    "inner_div_f": -1.99,
    "inner_f": -1.0,
    "dt_G": -1.99,
}


@dataclass
class DecayReport:
    outcome: RunOutcome
    window: tuple
    exponents: Dict[str, Optional[float]] = field(default_factory=dict)
    r_squared: Dict[str, Optional[float]] = field(default_factory=dict)
    energy_ratio: Optional[float] = None
    finding: str = ""

    @property
    def ledger(self) -> EnergyLedger:
        return self.outcome.ledger


def decay_study(config: SimConfig, window: Optional[tuple] = None, enforce_horizon: bool = True) -> DecayReport:
    """Chaplygin run with per-unit-time probes and decay-exponent fits."""
    if config.eos != "chaplygin":
        raise UsageError("decay_study runs the Chaplygin system")
    if enforce_horizon and (config.t_end < 200 or config.cadence > 1.0):
        raise UsageError("decay_study needs t_end >= 200 and cadence <= 1")
    if window is None:
        hi = config.fit_hi if config.fit_hi is not None else 0.9 * config.t_end
        window = (config.fit_lo, hi)
    out = run_config(config)
    report = DecayReport(outcome=out, window=tuple(window))
    if out.status == BLEW_UP:
        report.finding = f"blow-up trigger fired at t = {out.blowup_time:.6g} ({out.message})"
    ledger = out.ledger
    t = ledger.column("t")
    for name in DECAY_PROBES:
        y = ledger.column(name)
        if not np.any(y > 0):
            report.exponents[name] = None
            report.r_squared[name] = None
            continue
        try:
            report.exponents[name], report.r_squared[name] = fit_decay(np.column_stack([t, y]), window)
        except FitError:
            report.exponents[name] = None
            report.r_squared[name] = None
    E2 = ledger.column("E2")
    i1 = np.flatnonzero(np.isclose(t, 1.0))
    if i1.size and E2[i1[0]] > 0:
        report.energy_ratio = float(E2[-1] / E2[i1[0]])
    return report


# -- convergence --------------------------------------------------------------

@dataclass
class ConvergenceReport:
    resolutions: tuple
    errors: Dict[str, tuple]
    orders: Dict[str, Optional[float]]
    exact: bool = False

    @property
    def min_order(self) -> float:
        vals = [o for o in self.orders.values() if o is not None]
        return min(vals) if vals else math.inf


def convergence_study(
    spec: ScenarioSpec, resolutions: Sequence[int], stencil: str = "central4", dissipation=None
) -> ConvergenceReport:
    """Observed order from three grids (n, 2n, 4n) sharing r_max.

    Fine solutions are transferred to the coarse grid by repeated sixth-order
    restriction.  Reports ``log2(|u_n - u_2n| / |u_2n - u_4n|)`` per field in
    L2 and L-infinity.  ``dissipation`` may be a callable of the grid.
    """
    n0, n1, n2 = (int(x) for x in resolutions)
    if not (n1 == 2 * n0 and n2 == 2 * n1):
        raise ConfigurationError(f"resolutions must be (n, 2n, 4n), got {tuple(resolutions)}")
    finals = []
    for n in (n0, n1, n2):
        s = spec.with_(n=n)
        state, _ = make_initial_data(s)
        sigma = dissipation(s.grid) if callable(dissipation) else dissipation
        out = integrate(state, s.eos, s.t_end, cfl=s.cfl, stencil=stencil, dissipation=sigma)
        if out.status != COMPLETED:
            raise SweepError(f"convergence run at n = {n} ended with {out.status}: {out.message}")
        finals.append(out.final_state)
    grid = finals[0].grid
    errors, orders = {}, {}
    exact = True
    for name, par in (("p", EVEN), ("f", ODD), ("g", ODD)):
        u0 = getattr(finals[0], name)
        u1 = restrict_to_coarse(getattr(finals[1], name), par)
        u2 = restrict_to_coarse(restrict_to_coarse(getattr(finals[2], name), par), par)
        d01, d12 = u0 - u1, u1 - u2
        for norm, fn in (("L2", lambda x: l2(x, grid)), ("Linf", lambda x: float(np.max(np.abs(x))))):
            e1, e2 = fn(d01), fn(d12)
            errors[f"{name}_{norm}"] = (e1, e2)
            if e1 == 0.0 and e2 == 0.0:
                orders[f"{name}_{norm}"] = None
            else:
                exact = False
                orders[f"{name}_{norm}"] = math.log2(e1 / e2) if e2 > 0 else math.inf
    return ConvergenceReport((n0, n1, n2), errors, orders, exact)


# -- conservation ---------------------------------------------------------------

@dataclass
class ConservationReport:
    t: np.ndarray
    mass: np.ndarray
    rg_sup: np.ndarray
    w_sup: np.ndarray
    mass_drift: np.ndarray
    rg_drift: np.ndarray
    w_drift: np.ndarray

    def max_drifts(self) -> dict:
        return {
            "mass": float(np.max(self.mass_drift)),
            "rg_sup": float(np.max(self.rg_drift)),
            "w_sup": float(np.max(self.w_drift)),
        }


def _relative(x: np.ndarray, scale: float) -> np.ndarray:
    d = np.abs(x - x[0])
    if scale == 0.0:
        return np.where(d == 0.0, 0.0, np.inf)
    return d / scale


def conservation_audit(snapshots: Sequence[FieldState], eos: EosSpec, epsilon: float = 0.0) -> ConservationReport:
    """Drift of mass, sup |r g| and sup |w| relative to their initial values.

    The mass drift is normalized by ``|m(0)| + epsilon h``.
    """
    if not snapshots:
        raise UsageError("conservation_audit needs at least one snapshot")
    t = np.array([s.t for s in snapshots])
    m = np.array([mass(s, eos) for s in snapshots])
    rg = np.array([float(np.max(np.abs(s.grid.r * s.g))) for s in snapshots])
    w = np.array([float(np.max(np.abs(specific_vorticity(s, eos).samples))) for s in snapshots])
    h = snapshots[0].grid.h
    return ConservationReport(
        t, m, rg, w,
        _relative(m, abs(m[0]) + epsilon * h),
        _relative(rg, rg[0]),
        _relative(w, w[0]),
    )
