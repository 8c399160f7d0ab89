"""Integral audits on trajectories, decay fits and the per-run energy ledger."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..dynamics import FieldState
from ..eos import EosSpec
from ..grid import UsageError, radial_integral
from .transforms import q_terms
from .weights import ghost_weight


class FitError(ValueError):
    """Raised when a decay fit has too few usable points."""


MIN_FIT_POINTS = 10


def fit_decay(series, window=None):
    """Least-squares slope of log(value) against log(t).

    ``series`` is a sequence of (t, value) pairs or a (n, 2) array.  Returns
    ``(exponent, r_squared)``.  Nonpositive values are dropped with a warning.
    """
    data = np.asarray(series, dtype=float).reshape(-1, 2)
    t, y = data[:, 0], data[:, 1]
    keep = np.isfinite(t) & np.isfinite(y) & (t > 0)
    if window is not None:
        lo, hi = window
        keep &= (t >= lo) & (t <= hi)
    bad = keep & ~(y > 0)
    if bad.any():
        warnings.warn(f"fit_decay: dropping {int(bad.sum())} nonpositive values", RuntimeWarning)
    keep &= y > 0
    if keep.sum() < MIN_FIT_POINTS:
        raise FitError(f"need at least {MIN_FIT_POINTS} usable points, got {int(keep.sum())}")
    x, z = np.log(t[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(x, z, 1)
    resid = z - (slope * x + intercept)
    ss_tot = float(np.sum((z - z.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), r2


def _ghost_terms(state: FieldState):
    """(energy F, ghost dissipation A, source B) at one snapshot.

    F = int e^q r (v^2 + f^2) dr, A = int q' e^q r (v + f)^2 dr,
    B = 2 int e^q r (v Q1 + f Q2) dr; the identity reads dF/dt + A - B = 0.
    """
    gw = ghost_weight(state.grid, state.t)
    eq = gw.exp_q
    v, f = state.p, state.f
    q1, q2, _, _ = q_terms(state)
    F = radial_integral(eq * (v * v + f * f), state.grid)
    A = radial_integral(gw.q_prime.samples * eq * (v + f) ** 2, state.grid)
    B = 2.0 * radial_integral(eq * (v * q1 + f * q2), state.grid)
    return F, A, B


@dataclass
class GhostAudit:
    t: np.ndarray
    residual: np.ndarray
    normalized: np.ndarray

    @property
    def max_normalized(self) -> float:
        return float(self.normalized.max()) if self.normalized.size else 0.0


def ghost_energy_audit(snapshots: Sequence[FieldState], eos: EosSpec = EosSpec()) -> GhostAudit:
    """Order-zero ghost-weight energy identity checked along equally spaced snapshots.

    The time derivative of F is a centered difference; the instantaneous
    terms are averaged with Simpson weights over the same three snapshots,
    so both sides carry an O(dt**4) time error and the residual measures the
    spatial discretization.  The outer boundary flux vanishes because the
    fields have compact support.
    """
    if not eos.is_chaplygin:
        raise UsageError("the ghost energy identity is stated for the Chaplygin system")
    if len(snapshots) < 3:
        raise UsageError("ghost_energy_audit needs at least 3 snapshots")
    ts = np.array([s.t for s in snapshots])
    dts = np.diff(ts)
    if np.any(dts <= 0) or not np.allclose(dts, dts[0], rtol=1e-9, atol=0.0):
        raise UsageError("snapshots must be equally spaced in time")
    terms = np.array([_ghost_terms(s) for s in snapshots])
    F, A, B = terms[:, 0], terms[:, 1], terms[:, 2]
    R = A - B
    dF = (F[2:] - F[:-2]) / (ts[2:] - ts[:-2])
    Ravg = (R[:-2] + 4.0 * R[1:-1] + R[2:]) / 6.0
    residual = np.abs(dF + Ravg)
    scale = np.maximum.reduce([np.abs(dF), np.abs(A[1:-1]), np.abs(B[1:-1])])
    normalized = np.divide(residual, scale, out=np.zeros_like(residual), where=scale > 0)
    return GhostAudit(ts[1:-1], residual, normalized)


# -- ledger -------------------------------------------------------------------

LEDGER_COLUMNS = (
    "t", "E0", "E1", "E2", "X1", "X2", "Y1", "Y2", "W0", "mass", "rg_sup", "w_sup",
    "ghost_residual",
)


@dataclass
class EnergyLedger:
    """Rows of diagnostics keyed by column name; times strictly increasing."""

    probe_names: List[str] = field(default_factory=list)
    rows: List[Dict[str, float]] = field(default_factory=list)

    @property
    def columns(self):
        return list(LEDGER_COLUMNS) + list(self.probe_names)

    def append(self, row: Dict[str, float]) -> None:
        if self.rows and not row["t"] > self.rows[-1]["t"]:
            raise ValueError("ledger times must be strictly increasing")
        for name in row:
            if name not in LEDGER_COLUMNS and name not in self.probe_names:
                self.probe_names.append(name)
        full = {c: float(row.get(c, 0.0)) for c in self.columns}
        for c, v in full.items():
            if not np.isfinite(v):
                raise ValueError(f"ledger entry {c} is not finite: {v}")
        self.rows.append(full)

    def column(self, name: str) -> np.ndarray:
        return np.array([row.get(name, np.nan) for row in self.rows])

    def __len__(self) -> int:
        return len(self.rows)
