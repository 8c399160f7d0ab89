"""One ledger row of diagnostics for a state."""

from __future__ import annotations

import numpy as np

from ..dynamics import FieldState
from ..eos import EosSpec, density_from_dot_c
from ..grid import radial_integral
from .derivatives import build_derivative_table
from .energies import energy_E, energy_X, energy_Y, vorticity_W
from .weights import cutoffs, japanese

PROBES = ("near_dr_vf", "near_dr_f_weighted", "inner_dt_vv", "inner_div_f", "inner_f", "dt_G")


def density(state: FieldState, eos: EosSpec) -> np.ndarray:
    if eos.is_chaplygin:
        return 1.0 / (1.0 + state.p)
    return density_from_dot_c(eos, state.p)


def mass(state: FieldState, eos: EosSpec) -> float:
    """2 pi int (rho - 1) r dr."""
    return 2.0 * np.pi * radial_integral(density(state, eos) - 1.0, state.grid)


def probes(table, cut) -> dict:
    """Sup-norm decay probes near and away from the light cone."""
    grid = table.grid
    t = table.t
    chi0, chi1 = cut.chi0.samples, cut.chi1.samples
    vr = table.dr("p", 0, 1)
    fr = table.dr("f", 0, 1)
    Df = fr + table.values("f") / grid.r
    return {
        "near_dr_vf": float(np.max(np.abs(chi1 * (vr + fr)))),
        "near_dr_f_weighted": float(
            np.max(np.abs(chi1 * japanese(grid.r - t) ** 1.5 * fr)) * japanese(t) ** 0.5
        ),
        "inner_dt_vv": float(np.max(np.abs(chi0 * table.values("vv", 1)))),
        "inner_div_f": float(np.max(np.abs(chi0 * Df))),
        "inner_f": float(np.max(np.abs(chi0 * table.values("f")))),
        "dt_G": float(np.max(np.abs(table.values("G", 1)))),
    }


def diagnostics_row(state: FieldState, eos: EosSpec, K: int = 2) -> dict:
    """Energies up to order K (higher orders record 0), sup-norm probes, mass and transported sup norms."""
    table = build_derivative_table(state, eos, K)
    cut = cutoffs(state.grid, state.t)
    row = {"t": float(state.t)}
    for k in range(3):
        row[f"E{k}"] = energy_E(table, k) if k <= K else 0.0
    for k in (1, 2):
        row[f"X{k}"] = energy_X(table, cut, k) if k <= K else 0.0
        row[f"Y{k}"] = energy_Y(table, cut, k) if k <= K else 0.0
    row["W0"] = vorticity_W(table, 0)
    row["mass"] = mass(state, eos)
    row["rg_sup"] = float(np.max(np.abs(state.grid.r * state.g)))
    row["w_sup"] = float(np.max(np.abs(table.values("w"))))
    # filled in by the run once neighbouring rows exist
    row["ghost_residual"] = 0.0
    if K >= 1:
        row.update(probes(table, cut))
    return row
