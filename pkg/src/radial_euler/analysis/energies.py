"""Weighted energies built from the derivative table, and the data size epsilon."""

from __future__ import annotations

import numpy as np

from ..dynamics import FieldState
from ..grid import EVEN, ODD, RadialField, ddr_values, l2, lp
from .derivatives import DerivativeTable, UnsupportedOrder, gamma_values, multi_indices
from .weights import CutoffPair, japanese


def _D(values, grid):
    return ddr_values(values, grid.h, ODD) + values / grid.r


def _require(table: DerivativeTable, k: int) -> None:
    if k < 0:
        raise ValueError("energy order must be nonnegative")
    if k > table.K:
        raise UnsupportedOrder(f"order {k} exceeds table depth {table.K}")


def energy_E(table: DerivativeTable, k: int) -> float:
    """sum_{|a|<=k} ||G^a v|| + ||G^a f|| + ||G^a g||  +  sum_{|b|<=k-1} ||(d_r + 1/r) G^b g||."""
    _require(table, k)
    grid = table.grid
    total = 0.0
    for a in multi_indices(k):
        for name in ("p", "f", "g"):
            total += l2(gamma_values(table, a, name), grid)
    for b in multi_indices(k - 1):
        total += l2(_D(gamma_values(table, b, "g"), grid), grid)
    return total


def _dt_gamma(table, a, name):
    return gamma_values(table, (a[0] + 1, a[1]), name)


def _dr_gamma(table, a, name):
    return ddr_values(gamma_values(table, a, name), table.grid.h, table.parity[name])


def energy_Y(table: DerivativeTable, cut: CutoffPair, k: int) -> float:
    """Near-cone energy: <r - t> chi1 weighted L2 norms of d Gamma^a (v, f), |a| <= k - 1."""
    _require(table, k)
    grid = table.grid
    weight = japanese(grid.r - table.t) * cut.chi1.samples
    total = 0.0
    for a in multi_indices(k - 1):
        for name in ("p", "f"):
            total += l2(weight * _dt_gamma(table, a, name), grid)
            total += l2(weight * _dr_gamma(table, a, name), grid)
    return total


def energy_X(table: DerivativeTable, cut: CutoffPair, k: int) -> float:
    """Interior energy: <t> times chi0-localized norms of d Gamma^a vv and d Gamma^a f.

    The first group runs over |a| <= k - 1 with (d_t, d_r) on vv and
    (d_t, d_r + 1/r) on f; the second over |b| <= k - 2 with
    (d_r + 1/r) d_r on vv and d_r (d_r + 1/r) on f.
    """
    _require(table, k)
    grid = table.grid
    chi0 = cut.chi0.samples
    total = 0.0
    for a in multi_indices(k - 1):
        total += l2(chi0 * _dt_gamma(table, a, "vv"), grid)
        total += l2(chi0 * _dr_gamma(table, a, "vv"), grid)
        total += l2(chi0 * _dt_gamma(table, a, "f"), grid)
        total += l2(chi0 * _D(gamma_values(table, a, "f"), grid), grid)
    for b in multi_indices(k - 2):
        vr = _dr_gamma(table, b, "vv")
        total += l2(chi0 * _D(vr, grid), grid)
        Df = _D(gamma_values(table, b, "f"), grid)
        total += l2(chi0 * ddr_values(Df, grid.h, EVEN), grid)
    return float(japanese(table.t)) * total


def vorticity_W(table: DerivativeTable, k: int) -> float:
    """sum_{|a|<=k} ||Gamma^a w||_{L^3} + ||d_r Gamma^a w||_{L^3}."""
    _require(table, k)
    grid = table.grid
    total = 0.0
    for a in multi_indices(k):
        gw = gamma_values(table, a, "w")
        total += lp(gw, grid, 3.0) + lp(ddr_values(gw, grid.h, EVEN), grid, 3.0)
    return total


def _r_dr_power(values, grid, parity, k):
    out = values
    for _ in range(k):
        out = grid.r * ddr_values(out, grid.h, parity)
    return out


def _dr_power(values, grid, parity, l):
    out, par = values, parity
    for _ in range(l):
        out = ddr_values(out, grid.h, par)
        par = ODD if par == EVEN else EVEN
    return out, par


def data_size_epsilon(initial: FieldState, rho0: RadialField, N_trunc: int = 2) -> float:
    """Truncated size of the data (rho0 - 1, u0) in the weighted norms defining epsilon.

    Vector quantities are combined pointwise in the Euclidean norm; for the
    radial reduction |u0|^2 = f0^2 + g0^2 and (r d_r) acts on f0, g0 directly.
    """
    if N_trunc > 2:
        raise UnsupportedOrder(f"data_size_epsilon supports N_trunc <= 2, got {N_trunc}")
    if N_trunc < 0:
        raise ValueError("N_trunc must be nonnegative")
    grid = initial.grid
    a = rho0.samples - 1.0
    f0, g0 = initial.f, initial.g
    total = 0.0
    for k in range(N_trunc + 1):
        ak = _r_dr_power(a, grid, EVEN, k)
        fk = _r_dr_power(f0, grid, ODD, k)
        gk = _r_dr_power(g0, grid, ODD, k)
        total += l2(np.sqrt(ak * ak + fk * fk + gk * gk), grid)
    curl = _D(g0, grid)
    div = _D(f0, grid)
    grad = ddr_values(a, grid.h, EVEN)
    for k in range(N_trunc - 1):
        for l in range(N_trunc - 1 - k):
            c, par = _dr_power(curl, grid, EVEN, l)
            total += lp(_r_dr_power(c, grid, par, k), grid, 3.0)
    bracket = japanese(grid.r)
    for k in range(N_trunc):
        for l in range(N_trunc - k):
            parts = []
            for base, par in ((grad, ODD), (div, EVEN), (curl, EVEN)):
                d, dpar = _dr_power(base, grid, par, l)
                parts.append(_r_dr_power(d, grid, dpar, k))
            mag = np.sqrt(sum(x * x for x in parts))
            total += l2(bracket * mag, grid)
    return total
