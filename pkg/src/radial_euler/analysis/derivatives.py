"""Time-derivative table and the commuting vector fields Gamma^a = d_t^a1 S^a2.

Time derivatives are obtained by substituting the evolution equations and
their product-rule t-derivatives, so only the current state is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from ..dynamics import FieldState, rhs
from ..eos import EosSpec
from ..grid import EVEN, ODD, RadialField, RadialGrid, UsageError, ddr_values, flip_parity
from .transforms import cumulative_from_right, inverse_density

MAX_ORDER = 2

#: parities of the table entries; p is v (Chaplygin) or c_dot (polytropic),
#: vv = v - G, w is the specific vorticity
PARITY = {"p": EVEN, "f": ODD, "g": ODD, "G": EVEN, "vv": EVEN, "w": EVEN}


class UnsupportedOrder(UsageError):
    """Raised when a derivative order beyond the table depth is requested."""


@dataclass(eq=False)
class DerivativeTable:
    """``entries[name][k]`` holds samples of the k-th time derivative of ``name``."""

    grid: RadialGrid
    t: float
    K: int
    entries: Dict[str, List[np.ndarray]]
    parity: Dict[str, str]
    _dr_cache: Dict[Tuple[str, int, int], np.ndarray] = field(default_factory=dict, repr=False)

    def entry(self, k: int, name: str) -> RadialField:
        return RadialField(self.grid, self.values(name, k), self.parity[name])

    def values(self, name: str, k: int = 0) -> np.ndarray:
        if k > self.K or k >= len(self.entries[name]):
            raise UnsupportedOrder(f"d_t^{k} {name} exceeds table depth {self.K}")
        return self.entries[name][k]

    def dr(self, name: str, k: int, l: int) -> np.ndarray:
        """``d_r^l d_t^k`` of ``name``, cached."""
        if l == 0:
            return self.values(name, k)
        key = (name, k, l)
        if key not in self._dr_cache:
            below = self.dr(name, k, l - 1)
            par = self.parity[name] if l % 2 == 1 else flip_parity(self.parity[name])
            self._dr_cache[key] = ddr_values(below, self.grid.h, par)
        return self._dr_cache[key]

    def scaled(self, c: float) -> "DerivativeTable":
        """Every entry multiplied by ``c`` (a frozen-table rescaling, not a new solve)."""
        ent = {k: [c * a for a in v] for k, v in self.entries.items()}
        return DerivativeTable(self.grid, self.t, self.K, ent, dict(self.parity))


def _D(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    return ddr_values(values, grid.h, ODD) + values / grid.r


def _second_derivatives(state, eos, d1):
    grid = state.grid
    h, r = grid.h, grid.r
    p, f, g = state.p, state.f, state.g
    pt, ft, gt = d1
    pr = ddr_values(p, h, EVEN)
    fr = ddr_values(f, h, ODD)
    ptr = ddr_values(pt, h, EVEN)
    ftr = ddr_values(ft, h, ODD)
    Df, Dft = _D(f, grid), _D(ft, grid)
    Dg, Dgt = _D(g, grid), _D(gt, grid)
    rot = 2.0 * g * gt / r
    if eos.is_chaplygin:
        m = 1.0 + p
        ptt = pt * Df + m * Dft - ft * pr - f * ptr
        ftt = eos.B * (pt * pr + m * ptr) - ft * fr - f * ftr + rot
    else:
        k = eos.kappa
        c = 1.0 + k * p
        ptt = -ft * pr - f * ptr - k * pt * Df - c * Dft
        ftt = -ft * fr - f * ftr - k * pt * pr - c * ptr + rot
    gtt = -ft * Dg - f * Dgt
    return ptt, ftt, gtt


def _inverse_density_derivs(state, eos, ps):
    """1/rho and its first two time derivatives."""
    m = inverse_density(state, eos)
    out = [m]
    if len(ps) > 1:
        if eos.is_chaplygin:
            out.extend(ps[1:])
        else:
            c = 1.0 + eos.kappa * state.p
            mt = -m * ps[1] / c
            out.append(mt)
            if len(ps) > 2:
                out.append(-(mt * ps[1] + m * ps[2]) / c + eos.kappa * m * ps[1] ** 2 / c**2)
    return out


def _G_derivs(state, ps, gs):
    """G = int_r^inf g^2/((1+v) r') dr' and its time derivatives."""
    grid = state.grid
    r = grid.r
    m = 1.0 + ps[0]
    g = gs[0]
    integrands = [g * g / (m * r)]
    if len(ps) > 1:
        vt, gt = ps[1], gs[1]
        integrands.append(2.0 * g * gt / (m * r) - g * g * vt / (m * m * r))
        if len(ps) > 2:
            vtt, gtt = ps[2], gs[2]
            integrands.append(
                2.0 * (gt * gt + g * gtt) / (m * r)
                - 4.0 * g * gt * vt / (m * m * r)
                - g * g * vtt / (m * m * r)
                + 2.0 * g * g * vt * vt / (m**3 * r)
            )
    return [cumulative_from_right(I, grid, ODD) for I in integrands]


def build_derivative_table(state: FieldState, eos: EosSpec, K: int = MAX_ORDER) -> DerivativeTable:
    """Time derivatives up to order K of (p, f, g) and the auxiliaries G, vv, w.

    For a polytropic state G is identically zero and vv equals c_dot.
    """
    if K > MAX_ORDER or K < 0:
        raise UnsupportedOrder(f"derivative tables support 0 <= K <= {MAX_ORDER}, got {K}")
    grid = state.grid
    ps, fs, gs = [state.p], [state.f], [state.g]
    if K >= 1:
        d1 = rhs(state, eos)
        ps.append(d1[0]); fs.append(d1[1]); gs.append(d1[2])
    if K >= 2:
        d2 = _second_derivatives(state, eos, d1)
        ps.append(d2[0]); fs.append(d2[1]); gs.append(d2[2])
    if eos.is_chaplygin:
        Gs = _G_derivs(state, ps, gs)
    else:
        Gs = [np.zeros(grid.n) for _ in ps]
    vvs = [a - b for a, b in zip(ps, Gs)]
    ms = _inverse_density_derivs(state, eos, ps)
    Dg = [_D(x, grid) for x in gs]
    ws = [ms[0] * Dg[0]]
    if K >= 1:
        ws.append(ms[1] * Dg[0] + ms[0] * Dg[1])
    if K >= 2:
        ws.append(ms[2] * Dg[0] + 2.0 * ms[1] * Dg[1] + ms[0] * Dg[2])
    entries = {"p": ps, "f": fs, "g": gs, "G": Gs, "vv": vvs, "w": ws}
    return DerivativeTable(grid, float(state.t), K, entries, dict(PARITY))


# -- Gamma^a ----------------------------------------------------------------
#
# An operator is a dict mapping (t power, r power, t order, r order) to a
# coefficient, i.e. sum c * t^i r^j d_t^k d_r^l.

def _apply_S(op):
    out = {}
    for (i, j, k, l), c in op.items():
        # t d_t (t^i r^j D) = i t^i r^j D + t^(i+1) r^j d_t D, similarly for r d_r
        for key, w in (
            ((i, j, k, l), float(i + j)),
            ((i + 1, j, k + 1, l), 1.0),
            ((i, j + 1, k, l + 1), 1.0),
        ):
            if w:
                out[key] = out.get(key, 0.0) + c * w
    return out


def _apply_dt(op):
    out = {}
    for (i, j, k, l), c in op.items():
        if i:
            key = (i - 1, j, k, l)
            out[key] = out.get(key, 0.0) + c * i
        key = (i, j, k + 1, l)
        out[key] = out.get(key, 0.0) + c
    return out


def gamma_operator(a):
    """Expansion of ``d_t^a1 S^a2`` as a dict of (t pow, r pow, d_t order, d_r order) terms."""
    a1, a2 = a
    op = {(0, 0, 0, 0): 1.0}
    for _ in range(a2):
        op = _apply_S(op)
    for _ in range(a1):
        op = _apply_dt(op)
    return op


def gamma_values(table: DerivativeTable, a, name: str = "p") -> np.ndarray:
    a1, a2 = a
    if a1 < 0 or a2 < 0:
        raise ValueError("multi-index entries must be nonnegative")
    if a1 + a2 > table.K:
        raise UnsupportedOrder(f"|a| = {a1 + a2} exceeds table depth {table.K}")
    r = table.grid.r
    out = np.zeros(table.grid.n)
    for (i, j, k, l), c in sorted(gamma_operator(a).items()):
        out += c * table.t**i * r**j * table.dr(name, k, l)
    return out


def gamma_apply(table: DerivativeTable, a, name: str = "p") -> RadialField:
    """Gamma^a applied to the table field ``name``; the parity is preserved."""
    return RadialField(table.grid, gamma_values(table, a, name), table.parity[name])


def multi_indices(order: int):
    """All (a1, a2) with a1 + a2 <= order."""
    return [(a1, s - a1) for s in range(order + 1) for a1 in range(s, -1, -1)]
