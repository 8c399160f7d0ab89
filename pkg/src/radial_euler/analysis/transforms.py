"""Pointwise transforms of a state: the G correction, vorticity, Riemann invariants."""

from __future__ import annotations

import numpy as np

from ..dynamics import FieldState, StateInvalid, check_state
from ..eos import EosSpec
from ..grid import EVEN, ODD, RadialField, RadialGrid, UsageError, ddr_values, div_radial_values


def cumulative_from_right(integrand: np.ndarray, grid: RadialGrid, parity: str = ODD) -> np.ndarray:
    """``out[j] = int_{r_j}^{r_max} integrand dr`` with fourth-order panels.

    Each panel ``[r_j, r_{j+1}]`` is integrated with the cubic through four
    neighbouring samples (parity ghost below the axis, zeros past r_max).  A
    panel whose two end samples are exactly zero contributes nothing, so the
    result vanishes identically outside the support of the integrand.
    """
    n = integrand.shape[0]
    sign = 1.0 if parity == EVEN else -1.0
    ext = np.zeros(n + 3)
    ext[1 : n + 1] = integrand
    ext[0] = sign * integrand[0]
    left, a, b, right = ext[0:n], ext[1 : n + 1], ext[2 : n + 2], ext[3 : n + 3]
    panel = grid.h / 24.0 * (13.0 * (a + b) - (left + right))
    panel[(a == 0.0) & (b == 0.0)] = 0.0
    out = np.cumsum(panel[::-1])[::-1]
    # panel n-1 reaches past r_max where everything is zero; drop it
    out -= panel[-1]
    return out


def _check_chaplygin_density(state: FieldState) -> np.ndarray:
    one_v = 1.0 + state.p
    if np.any(~(one_v > 0)):
        j = int(np.argmax(~(one_v > 0)))
        raise StateInvalid("1 + v must be positive", j, float(state.grid.r[j]))
    return one_v


def compute_G_values(state: FieldState) -> np.ndarray:
    one_v = _check_chaplygin_density(state)
    integrand = state.g * state.g / (one_v * state.grid.r)
    return cumulative_from_right(integrand, state.grid, ODD)


def compute_G(state: FieldState) -> RadialField:
    """Solution of ``(1 + v) dG/dr + g**2/r = 0`` with ``G(inf) = 0``."""
    return RadialField(state.grid, compute_G_values(state), EVEN)


def decompose_v(state: FieldState):
    """Split ``v = vv + G`` into the decaying part ``vv`` and the G correction."""
    G = compute_G(state)
    return RadialField(state.grid, state.p - G.samples, EVEN), G


def inverse_density(state: FieldState, eos: EosSpec) -> np.ndarray:
    """1/rho: ``1 + v`` for Chaplygin, ``(1 + kappa c_dot)**(-1/kappa)`` for polytropic."""
    if eos.is_chaplygin:
        return 1.0 + state.p
    if eos.gamma == 1.0:
        return np.exp(-state.p)
    c = 1.0 + eos.kappa * state.p
    return c ** (-1.0 / eos.kappa)


def specific_vorticity(state: FieldState, eos: EosSpec = EosSpec()) -> RadialField:
    """curl u / rho = (1/rho)(d/dr + 1/r) g."""
    check_state(state, eos)
    w = inverse_density(state, eos) * div_radial_values(state.g, state.grid)
    return RadialField(state.grid, w, EVEN)


def riemann_invariants(state: FieldState, eos: EosSpec):
    """Z+ = f + c_dot and Z- = f - c_dot (polytropic only)."""
    if eos.is_chaplygin:
        raise UsageError("Riemann invariants are defined for polytropic gases")
    zp = state.f + state.p
    zm = state.f - state.p
    return RadialField(state.grid, zp), RadialField(state.grid, zm)


def q_terms(state: FieldState):
    """Quadratic terms of the Chaplygin system in both algebraic forms.

    Returns ``(Q1, Q2, Q1_null, Q2_null)``; the second pair is written with
    the good combination ``v + f`` made explicit.
    """
    grid = state.grid
    v, f, g = state.p, state.f, state.g
    vr = ddr_values(v, grid.h, EVEN)
    fr = ddr_values(f, grid.h, ODD)
    r = grid.r
    q1 = v * (fr + f / r) - f * vr
    q2 = v * vr - f * fr + g * g / r
    sum_r = vr + fr
    q1_null = v * sum_r - (v + f) * vr + v * f / r
    q2_null = v * sum_r - (v + f) * fr + g * g / r
    return q1, q2, q1_null, q2_null
