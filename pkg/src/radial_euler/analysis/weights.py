"""Cutoff pair and ghost weight used to localize the energies."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..grid import RadialField, RadialGrid

#: beyond |s| > GHOST_S_STAR the ghost weight uses its asymptotic series
GHOST_S_STAR = 1.0e4
_TABLE_SIZE = 40001


def japanese(x):
    """<x> = (1 + x**2)**(1/2)."""
    return np.sqrt(1.0 + np.square(x))


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def chi0_of_s(s):
    """1 for s <= 1/4, 0 for s >= 1/2, cubic smoothstep in between."""
    return smoothstep((0.5 - np.asarray(s, dtype=float)) / 0.25)


def chi0_prime_of_s(s):
    s = np.asarray(s, dtype=float)
    u = (0.5 - s) / 0.25
    inside = (u > 0) & (u < 1)
    return np.where(inside, -4.0 * 6.0 * u * (1.0 - u), 0.0)


@dataclass(frozen=True, eq=False)
class CutoffPair:
    chi0: RadialField
    chi1: RadialField
    t: float

    @property
    def s(self) -> np.ndarray:
        return self.chi0.grid.r / japanese(self.t)


def cutoffs(grid: RadialGrid, t: float) -> CutoffPair:
    s = grid.r / japanese(t)
    chi0 = chi0_of_s(s)
    chi1 = 1.0 - chi0
    return CutoffPair(RadialField(grid, chi0), RadialField(grid, chi1), float(t))


# -- ghost weight -------------------------------------------------------------

def ghost_rate(s):
    """q'(s) = <s>**(-5/4)."""
    return (1.0 + np.square(s)) ** (-0.625)


def _tail_integral(s):
    """int_s^inf (1 + x**2)**(-5/8) dx for s >= GHOST_S_STAR (binomial series)."""
    s = np.asarray(s, dtype=float)
    total = np.zeros_like(s)
    coeff = 1.0
    for k in range(4):
        total += coeff * s ** (-0.25 - 2 * k) / (0.25 + 2 * k)
        coeff *= (-0.625 - k) / (k + 1)
    return total


@lru_cache(maxsize=1)
def _ghost_table():
    # nodes uniform in x = asinh(s): dense near s = 0, sparse in the tails
    x_star = np.arcsinh(GHOST_S_STAR)
    x = np.linspace(-x_star, x_star, _TABLE_SIZE)
    s = np.sinh(x)
    # integrate q'(s(x)) ds/dx on each panel with 8-point Gauss-Legendre
    nodes, weights = np.polynomial.legendre.leggauss(8)
    a, b = x[:-1], x[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    xs = mid[:, None] + half[:, None] * nodes[None, :]
    panel = (ghost_rate(np.sinh(xs)) * np.cosh(xs)) @ weights * half
    # accumulate from the right so q(+S*) carries the analytic tail
    right = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
    q = -(right + _tail_integral(np.array([GHOST_S_STAR]))[0])
    dq_dx = ghost_rate(s) * np.cosh(x)
    spline = CubicHermiteSpline(x, q, dq_dx)
    total = -q[0] + _tail_integral(np.array([GHOST_S_STAR]))[0]
    return spline, total


def ghost_q(s):
    """q(s) = -int_s^inf <x>**(-5/4) dx, so q' = <s>**(-5/4) and q(inf) = 0."""
    s = np.asarray(s, dtype=float)
    spline, total = _ghost_table()
    out = np.empty_like(s)
    hi = s > GHOST_S_STAR
    lo = s < -GHOST_S_STAR
    mid = ~(hi | lo)
    out[mid] = spline(np.arcsinh(s[mid]))
    out[hi] = -_tail_integral(s[hi])
    out[lo] = -(total - _tail_integral(-s[lo]))
    return out if out.ndim else float(out)


def ghost_total() -> float:
    """int_{-inf}^{inf} <x>**(-5/4) dx, i.e. -q(-inf)."""
    return _ghost_table()[1]


@dataclass(frozen=True, eq=False)
class GhostWeight:
    q: RadialField
    q_prime: RadialField
    t: float

    @property
    def exp_q(self) -> np.ndarray:
        return np.exp(self.q.samples)


def ghost_weight(grid: RadialGrid, t: float) -> GhostWeight:
    s = grid.r - t
    return GhostWeight(RadialField(grid, ghost_q(s)), RadialField(grid, ghost_rate(s)), float(t))
