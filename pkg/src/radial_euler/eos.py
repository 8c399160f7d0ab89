"""Equations of state for isentropic gases.

Two families are supported: the Chaplygin gas ``P = P0 - B/rho`` and the
polytropic gas ``P = A rho**gamma``.  All functions accept scalars or numpy
arrays and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

CHAPLYGIN = "chaplygin"
POLYTROPIC = "polytropic"


class DomainError(ValueError):
    """Raised when a thermodynamic function is evaluated outside its domain."""


@dataclass(frozen=True)
class EosSpec:
    """Equation-of-state selector.

    ``A`` defaults to ``1/gamma`` for polytropic gases so that the rest-state
    sound speed is 1 in both families.
    """

    kind: str = CHAPLYGIN
    P0: float = 2.0
    B: float = 1.0
    gamma: float = 2.0
    A: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in (CHAPLYGIN, POLYTROPIC):
            raise ValueError(f"unknown eos kind {self.kind!r}")
        if self.kind == CHAPLYGIN:
            if not (self.P0 > 0 and self.B > 0):
                raise ValueError("Chaplygin gas needs P0 > 0 and B > 0")
        else:
            if not self.gamma >= 1:
                raise ValueError("polytropic gas needs gamma >= 1")
            if self.A is None:
                object.__setattr__(self, "A", 1.0 / self.gamma)
            if not self.A > 0:
                raise ValueError("polytropic gas needs A > 0")

    @classmethod
    def chaplygin(cls, P0: float = 2.0, B: float = 1.0) -> "EosSpec":
        return cls(kind=CHAPLYGIN, P0=P0, B=B)

    @classmethod
    def polytropic(cls, gamma: float, A: Optional[float] = None) -> "EosSpec":
        return cls(kind=POLYTROPIC, gamma=gamma, A=A)

    @property
    def is_chaplygin(self) -> bool:
        return self.kind == CHAPLYGIN

    @property
    def kappa(self) -> float:
        """(gamma - 1)/2, the sound-speed slope in the c-dot variable."""
        return 0.5 * (self.gamma - 1.0)

    def describe(self) -> str:
        if self.is_chaplygin:
            return f"chaplygin P0={self.P0!r} B={self.B!r}"
        return f"polytropic gamma={self.gamma!r} A={self.A!r}"


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("density must be positive")
    return rho


def _maybe_scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def pressure(eos: EosSpec, rho):
    """Pressure; may be nonpositive for a Chaplygin gas at low density."""
    rho = _check_density(rho)
    if eos.is_chaplygin:
        out = eos.P0 - eos.B / rho
    else:
        out = eos.A * rho**eos.gamma
    return _maybe_scalar(out)


def sound_speed(eos: EosSpec, rho):
    """c(rho) = sqrt(P'(rho))."""
    rho = _check_density(rho)
    if eos.is_chaplygin:
        out = np.sqrt(eos.B) / rho
    else:
        out = np.sqrt(eos.A * eos.gamma) * rho ** (0.5 * (eos.gamma - 1.0))
    return _maybe_scalar(out)


def dot_c(eos: EosSpec, rho):
    """Normalized sound-speed variable of a polytropic gas.

    ``(2/(gamma-1)) (rho**((gamma-1)/2) - 1)`` so that ``c = 1 + (gamma-1)/2 * dot_c``,
    and ``log(rho)`` in the isothermal limit gamma = 1.
    """
    if eos.is_chaplygin:
        raise TypeError("dot_c is defined for polytropic gases only")
    rho = _check_density(rho)
    if eos.gamma == 1.0:
        out = np.log(rho)
    else:
        k = 0.5 * (eos.gamma - 1.0)
        # expm1 keeps the gamma -> 1 limit accurate
        out = np.expm1(k * np.log(rho)) / k
    return _maybe_scalar(out)


def density_from_dot_c(eos: EosSpec, c_dot):
    """Inverse of :func:`dot_c`."""
    if eos.is_chaplygin:
        raise TypeError("dot_c is defined for polytropic gases only")
    c_dot = np.asarray(c_dot, dtype=float)
    if eos.gamma == 1.0:
        out = np.exp(c_dot)
    else:
        k = 0.5 * (eos.gamma - 1.0)
        kc = k * c_dot
        if np.any(~(kc > -1.0)):
            raise DomainError("sound speed must be positive")
        # log1p mirrors the expm1 in dot_c, so the round trip survives gamma -> 1
        out = np.exp(np.log1p(kc) / k)
    return _maybe_scalar(out)
