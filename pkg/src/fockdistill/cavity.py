"""Steady-state reflection physics of the single-sided atom-cavity system.

The empty-cavity reflection r0 is a pure phase controlled by the
dimensionless detuning Delta = 2*Delta_c/kappa; the coupled-transition
reflection r1 approaches 1 for large cooperativity C = g^2/(kappa*gamma).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import InvalidSpecError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CavityParams:
    """Physical cavity parameters; g, kappa, gamma share angular-frequency units."""

    g: float
    kappa: float
    gamma: float
    delta: float  # dimensionless, 2*Delta_c/kappa

    def __post_init__(self):
        if self.g <= 0 or self.kappa <= 0 or self.gamma <= 0:
            raise InvalidSpecError("g, kappa, gamma must be > 0")


@dataclass(frozen=True)
class ReflectionPair:
    r1: complex
    r0: complex


def cooperativity(params: CavityParams) -> float:
    return params.g ** 2 / (params.kappa * params.gamma)


def reflection_from_cooperativity(c: float, delta: float) -> ReflectionPair:
    """Reflection coefficients for a given cooperativity and detuning."""
    r1 = 1.0 - 2.0 / complex(1.0 + 4.0 * c, -delta)
    r0 = 1.0 - 2.0 / complex(1.0, -delta)
    return ReflectionPair(r1=r1, r0=r0)


def reflection_coeffs(params: CavityParams) -> ReflectionPair:
    return reflection_from_cooperativity(cooperativity(params), params.delta)


def _arg_r0(delta: float) -> float:
    """arg(r0(delta)) taken in (0, 2*pi); strictly increasing in delta."""
    phase = cmath.phase(reflection_from_cooperativity(0.0, delta).r0)
    return phase % TWO_PI


def solve_detuning(phi: float) -> float:
    """Detuning Delta such that the empty-cavity phase arg(r0) equals phi.

    Closed form Delta = -cot(phi/2), from r0 = (-1 - i*Delta)/(1 - i*Delta).
    Valid for phi strictly inside (0, 2*pi); phi = pi is resonance (Delta = 0).
    """
    if not 0.0 < phi < TWO_PI:
        raise InvalidSpecError(
            f"no finite detuning gives phase {phi}; need phi in (0, 2*pi)")
    if phi == math.pi:
        return 0.0
    return -1.0 / math.tan(phi / 2.0)


def solve_detuning_bisect(phi: float, tol: float = 1e-12) -> float:
    """Independent bisection solver for arg(r0(Delta)) = phi.

    Kept as a numerical cross-check of the closed form used by
    :func:`solve_detuning`.
    """
    if not 0.0 < phi < TWO_PI:
        raise InvalidSpecError(
            f"no finite detuning gives phase {phi}; need phi in (0, 2*pi)")
    lo, hi = -1.0, 1.0
    while _arg_r0(lo) > phi:
        lo *= 2.0
        if lo < -1e18:
            raise InvalidSpecError(f"phase {phi} not bracketed")
    while _arg_r0(hi) < phi:
        hi *= 2.0
        if hi > 1e18:
            raise InvalidSpecError(f"phase {phi} not bracketed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _arg_r0(mid) < phi:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)
