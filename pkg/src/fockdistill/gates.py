"""Atom-light joint states and the three protocol primitives.

The joint state of the two-level atomic qubit {g, s} and the light mode is
kept as two parallel amplitude arrays over a shared photon-number window,
making the conditional phase flip, the atomic rotation and the projective
measurement all O(window) operations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cavity import ReflectionPair
from .errors import ContractViolationError, DegenerateStateError, ImpossibleOutcomeError
from .fock import FockVector

# Below this branch probability, postselection is treated as impossible:
# distinguishes exact phase cancellation from floating-point dust.
ZERO_BRANCH_TOL = 1e-14

SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class AtomLightState:
    """Pure joint state amp_g |g>|n> + amp_s |s>|n> over one shared window."""

    window_lo: int
    window_hi: int
    amp_g: np.ndarray
    amp_s: np.ndarray

    def __post_init__(self):
        size = self.window_hi - self.window_lo + 1
        g = np.asarray(self.amp_g, dtype=complex)
        s = np.asarray(self.amp_s, dtype=complex)
        if g.shape != (size,) or s.shape != (size,):
            raise ContractViolationError("branch arrays must match the window")
        object.__setattr__(self, "amp_g", g)
        object.__setattr__(self, "amp_s", s)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amp_g) ** 2)
                     + np.sum(np.abs(self.amp_s) ** 2))

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.window_lo, self.window_hi + 1)


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: str  # "G" or "S"
    probability: float
    post_state: FockVector


def prepare_superposition(light: FockVector) -> AtomLightState:
    """Tensor the light with the atom prepared in (|g> + |s>)/sqrt(2)."""
    if abs(light.norm_sq() - 1.0) > 1e-9:
        raise ContractViolationError("light state must be normalized")
    half = light.amps * SQRT_HALF
    return AtomLightState(light.window_lo, light.window_hi,
                          half.copy(), half.copy())


# Reduced angles this close to a multiple of pi/2 are snapped to the exact
# unit (1, i, -1, -i).  Without this, e^{i*pi*n} carries ~n*eps of imaginary
# dust and the protocol's parity cancellations would only be approximate.
_SNAP_TOL = 1e-9
_QUARTER_UNITS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def unit_phase(angle: float) -> complex:
    """e^{i*angle}, exact at (snapped-to) multiples of pi/2."""
    ang = math.fmod(angle, 2.0 * math.pi)
    if ang < 0.0:
        ang += 2.0 * math.pi
    quarter = round(ang / (0.5 * math.pi))
    if abs(ang - quarter * 0.5 * math.pi) < _SNAP_TOL:
        return _QUARTER_UNITS[quarter % 4]
    return complex(math.cos(ang), math.sin(ang))


def _phase_array(phi: float, n_values: np.ndarray) -> np.ndarray:
    return np.array([unit_phase(phi * n) for n in n_values])


def apply_cpf(state: AtomLightState, phi: float) -> AtomLightState:
    """Conditional phase flip: |s>|n> -> e^{i phi n} |s>|n>, |g> branch untouched."""
    phases = _phase_array(phi, state.n_values)
    return AtomLightState(state.window_lo, state.window_hi,
                          state.amp_g, state.amp_s * phases)


def apply_reflection_exact(state: AtomLightState,
                           refl: ReflectionPair) -> tuple[AtomLightState, float]:
    """Non-ideal reflection: amp_g[n] *= r1^n, amp_s[n] *= r0^n, then renormalize.

    Returns the renormalized state and the renormalization loss
    1 - (pre-renormalization norm^2) caused by |r1| < 1.
    """
    if abs(refl.r1) > 1.0 + 1e-9 or abs(refl.r0) > 1.0 + 1e-9:
        raise ContractViolationError("reflection coefficients must have |r| <= 1")
    n = state.n_values.astype(float)
    g = state.amp_g * _complex_pow(refl.r1, n)
    s = state.amp_s * _complex_pow(refl.r0, n)
    norm_sq = float(np.sum(np.abs(g) ** 2) + np.sum(np.abs(s) ** 2))
    if norm_sq < 1e-12:
        raise DegenerateStateError("reflection collapsed the state norm")
    scale = 1.0 / math.sqrt(norm_sq)
    out = AtomLightState(state.window_lo, state.window_hi, g * scale, s * scale)
    return out, max(0.0, 1.0 - norm_sq)


def _complex_pow(r: complex, n: np.ndarray) -> np.ndarray:
    if r == 0:
        return np.where(n == 0, 1.0 + 0j, 0.0 + 0j)
    return np.power(complex(r), n)


def apply_atom_unitary(state: AtomLightState, theta: float) -> AtomLightState:
    """Atomic rotation U[theta]: |g> -> (e^{i theta}|g> + |s>)/sqrt(2),
    |s> -> (|g> - e^{-i theta}|s>)/sqrt(2).  Unitary; an involution at
    theta = 0."""
    eit = unit_phase(theta)
    g = (eit * state.amp_g + state.amp_s) * SQRT_HALF
    s = (state.amp_g - eit.conjugate() * state.amp_s) * SQRT_HALF
    return AtomLightState(state.window_lo, state.window_hi, g, s)


def branch_probabilities(state: AtomLightState) -> tuple[float, float]:
    """(P(G), P(S)) Born probabilities of the atomic measurement."""
    pg = float(np.sum(np.abs(state.amp_g) ** 2))
    ps = float(np.sum(np.abs(state.amp_s) ** 2))
    return pg, ps


def measure_atom(state: AtomLightState, *, postselect: str | None = None,
                 seed: int | None = None) -> MeasurementRecord:
    """Projective measurement on the atom.

    With ``postselect`` ("G" or "S"), returns that branch and its exact Born
    probability; otherwise the outcome is sampled with a deterministic RNG
    built from ``seed``.
    """
    pg, ps = branch_probabilities(state)
    if postselect is not None:
        outcome = postselect.upper()
        if outcome not in ("G", "S"):
            raise ContractViolationError(f"unknown outcome {postselect!r}")
    else:
        rng = np.random.default_rng(seed)
        outcome = "G" if rng.random() < pg / (pg + ps) else "S"
    prob = pg if outcome == "G" else ps
    if prob < ZERO_BRANCH_TOL:
        raise ImpossibleOutcomeError(
            f"branch {outcome} has probability {prob:.3e}")
    amps = state.amp_g if outcome == "G" else state.amp_s
    post = FockVector(state.window_lo, state.window_hi,
                      amps / math.sqrt(prob))
    return MeasurementRecord(outcome=outcome, probability=prob, post_state=post)
