"""Truncated Fock-space light states.

Coherent and squeezed-coherent sources are built over a finite photon-number
window centered on the mean, with amplitudes evaluated in log-space so that
windows around n ~ 100-150 stay well inside double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, InvalidSpecError, NumericRangeError, UnsupportedError

NORM_TOL = 1e-12

# Rescale threshold for the scaled Hermite recurrence.
_HERMITE_RESCALE = 1e150


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over the photon-number window [window_lo, window_hi].

    Amplitudes outside the window are implicitly zero.  ``discarded_mass`` is
    the probability mass of the untruncated source that fell outside the
    window before renormalization (0 for states built directly).
    """

    window_lo: int
    window_hi: int
    amps: np.ndarray
    norm_flag: bool = True
    discarded_mass: float = 0.0

    def __post_init__(self):
        if self.window_lo < 0 or self.window_hi < self.window_lo:
            raise InvalidSpecError(
                f"bad window [{self.window_lo}, {self.window_hi}]")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.window_hi - self.window_lo + 1,):
            raise ContractViolationError(
                f"amps length {amps.shape} does not match window "
                f"[{self.window_lo}, {self.window_hi}]")
        object.__setattr__(self, "amps", amps)
        if self.norm_flag and abs(self.norm_sq() - 1.0) > 1e-10:
            raise ContractViolationError(
                f"norm_flag set but |psi|^2 = {self.norm_sq()!r}")

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    @property
    def n_values(self) -> np.ndarray:
        return np.arange(self.window_lo, self.window_hi + 1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def amplitude(self, n: int) -> complex:
        """Amplitude on |n>, zero outside the window."""
        if n < self.window_lo or n > self.window_hi:
            return 0.0
        return complex(self.amps[n - self.window_lo])

    def to_json(self) -> dict:
        return {
            "window_lo": self.window_lo,
            "window_hi": self.window_hi,
            "amps": [[float(a.real), float(a.imag)] for a in self.amps],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FockVector":
        amps = np.array([complex(re, im) for re, im in obj["amps"]])
        n = float(np.sum(np.abs(amps) ** 2))
        return cls(obj["window_lo"], obj["window_hi"], amps,
                   norm_flag=abs(n - 1.0) <= 1e-10)

    @classmethod
    def fock(cls, n: int) -> "FockVector":
        """The number state |n>."""
        return cls(n, n, np.ones(1, dtype=complex))


@dataclass(frozen=True)
class PhotonStats:
    mean: float
    variance: float
    std_dev: float
    mandel_q: float


@dataclass(frozen=True)
class SourceSpec:
    """Coherent / squeezed-coherent source parameters.

    ``window_sigmas`` is the half-width of the retained photon-number window
    in standard deviations of the untruncated distribution.
    """

    alpha: float
    squeeze_r: float = 0.0
    squeeze_theta: float = 0.0
    window_sigmas: float = 3.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.squeeze_r)):
            raise InvalidSpecError("alpha and squeeze_r must be finite")
        if self.alpha < 0 or self.squeeze_r < 0:
            raise InvalidSpecError("alpha and squeeze_r must be >= 0")
        if self.window_sigmas <= 0:
            raise InvalidSpecError("window_sigmas must be > 0")


def source_moments(spec: SourceSpec) -> tuple[float, float]:
    """Exact (mean, variance) of the untruncated source distribution."""
    a2 = spec.alpha ** 2
    r = spec.squeeze_r
    mean = a2 + math.sinh(r) ** 2
    var = a2 * math.exp(-2 * r) + 2 * math.sinh(r) ** 2 * math.cosh(r) ** 2
    return mean, var


def _window(spec: SourceSpec) -> tuple[int, int]:
    mean, var = source_moments(spec)
    sd = math.sqrt(var)
    lo = max(0, math.ceil(mean - spec.window_sigmas * sd))
    hi = math.floor(mean + spec.window_sigmas * sd)
    if hi < lo:
        raise InvalidSpecError(
            f"empty photon-number window for alpha={spec.alpha}, "
            f"r={spec.squeeze_r}, window_sigmas={spec.window_sigmas}")
    return lo, hi


def _build(log_amps: np.ndarray, signs: np.ndarray, lo: int, hi: int) -> FockVector:
    """Renormalize log-space amplitudes over [lo, hi] into a FockVector."""
    mass = float(np.sum(np.exp(2.0 * log_amps)))
    if not math.isfinite(mass) or mass <= 0.0:
        raise NumericRangeError("window probability mass under/overflowed")
    amps = signs * np.exp(log_amps - 0.5 * math.log(mass))
    return FockVector(lo, hi, amps.astype(complex),
                      discarded_mass=max(0.0, 1.0 - mass))


def coherent_state(spec: SourceSpec) -> FockVector:
    """Windowed coherent state |alpha> with Poissonian number statistics."""
    if spec.squeeze_r != 0.0:
        raise InvalidSpecError("coherent_state requires squeeze_r = 0")
    lo, hi = _window(spec)
    if spec.alpha == 0.0:
        return FockVector(0, 0, np.ones(1, dtype=complex))
    n = np.arange(lo, hi + 1, dtype=float)
    log_amps = (n * math.log(spec.alpha)
                - 0.5 * np.array([math.lgamma(k + 1) for k in n])
                - 0.5 * spec.alpha ** 2)
    return _build(log_amps, np.ones_like(log_amps), lo, hi)


def _log_hermite(x: float, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(log|H_n(x)|, sign H_n(x)) for n = 0..n_max via a scaled recurrence."""
    logs = np.empty(n_max + 1)
    signs = np.empty(n_max + 1)
    h_prev, h_cur, log_scale = 0.0, 1.0, 0.0
    logs[0], signs[0] = 0.0, 1.0
    for n in range(1, n_max + 1):
        h_prev, h_cur = h_cur, 2.0 * x * h_cur - 2.0 * (n - 1) * h_prev
        if abs(h_cur) > _HERMITE_RESCALE:
            h_prev /= _HERMITE_RESCALE
            h_cur /= _HERMITE_RESCALE
            log_scale += math.log(_HERMITE_RESCALE)
        if h_cur == 0.0:
            logs[n], signs[n] = -math.inf, 0.0
        else:
            logs[n] = math.log(abs(h_cur)) + log_scale
            signs[n] = math.copysign(1.0, h_cur)
    return logs, signs


def squeezed_coherent_state(spec: SourceSpec) -> FockVector:
    """Windowed squeezed-coherent state D(alpha) S(r) |0> for real alpha, r."""
    if spec.squeeze_theta != 0.0:
        raise UnsupportedError("squeeze_theta != 0 is not supported in v1")
    if spec.squeeze_r == 0.0:
        return coherent_state(spec)
    lo, hi = _window(spec)
    r, alpha = spec.squeeze_r, spec.alpha
    x = alpha * math.exp(r) / math.sqrt(math.sinh(2 * r))
    h_logs, h_signs = _log_hermite(x, hi)
    n = np.arange(lo, hi + 1, dtype=float)
    log_amps = (0.5 * n * math.log(math.tanh(r) / 2.0)
                - 0.5 * np.array([math.lgamma(k + 1) for k in n])
                - 0.5 * math.log(math.cosh(r))
                - 0.5 * alpha ** 2 * (1.0 + math.tanh(r))
                + h_logs[lo:hi + 1])
    if not np.all(np.isfinite(log_amps) | np.isneginf(log_amps)):
        raise NumericRangeError("squeezed amplitude overflow")
    signs = h_signs[lo:hi + 1]
    with np.errstate(under="ignore"):
        return _build(np.where(np.isneginf(log_amps), -745.0, log_amps),
                      signs, lo, hi)


def photon_stats(state: FockVector) -> PhotonStats:
    """Mean, variance, standard deviation and Mandel Q of the number operator."""
    if abs(state.norm_sq() - 1.0) > 1e-9:
        raise ContractViolationError("photon_stats requires a normalized state")
    p = state.probabilities()
    n = state.n_values
    mean = float(np.dot(n, p))
    var = max(0.0, float(np.dot(n.astype(float) ** 2, p)) - mean ** 2)
    q = (var - mean) / mean if mean > 0 else 0.0
    return PhotonStats(mean=mean, variance=var,
                       std_dev=math.sqrt(var), mandel_q=q)


def overlap(a: FockVector, b: FockVector) -> complex:
    """<a|b>, treating amplitudes outside each window as zero."""
    lo = max(a.window_lo, b.window_lo)
    hi = min(a.window_hi, b.window_hi)
    if hi < lo:
        return 0.0j
    sa = a.amps[lo - a.window_lo: hi - a.window_lo + 1]
    sb = b.amps[lo - b.window_lo: hi - b.window_lo + 1]
    return complex(np.vdot(sa, sb))
