"""Signal classes and the Ramsey phase functional.

Four signal models: a constant frequency shift, a shot-to-shot stochastic
shift, a continuous two-tone stochastic signal, and its intermittent (burst)
variant. The sensed quantity is always the accrued phase

    phi = integral of B(t) over the integration window [0, t_i],

evaluated in closed form. Stochastic amplitudes are frozen within a shot and
redrawn between shots, so phi is an exactly Gaussian variable for the
two-tone classes and its variance has a closed form too.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ToneConvention",
    "Constant",
    "StochasticAmplitude",
    "TwoToneStochastic",
    "IntermittentTwoTone",
    "SignalRealization",
    "tone_angular_frequencies",
    "sample_realization",
    "sample_realizations",
    "signal_value",
    "accrued_phase",
    "accrued_phases",
    "phase_variance_exact",
    "small_g_curvature",
]


class ToneConvention(enum.Enum):
    """How the separation parameter g maps to the two tone frequencies.

    FULL_SPLIT places the tones at omega_s +/- g (default; the small-g
    population exponent is then 4*pi^2*sigma^2*g^2/omega_s^4). HALF_SPLIT
    places them at omega_s +/- g/2, the literal reading of "separation
    g = omega_1 - omega_2".
    """

    FULL_SPLIT = "full_split"
    HALF_SPLIT = "half_split"


@dataclass(frozen=True)
class Constant:
    """Deterministic shift: B(t) = g."""

    g: float  # rad/s

    def __post_init__(self) -> None:
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise ValueError("g must be finite and >= 0")


@dataclass(frozen=True)
class StochasticAmplitude:
    """Shot-to-shot constant shift B_s drawn from N(0, g^2); g is the std."""

    g: float  # rad/s

    def __post_init__(self) -> None:
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise ValueError("g must be finite and >= 0")


@dataclass(frozen=True)
class TwoToneStochastic:
    """B(t) = A1 sin(w1 t) + B1 cos(w1 t) + A2 sin(w2 t) + B2 cos(w2 t).

    The four amplitudes are i.i.d. N(0, sigma^2) per shot. Tones sit at
    omega_s +/- delta with delta set by the convention.
    """

    omega_s: float  # rad/s, center frequency
    g: float  # rad/s, tone separation parameter
    sigma: float  # rad/s, std of each quadrature amplitude
    convention: ToneConvention = ToneConvention.FULL_SPLIT

    def __post_init__(self) -> None:
        if not (self.omega_s > 0 and math.isfinite(self.omega_s)):
            raise ValueError("omega_s must be finite and > 0")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and > 0")
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise ValueError("g must be finite and >= 0")


@dataclass(frozen=True)
class IntermittentTwoTone:
    """Two-tone signal present only during a burst of duration t_sig."""

    omega_s: float
    g: float
    sigma: float
    t_sig: float  # s, burst duration
    convention: ToneConvention = ToneConvention.FULL_SPLIT

    def __post_init__(self) -> None:
        TwoToneStochastic(self.omega_s, self.g, self.sigma, self.convention)
        # bursts longer than two center-frequency periods are out of scope
        if not (0 < self.t_sig <= 2 * (2 * math.pi / self.omega_s)):
            raise ValueError("t_sig must be in (0, 2*(2*pi/omega_s)]")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega_s


SignalSpec = Constant | StochasticAmplitude | TwoToneStochastic | IntermittentTwoTone


@dataclass(frozen=True)
class SignalRealization:
    """Sampled per-shot coefficients.

    Empty for Constant; [B_s] for StochasticAmplitude; [A1, B1, A2, B2] for
    the two-tone classes.
    """

    coefficients: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float))
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("realization coefficients must be finite")


def tone_angular_frequencies(spec: TwoToneStochastic | IntermittentTwoTone) -> tuple[float, float]:
    """(omega_1, omega_2) = omega_s +/- delta under the spec's convention."""
    delta = spec.g if spec.convention is ToneConvention.FULL_SPLIT else spec.g / 2.0
    return spec.omega_s + delta, spec.omega_s - delta


def sample_realization(spec: SignalSpec, rng: np.random.Generator) -> SignalRealization:
    """Draw one realization; frozen within a shot, independent across shots."""
    return SignalRealization(sample_realizations(spec, 1, rng)[0])


def sample_realizations(spec: SignalSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n realizations at once; rows are coefficient vectors."""
    if isinstance(spec, Constant):
        return np.empty((n, 0))
    if isinstance(spec, StochasticAmplitude):
        return rng.normal(0.0, spec.g, size=(n, 1))
    return rng.normal(0.0, spec.sigma, size=(n, 4))


def signal_value(spec: SignalSpec, realization: SignalRealization, t: float) -> float:
    """B(t) for one realization. For bursts, defined only inside the burst."""
    c = realization.coefficients
    if isinstance(spec, Constant):
        return spec.g
    if isinstance(spec, StochasticAmplitude):
        return float(c[0])
    if isinstance(spec, IntermittentTwoTone) and t > spec.t_sig:
        raise ValueError("signal does not exist beyond the burst")
    w1, w2 = tone_angular_frequencies(spec)
    return float(
        c[0] * math.sin(w1 * t)
        + c[1] * math.cos(w1 * t)
        + c[2] * math.sin(w2 * t)
        + c[3] * math.cos(w2 * t)
    )


def _phase_weights(spec: TwoToneStochastic | IntermittentTwoTone, t_i: float) -> np.ndarray:
    """Weights w with phi = coefficients . w, from integrating each quadrature.

    A sin(wt) integrates to A*(1-cos(w t_i))/w and B cos(wt) to
    B*sin(w t_i)/w; 1-cos is evaluated as 2 sin^2 for small-angle accuracy.
    """
    w1, w2 = tone_angular_frequencies(spec)
    out = np.empty(4)
    for k, w in enumerate((w1, w2)):
        out[2 * k] = 2.0 * math.sin(0.5 * w * t_i) ** 2 / w
        out[2 * k + 1] = math.sin(w * t_i) / w
    return out


def _check_ti(spec: SignalSpec, t_i: float) -> None:
    if not (t_i > 0 and math.isfinite(t_i)):
        raise ValueError("t_i must be finite and > 0")
    if isinstance(spec, IntermittentTwoTone) and t_i > spec.t_sig:
        raise ValueError("t_i exceeds the burst duration t_sig")


def accrued_phase(spec: SignalSpec, realization: SignalRealization, t_i: float) -> float:
    """Exact phi = integral of B over [0, t_i] for one realization."""
    _check_ti(spec, t_i)
    if isinstance(spec, Constant):
        return spec.g * t_i
    if isinstance(spec, StochasticAmplitude):
        return float(realization.coefficients[0]) * t_i
    return float(realization.coefficients @ _phase_weights(spec, t_i))


def accrued_phases(spec: SignalSpec, coefficients: np.ndarray, t_i: float) -> np.ndarray:
    """Vectorized accrued_phase over realization rows."""
    _check_ti(spec, t_i)
    if isinstance(spec, Constant):
        return np.full(len(coefficients), spec.g * t_i)
    if isinstance(spec, StochasticAmplitude):
        return coefficients[:, 0] * t_i
    return coefficients @ _phase_weights(spec, t_i)


def phase_variance_exact(spec: TwoToneStochastic | IntermittentTwoTone, t_i: float) -> float:
    """Var(phi) for the two-tone classes, exact for all g and t_i.

    phi is a linear functional of the four i.i.d. normal amplitudes, so
    Var(phi) = sigma^2 * sum of squared weights. Vanishes at g=0 whenever
    t_i is an integer number of center-frequency periods.
    """
    if not isinstance(spec, (TwoToneStochastic, IntermittentTwoTone)):
        raise TypeError("phase variance is defined for the two-tone classes")
    _check_ti(spec, t_i)
    w = _phase_weights(spec, t_i)
    return spec.sigma**2 * float(w @ w)


def small_g_curvature(omega_s: float, sigma: float, convention: ToneConvention) -> float:
    """kappa with Var(phi)/2 ~ kappa*g^2 at t_i = one center period, g -> 0.

    4*pi^2*sigma^2/omega_s^4 under FULL_SPLIT, a quarter of that under
    HALF_SPLIT.
    """
    kappa = 4 * math.pi**2 * sigma**2 / omega_s**4
    if convention is ToneConvention.HALF_SPLIT:
        kappa /= 4.0
    return kappa
