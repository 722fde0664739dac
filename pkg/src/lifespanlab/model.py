"""Problem definitions: equation variants, coefficients, and initial data.

Two one-dimensional quasilinear wave equations are supported, distinguished
by whether the nonlinearity acts through the space or the time derivative
of the unknown.  Both share the wave speed c(w) = sqrt(1 + A|w|^{p-2}w),
data (eps*f, eps*g) supported in [-sigma, sigma], and the convention that
|w|^{p-2}w means the odd power sign(w)|w|^{p-1}.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import HyperbolicityError, InvalidDataError, InvalidProblemError

# Guard on the radicand of the wave speed; dropping below this is treated
# as loss of hyperbolicity rather than a silent NaN.
DELTA_HYP = 1e-6

_SAMPLES = 4097  # validation sampling density on [-sigma, sigma]


class Variant(enum.Enum):
    SPACE_DERIVATIVE = "SpaceDerivative"
    TIME_DERIVATIVE = "TimeDerivative"


class Assumption(enum.Enum):
    POSITIVE1 = "Positive1"  # f, g >= 0 and f not identically zero
    POSITIVE2 = "Positive2"  # f, g >= 0 and g not identically zero


def signed_power(w, q: float):
    """Odd power sign(w)|w|^q, vectorized."""
    w = np.asarray(w, dtype=float)
    out = np.sign(w) * np.abs(w) ** q
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# profiles


class Profile:
    """A scalar function of x with analytic derivatives where available."""

    support_radius: float = math.inf

    def __call__(self, x):
        raise NotImplementedError

    def deriv1(self, x):
        raise NotImplementedError

    def deriv2(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroProfile(Profile):
    support_radius: float = 0.0

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    deriv1 = __call__
    deriv2 = __call__

    def to_dict(self) -> dict:
        return {"type": "zero"}


@dataclass(frozen=True)
class BumpProfile(Profile):
    """amplitude * (1 - s^2)^3 with s = (x - center)/halfwidth on |s| <= 1.

    C^2 globally: value and first two derivatives vanish at the support edge.
    """

    center: float
    halfwidth: float
    amplitude: float

    def __post_init__(self):
        if self.halfwidth <= 0:
            raise InvalidProblemError(f"halfwidth must be positive, got {self.halfwidth}")
        object.__setattr__(self, "support_radius", abs(self.center) + self.halfwidth)

    def _s(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.halfwidth

    def __call__(self, x):
        s = self._s(x)
        inside = np.abs(s) <= 1.0
        out = np.where(inside, self.amplitude * (1.0 - s * s) ** 3, 0.0)
        return out if out.ndim else float(out)

    def deriv1(self, x):
        s = self._s(x)
        inside = np.abs(s) <= 1.0
        out = np.where(inside, -6.0 * self.amplitude / self.halfwidth * s * (1.0 - s * s) ** 2, 0.0)
        return out if out.ndim else float(out)

    def deriv2(self, x):
        s = self._s(x)
        inside = np.abs(s) <= 1.0
        val = 6.0 * self.amplitude / self.halfwidth**2 * (1.0 - s * s) * (5.0 * s * s - 1.0)
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {
            "type": "bump",
            "center": self.center,
            "halfwidth": self.halfwidth,
            "amplitude": self.amplitude,
        }


class CallableProfile(Profile):
    """Wraps an arbitrary callable; derivatives fall back to central differences."""

    def __init__(self, fn: Callable, deriv1: Callable | None = None,
                 deriv2: Callable | None = None, support_radius: float = math.inf):
        self._fn = fn
        self._d1 = deriv1
        self._d2 = deriv2
        self.support_radius = support_radius

    def __call__(self, x):
        out = np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)
        return out if out.ndim else float(out)

    def deriv1(self, x, h: float = 1e-6):
        if self._d1 is not None:
            out = np.asarray(self._d1(np.asarray(x, dtype=float)), dtype=float)
            return out if out.ndim else float(out)
        x = np.asarray(x, dtype=float)
        return (self._fn(x + h) - self._fn(x - h)) / (2 * h)

    def deriv2(self, x, h: float = 1e-5):
        if self._d2 is not None:
            out = np.asarray(self._d2(np.asarray(x, dtype=float)), dtype=float)
            return out if out.ndim else float(out)
        x = np.asarray(x, dtype=float)
        return (self._fn(x + h) - 2 * self._fn(x) + self._fn(x - h)) / h**2

    def to_dict(self) -> dict:
        return {"type": "callable"}


def make_bump_profile(center: float, halfwidth: float, amplitude: float) -> BumpProfile:
    return BumpProfile(center, halfwidth, amplitude)


def profile_from_dict(d: dict) -> Profile:
    kind = d.get("type")
    if kind == "zero":
        return ZeroProfile()
    if kind == "bump":
        return BumpProfile(d["center"], d["halfwidth"], d["amplitude"])
    raise InvalidProblemError(f"unknown profile type {kind!r}")


# ---------------------------------------------------------------------------
# initial data and problem description


@dataclass(frozen=True)
class PositivityFlags:
    f_nonneg: bool
    g_nonneg: bool
    f_nontrivial: bool
    g_nontrivial: bool


@dataclass(frozen=True)
class InitialData:
    """Data pair (f, g) supported in [-sigma, sigma], sigma >= 1."""

    f: Profile
    g: Profile
    sigma: float
    positivity_flags: PositivityFlags = field(init=False, compare=False)

    def __post_init__(self):
        if self.sigma < 1.0:
            raise InvalidDataError(f"support radius sigma must be >= 1, got {self.sigma}")
        for name, prof in (("f", self.f), ("g", self.g)):
            if prof.support_radius > self.sigma:
                # support_radius is only an upper bound, so sample before rejecting
                xs = np.linspace(self.sigma * (1 + 1e-9), self.sigma + 2.0, 257)
                vals = np.concatenate([np.atleast_1d(prof(xs)), np.atleast_1d(prof(-xs))])
                if np.any(np.abs(vals) > 1e-12):
                    raise InvalidDataError(
                        f"{name} does not vanish outside |x| <= sigma = {self.sigma}")
        xs = np.linspace(-self.sigma, self.sigma, _SAMPLES)
        fv = np.atleast_1d(self.f(xs))
        gv = np.atleast_1d(self.g(xs))
        object.__setattr__(self, "positivity_flags", PositivityFlags(
            f_nonneg=bool(fv.min() >= -1e-12),
            g_nonneg=bool(gv.min() >= -1e-12),
            f_nontrivial=bool(np.abs(fv).max() > 0),
            g_nontrivial=bool(np.abs(gv).max() > 0),
        ))

    def to_dict(self) -> dict:
        return {"f": self.f.to_dict(), "g": self.g.to_dict(), "sigma": self.sigma}


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of either equation: exponent p, coefficient A, amplitude
    epsilon, variant selector, and the data pair.

    A = 0 is admitted as the linear reference case used by calibration tests;
    all genuinely quasilinear functionality requires A > 0.
    """

    p: float
    A: float
    epsilon: float
    variant: Variant
    data: InitialData

    def __post_init__(self):
        if not self.p > 1:
            raise InvalidProblemError(f"exponent p must exceed 1, got {self.p}")
        if self.A < 0:
            raise InvalidProblemError(f"coefficient A must be nonnegative, got {self.A}")
        if not self.epsilon > 0:
            raise InvalidProblemError(f"amplitude epsilon must be positive, got {self.epsilon}")

    @property
    def sigma(self) -> float:
        return self.data.sigma

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "A": self.A,
            "epsilon": self.epsilon,
            "variant": self.variant.value,
            "data": self.data.to_dict(),
        }


def wave_speed(w, spec: ProblemSpec, delta_hyp: float = DELTA_HYP):
    """c(w) = sqrt(1 + A|w|^{p-2}w); raises once the radicand falls below the guard."""
    radicand = 1.0 + spec.A * signed_power(w, spec.p - 1.0)
    r = np.asarray(radicand, dtype=float)
    if np.any(r < delta_hyp):
        raise HyperbolicityError(
            f"wave speed radicand {float(r.min()):.6g} below guard {delta_hyp:.1e}")
    out = np.sqrt(r)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# data validation (report-style)


@dataclass(frozen=True)
class ValidationReport:
    assumption: Assumption
    window: tuple[float, float]  # (-sigma, -(sigma + sigma0)/2)
    positivity_ok: bool
    window_ok: bool
    sigma_ratio_ok: bool  # sigma > 3*sigma0; only binding under Positive2
    suggested_offset: float | None

    @property
    def ok(self) -> bool:
        return self.positivity_ok and self.window_ok and self.sigma_ratio_ok


def validate_initial_data(data: InitialData, assumption: Assumption,
                          sigma0: float) -> ValidationReport:
    """Checks sign conditions and nontriviality on the window (-sigma, -(sigma+sigma0)/2).

    Report-style: never raises for data that merely fails a condition.  When
    the window test fails but the relevant profile is nontrivial elsewhere, a
    translation offset that would center its mass in the window is suggested
    (translation is never applied automatically).
    """
    if not 0 < sigma0 < data.sigma:
        raise InvalidProblemError(f"need 0 < sigma0 < sigma, got sigma0={sigma0}")
    sigma = data.sigma
    window = (-sigma, -(sigma + sigma0) / 2.0)
    flags = data.positivity_flags
    positivity_ok = flags.f_nonneg and flags.g_nonneg

    target = data.f if assumption is Assumption.POSITIVE1 else data.g
    target_nontrivial = (flags.f_nontrivial if assumption is Assumption.POSITIVE1
                         else flags.g_nontrivial)
    xs = np.linspace(window[0], window[1], _SAMPLES)
    window_ok = bool(np.abs(np.atleast_1d(target(xs))).max() > 0) and target_nontrivial

    sigma_ratio_ok = True
    if assumption is Assumption.POSITIVE2:
        sigma_ratio_ok = sigma > 3.0 * sigma0

    suggested_offset = None
    if not window_ok and target_nontrivial:
        full = np.linspace(-sigma, sigma, _SAMPLES)
        peak = full[int(np.argmax(np.abs(np.atleast_1d(target(full)))))]
        suggested_offset = float((window[0] + window[1]) / 2.0 - peak)

    return ValidationReport(
        assumption=assumption,
        window=window,
        positivity_ok=positivity_ok,
        window_ok=window_ok,
        sigma_ratio_ok=sigma_ratio_ok,
        suggested_offset=suggested_offset,
    )
