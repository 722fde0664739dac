"""Characteristics-based lifespan oracle for simple-wave data.

For the space-derivative equation written as v_tt = c(v_x)^2 v_xx, data can
be prepared so that one Riemann invariant vanishes identically.  The
solution is then a single right-moving wave whose characteristics are
straight lines x(t) = x0 + c(eps*f'(x0))*t, and the first crossing time of
those lines is known in closed form.  That time is an independent ground
truth for calibrating the finite-difference solver.

Restricted to p >= 2: for p < 2 the derivative of the speed degenerates at
w = 0 and the crossing formula loses its meaning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import HyperbolicityError, InvalidProblemError, OracleError
from .model import (
    CallableProfile,
    InitialData,
    ProblemSpec,
    Profile,
    Variant,
    ZeroProfile,
    wave_speed,
)
from .quadrature import gauss_legendre_antiderivative

_N_SAMPLE = 10_000  # dense scan of the crossing objective over supp f


def ell(w, spec: ProblemSpec):
    """Antiderivative of the wave speed: ell(w) = int_0^w c(s) ds.

    Closed form for p = 2; fixed high-order Gauss-Legendre otherwise.
    Raises on hyperbolicity loss anywhere in the integration range (the
    radicand is monotone in s, so checking the endpoint suffices).
    """
    wave_speed(w, spec)  # endpoint guard
    if spec.A == 0.0:
        w = np.asarray(w, dtype=float)
        return w if w.ndim else float(w)
    if spec.p == 2.0:
        w = np.asarray(w, dtype=float)
        out = 2.0 / (3.0 * spec.A) * ((1.0 + spec.A * w) ** 1.5 - 1.0)
        return out if out.ndim else float(out)
    return gauss_legendre_antiderivative(lambda s: wave_speed(s, spec), w)


def speed_derivative(w, spec: ProblemSpec):
    """c'(w) = A(p-1)|w|^{p-2} / (2 c(w)); even in w."""
    c = wave_speed(w, spec)
    w = np.asarray(w, dtype=float)
    out = spec.A * (spec.p - 1.0) * np.abs(w) ** (spec.p - 2.0) / (2.0 * c)
    return out if out.ndim else float(out)


def simple_wave_data(profile: Profile, epsilon: float, spec: ProblemSpec) -> InitialData:
    """Data (f, g) = (profile, -ell(eps f')/eps) launching a pure right-mover.

    The left-going Riemann invariant z + ell(w) then vanishes identically,
    so the profile is transported along straight right-going characteristics
    until they cross.  Compact support is preserved since ell(0) = 0.
    """
    sigma = spec.sigma
    if profile.support_radius > sigma:
        raise InvalidProblemError("profile support exceeds the data support radius")
    wmax = epsilon * np.abs(np.atleast_1d(profile.deriv1(
        np.linspace(-sigma, sigma, _N_SAMPLE)))).max()
    try:
        wave_speed(np.array([-wmax, wmax]), spec)
    except HyperbolicityError as exc:
        raise InvalidProblemError(f"epsilon too large for a simple wave: {exc}") from exc

    def g_fn(x):
        return -np.asarray(ell(epsilon * profile.deriv1(x), spec)) / epsilon

    g = CallableProfile(g_fn, support_radius=profile.support_radius)
    return InitialData(f=profile, g=g, sigma=sigma)


@dataclass(frozen=True)
class SimpleWaveSetup:
    """A right-moving simple wave: profile f, amplitude, and the host problem."""

    profile: Profile
    epsilon: float
    spec: ProblemSpec

    def __post_init__(self):
        if self.spec.variant is not Variant.SPACE_DERIVATIVE:
            raise InvalidProblemError("simple-wave setups exist only for the "
                                      "space-derivative equation")
        if self.spec.p < 2.0:
            raise OracleError("oracle restricted to p >= 2")


def make_simple_wave_spec(profile: Profile, epsilon: float, p: float, A: float,
                          sigma: float) -> ProblemSpec:
    """Convenience constructor: ProblemSpec carrying the induced data."""
    placeholder = ProblemSpec(p=p, A=A, epsilon=epsilon, variant=Variant.SPACE_DERIVATIVE,
                              data=InitialData(f=profile, g=ZeroProfile(), sigma=sigma))
    data = simple_wave_data(profile, epsilon, placeholder)
    return ProblemSpec(p=p, A=A, epsilon=epsilon, variant=Variant.SPACE_DERIVATIVE, data=data)


def crossing_time_exact(setup: SimpleWaveSetup) -> float:
    """First crossing time of the straight characteristics x(t) = x0 + c(eps f'(x0)) t.

    T = 1 / max_{x0} ( -d/dx0 c(eps f'(x0)) ), infinite when the maximum is
    nonpositive.  The maximum is located by a dense scan over supp f followed
    by bounded golden-section refinement.
    """
    spec = setup.spec
    eps = setup.epsilon
    f = setup.profile
    if spec.A == 0.0:
        return math.inf

    def objective(x0):
        w = eps * np.asarray(f.deriv1(x0), dtype=float)
        return -speed_derivative(w, spec) * eps * np.asarray(f.deriv2(x0), dtype=float)

    r = f.support_radius if math.isfinite(f.support_radius) else spec.sigma
    xs = np.linspace(-r, r, _N_SAMPLE)
    vals = np.atleast_1d(objective(xs))
    i = int(np.argmax(vals))
    best = float(vals[i])
    if best <= 0.0:
        return math.inf
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]
    res = optimize.minimize_scalar(lambda x: -float(objective(x)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-14})
    best = max(best, -float(res.fun))
    return 1.0 / best
