"""Small quadrature helpers shared by the certificate builders."""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import integrate


def profile_integral(fn: Callable, a: float, b: float, weight: Callable | None = None,
                     tol: float = 1e-12) -> float:
    """Adaptive quadrature of fn (optionally weight*fn) over [a, b].

    Profiles are piecewise smooth with compact support, so plain quad with a
    raised subdivision limit is adequate.
    """
    if b <= a:
        return 0.0
    if weight is None:
        integrand = lambda x: float(np.asarray(fn(x)))
    else:
        integrand = lambda x: float(np.asarray(fn(x))) * float(weight(x))
    val, _ = integrate.quad(integrand, a, b, epsabs=tol, epsrel=tol, limit=200)
    return float(val)


def gauss_legendre_antiderivative(speed: Callable, w, npts: int = 64):
    """Vectorized int_0^w speed(s) ds by Gauss-Legendre on each segment [0, w].

    The integrand is smooth on the open segment (the sign of s is fixed
    there), so a fixed high-order rule reaches near machine accuracy.
    """
    w = np.asarray(w, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(npts)
    # map t in [-1, 1] to s = w*(t+1)/2, ds = w/2 dt
    s = 0.5 * np.multiply.outer(w, nodes + 1.0)
    vals = speed(s)
    out = 0.5 * w * np.tensordot(vals, weights, axes=([-1], [0]))
    return out if out.ndim else float(out)
