"""Constants and comparison argument for the time-derivative equation.

Here u(x,t) = int_0^t v(x,s) ds and the object of study is the diagonal
trace U(x) = u(x, x+sigma) for x >= sigma.  Positivity of the data gives
U(sigma-ish) >= Ctilde*eps, and a Gronwall comparison bounds U from below
by the explicit solution W of

    W(x) = Ctilde*eps + (1/2F) int_sigma^x W(y)^p dy,

which blows up at a finite abscissa x_blow.  No classical solution can
survive past the certified window, which yields the lifespan bound
T_bound = 6F Ctilde^{-(p-1)} / (p-1) * eps^{-(p-1)}.

As in the iteration argument the statement is normalized to A = p by
rescaling the data amplitude with lambda = (A/p)^{1/(p-1)}; the
certificate records the rescaling, exposes original-frame values, and the
closed form W below is already mapped back to the original frame (the two
frames coincide when A = p).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificateError, DivergenceError, InvalidProblemError
from .model import ProblemSpec, Variant
from .quadrature import profile_integral
from .solver import UField
from .theorem1 import Branch

_SUP_SAMPLES = 8193


@dataclass(frozen=True)
class Theorem2Certificate:
    """Constants of the Gronwall comparison argument for one problem.

    Ctilde is the eps-stripped data constant of the chosen branch,
    Ctilde_f = (1/2) int f or Ctilde_g = (1/4) int (y+sigma) g(y) dy.
    eps1 marks where the comparison window 2F Ctilde^{1-p}/(p-1) eps^{1-p}
    shrinks to sigma; eps0 = min(eps1, smallness cap from sup|g|).  All
    eps-dependent quantities are exposed as methods of eps so sweeps can
    reuse one certificate.
    """

    p: float
    A: float
    epsilon: float
    sigma: float
    branch: Branch
    Fconst: float
    Ctilde: float
    eps1: float
    eps0: float
    x_blow: float
    T_bound: float
    amplitude_rescale: float  # lambda = (A/p)^{1/(p-1)}
    eps_eff: float
    g_sup: float
    smallness_ok: bool

    def x_blow_at(self, eps: float) -> float:
        lam = self.amplitude_rescale
        if lam == 0.0 or eps <= 0:
            return math.inf
        return self.sigma + 2.0 * self.Fconst / (
            (self.p - 1.0) * (self.Ctilde * lam * eps) ** (self.p - 1.0))

    def T_bound_at(self, eps: float) -> float:
        lam = self.amplitude_rescale
        if lam == 0.0 or eps <= 0:
            return math.inf
        return 6.0 * self.Fconst / (
            (self.p - 1.0) * (self.Ctilde * lam * eps) ** (self.p - 1.0))

    def smallness_at(self, eps: float) -> bool:
        """Whether (eps_eff * sup|g|)^{p-1} <= 1/2 (vacuous for g = 0)."""
        if self.g_sup == 0.0:
            return True
        return (self.amplitude_rescale * eps * self.g_sup) ** (self.p - 1.0) <= 0.5

    def to_dict(self) -> dict:
        return {
            "p": self.p, "A": self.A, "epsilon": self.epsilon,
            "sigma": self.sigma, "branch": self.branch.value,
            "Fconst": self.Fconst, "Ctilde": self.Ctilde,
            "eps1": self.eps1, "eps0": self.eps0,
            "x_blow": self.x_blow, "T_bound": self.T_bound,
            "amplitude_rescale": self.amplitude_rescale,
            "eps_eff": self.eps_eff, "g_sup": self.g_sup,
            "smallness_ok": self.smallness_ok,
        }


def build_certificate_t(spec: ProblemSpec, branch: Branch) -> Theorem2Certificate:
    """Computes every constant of the comparison argument for `spec`."""
    if spec.variant is not Variant.TIME_DERIVATIVE:
        raise CertificateError("comparison certificates apply to the time-derivative equation")
    p, A, eps, sigma = spec.p, spec.A, spec.epsilon, spec.sigma
    flags = spec.data.positivity_flags
    if not (flags.f_nonneg and flags.g_nonneg):
        raise CertificateError("data must be nonnegative for the comparison argument")
    if branch is Branch.FBRANCH and not flags.f_nontrivial:
        raise CertificateError("FBranch needs nontrivial f")
    if branch is Branch.GBRANCH and not flags.g_nontrivial:
        raise CertificateError("GBranch needs nontrivial g")

    Fconst = ((p - 1.0) / (2.0 * p - 1.0) * (2.0 * sigma) ** ((2.0 * p - 1.0) / (p - 1.0))) ** (p - 1.0)
    if branch is Branch.FBRANCH:
        Ctilde = 0.5 * profile_integral(spec.data.f, -sigma, sigma)
    else:
        Ctilde = 0.25 * profile_integral(spec.data.g, -sigma, sigma,
                                         weight=lambda y: y + sigma)
    if Ctilde <= 0.0:
        raise CertificateError("branch data constant is not positive; certificate refused")

    lam = (A / p) ** (1.0 / (p - 1.0)) if A > 0 else 0.0
    eps_eff = lam * eps
    xs_g = np.linspace(-sigma, sigma, _SUP_SAMPLES)
    g_sup = float(np.abs(np.atleast_1d(spec.data.g(xs_g))).max())

    if lam == 0.0:
        eps1 = math.inf
        x_blow = math.inf
        T_bound = math.inf
    else:
        eps1 = (2.0 * Fconst / ((p - 1.0) * Ctilde ** (p - 1.0) * sigma)) ** (1.0 / (p - 1.0)) / lam
        x_blow = sigma + 2.0 * Fconst / ((p - 1.0) * (Ctilde * eps_eff) ** (p - 1.0))
        T_bound = 6.0 * Fconst / ((p - 1.0) * (Ctilde * eps_eff) ** (p - 1.0))

    if g_sup > 0.0 and lam > 0.0:
        eps0 = min(eps1, 2.0 ** (-1.0 / (p - 1.0)) / (lam * g_sup))
    else:
        eps0 = eps1
    smallness_ok = g_sup == 0.0 or (eps_eff * g_sup) ** (p - 1.0) <= 0.5

    return Theorem2Certificate(
        p=p, A=A, epsilon=eps, sigma=sigma, branch=branch, Fconst=Fconst,
        Ctilde=Ctilde, eps1=eps1, eps0=eps0, x_blow=x_blow, T_bound=T_bound,
        amplitude_rescale=lam, eps_eff=eps_eff, g_sup=g_sup,
        smallness_ok=smallness_ok)


def W_closed_form(x, cert: Theorem2Certificate, epsilon: float):
    """The blowing-up comparison solution, in the original frame.

    W(x) = {2F k^{p-1} / (2F - (p-1) k^{p-1} (x-sigma))}^{1/(p-1)} / lambda
    with k = Ctilde * lambda * epsilon; accepts scalars or arrays on
    [sigma, x_blow).
    """
    lam = cert.amplitude_rescale
    if lam == 0.0:
        raise CertificateError("comparison solution degenerates for A = 0")
    p, F, sigma = cert.p, cert.Fconst, cert.sigma
    xb = cert.x_blow_at(epsilon)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < sigma - 1e-12):
        raise InvalidProblemError(f"W is defined for x >= sigma = {sigma}")
    if np.any(xa >= xb):
        raise DivergenceError(f"W diverges at x_blow = {xb:.6g}; got x up to {xa.max():.6g}")
    k = (cert.Ctilde * lam * epsilon) ** (p - 1.0)
    core = (2.0 * F * k / (2.0 * F - (p - 1.0) * k * (xa - sigma))) ** (1.0 / (p - 1.0))
    out = core / lam
    return out if out.ndim else float(out)


def integral_equation_residual(cert: Theorem2Certificate, epsilon: float,
                               n: int = 41) -> float:
    """Max residual of W(x) = W(sigma) + (lam^{p-1}/2F) int_sigma^x W^p dy
    at n check points on [sigma, 0.9 x_blow], relative to W(sigma).

    The integral is accumulated segment by segment with adaptive quadrature
    so the steep approach to x_blow does not poison the tolerance.
    """
    from scipy import integrate

    xb = cert.x_blow_at(epsilon)
    if not math.isfinite(xb):
        raise CertificateError("no finite blow-up abscissa for this certificate")
    xs = np.linspace(cert.sigma, cert.sigma + 0.9 * (xb - cert.sigma), n)
    W = W_closed_form(xs, cert, epsilon)
    lamp = cert.amplitude_rescale ** (cert.p - 1.0)
    dens = lambda y: W_closed_form(y, cert, epsilon) ** cert.p  # noqa: E731
    acc = 0.0
    worst = 0.0
    for i in range(1, n):
        seg, _ = integrate.quad(dens, xs[i - 1], xs[i], epsabs=0.0,
                                epsrel=1e-13, limit=200)
        acc += seg
        resid = abs((W[i] - W[0]) - lamp / (2.0 * cert.Fconst) * acc)
        worst = max(worst, resid)
    return float(worst / max(W[0], 1e-300))


def l_operator(fn, x: float, t: float, n: int = 48) -> float:
    """(1/2) int_0^t ds int_{x-t+s}^{x+t-s} fn(y, s) dy by tensor
    Gauss-Legendre quadrature; exact for low-degree polynomial fn."""
    if t < 0:
        raise InvalidProblemError("l_operator needs t >= 0")
    if t == 0:
        return 0.0
    ns, ws = np.polynomial.legendre.leggauss(n)
    s = 0.5 * t * (ns + 1.0)
    ws_s = 0.5 * t * ws
    total = 0.0
    for sj, wj in zip(s, ws_s):
        half = t - sj
        if half <= 0:
            continue
        y = x + half * ns
        wy = half * ws
        total += wj * float(np.dot(wy, np.atleast_1d(fn(y, sj))))
    return 0.5 * total


@dataclass(frozen=True)
class DiagonalTrace:
    """Values of u along t = x + sigma for x >= sigma."""

    xs: np.ndarray
    U: np.ndarray
    truncated: bool


def extract_U(u: UField, sigma: float, x_hi: float | None = None) -> DiagonalTrace:
    """Samples u(x, x+sigma) by bilinear interpolation of the field.

    The trace stops where the run does (t_end - sigma); if `x_hi` asks for
    more, the result is truncated and flagged.
    """
    if u.variant is not Variant.TIME_DERIVATIVE:
        raise InvalidProblemError("diagonal traces are defined for the time-derivative u")
    t_end = float(u.times[-1])
    x_end = t_end - sigma
    truncated = False
    if x_hi is not None:
        if x_hi < sigma:
            raise InvalidProblemError("x_hi must be at least sigma")
        if x_hi > x_end:
            truncated = True
        x_end = min(x_end, x_hi)
    if x_end < sigma:
        return DiagonalTrace(xs=np.empty(0), U=np.empty(0), truncated=True)
    npts = max(2, int(round((x_end - sigma) / u.dx)) + 1)
    xs = np.linspace(sigma, x_end, npts)
    U = np.array([u.u_at(float(x), float(x) + sigma) for x in xs])
    return DiagonalTrace(xs=xs, U=U, truncated=truncated)


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of checking U >= W on the tested range.

    `applicable` is the smallness condition; when it fails the theorem
    makes no claim and the comparison is reported as inapplicable rather
    than failed.  `detected_time` (when provided) is echoed with the
    certified bound for scale context; no inequality between them is
    asserted.
    """

    applicable: bool
    tested: bool
    passed: bool
    worst_margin: float
    n_points: int
    x_lo: float
    x_hi: float
    xs: np.ndarray
    U: np.ndarray
    W: np.ndarray
    slack: float
    T_bound: float
    detected_time: float | None
    note: str

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return "inapplicable"
        if not self.tested:
            return "untested"
        return "passed" if self.passed else "failed"

    @property
    def ok(self) -> bool:
        return self.verdict != "failed"

    def to_dict(self) -> dict:
        return {
            "applicable": self.applicable, "tested": self.tested,
            "passed": self.passed, "verdict": self.verdict,
            "worst_margin": self.worst_margin, "n_points": self.n_points,
            "x_lo": self.x_lo, "x_hi": self.x_hi, "slack": self.slack,
            "T_bound": self.T_bound, "detected_time": self.detected_time,
            "note": self.note,
        }


def verify_comparison(trace: DiagonalTrace, cert: Theorem2Certificate,
                      epsilon: float, slack: float = 0.05,
                      detected_time: float | None = None) -> ComparisonReport:
    """Checks U(x) >= W(x)(1 - slack) on the overlap of the trace with
    [sigma, 0.9 x_blow]; positivity of U is checked on the whole trace."""
    xb = cert.x_blow_at(epsilon)
    applicable = cert.smallness_at(epsilon)
    x_cut = cert.sigma + 0.9 * (xb - cert.sigma) if math.isfinite(xb) else math.inf
    mask = (trace.xs >= cert.sigma) & (trace.xs <= x_cut)
    n = int(mask.sum())
    note = ""
    if not applicable:
        note = "smallness condition fails at this epsilon; theorem makes no claim"
    if n == 0 or not math.isfinite(xb):
        return ComparisonReport(
            applicable=applicable, tested=False, passed=True,
            worst_margin=math.nan, n_points=0, x_lo=math.nan, x_hi=math.nan,
            xs=np.empty(0), U=np.empty(0), W=np.empty(0), slack=slack,
            T_bound=cert.T_bound_at(epsilon), detected_time=detected_time,
            note=note or "trace does not overlap the comparison range")
    xs = trace.xs[mask]
    U = trace.U[mask]
    W = W_closed_form(xs, cert, epsilon)
    margins = (U - W) / np.maximum(np.abs(W), 1e-300)
    worst = float(margins.min())
    pos_ok = bool(trace.U.min() >= -1e-10 * max(1.0, float(np.abs(trace.U).max())))
    passed = bool(worst >= -slack) and pos_ok
    if not applicable:
        passed = True  # no claim to fail
    if not pos_ok:
        note = (note + "; " if note else "") + "U dips negative on the trace"
    return ComparisonReport(
        applicable=applicable, tested=bool(applicable), passed=passed,
        worst_margin=worst, n_points=n, x_lo=float(xs[0]), x_hi=float(xs[-1]),
        xs=xs, U=U, W=W, slack=slack, T_bound=cert.T_bound_at(epsilon),
        detected_time=detected_time, note=note)
