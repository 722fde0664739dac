"""Constants, sequences, and functional inequalities of the iteration
blow-up argument for the space-derivative equation.

The argument works on u(x,t) = int_{-inf}^x v dy, which solves
u_tt - u_xx = (A/p)|u_xx|^p, through the weighted time integral

    H(t) = int_0^t (t-s) ds int_{-s-sigma}^{-s-sigma0} u(x,s) dx.

Positivity of the data yields a floor H'' >= const * eps, hence
H >= B t^2, and the wave-kernel representation upgrades this to the frame
H'' >= D t^{1-2p} H^p whose iteration produces lower bounds
H >= C_j (t - sigma1)^{a_j} t^{-(2p-1) b_j} that force blow-up before
T* = 2^{2p} (e^E / B)^{p-1}.

Everything is stated with A = p after the rescaling v -> (A/p)^{1/(p-1)} v,
which multiplies the data amplitude by the same factor; certificates record
that rescaling and expose original-frame constants (the eps-linear floors
are scale-free, the frame constant picks up a factor A/p).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import CertificateError, InvalidProblemError, ResolutionError
from .model import Assumption, ProblemSpec, Variant, validate_initial_data
from .quadrature import profile_integral
from .solver import UField

_DOMINATION_TOL = 1e-9


class Branch(enum.Enum):
    FBRANCH = "FBranch"  # first-step floor from f (data position)
    GBRANCH = "GBranch"  # first-step floor from g (data velocity)


@dataclass(frozen=True)
class FunctionalSeries:
    """H and its derivatives on the snapshot time grid, plus the source term
    F(t) = int_strip dx int_0^t ds int_{x-t+s}^{x+t-s} |u_xx|^p dy."""

    times: np.ndarray
    H: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    Fser: np.ndarray


def compute_functionals(u: UField, sigma: float, sigma0: float, p: float,
                        n_strip_nodes: int = 257) -> FunctionalSeries:
    """Quadrature of H, H', H'' and F from a computed u field.

    H''(t) = int_{-t-sigma}^{-t-sigma0} u(x,t) dx is evaluated directly by
    composite Simpson on the moving strip; H' and H come from cumulative
    Simpson in time via H(t) = t*int_0^t H'' ds - int_0^t s H''(s) ds
    iterated once (never by differencing).
    """
    if not 0 < sigma0 < sigma:
        raise InvalidProblemError(f"need 0 < sigma0 < sigma, got sigma0={sigma0}")
    if u.variant is not Variant.SPACE_DERIVATIVE:
        raise InvalidProblemError("functionals are defined for the space-derivative u")
    if (sigma - sigma0) / u.dx < 8:
        raise ResolutionError(
            f"grid too coarse: only {(sigma - sigma0) / u.dx:.1f} cells across the strip")
    times = u.times
    K = len(times)
    m = n_strip_nodes if n_strip_nodes % 2 == 1 else n_strip_nodes + 1

    h = np.empty(K)
    for k in range(K):
        xs = np.linspace(-times[k] - sigma, -times[k] - sigma0, m)
        h[k] = integrate.simpson(u.u_on(xs, k), x=xs)
    if K < 2:
        H1 = np.zeros(K)
        H = np.zeros(K)
    elif K == 2:
        H1 = integrate.cumulative_trapezoid(h, x=times, initial=0.0)
        sh = integrate.cumulative_trapezoid(times * h, x=times, initial=0.0)
        H = times * H1 - sh
    else:
        H1 = integrate.cumulative_simpson(h, x=times, initial=0.0)
        sh = integrate.cumulative_simpson(times * h, x=times, initial=0.0)
        H = times * H1 - sh

    # cumulative integrals of |u_xx|^p per snapshot, reused across all t
    prims = []
    for s in u.snapshots:
        grid = s.xlo + u.dx * np.arange(len(s.second))
        dens = np.abs(s.second) ** p
        P = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * u.dx)])
        prims.append((grid, P))

    Fser = np.zeros(K)
    for k in range(K):
        t = times[k]
        xs = np.linspace(-t - sigma, -t - sigma0, m)
        inner = np.empty((k + 1, m))
        for j in range(k + 1):
            s = times[j]
            grid, P = prims[j]
            hi = np.interp(xs + t - s, grid, P, left=0.0, right=P[-1])
            lo = np.interp(xs - t + s, grid, P, left=0.0, right=P[-1])
            inner[j] = hi - lo
        over_x = integrate.simpson(inner, x=xs, axis=1)
        if k >= 2:
            Fser[k] = integrate.simpson(over_x, x=times[:k + 1])
        elif k == 1:
            Fser[k] = float(np.trapezoid(over_x, x=times[:2]))
    return FunctionalSeries(times=times, H=H, H1=H1, H2=h, Fser=Fser)


def iteration_sequences(p: float, j_max: int) -> tuple[list[float], list[float], bool]:
    """Exponent sequences a_j, b_j of the iteration.

    Closed forms a_j = 2(p^j - 1)/(p-1), b_j = (p^{j-1} - 1)/(p-1) are
    returned; check is True iff they agree with the recursions
    a_{j+1} = p a_j + 2, b_{j+1} = p b_j + 1 (a_1 = 2, b_1 = 0) to relative
    1e-12 for every j <= j_max.
    """
    if j_max < 1:
        raise InvalidProblemError("j_max must be at least 1")
    a_closed = [2.0 * (p**j - 1.0) / (p - 1.0) for j in range(1, j_max + 1)]
    b_closed = [(p ** (j - 1) - 1.0) / (p - 1.0) for j in range(1, j_max + 1)]
    a_rec, b_rec = [2.0], [0.0]
    for _ in range(j_max - 1):
        a_rec.append(p * a_rec[-1] + 2.0)
        b_rec.append(p * b_rec[-1] + 1.0)
    check = all(
        abs(ac - ar) <= 1e-12 * max(1.0, abs(ac))
        and abs(bc - br) <= 1e-12 * max(1.0, abs(bc))
        for ac, ar, bc, br in zip(a_closed, a_rec, b_closed, b_rec)
    )
    return a_closed, b_closed, check


@dataclass(frozen=True)
class IterationCertificate:
    """All constants of the iteration argument for one problem instance.

    Two sequences of iteration constants are recorded: logC_hat_j follows
    the literal recursion C_{j+1} = D C_j^p / a_{j+1}^2 from C_1 = B and
    satisfies the per-step inequality
        log C_{j+1} >= p log C_j + log X - 2(j+1) log p,  X = D(p-1)^2/4,
    identically (the slack is 2 log(p^{j+1}/(p^{j+1}-1)) > 0).  logC_j is
    the closed form p^{j-1}(log B - E).  closed_dominated records whether
    the closed form stays below the recursion sequence over 1..j_max, which
    is what licenses using it inside the iteration; it holds whenever X is
    not too small (roughly X > p) and can genuinely fail for geometries
    with small D, in which case the certificate is still returned but
    flagged.
    """

    p: float
    A: float
    epsilon: float
    branch: Branch
    sigma0: float
    sigma1: float
    Cf_or_Cg: float
    B: float
    D: float
    X: float
    E: float
    E_tail_bound: float
    T_star: float
    eps0: float
    amplitude_rescale: float  # lambda = (A/p)^{1/(p-1)}; eps_eff = lambda*eps
    eps_eff: float
    D_eff: float              # original-frame frame constant D*(A/p)
    a_j: tuple[float, ...]
    b_j: tuple[float, ...]
    logC_j: tuple[float, ...]
    logC_hat_j: tuple[float, ...]
    per_step_ok: bool
    closed_dominated: bool
    sequences_check: bool

    def T_star_at(self, eps: float) -> float:
        """T*(eps); the product T*(eps)*eps^{p-1} is an exact constant."""
        if not math.isfinite(self.T_star):
            return math.inf
        return self.T_star * (self.epsilon / eps) ** (self.p - 1.0)

    def to_dict(self) -> dict:
        return {
            "p": self.p, "A": self.A, "epsilon": self.epsilon,
            "branch": self.branch.value,
            "sigma0": self.sigma0, "sigma1": self.sigma1,
            "Cf_or_Cg": self.Cf_or_Cg, "B": self.B, "D": self.D, "X": self.X,
            "E": self.E, "E_tail_bound": self.E_tail_bound,
            "T_star": self.T_star, "eps0": self.eps0,
            "amplitude_rescale": self.amplitude_rescale,
            "eps_eff": self.eps_eff, "D_eff": self.D_eff,
            "a_j": list(self.a_j), "b_j": list(self.b_j),
            "logC_j": list(self.logC_j), "logC_hat_j": list(self.logC_hat_j),
            "per_step_ok": self.per_step_ok,
            "closed_dominated": self.closed_dominated,
            "sequences_check": self.sequences_check,
        }


def tail_bound_E(p: float, absX: float, n: int) -> float:
    """Remainder of sum_{i>n} p^{-i} (2i log p + absX), in closed form."""
    x = 1.0 / p
    geom = x ** (n + 1) / (1.0 - x)
    # sum_{i>n} i x^i = x^{n+1} ((n+1) - n x) / (1-x)^2
    lin = x ** (n + 1) * ((n + 1) - n * x) / (1.0 - x) ** 2
    return 2.0 * math.log(p) * lin + absX * geom


def build_certificate(spec: ProblemSpec, sigma0: float, branch: Branch,
                      j_max: int = 20, tolE: float = 1e-12) -> IterationCertificate:
    """Computes every constant of the iteration argument for `spec`.

    The data must pass the branch's positivity and window checks; when the
    window test fails but the data is nontrivial elsewhere, the error
    carries the translation offset that would fix it.  A = 0 produces a
    degenerate certificate (B = 0, infinite T*) whose eps-linear floors are
    still meaningful for linear reference runs.
    """
    if spec.variant is not Variant.SPACE_DERIVATIVE:
        raise CertificateError("iteration certificates apply to the space-derivative equation")
    p, A, eps, sigma = spec.p, spec.A, spec.epsilon, spec.sigma
    if not 0 < sigma0 < sigma:
        raise CertificateError(f"need 0 < sigma0 < sigma, got sigma0={sigma0}")
    assumption = Assumption.POSITIVE1 if branch is Branch.FBRANCH else Assumption.POSITIVE2
    report = validate_initial_data(spec.data, assumption, sigma0)
    if not report.ok:
        hint = ""
        if report.suggested_offset is not None:
            hint = (f"; translating the data by {report.suggested_offset:+.4g} "
                    f"would center it in the window")
        raise CertificateError(
            f"data fails the {assumption.value} checks for window {report.window}"
            f" (positivity_ok={report.positivity_ok}, window_ok={report.window_ok},"
            f" sigma_ratio_ok={report.sigma_ratio_ok}){hint}")

    sigma1 = (sigma - sigma0) / 2.0
    win_hi = -(sigma + sigma0) / 2.0
    if branch is Branch.FBRANCH:
        mass = profile_integral(spec.data.f, -sigma, win_hi)
        const = (sigma - sigma0) / 4.0 * mass
    else:
        mass = profile_integral(spec.data.g, -sigma, win_hi)
        const = sigma1**2 / 4.0 * mass
    if const <= 0.0:
        raise CertificateError("window integral is not positive; certificate refused")

    lam = (A / p) ** (1.0 / (p - 1.0)) if A > 0 else 0.0
    eps_eff = lam * eps
    B = const * eps_eff / (2.0 if branch is Branch.FBRANCH else 8.0)

    D = 2.0 ** (-p) * ((p - 1.0) / (3.0 * p - 2.0)) ** (1.0 - p) * sigma1 ** (-(3.0 * p - 2.0))
    X = D * (p - 1.0) ** 2 / 4.0
    D_eff = D * A / p

    absX = abs(math.log(X))
    terms = []
    n = 0
    tail = math.inf
    while tail > 0.5 * tolE:
        n += 1
        terms.append(p ** (-n) * (2.0 * n * math.log(p) + absX))
        tail = tail_bound_E(p, absX, n)
        if n > 100_000:
            raise CertificateError("E summation failed to reach the requested tolerance")
    E = math.fsum(terms)
    # stored bound covers the analytic remainder plus rounding of the sum itself
    tail = tail + 8.0 * math.ulp(max(E, 1.0))
    if tail > tolE:
        raise CertificateError(
            f"tolE={tolE:g} is below the floating-point floor for this series")

    a, b, seq_check = iteration_sequences(p, j_max)
    logB = math.log(B) if B > 0 else -math.inf
    logC = [p ** (j - 1) * (logB - E) for j in range(1, j_max + 1)]
    logC_hat = [logB]
    for j in range(1, j_max):
        logC_hat.append(p * logC_hat[-1] + math.log(D) - 2.0 * math.log(a[j]))
    logp = math.log(p)
    logX = math.log(X)
    per_step_ok = all(
        logC_hat[j] >= p * logC_hat[j - 1] + logX - 2.0 * (j + 1) * logp - 1e-9
        for j in range(1, j_max))
    closed_dominated = all(c <= ch + _DOMINATION_TOL for c, ch in zip(logC, logC_hat))

    T_star = math.inf if B == 0 else 2.0 ** (2.0 * p) * (math.exp(E) / B) ** (p - 1.0)
    if math.isfinite(T_star):
        eps0 = (T_star * eps ** (p - 1.0) / (2.0 * sigma1)) ** (1.0 / (p - 1.0))
    else:
        eps0 = math.inf

    return IterationCertificate(
        p=p, A=A, epsilon=eps, branch=branch, sigma0=sigma0, sigma1=sigma1,
        Cf_or_Cg=const, B=B, D=D, X=X, E=E, E_tail_bound=tail,
        T_star=T_star, eps0=eps0, amplitude_rescale=lam, eps_eff=eps_eff,
        D_eff=D_eff, a_j=tuple(a), b_j=tuple(b), logC_j=tuple(logC),
        logC_hat_j=tuple(logC_hat), per_step_ok=per_step_ok,
        closed_dominated=closed_dominated, sequences_check=seq_check)


# ---------------------------------------------------------------------------
# verification of the inequality chain on solver output


@dataclass(frozen=True)
class BoundCheck:
    name: str
    range: str
    tested: bool
    passed: bool
    worst_margin: float  # min over tested times of LHS/RHS - 1 (or -LHS excess)
    n_points: int
    note: str = ""


@dataclass(frozen=True)
class BoundReport:
    checks: tuple[BoundCheck, ...]
    first_J_positive: float | None
    T_star: float
    slack: float

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks if c.tested)

    def failed_names(self) -> list[str]:
        return [c.name for c in self.checks if c.tested and not c.passed]

    def to_dict(self) -> dict:
        return {
            "checks": [{"name": c.name, "range": c.range, "worst_margin": c.worst_margin,
                        "pass": c.passed, "tested": c.tested, "n_points": c.n_points,
                        "note": c.note} for c in self.checks],
            "first_J_positive": self.first_J_positive,
            "T_star": self.T_star,
            "slack": self.slack,
            "ok": self.ok,
        }


def _floor_check(name: str, range_str: str, lhs: np.ndarray, rhs: np.ndarray,
                 mask: np.ndarray, slack: float, note: str = "",
                 atol: float = 1e-12) -> BoundCheck:
    """LHS >= RHS*(1 - slack) on the masked grid times.

    Margins are relative to |RHS| floored at atol, so a vanishing right-hand
    side (degenerate constants) tolerates roundoff noise in LHS."""
    n = int(mask.sum())
    if n == 0:
        return BoundCheck(name=name, range=range_str, tested=False, passed=True,
                          worst_margin=math.nan, n_points=0,
                          note=note or "range empty on this run")
    L, R = lhs[mask], rhs[mask]
    scale = np.maximum(np.abs(R), atol)
    margins = (L - R) / scale
    worst = float(margins.min())
    return BoundCheck(name=name, range=range_str, tested=True,
                      passed=bool(worst >= -slack), worst_margin=worst,
                      n_points=n, note=note)


def J_function(t, cert: IterationCertificate):
    """J(t) = 2p/(p-1) log(t-sigma1) - (2p-1)/(p-1) log t + log B - E."""
    p = cert.p
    t = np.asarray(t, dtype=float)
    logB = math.log(cert.B) if cert.B > 0 else -math.inf
    out = (2.0 * p / (p - 1.0) * np.log(t - cert.sigma1)
           - (2.0 * p - 1.0) / (p - 1.0) * np.log(t) + logB - cert.E)
    return out if out.ndim else float(out)


def first_J_positive_time(cert: IterationCertificate) -> float | None:
    """Unique root of the strictly increasing J, or None when B = 0."""
    if cert.B <= 0 or not math.isfinite(cert.T_star):
        return None
    lo = cert.sigma1 * (1.0 + 1e-12) + 1e-300
    if J_function(lo, cert) > 0:
        return lo
    hi = max(2.0 * cert.T_star, 4.0 * cert.sigma1)
    while J_function(hi, cert) <= 0:
        hi *= 2.0
        if hi > 1e300:
            return None
    return float(optimize.brentq(lambda t: J_function(t, cert), lo, hi, xtol=1e-13,
                                 rtol=1e-14))


def verify_bounds(series: FunctionalSeries, cert: IterationCertificate,
                  spec: ProblemSpec, slack: float = 0.02,
                  zero_tol: float = 1e-8) -> BoundReport:
    """Checks the inequality chain against a computed functional series.

    All eps-linear floors are stated in the original frame (they are
    invariant under the A = p rescaling); the iteration frame uses the
    original-frame constant D_eff = D*A/p.  Relative slack covers
    quadrature and discretization error.  Ranges that the run never reaches
    are reported untested rather than failed.
    """
    t = series.times
    eps = spec.epsilon
    checks = []

    zero_excess = max(abs(float(series.H[0])), abs(float(series.H1[0])))
    checks.append(BoundCheck(
        name="H_initial_zero", range="t = 0", tested=True,
        passed=bool(zero_excess <= zero_tol), worst_margin=-zero_excess, n_points=1,
        note=f"|H(0)|, |H'(0)| <= {zero_tol:g}"))

    if cert.branch is Branch.FBRANCH:
        floor2 = np.full_like(t, cert.Cf_or_Cg * eps)
        mask2 = np.ones_like(t, dtype=bool)
        range2 = "t >= 0"
        floor_note = "H'' >= Cf*eps"
        floorH = (cert.Cf_or_Cg * eps / 2.0) * t**2
        maskH = np.ones_like(t, dtype=bool)
        rangeH = "t >= 0"
        floorH_note = "H >= (Cf*eps/2) t^2"
    else:
        floor2 = np.full_like(t, cert.Cf_or_Cg * eps)
        mask2 = t >= cert.sigma1 / 2.0
        range2 = "t >= sigma1/2"
        floor_note = "H'' >= Cg*eps"
        floorH = (cert.Cf_or_Cg * eps / 8.0) * t**2
        maskH = t >= cert.sigma1
        rangeH = "t >= sigma1"
        floorH_note = "H >= (Cg*eps/8) t^2"
    checks.append(_floor_check("H2_data_floor", range2, series.H2, floor2, mask2,
                               slack, floor_note))
    checks.append(_floor_check("H_quadratic_floor", rangeH, series.H, floorH, maskH,
                               slack, floorH_note))

    mask_frame = t >= cert.sigma1
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs_frame = np.where(
            t > 0, cert.D_eff * t ** (1.0 - 2.0 * cert.p) * np.maximum(series.H, 0.0) ** cert.p,
            0.0)
    checks.append(_floor_check(
        "iteration_frame", "t >= sigma1", series.H2, rhs_frame, mask_frame, slack,
        "H'' >= D_eff t^{1-2p} H^p, checked directly on t >= sigma1 "
        "(no appeal to H''(0) = 0, which nontrivial data need not satisfy)"))

    root = first_J_positive_time(cert)
    if root is not None and math.isfinite(cert.T_star):
        checks.append(BoundCheck(
            name="J_root_below_T_star", range="t > sigma1", tested=True,
            passed=bool(root <= cert.T_star * (1.0 + 1e-9)),
            worst_margin=float(cert.T_star / root - 1.0), n_points=1,
            note="first time with J > 0 does not exceed T*"))
    else:
        checks.append(BoundCheck(
            name="J_root_below_T_star", range="t > sigma1", tested=False, passed=True,
            worst_margin=math.nan, n_points=0, note="no finite T* (B = 0)"))

    return BoundReport(checks=tuple(checks), first_J_positive=root,
                       T_star=cert.T_star, slack=slack)
