"""Finite-difference solvers for both equation variants.

SpaceDerivative: v_tt - v_xx = A|v_x|^{p-2}v_x v_xx is advanced as the
conservative first-order system

    w_t = dz/dx,   z_t = d/dx ( w + (A/p)|w|^p ),    w = v_x, z = v_t,

whose flux Jacobian reproduces the wave speed c(w) exactly.

TimeDerivative: v_tt - v_xx = A|v_t|^{p-2}v_t v_tt is advanced as

    q_t = dz/dx,   z_t = (dq/dx) / (1 - A|z|^{p-2}z),    q = v_x, z = v_t.

(The textbook update "z_t = v_xx with v integrated alongside" is von
Neumann unstable for this pair: the amplification matrix has determinant
1 + (dt k)^2/2 for every mode, so errors grow without bound at any time
step.  The first-order reduction above with the same two stencils is the
standard stable alternative.)

Both variants offer Lax-Friedrichs and two-step Lax-Wendroff stencils, an
adaptive CFL time step, a spatial window that grows with the support and is
clamped to the propagation cone |x| <= t + sigma + 2 dx, and three blow-up
criteria: a gradient threshold, loss of hyperbolicity, and CFL collapse.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidProblemError
from .model import (
    DELTA_HYP,
    InitialData,
    ProblemSpec,
    Variant,
    profile_from_dict,
    signed_power,
)

_EDGE_PAD = 4     # zero cells kept beyond the support on each side
_GROW_CHUNK = 64  # cells added when the support reaches the window edge


class Scheme(enum.Enum):
    LAX_FRIEDRICHS = "LaxFriedrichs"
    LAX_WENDROFF = "LaxWendroff"


class BlowupCriterion(enum.Enum):
    GRADIENT_THRESHOLD = "GradientThreshold"
    HYPERBOLICITY_LOSS = "HyperbolicityLoss"
    CFL_COLLAPSE = "CflCollapse"


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    gradient_threshold = None means "auto": threshold_factor times the
    initial blow-up measure (the measure is the max of |w|, |z| and their
    one-sided difference quotients, so it covers both amplitude and
    steepness growth).
    """

    dx: float
    t_max: float
    cfl: float = 0.8
    gradient_threshold: float | None = None
    threshold_factor: float = 1e3
    dt_min: float = 1e-12
    scheme: Scheme = Scheme.LAX_WENDROFF
    delta_hyp: float = DELTA_HYP
    max_snapshots: int = 400

    def __post_init__(self):
        if self.dx <= 0:
            raise ConfigError(f"dx must be positive, got {self.dx}")
        if not 0 < self.cfl < 1:
            raise ConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.max_snapshots < 2:
            raise ConfigError("max_snapshots must be at least 2")

    def to_dict(self) -> dict:
        return {
            "dx": self.dx,
            "t_max": self.t_max,
            "cfl": self.cfl,
            "gradient_threshold": self.gradient_threshold,
            "threshold_factor": self.threshold_factor,
            "dt_min": self.dt_min,
            "scheme": self.scheme.value,
            "delta_hyp": self.delta_hyp,
            "max_snapshots": self.max_snapshots,
        }


@dataclass(frozen=True)
class BlowupEvent:
    detected_time: float
    criterion: BlowupCriterion


@dataclass(frozen=True)
class Snapshot:
    t: float
    xlo: float  # coordinate of the first grid point of the stored window
    v: np.ndarray
    w: np.ndarray  # v_x in both variants
    z: np.ndarray  # v_t


@dataclass
class State:
    """Mutable solver state on the current window; x_i = xlo + i*dx."""

    t: float
    xlo: float
    v: np.ndarray
    w: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class RunTrace:
    dx: float
    spec: ProblemSpec | None
    config: SolverConfig
    snapshots: tuple[Snapshot, ...]
    blowup: BlowupEvent | None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def domain(self) -> list[tuple[float, float]]:
        return [(s.xlo, s.xlo + (len(s.v) - 1) * self.dx) for s in self.snapshots]

    @property
    def final_time(self) -> float:
        return self.snapshots[-1].t


@dataclass(frozen=True)
class BlowupEstimate:
    T_est: float
    uncertainty: float
    refinement_levels: tuple[tuple[float, float], ...]  # (dx, detected time)
    criterion: BlowupCriterion | None
    low_confidence: bool = False


# ---------------------------------------------------------------------------
# stepping internals


def measure(state: State, dx: float) -> float:
    """Blow-up measure: max of |w|, |z| and their difference quotients."""
    m = max(np.abs(state.w).max(initial=0.0), np.abs(state.z).max(initial=0.0))
    if len(state.w) > 1:
        m = max(m,
                np.abs(np.diff(state.w)).max(initial=0.0) / dx,
                np.abs(np.diff(state.z)).max(initial=0.0) / dx)
    return float(m)


def flux(w, spec: ProblemSpec):
    """Conservative flux w + (A/p)|w|^p whose derivative is c(w)^2."""
    w = np.asarray(w, dtype=float)
    out = w + spec.A / spec.p * np.abs(w) ** spec.p
    return out if out.ndim else float(out)


def _space_radicand(w: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    return 1.0 + spec.A * signed_power(w, spec.p - 1.0)


def _time_denominator(z: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    return 1.0 - spec.A * signed_power(z, spec.p - 1.0)


def _max_speed(state: State, spec: ProblemSpec, delta_hyp: float) -> float | None:
    """Largest characteristic speed, or None when hyperbolicity is lost."""
    if spec.variant is Variant.SPACE_DERIVATIVE:
        rad = _space_radicand(state.w, spec)
        if rad.size and rad.min() < delta_hyp:
            return None
        return float(np.sqrt(rad.max(initial=1.0)))
    den = _time_denominator(state.z, spec)
    if den.size and den.min() < delta_hyp:
        return None
    return float(1.0 / np.sqrt(den.min(initial=1.0)))


def _advance_space(state: State, dt: float, dx: float, spec: ProblemSpec,
                   scheme: Scheme) -> None:
    lam = dt / dx
    w, z = state.w, state.z
    if scheme is Scheme.LAX_FRIEDRICHS:
        Fw, Fz = z, flux(w, spec)
        w_new = w.copy()
        z_new = z.copy()
        w_new[1:-1] = 0.5 * (w[2:] + w[:-2]) + 0.5 * lam * (Fw[2:] - Fw[:-2])
        z_new[1:-1] = 0.5 * (z[2:] + z[:-2]) + 0.5 * lam * (Fz[2:] - Fz[:-2])
    else:
        Fw, Fz = z, flux(w, spec)
        # Richtmyer half step on the staggered grid
        w_h = 0.5 * (w[1:] + w[:-1]) + 0.5 * lam * (Fw[1:] - Fw[:-1])
        z_h = 0.5 * (z[1:] + z[:-1]) + 0.5 * lam * (Fz[1:] - Fz[:-1])
        Fw_h, Fz_h = z_h, flux(w_h, spec)
        w_new = w.copy()
        z_new = z.copy()
        w_new[1:-1] = w[1:-1] + lam * (Fw_h[1:] - Fw_h[:-1])
        z_new[1:-1] = z[1:-1] + lam * (Fz_h[1:] - Fz_h[:-1])
    z_old = state.z
    state.w = w_new
    state.z = z_new
    state.v = state.v + 0.5 * dt * (z_old + z_new)


def _advance_time(state: State, dt: float, dx: float, spec: ProblemSpec,
                  scheme: Scheme) -> None:
    lam = dt / dx
    q, z = state.w, state.z
    if scheme is Scheme.LAX_FRIEDRICHS:
        kappa = 1.0 / _time_denominator(z, spec)
        q_new = q.copy()
        z_new = z.copy()
        q_new[1:-1] = 0.5 * (q[2:] + q[:-2]) + 0.5 * lam * (z[2:] - z[:-2])
        z_new[1:-1] = (0.5 * (z[2:] + z[:-2])
                       + 0.5 * lam * kappa[1:-1] * (q[2:] - q[:-2]))
    else:
        z_mid = 0.5 * (z[1:] + z[:-1])
        kappa_mid = 1.0 / _time_denominator(z_mid, spec)
        q_h = 0.5 * (q[1:] + q[:-1]) + 0.5 * lam * (z[1:] - z[:-1])
        z_h = z_mid + 0.5 * lam * kappa_mid * (q[1:] - q[:-1])
        # half-time-centered coefficient for the corrector
        kappa_c = 1.0 / _time_denominator(0.5 * (z_h[1:] + z_h[:-1]), spec)
        q_new = q.copy()
        z_new = z.copy()
        q_new[1:-1] = q[1:-1] + lam * (z_h[1:] - z_h[:-1])
        z_new[1:-1] = z[1:-1] + lam * kappa_c * (q_h[1:] - q_h[:-1])
    z_old = state.z
    state.w = q_new
    state.z = z_new
    state.v = state.v + 0.5 * dt * (z_old + z_new)


def _grow_if_needed(state: State, dx: float) -> None:
    """Keep at least _EDGE_PAD zero cells on each side of the support."""
    n = len(state.w)
    edge = 2 * _EDGE_PAD
    left_busy = (np.abs(state.v[:edge]).max(initial=0.0) > 0
                 or np.abs(state.w[:edge]).max(initial=0.0) > 0
                 or np.abs(state.z[:edge]).max(initial=0.0) > 0)
    right_busy = (np.abs(state.v[n - edge:]).max(initial=0.0) > 0
                  or np.abs(state.w[n - edge:]).max(initial=0.0) > 0
                  or np.abs(state.z[n - edge:]).max(initial=0.0) > 0)
    if left_busy:
        pad = np.zeros(_GROW_CHUNK)
        state.v = np.concatenate([pad, state.v])
        state.w = np.concatenate([pad, state.w])
        state.z = np.concatenate([pad, state.z])
        state.xlo -= _GROW_CHUNK * dx
    if right_busy:
        pad = np.zeros(_GROW_CHUNK)
        state.v = np.concatenate([state.v, pad])
        state.w = np.concatenate([state.w, pad])
        state.z = np.concatenate([state.z, pad])


def _clamp_to_cone(state: State, dx: float, sigma: float) -> None:
    """Zero everything outside |x| <= t + sigma + 2 dx.

    The true solution vanishes there (the support edge moves into the zero
    state at speed c(0) = 1); only scheme leakage is removed.
    """
    n = len(state.v)
    xs = state.xlo + dx * np.arange(n)
    outside = np.abs(xs) > state.t + sigma + 2.0 * dx
    if outside.any():
        state.v[outside] = 0.0
        state.w[outside] = 0.0
        state.z[outside] = 0.0


def initial_state(spec: ProblemSpec, config: SolverConfig) -> State:
    sigma = spec.sigma
    dx = config.dx
    m = int(math.ceil(sigma / dx)) + _EDGE_PAD + 2
    xs = dx * np.arange(-m, m + 1)
    eps = spec.epsilon
    v = eps * np.atleast_1d(spec.data.f(xs)).astype(float)
    w = eps * np.atleast_1d(spec.data.f.deriv1(xs)).astype(float)
    z = eps * np.atleast_1d(spec.data.g(xs)).astype(float)
    return State(t=0.0, xlo=float(xs[0]), v=v, w=w, z=z)


def resolve_threshold(spec: ProblemSpec, config: SolverConfig) -> float:
    """Gradient threshold actually used: explicit value or auto factor."""
    if config.gradient_threshold is not None:
        return config.gradient_threshold
    m0 = measure(initial_state(spec, config), config.dx)
    return config.threshold_factor * max(m0, 1e-30)


def step(state: State, config: SolverConfig, spec: ProblemSpec
         ) -> tuple[State, BlowupEvent | None]:
    """One guarded time step; returns the new state and any blow-up event.

    The incoming state is checked first, so a state already beyond a guard
    produces an event without stepping.
    """
    dx = config.dx
    threshold = resolve_threshold(spec, config)
    cmax = _max_speed(state, spec, config.delta_hyp)
    if cmax is None:
        return state, BlowupEvent(state.t, BlowupCriterion.HYPERBOLICITY_LOSS)
    if measure(state, dx) > threshold:
        return state, BlowupEvent(state.t, BlowupCriterion.GRADIENT_THRESHOLD)
    dt = config.cfl * dx / cmax
    dt = min(dt, config.t_max - state.t)
    if dt < config.dt_min:
        return state, BlowupEvent(state.t, BlowupCriterion.CFL_COLLAPSE)
    _grow_if_needed(state, dx)
    if spec.variant is Variant.SPACE_DERIVATIVE:
        _advance_space(state, dt, dx, spec, config.scheme)
    else:
        _advance_time(state, dt, dx, spec, config.scheme)
    state.t += dt
    _clamp_to_cone(state, dx, spec.sigma)
    return state, None


def _trim(arr: np.ndarray, lo: int, hi: int) -> np.ndarray:
    out = arr[lo:hi].copy()
    out.flags.writeable = False
    return out


def _record(state: State, dx: float) -> Snapshot:
    nz = np.flatnonzero((state.v != 0) | (state.w != 0) | (state.z != 0))
    if nz.size:
        lo = max(int(nz[0]) - 2, 0)
        hi = min(int(nz[-1]) + 3, len(state.v))
    else:
        mid = len(state.v) // 2
        lo, hi = max(mid - 2, 0), min(mid + 3, len(state.v))
    return Snapshot(t=state.t, xlo=state.xlo + lo * dx,
                    v=_trim(state.v, lo, hi), w=_trim(state.w, lo, hi),
                    z=_trim(state.z, lo, hi))


def solve(spec: ProblemSpec, config: SolverConfig) -> RunTrace:
    """Advance from t = 0 until a blow-up event or t_max.

    Snapshots are recorded at (roughly) t_max/max_snapshots intervals plus
    the initial and final states.  Guard violations are recorded as events
    on the returned trace, never raised.
    """
    dx = config.dx
    # freeze the auto threshold once so every step compares against the
    # initial data, not against the current state
    config = replace(config, gradient_threshold=resolve_threshold(spec, config))
    state = initial_state(spec, config)
    snap_interval = config.t_max / (config.max_snapshots - 1)
    snapshots = [_record(state, dx)]
    next_snap = snap_interval
    event = None
    while state.t < config.t_max - 1e-12 * config.t_max:
        state, event = step(state, config, spec)
        if event is not None:
            break
        if state.t >= next_snap - 1e-12:
            snapshots.append(_record(state, dx))
            while next_snap <= state.t + 1e-12:
                next_snap += snap_interval
    if state.t > snapshots[-1].t:
        snapshots.append(_record(state, dx))
    return RunTrace(dx=dx, spec=spec, config=config,
                    snapshots=tuple(snapshots), blowup=event)


# ---------------------------------------------------------------------------
# lifespan estimation under refinement


def estimate_lifespan(spec: ProblemSpec, config: SolverConfig,
                      levels: int) -> BlowupEstimate:
    """Richardson-extrapolated blow-up time over grids dx, dx/2, ...

    The gradient threshold is frozen across levels (resolved on the finest
    grid when automatic) so detected times differ only through the scheme.
    Returns an infinite estimate when no level detects blow-up before
    t_max; flags low confidence when detected times are not monotone or
    levels disagree about detection.
    """
    if levels < 2:
        raise ConfigError("need at least 2 refinement levels")
    finest = replace(config, dx=config.dx / 2 ** (levels - 1))
    threshold = resolve_threshold(spec, finest)
    detected: list[tuple[float, float]] = []
    criterion = None
    low_confidence = False
    for k in range(levels):
        cfg_k = replace(config, dx=config.dx / 2**k, gradient_threshold=threshold,
                        max_snapshots=2)
        trace = solve(spec, cfg_k)
        if trace.blowup is None:
            detected.append((cfg_k.dx, math.inf))
        else:
            detected.append((cfg_k.dx, trace.blowup.detected_time))
            criterion = trace.blowup.criterion
    times = [t for _, t in detected if math.isfinite(t)]
    if not times or not math.isfinite(detected[-1][1]):
        return BlowupEstimate(T_est=math.inf, uncertainty=0.0,
                              refinement_levels=tuple(detected), criterion=criterion,
                              low_confidence=bool(times))
    if len(times) < len(detected):
        low_confidence = True
    if len(times) == 1:
        return BlowupEstimate(T_est=times[0], uncertainty=math.inf,
                              refinement_levels=tuple(detected), criterion=criterion,
                              low_confidence=True)
    diffs = [times[i] - times[i + 1] for i in range(len(times) - 1)]
    monotone = all(d > 0 for d in diffs) or all(d < 0 for d in diffs)
    t_last = times[-1]
    d_last = diffs[-1]
    if not monotone:
        return BlowupEstimate(T_est=t_last, uncertainty=max(abs(d) for d in diffs),
                              refinement_levels=tuple(detected), criterion=criterion,
                              low_confidence=True)
    if len(diffs) >= 2 and diffs[-2] != 0 and d_last != 0:
        ratio = diffs[-2] / d_last
        if not 1.2 < ratio < 8.0:
            ratio = 2.0  # fall back to first-order extrapolation
            low_confidence = True
    else:
        ratio = 2.0
    # limit of the geometric tail: t_k = T + C r^k gives T = t_n - d_n/(rho-1)
    T_est = t_last - d_last / (ratio - 1.0)
    return BlowupEstimate(T_est=float(T_est), uncertainty=abs(d_last),
                          refinement_levels=tuple(detected), criterion=criterion,
                          low_confidence=low_confidence)


# ---------------------------------------------------------------------------
# the antiderivative field u


@dataclass(frozen=True)
class USnapshot:
    t: float
    xlo: float
    u: np.ndarray
    second: np.ndarray  # u_xx (= w) for SpaceDerivative, u_tt (= z) for TimeDerivative


@dataclass(frozen=True)
class UField:
    """u on the trace grid: u = int_{-inf}^x v dy (SpaceDerivative) or
    u = int_0^t v ds (TimeDerivative)."""

    variant: Variant
    dx: float
    snapshots: tuple[USnapshot, ...]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def u_on(self, xs: np.ndarray, index: int) -> np.ndarray:
        """Values of u at snapshot `index`, linearly interpolated in x.

        Outside the stored window, u is 0 to the left of the support; to
        the right it saturates at the total integral of v (SpaceDerivative)
        or vanishes (TimeDerivative, where v itself vanishes there).
        """
        s = self.snapshots[index]
        grid = s.xlo + self.dx * np.arange(len(s.u))
        right = s.u[-1] if self.variant is Variant.SPACE_DERIVATIVE else 0.0
        return np.interp(xs, grid, s.u, left=0.0, right=right)

    def u_at(self, x: float, t: float) -> float:
        """Bilinear interpolation in (x, t); exact for bilinear fields."""
        times = self.times
        if not times[0] <= t <= times[-1]:
            raise InvalidProblemError(f"time {t} outside the trace range")
        j = int(np.searchsorted(times, t, side="right") - 1)
        j = min(j, len(times) - 2) if len(times) > 1 else 0
        x_arr = np.array([x])
        if len(times) == 1 or times[j + 1] == times[j]:
            return float(self.u_on(x_arr, j)[0])
        th = (t - times[j]) / (times[j + 1] - times[j])
        lo = float(self.u_on(x_arr, j)[0])
        hi = float(self.u_on(x_arr, j + 1)[0])
        return (1.0 - th) * lo + th * hi


def antiderivative_u(trace: RunTrace, variant: Variant) -> UField:
    """Cumulative trapezoid in x (SpaceDerivative) or t (TimeDerivative)."""
    for s in trace.snapshots:
        if not (np.isfinite(s.v).all() and np.isfinite(s.w).all()
                and np.isfinite(s.z).all()):
            raise InvalidProblemError(f"trace contains non-finite values at t={s.t}")
    dx = trace.dx
    if variant is Variant.SPACE_DERIVATIVE:
        snaps = []
        for s in trace.snapshots:
            u = np.concatenate([[0.0], np.cumsum(0.5 * (s.v[1:] + s.v[:-1]) * dx)])
            snaps.append(USnapshot(t=s.t, xlo=s.xlo, u=u, second=s.w))
        return UField(variant=variant, dx=dx, snapshots=tuple(snaps))
    # TimeDerivative: align all windows on a common grid, then integrate in t
    ilo = min(round(s.xlo / dx) for s in trace.snapshots)
    ihi = max(round(s.xlo / dx) + len(s.v) - 1 for s in trace.snapshots)
    n = ihi - ilo + 1
    xlo = ilo * dx
    times = trace.times
    vs = np.zeros((len(trace.snapshots), n))
    zs = np.zeros_like(vs)
    for row, s in enumerate(trace.snapshots):
        off = round(s.xlo / dx) - ilo
        vs[row, off:off + len(s.v)] = s.v
        zs[row, off:off + len(s.z)] = s.z
    u = np.zeros_like(vs)
    dts = np.diff(times)
    u[1:] = np.cumsum(0.5 * (vs[1:] + vs[:-1]) * dts[:, None], axis=0)
    snaps = [USnapshot(t=float(times[k]), xlo=xlo, u=u[k], second=zs[k])
             for k in range(len(times))]
    return UField(variant=variant, dx=dx, snapshots=tuple(snaps))


# ---------------------------------------------------------------------------
# trace persistence


def save_trace(trace: RunTrace, directory: str | Path, fmt: str = "npz") -> None:
    """Persist a trace: metadata.json plus snapshot arrays (npz or csv)."""
    if fmt not in ("npz", "csv"):
        raise ConfigError(f"unknown trace format {fmt!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "dx": trace.dx,
        "format": fmt,
        "spec": trace.spec.to_dict() if trace.spec is not None else None,
        "config": trace.config.to_dict(),
        "blowup": None if trace.blowup is None else {
            "detected_time": trace.blowup.detected_time,
            "criterion": trace.blowup.criterion.value,
        },
        "snapshots": [{"t": s.t, "xlo": s.xlo, "n": len(s.v)}
                      for s in trace.snapshots],
    }
    tmp = directory / "metadata.json.tmp"
    tmp.write_text(json.dumps(meta, indent=1, sort_keys=True))
    tmp.replace(directory / "metadata.json")
    if fmt == "npz":
        arrays = {}
        for k, s in enumerate(trace.snapshots):
            arrays[f"v{k}"] = s.v
            arrays[f"w{k}"] = s.w
            arrays[f"z{k}"] = s.z
        with open(directory / "snapshots.npz", "wb") as fh:
            np.savez(fh, **arrays)
    else:
        for k, s in enumerate(trace.snapshots):
            xs = s.xlo + trace.dx * np.arange(len(s.v))
            table = np.column_stack([xs, s.v, s.w, s.z])
            header = "x,v,w,z"
            np.savetxt(directory / f"snapshot_{k:05d}.csv", table,
                       delimiter=",", header=header, comments="")


def load_trace(directory: str | Path) -> RunTrace:
    directory = Path(directory)
    meta = json.loads((directory / "metadata.json").read_text())
    spec = None
    if meta["spec"] is not None:
        d = meta["spec"]
        try:
            data = InitialData(f=profile_from_dict(d["data"]["f"]),
                               g=profile_from_dict(d["data"]["g"]),
                               sigma=d["data"]["sigma"])
            spec = ProblemSpec(p=d["p"], A=d["A"], epsilon=d["epsilon"],
                               variant=Variant(d["variant"]), data=data)
        except InvalidProblemError:
            spec = None  # non-serializable profile (e.g. induced simple-wave g)
    cfg_d = dict(meta["config"])
    cfg_d["scheme"] = Scheme(cfg_d["scheme"])
    config = SolverConfig(**cfg_d)
    snaps = []
    if meta["format"] == "npz":
        with np.load(directory / "snapshots.npz") as arrays:
            for k, rec in enumerate(meta["snapshots"]):
                snaps.append(Snapshot(t=rec["t"], xlo=rec["xlo"],
                                      v=arrays[f"v{k}"], w=arrays[f"w{k}"],
                                      z=arrays[f"z{k}"]))
    else:
        for k, rec in enumerate(meta["snapshots"]):
            table = np.loadtxt(directory / f"snapshot_{k:05d}.csv",
                               delimiter=",", skiprows=1, ndmin=2)
            snaps.append(Snapshot(t=rec["t"], xlo=rec["xlo"],
                                  v=table[:, 1], w=table[:, 2], z=table[:, 3]))
    blow = meta["blowup"]
    event = None if blow is None else BlowupEvent(
        blow["detected_time"], BlowupCriterion(blow["criterion"]))
    return RunTrace(dx=meta["dx"], spec=spec, config=config,
                    snapshots=tuple(snaps), blowup=event)
