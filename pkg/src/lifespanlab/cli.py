"""Command-line front end.

Commands: solve, sweep, verify-t1, verify-t2, oracle, report.  Each run
reads a JSON config, writes a fresh run directory with CSV/JSON/SVG
artifacts plus a manifest (resolved config, tool version, content digest
per file, no timestamps), and returns 0 on success, 1 when a verification
check fails, 2 on usage or config errors.  A run directory that already
holds a manifest is never modified; interrupted runs are recognizable by
the INCOMPLETE marker they leave behind.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (CertificateError, ConfigError, InsufficientDataError,
                     LifespanLabError)
from .model import (InitialData, ProblemSpec, Variant, profile_from_dict)
from .oracle import SimpleWaveSetup, crossing_time_exact, simple_wave_data
from .scaling import (Source, SweepEntry, SweepPlan, SweepResult,
                      compare_theory, fit_power_law, run_sweep)
from .solver import (Scheme, SolverConfig, antiderivative_u, save_trace, solve)
from .theorem1 import (Branch, build_certificate, compute_functionals,
                       verify_bounds)
from .theorem2 import (W_closed_form, build_certificate_t, extract_U,
                       verify_comparison)

ENV_OUT_ROOT = "LIFESPANLAB_OUT_ROOT"
COMMANDS = ("solve", "sweep", "verify-t1", "verify-t2", "oracle", "report")
INCOMPLETE_MARKER = "INCOMPLETE"
_SVG_HASHSALT = "lifespanlab"

_PROFILE_DEFAULT_F = {"type": "bump", "center": -0.875, "halfwidth": 0.125,
                      "amplitude": 1.0}
_PROFILE_DEFAULT_G = {"type": "zero"}

_PROBLEM_DEFAULTS = {
    "A": None,  # defaults to p (normalized coefficient)
    "variant": "SpaceDerivative",
    "sigma": 1.0,
    "sigma0": 0.5,
    "f": _PROFILE_DEFAULT_F,
    "g": _PROFILE_DEFAULT_G,
    "simple_wave": False,
}
_SOLVER_DEFAULTS = {
    "dx": 1.0 / 256.0,
    "t_max": 5.0,
    "cfl": 0.8,
    "gradient_threshold": None,
    "threshold_factor": 1e3,
    "dt_min": 1e-12,
    "scheme": "LaxWendroff",
    "delta_hyp": 1e-6,
    "max_snapshots": 400,
}
_EXPERIMENT_DEFAULTS = {
    "epsilons": [],
    "source": "Solver",
    "levels": 2,
    "branch": "FBranch",
    "j_max": 20,
    "tolE": 1e-12,
    "slack": 0.02,
    "slack_t2": 0.05,
    "slope_tol": None,
    "guard": 0.0,
    "x_hi": None,
    "sweep_dir": None,
    "trace_format": "csv",
}


# ------------------------------------------------------------- config loading


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _check_unknown(section: dict, allowed: set, path: str):
    for key in section:
        if key not in allowed:
            _fail(f"{path}.{key}", "unknown key")


def _as_number(val, path: str, *, integer=False, allow_none=False,
               lo=None, lo_strict=None):
    if val is None:
        if allow_none:
            return None
        _fail(path, "a number is required")
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(path, f"expected a number, got {type(val).__name__}")
    if integer and int(val) != val:
        _fail(path, f"expected an integer, got {val}")
    out = int(val) if integer else float(val)
    if lo is not None and out < lo:
        _fail(path, f"must be at least {lo}, got {out}")
    if lo_strict is not None and out <= lo_strict:
        _fail(path, f"must be greater than {lo_strict}, got {out}")
    return out


def _as_choice(val, choices, path: str):
    if val not in choices:
        _fail(path, f"expected one of {sorted(choices)}, got {val!r}")
    return val


def _as_bool(val, path: str):
    if not isinstance(val, bool):
        _fail(path, f"expected true or false, got {val!r}")
    return val


def _validate_profile(d, path: str) -> dict:
    if not isinstance(d, dict):
        _fail(path, "expected an object describing a profile")
    kind = d.get("type")
    if kind == "zero":
        _check_unknown(d, {"type"}, path)
        return {"type": "zero"}
    if kind == "bump":
        _check_unknown(d, {"type", "center", "halfwidth", "amplitude"}, path)
        return {
            "type": "bump",
            "center": _as_number(d.get("center", 0.0), f"{path}.center"),
            "halfwidth": _as_number(d.get("halfwidth"), f"{path}.halfwidth",
                                    lo_strict=0.0),
            "amplitude": _as_number(d.get("amplitude", 1.0), f"{path}.amplitude"),
        }
    _fail(f"{path}.type", f"expected 'zero' or 'bump', got {kind!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration with every default materialized."""

    problem: dict
    solver: dict
    experiment: dict
    output_dir: str | None

    def resolved(self) -> dict:
        return {"problem": dict(self.problem), "solver": dict(self.solver),
                "experiment": dict(self.experiment)}

    # -- builders ----------------------------------------------------------
    def build_data(self) -> InitialData:
        f = profile_from_dict(self.problem["f"])
        g = profile_from_dict(self.problem["g"])
        return InitialData(f=f, g=g, sigma=self.problem["sigma"])

    def build_spec(self) -> ProblemSpec:
        pr = self.problem
        data = self.build_data()
        spec = ProblemSpec(p=pr["p"], A=pr["A"], epsilon=pr["epsilon"],
                           variant=Variant(pr["variant"]), data=data)
        if pr["simple_wave"]:
            data = simple_wave_data(data.f, pr["epsilon"], spec)
            spec = dataclasses.replace(spec, data=data)
        return spec

    def build_solver_config(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(dx=s["dx"], t_max=s["t_max"], cfl=s["cfl"],
                            gradient_threshold=s["gradient_threshold"],
                            threshold_factor=s["threshold_factor"],
                            dt_min=s["dt_min"], scheme=Scheme(s["scheme"]),
                            delta_hyp=s["delta_hyp"],
                            max_snapshots=s["max_snapshots"])

    def branch(self) -> Branch:
        return Branch(self.experiment["branch"])

    def source(self) -> Source:
        return Source(self.experiment["source"])


def validate_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    _check_unknown(raw, {"problem", "solver", "experiment", "output_dir"}, "config")
    problem_in = raw.get("problem", {})
    solver_in = raw.get("solver", {})
    experiment_in = raw.get("experiment", {})
    for name, section in (("problem", problem_in), ("solver", solver_in),
                          ("experiment", experiment_in)):
        if not isinstance(section, dict):
            _fail(name, "expected an object")

    _check_unknown(problem_in, {"p", "epsilon"} | set(_PROBLEM_DEFAULTS), "problem")
    p = _as_number(problem_in.get("p"), "problem.p", lo_strict=1.0)
    eps = _as_number(problem_in.get("epsilon"), "problem.epsilon", lo_strict=0.0)
    A = _as_number(problem_in.get("A", p), "problem.A", lo=0.0)
    sigma = _as_number(problem_in.get("sigma", _PROBLEM_DEFAULTS["sigma"]),
                       "problem.sigma")
    if sigma < 1.0:
        _fail("problem.sigma", f"sigma >= 1 is required for the supported data class, got {sigma}")
    sigma0 = _as_number(problem_in.get("sigma0", _PROBLEM_DEFAULTS["sigma0"]),
                        "problem.sigma0", lo_strict=0.0)
    if sigma0 >= sigma:
        _fail("problem.sigma0", f"must be smaller than sigma = {sigma}")
    variant = _as_choice(problem_in.get("variant", _PROBLEM_DEFAULTS["variant"]),
                         {"SpaceDerivative", "TimeDerivative"}, "problem.variant")
    problem = {
        "p": p, "A": A, "epsilon": eps, "variant": variant,
        "sigma": sigma, "sigma0": sigma0,
        "f": _validate_profile(problem_in.get("f", _PROFILE_DEFAULT_F), "problem.f"),
        "g": _validate_profile(problem_in.get("g", _PROFILE_DEFAULT_G), "problem.g"),
        "simple_wave": _as_bool(problem_in.get(
            "simple_wave", _PROBLEM_DEFAULTS["simple_wave"]), "problem.simple_wave"),
    }

    _check_unknown(solver_in, set(_SOLVER_DEFAULTS), "solver")
    solver = {
        "dx": _as_number(solver_in.get("dx", _SOLVER_DEFAULTS["dx"]),
                         "solver.dx", lo_strict=0.0),
        "t_max": _as_number(solver_in.get("t_max", _SOLVER_DEFAULTS["t_max"]),
                            "solver.t_max", lo_strict=0.0),
        "cfl": _as_number(solver_in.get("cfl", _SOLVER_DEFAULTS["cfl"]),
                          "solver.cfl", lo_strict=0.0),
        "gradient_threshold": _as_number(
            solver_in.get("gradient_threshold"), "solver.gradient_threshold",
            allow_none=True, lo_strict=0.0),
        "threshold_factor": _as_number(
            solver_in.get("threshold_factor", _SOLVER_DEFAULTS["threshold_factor"]),
            "solver.threshold_factor", lo_strict=0.0),
        "dt_min": _as_number(solver_in.get("dt_min", _SOLVER_DEFAULTS["dt_min"]),
                             "solver.dt_min", lo_strict=0.0),
        "scheme": _as_choice(solver_in.get("scheme", _SOLVER_DEFAULTS["scheme"]),
                             {"LaxFriedrichs", "LaxWendroff"}, "solver.scheme"),
        "delta_hyp": _as_number(solver_in.get("delta_hyp", _SOLVER_DEFAULTS["delta_hyp"]),
                                "solver.delta_hyp", lo_strict=0.0),
        "max_snapshots": _as_number(
            solver_in.get("max_snapshots", _SOLVER_DEFAULTS["max_snapshots"]),
            "solver.max_snapshots", integer=True, lo=2),
    }

    _check_unknown(experiment_in, set(_EXPERIMENT_DEFAULTS), "experiment")
    eps_list = experiment_in.get("epsilons", _EXPERIMENT_DEFAULTS["epsilons"])
    if not isinstance(eps_list, list):
        _fail("experiment.epsilons", "expected a list of numbers")
    eps_out = [_as_number(v, f"experiment.epsilons[{i}]", lo_strict=0.0)
               for i, v in enumerate(eps_list)]
    x_hi = experiment_in.get("x_hi", _EXPERIMENT_DEFAULTS["x_hi"])
    sweep_dir = experiment_in.get("sweep_dir", _EXPERIMENT_DEFAULTS["sweep_dir"])
    if sweep_dir is not None and not isinstance(sweep_dir, str):
        _fail("experiment.sweep_dir", "expected a path string")
    experiment = {
        "epsilons": eps_out,
        "source": _as_choice(experiment_in.get("source", _EXPERIMENT_DEFAULTS["source"]),
                             {"Solver", "Oracle"}, "experiment.source"),
        "levels": _as_number(experiment_in.get("levels", _EXPERIMENT_DEFAULTS["levels"]),
                             "experiment.levels", integer=True, lo=2),
        "branch": _as_choice(experiment_in.get("branch", _EXPERIMENT_DEFAULTS["branch"]),
                             {"FBranch", "GBranch"}, "experiment.branch"),
        "j_max": _as_number(experiment_in.get("j_max", _EXPERIMENT_DEFAULTS["j_max"]),
                            "experiment.j_max", integer=True, lo=1),
        "tolE": _as_number(experiment_in.get("tolE", _EXPERIMENT_DEFAULTS["tolE"]),
                           "experiment.tolE", lo_strict=0.0),
        "slack": _as_number(experiment_in.get("slack", _EXPERIMENT_DEFAULTS["slack"]),
                            "experiment.slack", lo=0.0),
        "slack_t2": _as_number(
            experiment_in.get("slack_t2", _EXPERIMENT_DEFAULTS["slack_t2"]),
            "experiment.slack_t2", lo=0.0),
        "slope_tol": _as_number(experiment_in.get("slope_tol"), "experiment.slope_tol",
                                allow_none=True, lo_strict=0.0),
        "guard": _as_number(experiment_in.get("guard", _EXPERIMENT_DEFAULTS["guard"]),
                            "experiment.guard", lo=0.0),
        "x_hi": _as_number(x_hi, "experiment.x_hi", allow_none=True, lo_strict=0.0),
        "sweep_dir": sweep_dir,
        "trace_format": _as_choice(
            experiment_in.get("trace_format", _EXPERIMENT_DEFAULTS["trace_format"]),
            {"csv", "npz"}, "experiment.trace_format"),
    }

    output_dir = raw.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        _fail("output_dir", "expected a path string")
    return RunConfig(problem=problem, solver=solver, experiment=experiment,
                     output_dir=output_dir)


def load_config(path: str | os.PathLike) -> RunConfig:
    """Reads and validates a JSON config file, materializing all defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return validate_config(raw)


# ---------------------------------------------------------------- persistence


def _atomic_write(path: Path, blob: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def emit_outputs(artifacts: dict[str, bytes], directory: str | os.PathLike) -> dict[str, str]:
    """Writes each artifact atomically; returns {name: sha256 digest}."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name in sorted(artifacts):
        blob = artifacts[name]
        target = directory / name
        target.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(target, blob)
        manifest[name] = hashlib.sha256(blob).hexdigest()
    return manifest


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _digest_run_dir(out: Path) -> dict[str, str]:
    files = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name not in ("manifest.json", INCOMPLETE_MARKER):
            files[p.relative_to(out).as_posix()] = hashlib.sha256(
                p.read_bytes()).hexdigest()
    return files


# ---------------------------------------------------------------------- plots


def _fig_to_svg(fig) -> bytes:
    import matplotlib.pyplot as plt

    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def _new_figure():
    import matplotlib
    matplotlib.use("Agg", force=False)
    matplotlib.rcParams["svg.hashsalt"] = _SVG_HASHSALT
    matplotlib.rcParams["svg.fonttype"] = "none"
    import matplotlib.pyplot as plt
    return plt


def _plot_scaling(entries, fit, cert_prefactor, p) -> bytes:
    plt = _new_figure()
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    eps = np.array([e.epsilon for e in entries if math.isfinite(e.T)])
    T = np.array([e.T for e in entries if math.isfinite(e.T)])
    ax.loglog(eps, T, "o", label="measured")
    if fit is not None and len(eps):
        grid = np.geomspace(eps.min(), eps.max(), 64)
        ax.loglog(grid, fit.prefactor * grid**fit.slope, "-",
                  label=f"fit slope {fit.slope:.3f}")
        if math.isfinite(cert_prefactor):
            ax.loglog(grid, cert_prefactor * grid ** (-(p - 1.0)), "--",
                      label="certified upper bound")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("lifespan estimate")
    ax.legend()
    fig.tight_layout()
    return _fig_to_svg(fig)


def _plot_h_bounds(series, cert, eps) -> bytes:
    plt = _new_figure()
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    t = series.times
    scale = cert.Cf_or_Cg * eps
    floor2 = np.full_like(t, scale)
    div = 2.0 if cert.branch is Branch.FBRANCH else 8.0
    axes[0].plot(t, series.H2, label="H''")
    axes[0].plot(t, floor2, "--", label="data floor")
    axes[0].set_xlabel("t")
    axes[0].legend()
    axes[1].plot(t, series.H, label="H")
    axes[1].plot(t, scale / div * t**2, "--", label="quadratic floor")
    axes[1].set_xlabel("t")
    axes[1].legend()
    fig.tight_layout()
    return _fig_to_svg(fig)


def _plot_uw(xs, U, W) -> bytes:
    plt = _new_figure()
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(xs, U, label="U (diagonal trace)")
    ax.plot(xs, W, "--", label="W (comparison solution)")
    ax.set_xlabel("x")
    ax.legend()
    fig.tight_layout()
    return _fig_to_svg(fig)


# -------------------------------------------------------------------- commands


def _trace_summary(trace) -> dict:
    blow = None
    if trace.blowup is not None:
        blow = {"detected_time": trace.blowup.detected_time,
                "criterion": trace.blowup.criterion.value}
    return {"final_time": trace.final_time, "dx": trace.dx,
            "n_snapshots": len(trace.snapshots), "blowup": blow}


def _cmd_solve(config: RunConfig, out: Path, quiet: bool):
    spec = config.build_spec()
    trace = solve(spec, config.build_solver_config())
    save_trace(trace, out / "trace", fmt=config.experiment["trace_format"])
    artifacts = {"solve_report.json": _json_bytes(_trace_summary(trace))}
    if not quiet:
        print(f"solve: reached t = {trace.final_time:.6g}"
              + (f", blow-up detected at t = {trace.blowup.detected_time:.6g}"
                 f" ({trace.blowup.criterion.value})" if trace.blowup else ""))
    return artifacts, 0


def _cmd_oracle(config: RunConfig, out: Path, quiet: bool):
    spec = config.build_spec()
    f = profile_from_dict(config.problem["f"])
    setup = SimpleWaveSetup(profile=f, epsilon=spec.epsilon, spec=spec)
    T = crossing_time_exact(setup)
    doc = {"T_oracle": T, "epsilon": spec.epsilon, "p": spec.p, "A": spec.A,
           "sigma": spec.sigma}
    if not quiet:
        print(f"oracle: first characteristic crossing at T = {T:.9g}")
    return {"oracle.json": _json_bytes(doc)}, 0


def _cmd_sweep(config: RunConfig, out: Path, quiet: bool):
    spec = config.build_spec()
    exp = config.experiment
    plan = SweepPlan(spec=spec, epsilons=tuple(exp["epsilons"]),
                     source=config.source(), config=config.build_solver_config(),
                     levels=exp["levels"], simple_wave=config.problem["simple_wave"])
    result = run_sweep(plan, store_path=out / "sweep_store.jsonl")
    artifacts = {"sweep.csv": result.to_csv().encode()}
    try:
        fit = fit_power_law(result)
        artifacts["fit.json"] = _json_bytes(fit.to_dict())
        if not quiet:
            print(f"sweep: {len(result.entries)} entries, fitted slope "
                  f"{fit.slope:.4f}, prefactor {fit.prefactor:.6g}")
    except InsufficientDataError as exc:
        artifacts["fit.json"] = _json_bytes({"error": str(exc)})
        if not quiet:
            print(f"sweep: {len(result.entries)} entries, no fit ({exc})")
    return artifacts, 0


def _functionals_csv(series) -> bytes:
    lines = ["t,H,H1,H2,Fser"]
    for k in range(len(series.times)):
        lines.append(f"{series.times[k]!r},{series.H[k]!r},{series.H1[k]!r},"
                     f"{series.H2[k]!r},{series.Fser[k]!r}")
    return ("\n".join(lines) + "\n").encode()


def _cmd_verify_t1(config: RunConfig, out: Path, quiet: bool):
    spec = config.build_spec()
    exp = config.experiment
    cert = build_certificate(spec, sigma0=config.problem["sigma0"],
                             branch=config.branch(), j_max=exp["j_max"],
                             tolE=exp["tolE"])
    trace = solve(spec, config.build_solver_config())
    u = antiderivative_u(trace, spec.variant)
    series = compute_functionals(u, spec.sigma, config.problem["sigma0"], spec.p)
    report = verify_bounds(series, cert, spec, slack=exp["slack"])
    artifacts = {
        "certificate.json": _json_bytes(cert.to_dict()),
        "bound_report.json": _json_bytes(report.to_dict()),
        "functionals.csv": _functionals_csv(series),
        "h_bounds.svg": _plot_h_bounds(series, cert, spec.epsilon),
    }
    if not quiet:
        verdictline = "all inequalities hold" if report.ok else (
            "FAILED: " + ", ".join(report.failed_names()))
        print(f"verify-t1: {verdictline}")
    return artifacts, (0 if report.ok else 1)


def _cmd_verify_t2(config: RunConfig, out: Path, quiet: bool):
    spec = config.build_spec()
    exp = config.experiment
    cert = build_certificate_t(spec, config.branch())
    trace = solve(spec, config.build_solver_config())
    u = antiderivative_u(trace, spec.variant)
    diag = extract_U(u, spec.sigma, x_hi=exp["x_hi"])
    detected = trace.blowup.detected_time if trace.blowup else None
    report = verify_comparison(diag, cert, spec.epsilon, slack=exp["slack_t2"],
                               detected_time=detected)
    artifacts = {
        "certificate.json": _json_bytes(cert.to_dict()),
        "comparison.json": _json_bytes(report.to_dict()),
    }
    if report.n_points:
        lines = ["x,U,W"]
        for x, Uv, Wv in zip(report.xs, report.U, report.W):
            lines.append(f"{x!r},{Uv!r},{Wv!r}")
        artifacts["u_vs_w.csv"] = ("\n".join(lines) + "\n").encode()
        artifacts["u_vs_w.svg"] = _plot_uw(report.xs, report.U, report.W)
    if not quiet:
        print(f"verify-t2: {report.verdict}"
              + (f" ({report.note})" if report.note else ""))
    return artifacts, (0 if report.ok else 1)


def _cmd_report(config: RunConfig, out: Path, quiet: bool):
    exp = config.experiment
    if not exp["sweep_dir"]:
        raise ConfigError("experiment.sweep_dir: required for the report command")
    store = Path(exp["sweep_dir"]) / "sweep_store.jsonl"
    if not store.exists():
        raise ConfigError(f"experiment.sweep_dir: no sweep store at {store}")
    entries = []
    with store.open() as fh:
        for line in fh:
            if line.strip():
                entries.append(SweepEntry.from_dict(json.loads(line)))
    if not entries:
        raise ConfigError(f"experiment.sweep_dir: sweep store {store} is empty")

    spec = config.build_spec()
    plan = SweepPlan(spec=spec, epsilons=tuple(e.epsilon for e in entries),
                     source=Source(entries[0].source),
                     config=config.build_solver_config(), levels=exp["levels"],
                     simple_wave=config.problem["simple_wave"])
    result = SweepResult(plan=plan, entries=tuple(entries))
    fit = fit_power_law(result)

    space_spec = (spec if spec.variant is Variant.SPACE_DERIVATIVE
                  else dataclasses.replace(spec, variant=Variant.SPACE_DERIVATIVE))
    cert1 = build_certificate(space_spec, sigma0=config.problem["sigma0"],
                              branch=config.branch(), j_max=exp["j_max"],
                              tolE=exp["tolE"])
    cert2 = (build_certificate_t(spec, config.branch())
             if spec.variant is Variant.TIME_DERIVATIVE else None)
    summary = compare_theory(fit, cert1, cert2, result,
                             slope_tol=exp["slope_tol"], guard=exp["guard"])
    artifacts = {
        "fit.json": _json_bytes(fit.to_dict()),
        "summary.json": _json_bytes(summary.to_dict()),
        "sweep.csv": result.to_csv().encode(),
        "scaling_plot.svg": _plot_scaling(entries, fit,
                                          summary.certificate_prefactor, spec.p),
    }
    if not quiet:
        state = "consistent" if summary.ok else "INCONSISTENT"
        print(f"report: slope {fit.slope:.4f} (expected {summary.expected_slope}),"
              f" bounds {state}")
    return artifacts, (0 if summary.ok else 1)


_COMMAND_FNS = {
    "solve": _cmd_solve,
    "oracle": _cmd_oracle,
    "sweep": _cmd_sweep,
    "verify-t1": _cmd_verify_t1,
    "verify-t2": _cmd_verify_t2,
    "report": _cmd_report,
}


# -------------------------------------------------------------------- dispatch


def dispatch(command: str, config: RunConfig, quiet: bool = False) -> int:
    """Runs one command into its run directory; returns the exit status."""
    if command not in _COMMAND_FNS:
        print(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}",
              file=sys.stderr)
        return 2
    if not config.output_dir:
        print("no output directory: set output_dir in the config, pass --out, "
              f"or set {ENV_OUT_ROOT}", file=sys.stderr)
        return 2
    out = Path(config.output_dir)
    if (out / "manifest.json").exists():
        print(f"refusing to modify completed run directory {out}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / INCOMPLETE_MARKER, b"this run has not completed\n")

    try:
        artifacts, code = _COMMAND_FNS[command](config, out, quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LifespanLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    emit_outputs(artifacts, out)
    manifest = {
        "version": __version__,
        "command": command,
        "config": config.resolved(),
        "files": _digest_run_dir(out),
    }
    _atomic_write(out / "manifest.json", _json_bytes(manifest))
    (out / INCOMPLETE_MARKER).unlink(missing_ok=True)
    if not quiet:
        print(f"wrote {len(manifest['files']) + 1} files to {out}")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lifespanlab",
        description="Numerical laboratory for finite-time blow-up in two "
                    "quasilinear wave equations on the line.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to a JSON config file")
    parser.add_argument("--out", default=None, help="output run directory "
                        "(overrides output_dir in the config)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress text")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = args.out or config.output_dir
    if out is None and os.environ.get(ENV_OUT_ROOT):
        out = str(Path(os.environ[ENV_OUT_ROOT]) / f"{args.command}-run")
    config = dataclasses.replace(config, output_dir=out)
    return dispatch(args.command, config, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
