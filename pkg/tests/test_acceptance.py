"""End-to-end acceptance gate.

Nine criteria, one test each.  Every test prints a single
"criterion N: PASS/FAIL - detail" line (also replayed in the terminal
summary) before asserting, so a red run still names the failing quantity.
Criteria that include a runtime ceiling measure it with a monotonic clock
and assert it alongside the numerics.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

import conftest
from lifespanlab.cli import main
from lifespanlab.model import (BumpProfile, InitialData, ProblemSpec, Variant,
                               ZeroProfile)
from lifespanlab.oracle import (SimpleWaveSetup, crossing_time_exact,
                                make_simple_wave_spec)
from lifespanlab.scaling import (CSV_HEADER, Source, SweepPlan, compare_theory,
                                 fit_power_law, run_sweep)
from lifespanlab.solver import (SolverConfig, antiderivative_u,
                                estimate_lifespan, solve)
from lifespanlab.theorem1 import (Branch, build_certificate,
                                  compute_functionals, iteration_sequences,
                                  verify_bounds)
from lifespanlab.theorem2 import (build_certificate_t, extract_U,
                                  integral_equation_residual,
                                  verify_comparison)

UNIT_BUMP = BumpProfile(center=0.0, halfwidth=1.0, amplitude=1.0)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def space_spec(f, g, *, epsilon, p=2.0, A=None, sigma=1.0,
               variant=Variant.SPACE_DERIVATIVE) -> ProblemSpec:
    return ProblemSpec(p=p, A=p if A is None else A, epsilon=epsilon,
                       variant=variant, data=InitialData(f=f, g=g, sigma=sigma))


# ------------------------------------------------- shared expensive artifacts


@pytest.fixture(scope="module")
def work(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def time_sweep(work):
    """Time-derivative sweep persisted to a store (criteria 7 and 9)."""
    g = BumpProfile(center=-0.8, halfwidth=0.17, amplitude=1.0)
    spec = space_spec(ZeroProfile(), g, epsilon=0.2,
                      variant=Variant.TIME_DERIVATIVE)
    sweep_dir = work / "time_sweep"
    sweep_dir.mkdir()
    plan = SweepPlan(spec=spec, epsilons=(0.2, 0.1, 0.06), source=Source.SOLVER,
                     config=SolverConfig(dx=1 / 128, t_max=30.0,
                                         threshold_factor=4.0),
                     levels=2)
    result = run_sweep(plan, store_path=sweep_dir / "sweep_store.jsonl")
    return {"spec": spec, "plan": plan, "result": result, "dir": sweep_dir}


@pytest.fixture(scope="module")
def report_runs(work, time_sweep):
    """Report command on the stored sweep: clean, then with a planted lifespan
    that exceeds the certified bounds."""
    config = {
        "problem": {"p": 2.0, "epsilon": 0.2, "variant": "TimeDerivative",
                    "sigma0": 0.25, "f": {"type": "zero"},
                    "g": {"type": "bump", "center": -0.8, "halfwidth": 0.17,
                          "amplitude": 1.0}},
        "experiment": {"branch": "GBranch", "slope_tol": 5.0,
                       "sweep_dir": str(time_sweep["dir"])},
    }
    clean_cfg = work / "report_clean.json"
    clean_cfg.write_text(json.dumps(config))
    clean_dir = work / "report_clean"
    clean_code = main(["report", "--config", str(clean_cfg),
                       "--out", str(clean_dir), "--quiet"])

    planted_store = work / "planted_sweep"
    planted_store.mkdir()
    rows = (time_sweep["dir"] / "sweep_store.jsonl").read_text()
    fake = {"epsilon": 0.01, "T": 1e12, "source": "Solver",
            "criterion": "GradientThreshold", "dx_finest": 1 / 256}
    (planted_store / "sweep_store.jsonl").write_text(
        rows + json.dumps(fake) + "\n")
    config["experiment"]["sweep_dir"] = str(planted_store)
    planted_cfg = work / "report_planted.json"
    planted_cfg.write_text(json.dumps(config))
    planted_dir = work / "report_planted"
    planted_code = main(["report", "--config", str(planted_cfg),
                         "--out", str(planted_dir), "--quiet"])
    return {"clean_code": clean_code, "clean_dir": clean_dir,
            "planted_code": planted_code, "planted_dir": planted_dir}


# ------------------------------------------------------------------ criteria


def test_criterion_1_oracle_scaling_law():
    eps = tuple(10.0 ** e for e in (-2.0, -2.5, -3.0, -3.5, -4.0))
    t0 = time.monotonic()
    slopes = {}
    for p in (2.0, 3.0):
        spec = space_spec(UNIT_BUMP, ZeroProfile(), epsilon=eps[0], p=p)
        fit = fit_power_law(run_sweep(SweepPlan(spec=spec, epsilons=eps,
                                                source=Source.ORACLE)))
        slopes[p] = fit.slope
    elapsed = time.monotonic() - t0
    ok = all(abs(slopes[p] + (p - 1.0)) <= 0.05 for p in slopes)
    ok = ok and elapsed < 1.0
    record(1, ok, f"oracle slopes p=2: {slopes[2.0]:.4f} (want -1), "
                  f"p=3: {slopes[3.0]:.4f} (want -2), {elapsed:.2f}s")


def test_criterion_2_solver_matches_oracle():
    t0 = time.monotonic()
    spec = make_simple_wave_spec(UNIT_BUMP, 0.05, 2.0, 2.0, 1.0)
    T_oracle = crossing_time_exact(
        SimpleWaveSetup(profile=UNIT_BUMP, epsilon=0.05, spec=spec))
    est = estimate_lifespan(
        spec, SolverConfig(dx=1 / 256, t_max=1.3 * T_oracle,
                           threshold_factor=50.0), levels=3)
    elapsed = time.monotonic() - t0
    rel = abs(est.T_est - T_oracle) / T_oracle
    times = [t for _, t in est.refinement_levels]
    diffs = [abs(b - a) for a, b in zip(times, times[1:])]
    ok = (rel <= 0.05 and len(diffs) == 2 and diffs[1] < diffs[0]
          and elapsed < 120.0)
    record(2, ok, f"T_est={est.T_est:.4f} vs oracle {T_oracle:.4f} "
                  f"({100 * rel:.2f}%), level diffs {diffs[0]:.4f} -> "
                  f"{diffs[1]:.4f}, {elapsed:.1f}s")


def test_criterion_3_solver_scaling():
    t0 = time.monotonic()
    spec0 = make_simple_wave_spec(UNIT_BUMP, 0.12, 2.0, 2.0, 1.0)
    plan = SweepPlan(spec=spec0, epsilons=(0.12, 0.0379, 0.012, 0.0038),
                     source=Source.SOLVER,
                     config=SolverConfig(dx=1 / 256, t_max=50.0,
                                         threshold_factor=15.0),
                     levels=2, simple_wave=True)
    result = run_sweep(plan)
    fit = fit_power_law(result)
    elapsed = time.monotonic() - t0
    ok = (len(result.finite()) == 4 and abs(fit.slope + 1.0) <= 0.1
          and elapsed < 600.0)
    record(3, ok, f"solver sweep slope {fit.slope:.4f} (want -1 +/- 0.1), "
                  f"{len(result.finite())}/4 detections, {elapsed:.0f}s")


def test_criterion_4_inequality_suite():
    spec = space_spec(BumpProfile(center=-0.875, halfwidth=0.125,
                                  amplitude=1.0),
                      ZeroProfile(), epsilon=0.005)
    cert = build_certificate(spec, sigma0=0.5, branch=Branch.FBRANCH)
    est = estimate_lifespan(
        spec, SolverConfig(dx=1 / 512, t_max=1.6, threshold_factor=4.0),
        levels=2)
    needed = ("H_initial_zero", "H2_data_floor", "H_quadratic_floor",
              "iteration_frame")
    margins = []
    ok = math.isfinite(est.T_est)
    for dx, slack in ((1 / 64, 0.02), (1 / 128, 0.01)):
        trace = solve(spec, SolverConfig(dx=dx, t_max=0.9 * est.T_est,
                                         gradient_threshold=1e6,
                                         max_snapshots=200))
        series = compute_functionals(antiderivative_u(trace, spec.variant),
                                     sigma=1.0, sigma0=0.5, p=2.0)
        report = verify_bounds(series, cert, spec, slack=slack)
        by_name = {c.name: c for c in report.checks}
        ok = ok and all(by_name[n].tested and by_name[n].passed
                        for n in needed) and report.ok
        margins.append(min(by_name[n].worst_margin for n in needed))

    g_spec = space_spec(ZeroProfile(),
                        BumpProfile(center=-0.8, halfwidth=0.17, amplitude=1.0),
                        epsilon=0.005)
    g_cert = build_certificate(g_spec, sigma0=0.25, branch=Branch.GBRANCH)
    g_trace = solve(g_spec, SolverConfig(dx=1 / 128, t_max=6.0,
                                         gradient_threshold=1e6,
                                         max_snapshots=200))
    g_series = compute_functionals(antiderivative_u(g_trace, g_spec.variant),
                                   sigma=1.0, sigma0=0.25, p=2.0)
    g_report = verify_bounds(g_series, g_cert, g_spec, slack=0.02)
    g_quad = {c.name: c for c in g_report.checks}["H_quadratic_floor"]
    ok = ok and g_quad.tested and g_quad.passed and g_report.ok
    record(4, ok, f"FBranch floors hold at slack 2% (dx=1/64) and 1% "
                  f"(dx=1/128), worst margins {margins[0]:.3f}/"
                  f"{margins[1]:.3f}; GBranch quadratic floor margin "
                  f"{g_quad.worst_margin:.3f}")


def test_criterion_5_iteration_exactness():
    ok = True
    for p in (2.0, 3.0, 2.5):
        a, b, agree = iteration_sequences(p, 20)
        cert = build_certificate(
            space_spec(BumpProfile(center=-0.875, halfwidth=0.125,
                                   amplitude=1.0),
                       ZeroProfile(), epsilon=0.005, p=p),
            sigma0=0.5, branch=Branch.FBRANCH, j_max=20)
        ok = ok and agree and len(a) == 20 and cert.sequences_check
        ok = ok and cert.per_step_ok and cert.closed_dominated
    cert2 = build_certificate(
        space_spec(BumpProfile(center=-0.875, halfwidth=0.125, amplitude=1.0),
                   ZeroProfile(), epsilon=0.005),
        sigma0=0.5, branch=Branch.FBRANCH)
    e_dev = abs(cert2.E - 10.0 * math.log(2.0))
    ok = (ok and cert2.D == 256.0 and e_dev <= 1e-10
          and e_dev <= cert2.E_tail_bound)
    record(5, ok, f"sequences exact to 1e-12 for p in {{2, 3, 2.5}}, j <= 20; "
                  f"D={cert2.D:.0f}, |E - 10 log 2|={e_dev:.2e} "
                  f"(tail bound {cert2.E_tail_bound:.2e})")


def test_criterion_6_comparison_suite():
    spec_t = space_spec(UNIT_BUMP, ZeroProfile(), epsilon=0.05,
                        variant=Variant.TIME_DERIVATIVE)
    cert = build_certificate_t(spec_t, Branch.FBRANCH)
    ok = cert.Fconst == pytest.approx(8.0 / 3.0, rel=1e-15, abs=0.0)

    residual = integral_equation_residual(cert, 0.05)
    ok = ok and residual < 1e-10

    trace = solve(spec_t, SolverConfig(dx=1 / 128, t_max=7.0,
                                       gradient_threshold=1e9,
                                       max_snapshots=250))
    diag = extract_U(antiderivative_u(trace, spec_t.variant), sigma=1.0,
                     x_hi=5.0)
    report = verify_comparison(diag, cert, 0.05, slack=0.05)
    ok = (ok and report.applicable and report.tested
          and report.verdict == "passed" and report.n_points > 0)

    lin_spec = space_spec(UNIT_BUMP, ZeroProfile(), epsilon=0.05, A=0.0,
                          variant=Variant.TIME_DERIVATIVE)
    lin_cert = build_certificate_t(lin_spec, Branch.FBRANCH)
    target = lin_cert.Ctilde * lin_spec.epsilon
    errs = []
    for dx in (1 / 64, 1 / 128):
        cfg = SolverConfig(dx=dx, t_max=4.0, gradient_threshold=1e9,
                           max_snapshots=round(4.0 / dx) + 1)
        lin_u = antiderivative_u(solve(lin_spec, cfg), lin_spec.variant)
        lin_diag = extract_U(lin_u, sigma=1.0, x_hi=2.5)
        err = float(np.abs(lin_diag.U - target).max())
        errs.append(err)
        ok = ok and err <= 5.0 * target * dx * dx
    ok = ok and errs[0] / errs[1] >= 2.0
    record(6, ok, f"F=8/3 exact, W residual {residual:.1e}, U >= W margin "
                  f"{report.worst_margin:+.3f} on [{report.x_lo:.1f}, "
                  f"{report.x_hi:.1f}], linear error {errs[0]:.1e} -> "
                  f"{errs[1]:.1e} under dx halving")


def test_criterion_7_bound_consistency(time_sweep, report_runs):
    f15 = BumpProfile(center=-1.25, halfwidth=0.24, amplitude=1.0)
    spec_s = space_spec(f15, ZeroProfile(), epsilon=0.05, sigma=1.5)
    plan_s = SweepPlan(spec=spec_s, epsilons=(0.05, 0.02, 0.01, 0.005),
                       source=Source.SOLVER,
                       config=SolverConfig(dx=1 / 256, t_max=16.0,
                                           threshold_factor=4.0),
                       levels=2)
    result_s = run_sweep(plan_s)
    cert_s = build_certificate(spec_s, sigma0=0.5, branch=Branch.FBRANCH)
    summary_s = compare_theory(fit_power_law(result_s), cert_s, None, result_s)
    ok = (summary_s.hard_ok and not summary_s.violations
          and summary_s.band_ordered)

    clean = json.loads(
        (report_runs["clean_dir"] / "summary.json").read_text())
    ok = (ok and report_runs["clean_code"] == 0 and clean["hard_ok"]
          and clean["t2_checked"] and not clean["violations"])

    planted = json.loads(
        (report_runs["planted_dir"] / "summary.json").read_text())
    ok = (ok and report_runs["planted_code"] == 1
          and not planted["hard_ok"] and len(planted["violations"]) >= 1)
    record(7, ok, "all swept lifespans sit below the certified bounds "
                  f"(space sweep margin-free, time sweep t2-checked); "
                  f"planted T=1e12 rejected with exit 1 "
                  f"({len(planted['violations'])} violations named)")


def test_criterion_8_scale_invariance():
    eps_grid = (1e-2, 3.7e-3, 1e-3, 2e-4)

    def rel_spread(values):
        return (max(values) - min(values)) / abs(values[0])

    spreads = []
    for p in (2.0, 2.5):
        cert1 = build_certificate(
            space_spec(BumpProfile(center=-0.875, halfwidth=0.125,
                                   amplitude=1.0),
                       ZeroProfile(), epsilon=0.005, p=p),
            sigma0=0.5, branch=Branch.FBRANCH)
        spreads.append(rel_spread(
            [cert1.T_star_at(e) * e ** (p - 1.0) for e in eps_grid]))
        cert2 = build_certificate_t(
            space_spec(UNIT_BUMP, ZeroProfile(), epsilon=0.05, p=p,
                       variant=Variant.TIME_DERIVATIVE),
            Branch.FBRANCH)
        spreads.append(rel_spread(
            [cert2.T_bound_at(e) * e ** (p - 1.0) for e in eps_grid]))
        spreads.append(rel_spread(
            [(cert2.x_blow_at(e) - cert2.sigma) * e ** (p - 1.0)
             for e in eps_grid]))
    worst = max(spreads)
    record(8, worst <= 1e-12,
           f"T*, T_bound, and x_blow offset times eps^(p-1) constant over "
           f"{len(eps_grid)} epsilons at p in {{2, 2.5}}; worst relative "
           f"spread {worst:.2e}")


def test_criterion_9_determinism_and_formats(work, report_runs):
    solve_cfg = work / "solve.json"
    solve_cfg.write_text(json.dumps({
        "problem": {"p": 2.0, "epsilon": 0.01},
        "solver": {"dx": 1 / 64, "t_max": 0.4, "max_snapshots": 30},
    }))
    codes = []
    for name in ("det_a", "det_b"):
        codes.append(main(["solve", "--config", str(solve_cfg),
                           "--out", str(work / name), "--quiet"]))

    def tree(root: Path) -> dict:
        import hashlib
        return {p.relative_to(root).as_posix():
                hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(root.rglob("*")) if p.is_file()}

    identical = tree(work / "det_a") == tree(work / "det_b")

    t1_cfg = work / "t1.json"
    t1_cfg.write_text(json.dumps({
        "problem": {"p": 2.0, "epsilon": 0.005},
        "solver": {"dx": 1 / 64, "t_max": 1.5, "max_snapshots": 120},
    }))
    t1_code = main(["verify-t1", "--config", str(t1_cfg),
                    "--out", str(work / "t1"), "--quiet"])
    t1_header = (work / "t1" / "functionals.csv").read_text().splitlines()[0]

    t2_cfg = work / "t2.json"
    t2_cfg.write_text(json.dumps({
        "problem": {"p": 2.0, "epsilon": 0.05, "variant": "TimeDerivative",
                    "f": {"type": "bump", "center": 0.0, "halfwidth": 1.0,
                          "amplitude": 1.0}},
        "solver": {"dx": 1 / 128, "t_max": 7.0, "max_snapshots": 250},
        "experiment": {"x_hi": 5.0},
    }))
    t2_code = main(["verify-t2", "--config", str(t2_cfg),
                    "--out", str(work / "t2"), "--quiet"])
    t2_header = (work / "t2" / "u_vs_w.csv").read_text().splitlines()[0]

    sweep_header = (report_runs["clean_dir"] / "sweep.csv"
                    ).read_text().splitlines()[0]

    bad_cfg = work / "bad.json"
    bad_cfg.write_text(json.dumps({"problem": {"p": 2.0, "epslion": 0.01}}))
    bad_code = main(["solve", "--config", str(bad_cfg),
                     "--out", str(work / "bad_run"), "--quiet"])
    sealed_code = main(["solve", "--config", str(solve_cfg),
                        "--out", str(work / "det_a"), "--quiet"])

    ok = (identical and codes == [0, 0] and t1_code == 0 and t2_code == 0
          and t1_header == "t,H,H1,H2,Fser" and t2_header == "x,U,W"
          and sweep_header == CSV_HEADER
          and CSV_HEADER == "epsilon,T,source,criterion,dx_finest"
          and report_runs["planted_code"] == 1
          and bad_code == 2 and sealed_code == 2
          and (work / "det_a" / "manifest.json").exists())
    record(9, ok, "reruns byte-identical; CSV headers exact; exit codes "
                  "0 (success), 1 (failed verification), 2 (config error, "
                  "sealed run dir) observed")
