"""Tests for sweeps, power-law fitting, and bound comparison."""
import math

import numpy as np
import pytest

from lifespanlab.errors import InsufficientDataError, InvalidProblemError
from lifespanlab.model import (BumpProfile, InitialData, ProblemSpec, Variant,
                               ZeroProfile)
from lifespanlab.scaling import (CSV_HEADER, ComparisonSummary, FitResult,
                                 Source, SweepEntry, SweepPlan, SweepResult,
                                 compare_theory, fit_power_law, run_sweep)
from lifespanlab.solver import SolverConfig
from lifespanlab.theorem1 import Branch, build_certificate
from lifespanlab.theorem2 import build_certificate_t


def space_spec(p=2.0, A=2.0, eps=0.01, variant=Variant.SPACE_DERIVATIVE):
    f = BumpProfile(center=0.0, halfwidth=1.0, amplitude=1.0)
    data = InitialData(f=f, g=ZeroProfile(), sigma=1.0)
    return ProblemSpec(p=p, A=A, epsilon=eps, variant=variant, data=data)


def oracle_plan(p=2.0, epsilons=(1e-2, 10**-2.5, 1e-3, 10**-3.5, 1e-4)):
    return SweepPlan(spec=space_spec(p=p, A=p), epsilons=tuple(epsilons),
                     source=Source.ORACLE)


def synthetic_result(pairs, plan=None):
    plan = plan or oracle_plan(epsilons=tuple(e for e, _ in pairs))
    entries = tuple(SweepEntry(epsilon=e, T=T, source=plan.source.value,
                               criterion="CharacteristicCrossing",
                               dx_finest=math.nan) for e, T in pairs)
    return SweepResult(plan=plan, entries=entries)


# ----------------------------------------------------------------------- plan


class TestSweepPlan:
    def test_rejects_increasing_epsilons(self):
        with pytest.raises(InvalidProblemError):
            SweepPlan(spec=space_spec(), epsilons=(1e-3, 1e-2),
                      source=Source.ORACLE)

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(InvalidProblemError):
            SweepPlan(spec=space_spec(), epsilons=(1e-2, 0.0),
                      source=Source.ORACLE)

    def test_rejects_epsilon_above_ceiling(self):
        with pytest.raises(InvalidProblemError):
            SweepPlan(spec=space_spec(), epsilons=(0.5, 0.1),
                      source=Source.ORACLE, eps0=0.2)

    def test_solver_source_requires_config(self):
        with pytest.raises(InvalidProblemError):
            SweepPlan(spec=space_spec(), epsilons=(1e-2,), source=Source.SOLVER)

    def test_oracle_requires_space_variant(self):
        with pytest.raises(InvalidProblemError):
            SweepPlan(spec=space_spec(variant=Variant.TIME_DERIVATIVE),
                      epsilons=(1e-2,), source=Source.ORACLE)

    def test_empty_sweep_is_empty(self):
        plan = SweepPlan(spec=space_spec(), epsilons=(), source=Source.ORACLE)
        assert run_sweep(plan).entries == ()


# ---------------------------------------------------------------------- sweep


class TestRunSweep:
    def test_oracle_sweep_increasing_T(self):
        result = run_sweep(oracle_plan())
        Ts = [e.T for e in result.entries]
        assert all(math.isfinite(T) and T > 0 for T in Ts)
        assert all(b > a for a, b in zip(Ts, Ts[1:]))  # smaller eps lives longer
        assert all(e.criterion == "CharacteristicCrossing" for e in result.entries)
        assert all(math.isnan(e.dx_finest) for e in result.entries)

    def test_determinism(self):
        plan = oracle_plan()
        r1, r2 = run_sweep(plan), run_sweep(plan)
        assert r1.entries == r2.entries

    def test_per_entry_failure_recorded(self):
        plan = SweepPlan(spec=space_spec(p=1.5, A=1.5),
                         epsilons=(1e-2, 1e-3, 1e-4), source=Source.ORACLE)
        result = run_sweep(plan)
        assert len(result.entries) == 3
        assert all(math.isnan(e.T) for e in result.entries)
        assert all(e.error for e in result.entries)
        with pytest.raises(InsufficientDataError):
            fit_power_law(result)

    @staticmethod
    def _norm(entry):
        d = entry.to_dict()
        for key in ("T", "dx_finest"):
            if isinstance(d[key], float) and math.isnan(d[key]):
                d[key] = "nan"
        return d

    def test_store_resume_and_extend(self, tmp_path):
        store = tmp_path / "sweep.jsonl"
        short = oracle_plan(epsilons=(1e-2, 1e-3))
        r_short = run_sweep(short, store_path=store)
        assert len(store.read_text().splitlines()) == 2

        full = oracle_plan(epsilons=(1e-2, 1e-3, 1e-4))
        r_full = run_sweep(full, store_path=store)
        assert len(store.read_text().splitlines()) == 3
        assert [self._norm(e) for e in r_full.entries[:2]] == \
            [self._norm(e) for e in r_short.entries]

        fresh = run_sweep(full)
        assert [self._norm(e) for e in fresh.entries] == \
            [self._norm(e) for e in r_full.entries]

    def test_resume_does_not_duplicate(self, tmp_path):
        store = tmp_path / "sweep.jsonl"
        plan = oracle_plan(epsilons=(1e-2, 1e-3))
        run_sweep(plan, store_path=store)
        run_sweep(plan, store_path=store)
        assert len(store.read_text().splitlines()) == 2

    def test_solver_simple_wave_sweep(self):
        config = SolverConfig(dx=1.0 / 128.0, t_max=6.0, threshold_factor=20.0)
        plan = SweepPlan(spec=space_spec(eps=0.08), epsilons=(0.08, 0.05),
                         source=Source.SOLVER, config=config, levels=2,
                         simple_wave=True)
        result = run_sweep(plan)
        assert all(math.isfinite(e.T) for e in result.entries)
        assert result.entries[1].T > result.entries[0].T
        assert all(e.criterion == "GradientThreshold" for e in result.entries)
        assert result.entries[0].dx_finest == pytest.approx(1.0 / 256.0)

    def test_csv_format(self):
        result = run_sweep(oracle_plan(epsilons=(1e-2, 1e-3, 1e-4)))
        text = result.to_csv()
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[0]) == 1e-2
        assert first[2] == "Oracle"
        assert first[4] == ""  # no grid for oracle entries


# ------------------------------------------------------------------------ fit


class TestFitPowerLaw:
    def test_exact_synthetic_fit(self):
        pairs = [(e, 5.0 / e) for e in (1e-1, 1e-2, 1e-3, 1e-4)]
        fit = fit_power_law(synthetic_result(pairs))
        assert fit.slope == pytest.approx(-1.0, abs=1e-12)
        assert fit.prefactor == pytest.approx(5.0, rel=1e-12)
        assert 0.0 <= fit.residual < 1e-12
        assert fit.n_points == 4

    def test_insufficient_data(self):
        pairs = [(1e-1, 10.0), (1e-2, 100.0)]
        with pytest.raises(InsufficientDataError):
            fit_power_law(synthetic_result(pairs))

    def test_nan_entries_dropped(self):
        plan = oracle_plan(epsilons=(1e-1, 1e-2, 1e-3, 1e-4))
        entries = tuple(
            SweepEntry(epsilon=e, T=(math.nan if i == 0 else 5.0 / e),
                       source="Oracle", criterion="", dx_finest=math.nan)
            for i, e in enumerate(plan.epsilons))
        fit = fit_power_law(SweepResult(plan=plan, entries=entries))
        assert fit.n_points == 3

    def test_oracle_slope_p2(self):
        fit = fit_power_law(run_sweep(oracle_plan(p=2.0)))
        assert abs(fit.slope - (-1.0)) <= 0.05

    def test_oracle_slope_p3(self):
        fit = fit_power_law(run_sweep(oracle_plan(
            p=3.0, epsilons=(1e-2, 10**-2.5, 1e-3, 10**-3.5, 1e-4))))
        assert abs(fit.slope - (-2.0)) <= 0.05

    def test_residual_shrinks_down_window(self):
        def window(lo):
            eps = tuple(lo * 10**k for k in (2.0, 1.5, 1.0, 0.5, 0.0))
            pairs = [(e, (1.0 + e) / e) for e in eps]
            return fit_power_law(synthetic_result(pairs)).residual

        hi, lo = window(1e-3), window(1e-5)
        assert hi > 0
        assert lo < hi


# ----------------------------------------------------------------- compare


def canonical_cert(p=2.0, eps=0.005):
    f = BumpProfile(center=-0.875, halfwidth=0.125, amplitude=1.0)
    data = InitialData(f=f, g=ZeroProfile(), sigma=1.0)
    spec = ProblemSpec(p=p, A=p, epsilon=eps, variant=Variant.SPACE_DERIVATIVE,
                       data=data)
    return build_certificate(spec, sigma0=0.5, branch=Branch.FBRANCH)


class TestCompareTheory:
    def test_oracle_sweep_consistent(self):
        sweep = run_sweep(oracle_plan())
        fit = fit_power_law(sweep)
        summary = compare_theory(fit, canonical_cert(), None, sweep)
        assert summary.slope_tol == 0.05
        assert summary.slope_ok and summary.hard_ok and summary.ok
        assert summary.band_ordered
        assert not summary.t2_checked
        assert summary.violations == ()

    def test_violation_flagged(self):
        pairs = [(1e-1, 10.0), (1e-2, 100.0), (1e-3, 1e12)]
        sweep = synthetic_result(pairs)
        fit = fit_power_law(synthetic_result([(e, 10.0 * 0.1 / e) for e, _ in pairs]))
        summary = compare_theory(fit, canonical_cert(), None, sweep)
        assert not summary.hard_ok and not summary.ok
        assert any("exceeds T*" in v for v in summary.violations)

    def test_t2_bound_checked_for_time_variant(self):
        f = BumpProfile(center=0.0, halfwidth=1.0, amplitude=1.0)
        data = InitialData(f=f, g=ZeroProfile(), sigma=1.0)
        tspec = ProblemSpec(p=2.0, A=2.0, epsilon=0.01,
                            variant=Variant.TIME_DERIVATIVE, data=data)
        cert2 = build_certificate_t(tspec, Branch.FBRANCH)
        plan = SweepPlan(spec=tspec, epsilons=(1e-1, 1e-2, 1e-3),
                         source=Source.SOLVER,
                         config=SolverConfig(dx=0.01, t_max=1.0))
        # T_bound(eps) = 35000/eps here; plant one entry far above it
        entries = tuple(SweepEntry(epsilon=e, T=T, source="Solver",
                                   criterion="GradientThreshold", dx_finest=0.01)
                        for e, T in [(1e-1, 20.0), (1e-2, 200.0), (1e-3, 1e10)])
        sweep = SweepResult(plan=plan, entries=entries)
        fit = fit_power_law(sweep)
        summary = compare_theory(fit, canonical_cert(), cert2, sweep)
        assert summary.t2_checked
        assert any("T_bound" in v for v in summary.violations)

    def test_slope_tolerance_override(self):
        sweep = run_sweep(oracle_plan())
        fit = fit_power_law(sweep)
        summary = compare_theory(fit, canonical_cert(), None, sweep,
                                 slope_tol=1e-6)
        assert not summary.slope_ok

    def test_summary_serializes(self):
        sweep = run_sweep(oracle_plan(epsilons=(1e-2, 1e-3, 1e-4)))
        fit = fit_power_law(sweep)
        doc = compare_theory(fit, canonical_cert(), None, sweep).to_dict()
        assert set(doc) >= {"expected_slope", "fitted_slope", "hard_ok",
                            "violations", "certificate_prefactor", "ok"}
