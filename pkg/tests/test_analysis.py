import math

import numpy as np
import pytest

from deforce import analysis
from deforce.analysis import (
    AnalysisError,
    analytic_lead,
    em_additivity_check,
    gamma_fit,
    gamma_fit_log,
    scaling_check,
    thread_count,
)
from deforce.kernels import (
    ZETA3,
    kernel_casimir_scalar,
    kernel_electrostatic,
    kernel_highT_dirichlet,
    kernel_power_law,
)
from deforce.profiles import make_constant, make_paraboloid, make_sphere


class TestAnalyticLead:
    def test_sphere_inverse_cube(self):
        # U_lead = pi v0 R / a^2 for p=3, n=2
        k = kernel_power_law(2.0, 1.0, 3.0)
        assert analytic_lead(k, 2, 10.0, 0.1) == pytest.approx(
            math.pi * 2.0 * 10.0 / 0.01, rel=1e-12
        )

    def test_cylinder_inverse_cube(self):
        # U_lead = (3 pi/8) sqrt(2R) v0 a^{-5/2} per unit length
        k = kernel_power_law(1.0, 1.0, 3.0)
        a, R = 1e-3, 2.0
        expected = 3.0 * math.pi / 8.0 * math.sqrt(2.0 * R) * a ** -2.5
        assert analytic_lead(k, 1, R, a) == pytest.approx(expected, rel=1e-12)

    def test_three_dim_base(self):
        # U_lead = (pi^2 sqrt(2)/2) v0 R^{3/2} a^{-3/2} for p=3, n=3
        k = kernel_power_law(1.0, 1.0, 3.0, base_dim=3)
        a, R = 1e-3, 1.0
        expected = math.pi ** 2 * math.sqrt(2.0) / 2.0 * a ** -1.5
        assert analytic_lead(k, 3, R, a) == pytest.approx(expected, rel=1e-12)

    def test_inverse_square_gap(self):
        # p=2, n=2: U_lead = 2 pi v0 R / a
        k = kernel_power_law(-1.0, 1.0, 2.0)
        assert analytic_lead(k, 2, 5.0, 0.01) == pytest.approx(
            -2.0 * math.pi * 5.0 / 0.01, rel=1e-12
        )

    def test_planform_sensitive_kernel_rejected(self):
        with pytest.raises(AnalysisError):
            analytic_lead(kernel_electrostatic(1.0), 2, 1.0, 0.01)

    def test_kernel_without_power_law_rejected(self):
        from deforce.kernels import gaussian_correlation, kernel_patch

        k = kernel_patch(gaussian_correlation(), 1.0, 1.0)
        with pytest.raises(AnalysisError):
            analytic_lead(k, 2, 1.0, 0.01)


class TestGammaFit:
    def test_dirichlet_sphere_within_one_percent(self):
        report = gamma_fit(
            kernel_casimir_scalar("dirichlet"), "sphere", 1.0, rho_m_alt=None
        )
        assert report.gamma == pytest.approx(1.0 / 3.0, rel=0.01)
        assert abs(report.gamma_drop_drift) <= report.uncertainty

    def test_reference_deviation(self):
        report = gamma_fit(
            kernel_casimir_scalar("dirichlet"), "sphere", 1.0,
            rho_m_alt=None, reference=1.0 / 3.0,
        )
        assert abs(report.deviation) < 0.01

    def test_model_selection_guard(self):
        # no spurious log slope on a zero-temperature 1/psi^3 kernel
        report = gamma_fit(
            kernel_casimir_scalar("dirichlet"), "sphere", 1.0,
            ladder=(1e-4, 2e-4, 4e-4, 8e-4), model="log", rho_m_alt=None,
        )
        assert abs(report.gamma_log) < 0.01 * abs(report.gamma)

    def test_rho_m_systematics_reported(self):
        report = gamma_fit(kernel_casimir_scalar("dirichlet"), "sphere", 1.0)
        assert report.rho_m_alt == pytest.approx(0.7)
        assert report.gamma_alt is not None
        assert abs(report.gamma_rho_drift) < 0.02

    def test_ladder_validation(self):
        k = kernel_casimir_scalar("dirichlet")
        with pytest.raises(AnalysisError):
            gamma_fit(k, "sphere", 1.0, ladder=(1e-3,))
        with pytest.raises(AnalysisError):
            gamma_fit(k, "sphere", 1.0, ladder=(0.05, 0.01, 0.005, 0.001))
        with pytest.raises(AnalysisError):
            gamma_fit(k, "sphere", 1.0, ladder=(1e-3, 1e-3, 2e-3, 4e-3))
        with pytest.raises(AnalysisError):
            gamma_fit(k, "sphere", 1.0, model="cubic")
        with pytest.raises(AnalysisError):
            gamma_fit(k, "pyramid", 1.0)

    def test_fit_residual_gate(self):
        with pytest.raises(AnalysisError):
            gamma_fit(
                kernel_casimir_scalar("dirichlet"), "sphere", 1.0,
                rho_m_alt=None, fit_tol=1e-9,
            )

    def test_report_serializes(self):
        report = gamma_fit(
            kernel_casimir_scalar("dirichlet"), "sphere", 1.0, rho_m_alt=None
        )
        d = report.to_dict()
        assert d["model_key"] == "linear"
        assert len(d["ladder"]) == len(d["ratios"]) == 4
        assert d["ladder"] == sorted(d["ladder"], reverse=True)

    def test_leading_prefactor_extraction(self):
        report = gamma_fit(
            kernel_casimir_scalar("dirichlet"), "sphere", 1.0, rho_m_alt=None
        )
        assert report.leading_measured / report.leading_ref == pytest.approx(1.0, abs=1e-4)


class TestGammaFitLog:
    def test_forces_log_model(self):
        with pytest.raises(AnalysisError):
            gamma_fit_log(
                kernel_highT_dirichlet(1.0, 2), "sphere", 1.0, model="linear"
            )

    def test_high_t_sphere_log_slope_smoke(self):
        # full-tolerance version runs in the acceptance suite; a coarse ladder
        # still resolves gamma_log to a few percent
        report = gamma_fit_log(
            kernel_highT_dirichlet(1.0, 2), "sphere", 1.0,
            ladder=(1e-4, 2e-4, 4e-4, 8e-4), rho_m_alt=None,
        )
        assert report.gamma_log == pytest.approx(-1.0 / (6.0 * ZETA3), rel=0.05)


class TestScalingCheck:
    def test_passes_on_paraboloid(self):
        kernel = kernel_power_law(1.0, 1.0, 3.0, c0=1.0)
        report = scaling_check(kernel, make_paraboloid(1.0, 10.0, rho_max=30.0))
        assert report["passed"]
        assert report["max_violation"] < 1e-6
        orders = {e["order"] for e in report["entries"]}
        assert orders == {0, 2, 4}

    def test_detects_broken_scaling(self, monkeypatch):
        kernel = kernel_power_law(1.0, 1.0, 3.0)
        profile = make_paraboloid(1.0, 10.0, rho_max=30.0)
        monkeypatch.setattr(analysis.prof, "scale_lateral", lambda p, lam: p)
        report = scaling_check(kernel, profile)
        assert not report["passed"]
        assert report["worst_term"].startswith("F0")


class TestEmAdditivity:
    def test_builtin_kernels_pass(self):
        report = em_additivity_check(
            [make_sphere(1e-3, 1.0), make_constant(2.0, rho_max=3.0)]
        )
        assert report["passed"] and report["pointwise_exact"]
        assert all(e["rel_gap"] < 1e-9 for e in report["entries"])

    def test_broken_injection_detected(self):
        kd = kernel_casimir_scalar("dirichlet")
        kn = kernel_casimir_scalar("neumann")
        broken = kernel_power_law(2.1 * kd.power_law[0], kd.power_law[1], 3.0)
        report = em_additivity_check([make_constant(1.0, rho_max=1.0)],
                                     kernels=(kd, kn, broken))
        assert not report["passed"]


def test_thread_count_env(monkeypatch):
    monkeypatch.delenv("DEFORCE_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("DEFORCE_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("DEFORCE_THREADS", "zero")
    assert thread_count() == 1
    monkeypatch.setenv("DEFORCE_THREADS", "-3")
    assert thread_count() == 1


def test_parallel_ladder_matches_serial(monkeypatch):
    k = kernel_casimir_scalar("dirichlet")
    monkeypatch.delenv("DEFORCE_THREADS", raising=False)
    serial = gamma_fit(k, "sphere", 1.0, rho_m_alt=None)
    monkeypatch.setenv("DEFORCE_THREADS", "4")
    parallel = gamma_fit(k, "sphere", 1.0, rho_m_alt=None)
    assert parallel.gamma == serial.gamma
    assert parallel.ratios == serial.ratios
