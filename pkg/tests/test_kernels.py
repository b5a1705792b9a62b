import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from deforce.kernels import (
    ALPHA_BETA,
    CASIMIR_PREFACTOR,
    PATCH_NORMALIZATION,
    ZETA3,
    KernelError,
    PatchCorrelation,
    correlation_from_csv,
    correlation_from_table,
    exponential_correlation,
    gaussian_correlation,
    kernel_casimir_em,
    kernel_casimir_scalar,
    kernel_electrostatic,
    kernel_highT_dirichlet,
    kernel_patch,
    kernel_power_law,
    patch_v,
    patch_vz,
    patch_z,
)
from deforce.quadrature import QuadratureSpec, integrate_improper


class TestCasimirScalar:
    def test_dirichlet_unit_gap(self):
        k = kernel_casimir_scalar("dirichlet")
        assert k.v(1.0) == pytest.approx(-math.pi ** 2 / 1440.0, rel=1e-15)
        assert k.v(1.0) == pytest.approx(-6.85389e-3, rel=1e-5)
        assert k.z(1.0) == pytest.approx((2.0 / 3.0) * k.v(1.0), rel=1e-15)

    def test_inverse_cube_scaling(self):
        k = kernel_casimir_scalar("dirichlet")
        assert k.v(2.0) == pytest.approx(k.v(1.0) / 8.0, rel=1e-15)
        assert k.v(2.0) == pytest.approx(-8.56737e-4, rel=1e-5)

    def test_neumann_z_flips_sign(self):
        # beta_N = (2/3)(1 - 30/pi^2) < 0, so Z_N(1) = 1/72 - pi^2/2160 > 0
        k = kernel_casimir_scalar("neumann")
        exact = 1.0 / 72.0 - math.pi ** 2 / 2160.0
        assert k.z(1.0) == pytest.approx(exact, rel=1e-14)
        assert k.z(1.0) == pytest.approx(9.319627592088259e-3, rel=1e-12)
        assert k.z(1.0) > 0.0 > k.v(1.0)

    def test_alpha_beta_table(self):
        assert ALPHA_BETA["dirichlet"] == (1.0, pytest.approx(2.0 / 3.0))
        assert ALPHA_BETA["neumann"][1] == pytest.approx(
            (2.0 / 3.0) * (1.0 - 30.0 / math.pi ** 2), rel=1e-15
        )

    def test_unknown_bc(self):
        with pytest.raises(KernelError):
            kernel_casimir_scalar("mixed")

    def test_decay_at_infinity(self):
        k = kernel_casimir_scalar("dirichlet")
        assert abs(k.v(1e8)) < 1e-26


class TestCasimirEM:
    def test_alpha_sum(self):
        k = kernel_casimir_em()
        assert k.v(1.0) == pytest.approx(2.0 * CASIMIR_PREFACTOR, rel=1e-15)
        assert k.v(1.0) == pytest.approx(-1.37078e-2, rel=1e-5)

    def test_pointwise_additivity_exact(self):
        kd = kernel_casimir_scalar("dirichlet")
        kn = kernel_casimir_scalar("neumann")
        kem = kernel_casimir_em()
        rng = np.random.default_rng(0)
        for psi in rng.uniform(0.1, 100.0, 200):
            assert kem.v(psi) == kd.v(psi) + kn.v(psi)
            assert kem.z(psi) == kd.z(psi) + kn.z(psi)

    def test_vanishes_at_infinity(self):
        k = kernel_casimir_em()
        assert abs(k.v(1e10)) < 1e-30 and abs(k.z(1e10)) < 1e-30


class TestElectrostatic:
    def test_unit_values(self):
        k = kernel_electrostatic(1.0, 1.0)
        assert k.v(1.0) == pytest.approx(0.5, rel=1e-15)
        assert k.z(1.0) == pytest.approx(1.0 / 6.0, rel=1e-15)
        assert k.v(2.0) == pytest.approx(0.25, rel=1e-15)

    def test_z_over_v_is_third_for_all_gaps(self):
        k = kernel_electrostatic(2.5, 0.7)
        rng = np.random.default_rng(1)
        for psi in rng.uniform(0.01, 1000.0, 100):
            assert k.z(psi) / k.v(psi) == pytest.approx(1.0 / 3.0, rel=1e-15)


class TestHighTDirichlet:
    def test_d3_value(self):
        # -zeta(3)/(16 pi) = -2.3914162e-2 exactly (to the digits shown)
        k = kernel_highT_dirichlet(beta=1.0, n=2)
        assert k.v(1.0) == pytest.approx(-ZETA3 / (16.0 * math.pi), rel=1e-15)
        assert k.v(1.0) == pytest.approx(-2.3914162e-2, rel=1e-7)

    def test_d3_z_over_v(self):
        k = kernel_highT_dirichlet(beta=1.0, n=2)
        expected = (1.0 + 6.0 * ZETA3) / (12.0 * ZETA3)
        assert k.z(3.7) / k.v(3.7) == pytest.approx(expected, rel=1e-14)

    def test_d4_dimensional_reduction_values(self):
        k = kernel_highT_dirichlet(beta=1.0, n=3)
        assert k.v(1.0) == pytest.approx(-math.pi ** 2 / 1440.0, rel=1e-15)
        assert k.z(1.0) == pytest.approx((2.0 / 3.0) * k.v(1.0), rel=1e-15)

    def test_beta_scales(self):
        assert kernel_highT_dirichlet(2.0, 2).v(1.0) == pytest.approx(
            0.5 * kernel_highT_dirichlet(1.0, 2).v(1.0)
        )

    def test_unsupported_dimension(self):
        with pytest.raises(KernelError):
            kernel_highT_dirichlet(1.0, n=4)
        with pytest.raises(KernelError):
            kernel_highT_dirichlet(-1.0, n=2)


class TestPowerLaw:
    def test_matches_casimir_parameters(self):
        k = kernel_power_law(CASIMIR_PREFACTOR, (2.0 / 3.0) * CASIMIR_PREFACTOR, 3.0)
        ref = kernel_casimir_scalar("dirichlet")
        for psi in (0.5, 1.0, 7.0):
            assert k.v(psi) == pytest.approx(ref.v(psi), rel=1e-15)
            assert k.z(psi) == pytest.approx(ref.z(psi), rel=1e-15)

    def test_matches_electrostatic(self):
        k = kernel_power_law(0.5, 1.0 / 6.0, 1.0)
        ref = kernel_electrostatic(1.0, 1.0)
        assert k.v(3.0) == pytest.approx(ref.v(3.0), rel=1e-15)

    def test_halving_rule(self):
        k = kernel_power_law(1.0, 0.5, 2.5)
        assert k.v(2.0) / k.v(1.0) == pytest.approx(2.0 ** -2.5, rel=1e-15)

    def test_fourth_order_coefficient(self):
        k = kernel_power_law(1.0, 1.0, 3.0, c0=2.0)
        assert k.c is not None
        assert k.c(2.0) == pytest.approx(0.25, rel=1e-15)

    def test_rejects_nonpositive_exponent(self):
        with pytest.raises(KernelError):
            kernel_power_law(1.0, 1.0, 0.0)


class TestPatchCorrelations:
    def test_gaussian_normalization_closed_form(self):
        # int u * 4 pi e^{-u^2} du = 2 pi
        corr = gaussian_correlation()
        value, _ = integrate_improper(lambda u: u * corr.g(u))
        assert value == pytest.approx(2.0 * math.pi, rel=1e-10)
        assert corr.norm == pytest.approx(PATCH_NORMALIZATION)

    def test_exponential_normalization(self):
        corr = exponential_correlation()
        value, _ = integrate_improper(lambda u: u * corr.g(u))
        assert value == pytest.approx(2.0 * math.pi, rel=1e-10)

    def test_table_interpolation_and_normalized(self):
        u = np.linspace(0.0, 12.0, 200)
        g = np.exp(-u)  # unnormalized: int u g = 1 (approximately)
        corr = correlation_from_table(u, g)
        assert corr.norm == pytest.approx(1.0, rel=1e-3)
        fixed = corr.normalized()
        assert fixed.g(0.3) == pytest.approx(2.0 * math.pi * math.exp(-0.3), rel=1e-3)

    def test_csv_loader(self, tmp_path):
        u = np.linspace(0.0, 12.0, 120)
        lines = ["u,g"] + [f"{x},{2.0 * math.pi * math.exp(-x)}" for x in u]
        path = tmp_path / "corr.csv"
        path.write_text("\n".join(lines) + "\n")
        corr = correlation_from_csv(path)
        assert corr.norm == pytest.approx(2.0 * math.pi, rel=1e-3)

    def test_table_rejects_bad_input(self):
        with pytest.raises(KernelError):
            correlation_from_table([0, 1], [1, 1])
        with pytest.raises(KernelError):
            correlation_from_table([0, 1, 1, 2], [1, 1, 1, 1])
        with pytest.raises(KernelError):
            correlation_from_table([0, 1, 2, 3], [1, -1, 1, 1])


class TestPatchFormFactors:
    def test_zero_correlation(self):
        corr = PatchCorrelation(g=lambda u: 0.0, g0=0.0, norm=PATCH_NORMALIZATION)
        v, ve, z, ze = patch_vz(0.5, corr)
        assert v == 0.0 and z == 0.0

    def test_small_xi_laws(self):
        corr = gaussian_correlation()
        for xi in (1e-2, 1e-3):
            v, _, z, _ = patch_vz(xi, corr)
            v_law = -corr.g0 * ZETA3 * xi * xi / (2.0 * math.pi)
            z_law = -corr.g0 * (1.0 + 6.0 * ZETA3) * xi * xi / (24.0 * math.pi)
            assert abs(v / v_law - 1.0) < 1e-3
            assert abs(z / z_law - 1.0) < 1e-3

    def test_large_xi_constant_potential_limit(self):
        assert -2.01 <= patch_v(1e3, gaussian_correlation()) <= -1.99

    def test_bracket_integral(self):
        from deforce.kernels import _z_weight

        value, _ = integrate_improper(_z_weight, QuadratureSpec(rel_tol=1e-12))
        exact = -(2.0 / 3.0) * (1.0 + 6.0 * ZETA3)
        assert value == pytest.approx(exact, rel=1e-6)
        assert exact == pytest.approx(-5.4748942793, rel=1e-10)

    def test_self_consistency_on_halved_tolerance(self):
        corr = gaussian_correlation()
        v1, ve, z1, ze = patch_vz(0.3, corr, QuadratureSpec(rel_tol=1e-9))
        v2, _, z2, _ = patch_vz(0.3, corr, QuadratureSpec(rel_tol=5e-10))
        assert abs(v1 - v2) <= ve
        assert abs(z1 - z2) <= ze

    def test_xi_must_be_positive(self):
        with pytest.raises(KernelError):
            patch_v(0.0, gaussian_correlation())

    def test_wrapper_functions(self):
        corr = gaussian_correlation()
        v, _, z, _ = patch_vz(0.7, corr)
        assert patch_v(0.7, corr) == pytest.approx(v, rel=1e-12)
        assert patch_z(0.7, corr) == pytest.approx(z, rel=1e-12)


class TestPatchKernel:
    def test_small_gap_matches_casimir_like_form(self):
        # xi = ell/psi small: V -> -eps0 g0 zeta(3) ell^2 V_rms^2 / (2 pi psi^3)
        corr = gaussian_correlation()
        k = kernel_patch(corr, v_rms=2.0, ell=1e-3, epsilon0=1.5)
        psi = 1.0
        expected = -1.5 * corr.g0 * ZETA3 * (1e-3) ** 2 * 4.0 / (2.0 * math.pi * psi ** 3)
        assert k.v(psi) == pytest.approx(expected, rel=1e-3)

    def test_rejects_unnormalized_with_diagnostic(self):
        bad = PatchCorrelation(g=lambda u: math.exp(-u), g0=1.0, norm=1.0, name="raw")
        with pytest.raises(KernelError) as excinfo:
            kernel_patch(bad, 1.0, 1.0)
        message = str(excinfo.value)
        assert "not normalized" in message and "1" in message

    def test_memoization_thread_safety(self):
        k = kernel_patch(gaussian_correlation(), 1.0, 0.5)
        with ThreadPoolExecutor(max_workers=8) as pool:
            values = list(pool.map(lambda _: k.v(2.0), range(32)))
        assert len(set(values)) == 1

    def test_e_parallel_equals_v(self):
        k = kernel_patch(gaussian_correlation(), 1.0, 0.5)
        assert k.e_parallel(1.3) == k.v(1.3)
