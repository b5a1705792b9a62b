import math

import numpy as np
import pytest

from deforce.profiles import (
    ProfileError,
    eval_profile,
    load_grid_csv,
    make_constant,
    make_cylinder,
    make_gaussian_bump,
    make_grid,
    make_paraboloid,
    make_sphere,
    scale_lateral,
)


class TestSphere:
    def test_apex(self):
        p = make_sphere(1.0, 10.0)
        psi, grad, _ = eval_profile(p, (0.0, 0.0))
        assert psi == pytest.approx(1.0, abs=0)
        assert np.allclose(grad, 0.0)

    def test_substitution_at_rho6(self):
        # psi = 1 + 10 (1 - 0.8) = 3, |grad| = 6/8
        p = make_sphere(1.0, 10.0, rho_max=8.0)
        psi, grad, hess = eval_profile(p, (6.0, 0.0))
        assert psi == pytest.approx(3.0, rel=1e-15)
        assert np.linalg.norm(grad) == pytest.approx(0.75, rel=1e-15)
        # radial second derivative R^2/(R^2-rho^2)^{3/2} = 0.125 + 0.0703125
        assert hess[0, 0] == pytest.approx(0.1953125, rel=1e-13)
        assert hess[1, 1] == pytest.approx(0.75 / 6.0, rel=1e-13)

    def test_rejects_rim_and_nonpositive(self):
        with pytest.raises(ProfileError):
            make_sphere(1.0, 10.0, rho_max=10.0)
        with pytest.raises(ProfileError):
            make_sphere(1.0, 10.0, rho_max=12.0)
        with pytest.raises(ProfileError):
            make_sphere(-1.0, 10.0)
        with pytest.raises(ProfileError):
            make_sphere(1.0, 0.0)

    def test_default_planform_fraction(self):
        p = make_sphere(1.0, 10.0)
        assert p.planform.rho_max == pytest.approx(9.0)

    def test_base_dim_3(self):
        p = make_sphere(1.0, 10.0, base_dim=3)
        psi, grad, hess = eval_profile(p, (0.0, 6.0, 0.0))
        assert psi == pytest.approx(3.0)
        assert grad.shape == (3,) and hess.shape == (3, 3)


class TestParaboloid:
    def test_values(self):
        p = make_paraboloid(1.0, 10.0)
        assert p.value((0.0, 0.0)) == pytest.approx(1.0)
        assert p.value((10.0, 0.0)) == pytest.approx(2.0)

    def test_gradient(self):
        # 2 a rho / sigma^2 = 2*2*5/25
        p = make_paraboloid(2.0, 5.0)
        _, grad, _ = eval_profile(p, (3.0, 4.0))
        assert np.linalg.norm(grad) == pytest.approx(0.8, rel=1e-15)

    def test_second_derivative(self):
        p = make_paraboloid(1.0, 10.0)
        psi, grad, hess = eval_profile(p, (10.0, 0.0))
        assert psi == pytest.approx(2.0)
        assert grad[0] == pytest.approx(0.2)
        assert hess[0, 0] == pytest.approx(0.02, rel=1e-13)

    def test_rejects_nonpositive(self):
        with pytest.raises(ProfileError):
            make_paraboloid(0.0, 10.0)
        with pytest.raises(ProfileError):
            make_paraboloid(1.0, -1.0)


class TestCylinder:
    def test_values_and_dim(self):
        p = make_cylinder(1.0, 10.0, x_max=8.0)
        assert p.base_dim == 1
        assert p.value((0.0,)) == pytest.approx(1.0)
        assert p.value((6.0,)) == pytest.approx(3.0)

    def test_rim_rejected(self):
        with pytest.raises(ProfileError):
            make_cylinder(1.0, 10.0, x_max=10.0)


class TestScaling:
    def test_identity(self):
        p = make_paraboloid(1.0, 10.0)
        q = scale_lateral(p, 1.0)
        for x in [(0.0, 0.0), (2.0, 1.0), (5.0, -3.0)]:
            assert q.value(x) == pytest.approx(p.value(x), rel=0, abs=0)

    def test_scaled_paraboloid_is_narrower_paraboloid(self):
        # psi(2x) of paraboloid(a, sigma) equals paraboloid(a, sigma/2)
        p = scale_lateral(make_paraboloid(1.0, 10.0), 2.0)
        q = make_paraboloid(1.0, 5.0)
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = rng.uniform(-3, 3, 2)
            assert p.value(x) == pytest.approx(q.value(x), rel=1e-15)
            assert np.allclose(p.gradient(x), q.gradient(x), rtol=1e-13)

    def test_chain_rule_and_contract(self):
        profiles = [
            make_sphere(1.0, 10.0, rho_max=8.0),
            make_paraboloid(1.0, 10.0, rho_max=20.0),
            make_gaussian_bump(1.0, 0.5, 3.0, rho_max=10.0),
        ]
        rng = np.random.default_rng(7)
        for p in profiles:
            for lam in (0.5, 2.0, 5.0):
                q = scale_lateral(p, lam)
                for _ in range(10):
                    x = rng.uniform(-1.0, 1.0, p.base_dim)
                    assert q.value(x) == p.value(lam * x)
                    assert np.allclose(q.gradient(x), lam * p.gradient(lam * x), rtol=0, atol=0)
                    assert np.allclose(q.hessian(x), lam ** 2 * p.hessian(lam * x), rtol=0, atol=0)

    def test_planform_shrinks(self):
        p = make_sphere(1.0, 10.0, rho_max=8.0)
        q = scale_lateral(p, 2.0)
        assert q.planform.rho_max == pytest.approx(4.0)

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ProfileError):
            scale_lateral(make_paraboloid(1.0, 1.0), 0.0)


class TestEvalProfile:
    def test_constant_triple(self):
        p = make_constant(3.0, rho_max=2.0)
        psi, grad, hess = eval_profile(p, (0.5, 0.5))
        assert psi == 3.0
        assert np.all(grad == 0.0) and np.all(hess == 0.0)

    def test_outside_planform(self):
        p = make_sphere(1.0, 10.0, rho_max=5.0)
        with pytest.raises(ProfileError):
            eval_profile(p, (6.0, 0.0))

    def test_wrong_dimension(self):
        p = make_sphere(1.0, 10.0)
        with pytest.raises(ProfileError):
            eval_profile(p, (1.0, 2.0, 3.0))


def _central_gradient(p, x, h):
    n = len(x)
    g = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (p.value(x + e) - p.value(x - e)) / (2 * h)
    return g


def _central_hessian(p, x, h):
    n = len(x)
    H = np.zeros((n, n))
    f0 = p.value(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        H[i, i] = (p.value(x + ei) - 2 * f0 + p.value(x - ei)) / h ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            H[i, j] = H[j, i] = (
                p.value(x + ei + ej) - p.value(x + ei - ej)
                - p.value(x - ei + ej) + p.value(x - ei - ej)
            ) / (4 * h * h)
    return H


def test_derivative_consistency_random_points():
    """Analytic derivatives against central differences at 100 interior points.

    Gradients use the 1e-5*a step; the Hessian check runs at 1e-3*a, where
    the float64 roundoff floor eps/h^2 sits far below the 1e-6 relative
    target (at 1e-5*a the second-difference noise alone is ~1e-5).
    """
    profiles = [
        make_sphere(1.0, 10.0, rho_max=8.0),
        make_paraboloid(1.0, 10.0),
        make_gaussian_bump(1.0, 0.5, 3.0),
        scale_lateral(make_paraboloid(1.0, 10.0), 2.0),
        make_cylinder(1.0, 10.0, x_max=8.0),
    ]
    rng = np.random.default_rng(42)
    count = 0
    for p in profiles:
        a = p.min_gap
        for _ in range(20):
            x = rng.uniform(-2.0, 2.0, p.base_dim)
            g = p.gradient(x)
            g_fd = _central_gradient(p, x, 1e-5 * a)
            scale = max(np.linalg.norm(g), 1e-3)
            assert np.linalg.norm(g - g_fd) / scale < 1e-6
            H = p.hessian(x)
            H_fd = _central_hessian(p, x, 1e-3 * a)
            hscale = max(np.linalg.norm(H), 1e-3)
            assert np.linalg.norm(H - H_fd) / hscale < 1e-6
            count += 1
    assert count == 100


def test_sphere_paraboloid_osculation():
    # |psi_sph - (a + rho^2/2R)| <= rho^4/(8 R^3) (1 + eps) for rho <= 0.3 R;
    # eps covers the next Taylor term rho^2/(2R^2) <= 4.5% at the window edge
    a, R = 1.0, 10.0
    p = make_sphere(a, R, rho_max=4.0)
    for rho in np.linspace(0.01, 0.3 * R, 50):
        gap = abs(p.radial_value(rho) - (a + rho * rho / (2 * R)))
        assert gap <= rho ** 4 / (8 * R ** 3) * (1.0 + 0.05)


class TestGaussianBump:
    def test_gap_closure_rejected(self):
        with pytest.raises(ProfileError):
            make_gaussian_bump(1.0, -1.0, 2.0)

    def test_dent_allowed(self):
        p = make_gaussian_bump(1.0, -0.5, 2.0)
        assert p.value((0.0, 0.0)) == pytest.approx(0.5)
        assert p.min_gap == pytest.approx(0.5)


class TestGrid:
    def _paraboloid_grid(self, n=41, half=2.0):
        axis = np.linspace(-half, half, n)
        X, Y = np.meshgrid(axis, axis, indexing="ij")
        psi = 1.0 * (1.0 + (X ** 2 + Y ** 2) / 25.0)
        return make_grid(axis, axis, psi)

    def test_matches_analytic_interior(self):
        g = self._paraboloid_grid()
        p = make_paraboloid(1.0, 5.0)
        x = np.array([0.45, -0.85])
        assert g.value(x) == pytest.approx(p.value(x), rel=2e-3)
        assert np.allclose(g.gradient(x), p.gradient(x), atol=2e-2)
        assert np.allclose(g.hessian(x), p.hessian(x), atol=2e-2)

    def test_nonuniform_rejected(self):
        axis = np.array([0.0, 1.0, 2.5])
        with pytest.raises(ProfileError):
            make_grid(axis, axis, np.ones((3, 3)))

    def test_nonpositive_rejected(self):
        axis = np.linspace(0, 1, 3)
        psi = np.ones((3, 3))
        psi[1, 1] = -0.1
        with pytest.raises(ProfileError):
            make_grid(axis, axis, psi)

    def test_tiny_grid_has_no_hessian(self):
        axis = np.array([0.0, 1.0])
        g = make_grid(axis, axis, np.ones((2, 2)))
        assert not g.has_hessian
        with pytest.raises(ProfileError):
            g.hessian((0.5, 0.5))

    def test_csv_round_trip(self, tmp_path):
        axis = np.linspace(0.0, 1.0, 5)
        lines = ["# spacing: 0.25 0.25", "x1,x2,psi"]
        for x in axis:
            for y in axis:
                lines.append(f"{x},{y},{1.0 + x * x + 0.5 * y}")
        path = tmp_path / "grid.csv"
        path.write_text("\n".join(lines) + "\n")
        g = load_grid_csv(path)
        # (0.5, 0.5) is a lattice node: psi = 1 + 0.25 + 0.25 exactly
        assert g.value((0.5, 0.5)) == pytest.approx(1.5, rel=1e-12)
        assert g.planform.bounds == ((0.0, 1.0), (0.0, 1.0))

    def test_csv_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,psi\n0,0,1\n")
        with pytest.raises(ProfileError):
            load_grid_csv(path)

    def test_csv_incomplete_lattice(self, tmp_path):
        path = tmp_path / "bad2.csv"
        path.write_text("# spacing: 1 1\nx1,x2,psi\n0,0,1\n0,1,1\n1,0,1\n")
        with pytest.raises(ProfileError):
            load_grid_csv(path)


def test_constant_needs_finite_planform():
    with pytest.raises(ProfileError):
        make_constant(1.0, rho_max=math.inf)
