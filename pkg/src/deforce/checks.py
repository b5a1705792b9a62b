"""Self-contained invariant suites behind the ``check`` command.

Each suite returns ``{"suite", "passed", "details"}``; the command exits
non-zero when any suite fails, naming it.  The suites mirror the package's
structural guarantees (scaling laws, electromagnetic additivity, SEI/dilute
equivalence, patch form-factor limits, quadrature exactness, and the
degenerate limit of the Jacobian-corrected force).
"""

from __future__ import annotations

import math

import numpy as np

from . import analysis, engine, kernels, profiles, quadrature

__all__ = ["SUITES", "run_checks"]


def _suite_scaling():
    # finite planforms: F0 of the bump over the whole plane diverges, and the
    # fourth-order gradient term of the paraboloid is planform-log-sensitive
    kernel = kernels.kernel_power_law(1.0, 2.0 / 3.0, 3.0, c0=1.0)
    targets = [
        profiles.make_paraboloid(1.0, 10.0, rho_max=30.0),
        profiles.make_gaussian_bump(1.0, 0.5, 3.0, rho_max=9.0),
    ]
    reports = [analysis.scaling_check(kernel, p, (0.5, 2.0, 4.0)) for p in targets]
    passed = all(r["passed"] for r in reports)
    worst = max(r["max_violation"] for r in reports)
    return passed, {
        "max_violation": worst,
        "failed_terms": [r["worst_term"] for r in reports if not r["passed"]],
    }


def _suite_em(em_kernels=None):
    targets = [
        profiles.make_sphere(1e-3, 1.0),
        profiles.make_constant(2.0, rho_max=3.0),
    ]
    report = analysis.em_additivity_check(targets, kernels=em_kernels)
    return report["passed"], {
        "pointwise_exact": report["pointwise_exact"],
        "worst_rel_gap": max((e["rel_gap"] for e in report["entries"]), default=0.0),
    }


def _random_two_sheet_bodies(rng, count):
    bodies = []
    for _ in range(count):
        a = rng.uniform(0.5, 2.0)
        if rng.random() < 0.5:
            sigma = rng.uniform(2.0, 8.0)
            rho = rng.uniform(1.0, 4.0)
            near = profiles.make_paraboloid(a, sigma, rho_max=rho)
            far = profiles.make_paraboloid(a * rng.uniform(1.5, 3.0), sigma, rho_max=rho)
        else:
            width = rng.uniform(1.0, 4.0)
            amp = rng.uniform(0.0, 0.8) * a
            rho = rng.uniform(1.0, 4.0)
            near = profiles.make_gaussian_bump(a, amp, width, rho_max=rho)
            far = profiles.make_gaussian_bump(
                a * rng.uniform(1.6, 3.0), amp, width, rho_max=rho
            )
        bodies.append((near, far))
    return bodies


def _suite_sei(count=6, seed=11):
    rng = np.random.default_rng(seed)
    worst = 0.0
    passed = True
    for near, far in _random_two_sheet_bodies(rng, count):
        lam = rng.uniform(0.2, 5.0)

        def plate(h, _lam=lam):
            return _lam / (32.0 * math.pi ** 2 * h)

        sei, sei_err = engine.eval_sei(plate, near, far)
        oracle, oracle_err = engine.dilute_oracle(lam, near, far)
        gap = abs(sei - oracle)
        budget = sei_err + oracle_err + 1e-13 * abs(oracle)
        passed = passed and gap <= budget
        if oracle != 0.0:
            worst = max(worst, gap / abs(oracle))
    return passed, {"bodies": count, "worst_rel_gap": worst}


def _suite_patch():
    corr = kernels.gaussian_correlation()
    details = {}
    ok = True

    for xi in (1e-2, 1e-3):
        v, _, z, _ = kernels.patch_vz(xi, corr)
        v_law = -corr.g0 * kernels.ZETA3 * xi * xi / (2.0 * math.pi)
        z_law = -corr.g0 * (1.0 + 6.0 * kernels.ZETA3) * xi * xi / (24.0 * math.pi)
        dev = max(abs(v / v_law - 1.0), abs(z / z_law - 1.0))
        details[f"small_xi_dev_{xi:g}"] = dev
        ok = ok and dev < 1e-3

    v_large = kernels.patch_v(1e3, corr)
    details["v_large"] = v_large
    ok = ok and -2.01 <= v_large <= -1.99

    bracket, _ = quadrature.integrate_improper(lambda x: kernels._z_weight(x))
    bracket_exact = -(2.0 / 3.0) * (1.0 + 6.0 * kernels.ZETA3)
    details["bracket_rel_dev"] = abs(bracket / bracket_exact - 1.0)
    ok = ok and details["bracket_rel_dev"] < 1e-6

    spec = quadrature.QuadratureSpec(rel_tol=1e-9)
    tight = quadrature.QuadratureSpec(rel_tol=5e-10)
    v1, ve, z1, ze = kernels.patch_vz(0.3, corr, spec)
    v2, _, z2, _ = kernels.patch_vz(0.3, corr, tight)
    details["self_consistency"] = {"dv": abs(v1 - v2), "v_err": ve,
                                   "dz": abs(z1 - z2), "z_err": ze}
    ok = ok and abs(v1 - v2) <= ve and abs(z1 - z2) <= ze
    return ok, details


def _suite_quadrature():
    details = {}
    ok = True

    # polynomial exactness (degree well under the base rule's)
    value, _ = quadrature.integrate_nd(
        lambda x: 3 * x ** 3 - 2 * x ** 2 + x - 5, ("interval", 0.0, 2.0)
    )
    exact = 3 * 4.0 - 2 * 8.0 / 3.0 + 2.0 - 10.0
    details["poly_rel_dev"] = abs(value / exact - 1.0)
    ok = ok and details["poly_rel_dev"] < 1e-14

    # radial reduction against the 2-D fallback on an axisymmetric integrand
    f_rad, err_rad = quadrature.integrate_radial(lambda r: math.exp(-r * r), 2.0, 2)
    f_nd, err_nd = quadrature.integrate_nd(
        lambda x, y: math.exp(-(x * x + y * y)), ("disk", 2.0)
    )
    details["radial_nd_gap"] = abs(f_rad - f_nd) / abs(f_rad)
    ok = ok and abs(f_rad - f_nd) <= max(1e-8 * abs(f_rad), err_rad + err_nd)

    # monotone convergence on a closed form
    errors = []
    for tol in (1e-6, 1e-8, 1e-10, 1e-12):
        spec = quadrature.QuadratureSpec(rel_tol=tol)
        val, _ = quadrature.integrate_improper(lambda x: math.exp(-x), spec)
        errors.append(abs(val - 1.0))
    details["improper_errors"] = errors
    slack = 4 * np.finfo(float).eps
    ok = ok and all(b <= a + slack for a, b in zip(errors, errors[1:]))
    return ok, details


def _suite_blocki():
    spec = quadrature.QuadratureSpec(rel_tol=1e-12)
    j0, j1, d, v0, p = 2.0 * math.pi * 100.0, -2.0 * math.pi, 1.0, -math.pi ** 2 / 1440.0, 3.0
    jac = engine.JacobianProfile.linear(j0, j1, d)
    force = engine.eval_blocki_force(lambda h: v0 / h ** p, jac, d, spec)
    exact = j0 * v0 / d ** p - j1 * v0 * d ** (1.0 - p) / (p - 1.0)
    dev = abs(force / exact - 1.0)
    return dev < 1e-10, {"rel_dev": dev}


SUITES = {
    "scaling": _suite_scaling,
    "em": _suite_em,
    "sei": _suite_sei,
    "patch": _suite_patch,
    "quadrature": _suite_quadrature,
    "blocki": _suite_blocki,
}


def run_checks(suites=None, em_kernels=None):
    """Run the named suites (all by default); returns (all_passed, results)."""
    names = list(SUITES) if not suites else list(suites)
    results = []
    all_passed = True
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown check suite {name!r}; known: {sorted(SUITES)}")
        fn = SUITES[name]
        passed, details = fn(em_kernels) if name == "em" else fn()
        results.append({"suite": name, "passed": passed, "details": details})
        all_passed = all_passed and passed
    return all_passed, results
