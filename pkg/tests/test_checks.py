import pytest

from deforce.checks import SUITES, run_checks
from deforce.kernels import kernel_casimir_scalar, kernel_power_law


def test_all_suites_pass():
    ok, results = run_checks()
    failed = [r["suite"] for r in results if not r["passed"]]
    assert ok, f"failed suites: {failed}"
    assert [r["suite"] for r in results] == list(SUITES)


def test_subset_selection():
    ok, results = run_checks(["blocki", "quadrature"])
    assert ok
    assert [r["suite"] for r in results] == ["blocki", "quadrature"]


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_checks(["gravity"])


def test_em_suite_detects_injected_breakage():
    kd = kernel_casimir_scalar("dirichlet")
    kn = kernel_casimir_scalar("neumann")
    broken = kernel_power_law(1.7 * kd.power_law[0], kd.power_law[1], 3.0)
    ok, results = run_checks(["em"], em_kernels=(kd, kn, broken))
    assert not ok
    assert results[0]["suite"] == "em" and not results[0]["passed"]
