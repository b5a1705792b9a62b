"""deforce: interactions between a plane and a gently curved surface.

Evaluates the interaction energy (or free energy) functional of a gap
profile psi(x) through several routes and cross-checks them:

* the derivative expansion (order 0 = proximity force approximation,
  order 2 = the |grad psi|^2 correction, plus the closed part of order 4),
* the Derjaguin approximation and its force form,
* Blocki's Jacobian one-dimensional reduction with its linear correction,
* surface element integration for two-sheet compact bodies, exact at first
  order in a dilute coupling,

for a catalog of interaction kernels (perfect-mirror Casimir, electrostatic,
patch potentials, high-temperature Dirichlet), and extracts the
next-to-leading-order coefficients gamma and gamma_log from a/R ladders.

Natural units (hbar = c = 1) with epsilon_0 kept explicit; lengths are in
one consistent user-chosen unit.
"""

__version__ = "0.1.0"

from .analysis import (
    AnalysisError,
    FitReport,
    analytic_lead,
    em_additivity_check,
    gamma_fit,
    gamma_fit_log,
    scaling_check,
)
from .engine import (
    EngineError,
    FunctionalResult,
    JacobianProfile,
    compare_methods,
    compute_jacobian,
    dilute_oracle,
    eval_blocki_force,
    eval_de2,
    eval_de4_term,
    eval_derjaguin,
    eval_pfa,
    eval_sei,
)
from .kernels import (
    InteractionKernel,
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
from .profiles import (
    ProfileError,
    SurfaceProfile,
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
from .quadrature import (
    QuadratureError,
    QuadratureSpec,
    integrate_improper,
    integrate_nd,
    integrate_radial,
)

__all__ = [
    "__version__",
    "AnalysisError", "FitReport", "analytic_lead", "em_additivity_check",
    "gamma_fit", "gamma_fit_log", "scaling_check",
    "EngineError", "FunctionalResult", "JacobianProfile", "compare_methods",
    "compute_jacobian", "dilute_oracle", "eval_blocki_force", "eval_de2",
    "eval_de4_term", "eval_derjaguin", "eval_pfa", "eval_sei",
    "InteractionKernel", "KernelError", "PatchCorrelation",
    "correlation_from_csv", "correlation_from_table", "exponential_correlation",
    "gaussian_correlation", "kernel_casimir_em", "kernel_casimir_scalar",
    "kernel_electrostatic", "kernel_highT_dirichlet", "kernel_patch",
    "kernel_power_law", "patch_v", "patch_vz", "patch_z",
    "ProfileError", "SurfaceProfile", "eval_profile", "load_grid_csv",
    "make_constant", "make_cylinder", "make_gaussian_bump", "make_grid",
    "make_paraboloid", "make_sphere", "scale_lateral",
    "QuadratureError", "QuadratureSpec", "integrate_improper", "integrate_nd",
    "integrate_radial",
]
