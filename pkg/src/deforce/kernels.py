"""Interaction-density pairs (V, Z) for the built-in surface interactions.

An :class:`InteractionKernel` bundles the parallel-plate energy density
V(psi) (which doubles as E_par, the zeroth derivative order) with the
gradient-squared coefficient Z(psi) and, optionally, a fourth-order
coefficient C(psi).  Built-ins:

==============================  ======================================radial
perfect-mirror Casimir          V, Z ~ -pi^2/1440 / psi^3 (Dirichlet,
                                Neumann or their electromagnetic sum)
constant-potential electrostatic V = eps0 V0^2 / (2 psi), Z = V / 3
high-temperature Dirichlet      1/psi^2 (d=3) or dimensional-reduction
                                1/psi^3 (d=4) free-energy densities
patch potentials                numerically integrated v, z form factors
generic power law               V = v0 / psi^p, Z = z0 / psi^p
==============================  ======================================

Sign convention: attraction means negative energy density.  All densities
are finite for psi > 0 and vanish as psi -> infinity.

Deliberately absent: finite-temperature Neumann kernels (their correction
is nonlocal, linear in T, so no local (V, Z) pair exists), the zero-T
Neumann case over a 1-D planform in d=2 (the local expansion breaks down
there) and real-material Casimir kernels.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import zeta

from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_improper

__all__ = [
    "KernelError",
    "InteractionKernel",
    "PatchCorrelation",
    "CASIMIR_PREFACTOR",
    "ALPHA_BETA",
    "ZETA3",
    "kernel_casimir_scalar",
    "kernel_casimir_em",
    "kernel_electrostatic",
    "kernel_highT_dirichlet",
    "kernel_power_law",
    "kernel_patch",
    "gaussian_correlation",
    "exponential_correlation",
    "correlation_from_table",
    "correlation_from_csv",
    "patch_v",
    "patch_z",
    "patch_vz",
    "PATCH_NORMALIZATION",
]


class KernelError(ValueError):
    """Invalid kernel parameters."""


CASIMIR_PREFACTOR = -math.pi ** 2 / 1440.0
ZETA3 = float(zeta(3))

#: (alpha, beta) coefficients of the perfect-mirror kernel
#: V = pref * alpha / psi^3, Z = pref * beta / psi^3.
ALPHA_BETA = {
    "dirichlet": (1.0, 2.0 / 3.0),
    "neumann": (1.0, (2.0 / 3.0) * (1.0 - 30.0 / math.pi ** 2)),
}


@dataclass(frozen=True)
class InteractionKernel:
    """Densities defining a derivative expansion up to second (or fourth) order.

    ``power_law = (v0, z0, p)`` is set when V = v0 / psi^p exactly; the
    analysis module uses it to build the closed-form leading reference.
    ``prefactors`` records the physical constants baked into the densities.
    """

    name: str
    base_dim: int
    v: Callable[[float], float]
    z: Callable[[float], float]
    c: Optional[Callable[[float], float]] = None
    power_law: Optional[tuple] = None
    prefactors: dict = field(default_factory=dict)

    def e_parallel(self, h: float) -> float:
        """Parallel-plate density: the zeroth derivative order is V itself."""
        return self.v(h)

    def valid_for(self, n: int) -> bool:
        # A kernel over a 2-D base also serves translation-invariant (1-D)
        # profiles, where results are per unit length.
        return n == self.base_dim or (n == 1 and self.base_dim == 2)


def kernel_casimir_scalar(bc: str = "dirichlet") -> InteractionKernel:
    """Perfect-mirror scalar Casimir kernel, Dirichlet or Neumann conditions."""
    key = bc.lower()
    if key not in ALPHA_BETA:
        raise KernelError(f"unknown boundary condition {bc!r}; use dirichlet or neumann")
    alpha, beta = ALPHA_BETA[key]
    v0 = CASIMIR_PREFACTOR * alpha
    z0 = CASIMIR_PREFACTOR * beta
    return InteractionKernel(
        name=f"casimir_{key}",
        base_dim=2,
        v=lambda psi: v0 / psi ** 3,
        z=lambda psi: z0 / psi ** 3,
        power_law=(v0, z0, 3.0),
        prefactors={"alpha": alpha, "beta": beta},
    )


def kernel_casimir_em() -> InteractionKernel:
    """Perfect-conductor electromagnetic kernel: pointwise sum of D and N."""
    kd = kernel_casimir_scalar("dirichlet")
    kn = kernel_casimir_scalar("neumann")
    return InteractionKernel(
        name="casimir_em",
        base_dim=2,
        v=lambda psi: kd.v(psi) + kn.v(psi),
        z=lambda psi: kd.z(psi) + kn.z(psi),
        power_law=(kd.power_law[0] + kn.power_law[0], kd.power_law[1] + kn.power_law[1], 3.0),
        prefactors={
            "alpha": kd.prefactors["alpha"] + kn.prefactors["alpha"],
            "beta": kd.prefactors["beta"] + kn.prefactors["beta"],
        },
    )


def kernel_electrostatic(v0_volts: float, epsilon0: float = 1.0) -> InteractionKernel:
    """Constant potential difference V0 between perfect conductors.

    V(psi) = eps0 V0^2 / (2 psi) and Z/V = 1/3 for every gap.  The 1/psi
    decay makes planform integrals logarithmically sensitive to the
    planform size, so compact-object results must quote it.
    """
    amp = 0.5 * epsilon0 * v0_volts ** 2
    return InteractionKernel(
        name="electrostatic",
        base_dim=2,
        v=lambda psi: amp / psi,
        z=lambda psi: amp / (3.0 * psi),
        power_law=(amp, amp / 3.0, 1.0),
        prefactors={"V0": v0_volts, "epsilon0": epsilon0},
    )


def kernel_highT_dirichlet(beta: float, n: int = 2) -> InteractionKernel:
    """High-temperature Dirichlet free-energy kernel (beta = inverse temperature).

    n = 2 is the physical d = 3 case, density ~ 1/(beta psi^2); n = 3 is the
    d = 4 check, where dimensional reduction equips the 1/psi^3 density with
    the zero-temperature d = 3 Dirichlet coefficients.  Coefficients for
    higher d are not built in (use :func:`kernel_power_law` with your own
    values).
    """
    if beta <= 0.0:
        raise KernelError("inverse temperature beta must be positive")
    if n == 2:
        w0 = -ZETA3 / (16.0 * math.pi * beta)
        ratio = (1.0 + 6.0 * ZETA3) / (12.0 * ZETA3)
        return InteractionKernel(
            name="highT_dirichlet_d3",
            base_dim=2,
            v=lambda psi: w0 / psi ** 2,
            z=lambda psi: w0 * ratio / psi ** 2,
            power_law=(w0, w0 * ratio, 2.0),
            prefactors={"beta": beta, "z_over_v": ratio},
        )
    if n == 3:
        b0 = CASIMIR_PREFACTOR / beta
        b2 = (2.0 / 3.0) * CASIMIR_PREFACTOR / beta
        return InteractionKernel(
            name="highT_dirichlet_d4",
            base_dim=3,
            v=lambda psi: b0 / psi ** 3,
            z=lambda psi: b2 / psi ** 3,
            power_law=(b0, b2, 3.0),
            prefactors={"beta": beta, "b0": b0, "b2": b2},
        )
    raise KernelError(
        f"high-T Dirichlet kernel supports n in {{2, 3}}; the b-coefficients for "
        f"n={n} are not built in"
    )


def kernel_power_law(v0: float, z0: float, p: float, c0: float = None,
                     base_dim: int = 2, name: str = None) -> InteractionKernel:
    """Generic kernel V = v0 / psi^p, Z = z0 / psi^p (optionally C = c0 / psi^p)."""
    if p <= 0.0:
        raise KernelError("power-law exponent must be positive")
    c = None if c0 is None else (lambda psi: c0 / psi ** p)
    return InteractionKernel(
        name=name or f"power_law_p{p:g}",
        base_dim=base_dim,
        v=lambda psi: v0 / psi ** p,
        z=lambda psi: z0 / psi ** p,
        c=c,
        power_law=(v0, z0, float(p)),
        prefactors={} if c0 is None else {"c0": c0},
    )


# -- patch potentials -------------------------------------------------------------

#: Required value of int_0^inf u g(u) du.  It follows from requiring that
#: V_rms^2 equal the zero-separation autocorrelation integral
#: int d^2k/(2pi)^2 Omega(k).
PATCH_NORMALIZATION = 2.0 * math.pi


@dataclass(frozen=True)
class PatchCorrelation:
    """Dimensionless autocorrelation shape g(u) of random patch potentials.

    ``norm`` caches int_0^inf u g(u) du; kernels require it to equal 2*pi
    (:data:`PATCH_NORMALIZATION`).  ``g`` must be non-negative and decaying.
    """

    g: Callable[[float], float]
    g0: float
    norm: float
    name: str = "custom"

    def normalized(self) -> "PatchCorrelation":
        """Rescaled copy with int u g du = 2*pi."""
        if self.norm <= 0.0 or not math.isfinite(self.norm):
            raise KernelError(f"correlation normalization integral is {self.norm}")
        s = PATCH_NORMALIZATION / self.norm
        inner = self.g
        return PatchCorrelation(
            g=lambda u: s * inner(u),
            g0=s * self.g0,
            norm=PATCH_NORMALIZATION,
            name=f"{self.name}(normalized)",
        )


# 3-point Gauss-Legendre on [-1, 1]: exact through degree 5, so exact for
# u * (piecewise cubic) on each knot interval.
_GAUSS3 = (
    (-math.sqrt(3.0 / 5.0), 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (math.sqrt(3.0 / 5.0), 5.0 / 9.0),
)


def _table_norm(u_knots, g):
    """int_0^inf u g(u) du for a tabulated correlation (flat head, zero tail)."""
    total = 0.5 * u_knots[0] ** 2 * g(0.0)
    for lo, hi in zip(u_knots[:-1], u_knots[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        total += half * sum(w * (mid + half * t) * g(mid + half * t) for t, w in _GAUSS3)
    return total


def gaussian_correlation() -> PatchCorrelation:
    """g(u) = 4 pi exp(-u^2); int u g du = 2 pi exactly."""
    def g(u):
        return 4.0 * math.pi * math.exp(-min(u * u, 700.0))
    return PatchCorrelation(g=g, g0=4.0 * math.pi, norm=PATCH_NORMALIZATION, name="gaussian")


def exponential_correlation() -> PatchCorrelation:
    """g(u) = 2 pi exp(-u); int u g du = 2 pi exactly."""
    def g(u):
        return 2.0 * math.pi * math.exp(-min(u, 700.0))
    return PatchCorrelation(g=g, g0=2.0 * math.pi, norm=PATCH_NORMALIZATION, name="exponential")


def correlation_from_table(u, g, name="table") -> PatchCorrelation:
    """Monotone-cubic interpolation of sampled (u, g(u)); zero beyond the table."""
    u = np.asarray(u, dtype=float)
    g = np.asarray(g, dtype=float)
    if u.ndim != 1 or u.size < 4 or g.shape != u.shape:
        raise KernelError("correlation table needs matching 1-D arrays with >= 4 points")
    if np.any(np.diff(u) <= 0.0):
        raise KernelError("correlation table abscissae must be strictly increasing")
    if np.any(g < 0.0):
        raise KernelError("correlation values must be non-negative")
    interp = PchipInterpolator(u, g, extrapolate=False)
    u_max = float(u[-1])
    g_first = float(g[0])

    def g_fun(x):
        if x <= u[0]:
            return g_first
        if x >= u_max:
            return 0.0
        return float(interp(x))

    return PatchCorrelation(g=g_fun, g0=g_fun(0.0), norm=_table_norm(u, g_fun), name=name)


def correlation_from_csv(path) -> PatchCorrelation:
    """Load a (u, g) table from a two-column CSV with header ``u,g``."""
    us, gs = [], []
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["u", "g"]:
            raise KernelError("correlation CSV must have header 'u,g'")
        for row in reader:
            if not row or row[0].lstrip().startswith("#"):
                continue
            us.append(float(row[0]))
            gs.append(float(row[1]))
    return correlation_from_table(us, gs, name=str(path))


def _bose_weight(x):
    # x^2 / (e^{2x} - 1); -> x/2 at small x, underflows cleanly at large x.
    if x <= 0.0:
        return 0.0
    if x > 360.0:
        return 0.0
    if x < 1e-8:
        return 0.5 * x
    return x * x / math.expm1(2.0 * x)


#: switchover below which the z weight is summed from its Taylor series
_Z_SERIES_CUT = 0.35

#: Taylor coefficients of (1-8x^2) cosh x - cosh 3x + 12 x sinh x
#: = x^4 sum_k P[k] x^{2k}; from the cosh/sinh series,
#: coeff of x^{2k} is (1 - 9^k)/(2k)! - 8/(2k-2)! + 12/(2k-1)!
#: (the x^0 and x^2 orders cancel identically; P[0] = -16/3).
_Z_BRACKET_SERIES = tuple(
    (1 - 9 ** k) / math.factorial(2 * k)
    - 8 / math.factorial(2 * k - 2)
    + 12 / math.factorial(2 * k - 1)
    for k in range(2, 16)
)


def _w_bare(x):
    """[(1-8x^2) cosh x - cosh 3x + 12 x sinh x] / sinh^5 x.

    The bracket cancels to O(x^4), so the direct form loses ~16 digits near
    zero; below ``_Z_SERIES_CUT`` it is summed from its (rapidly converging)
    Taylor series instead, keeping the integrand smooth to machine precision
    across the switchover.  Above x ~ 40 the asymptotic -16 e^{-2x} avoids
    sinh overflow.  W(x) -> -16/(3x) as x -> 0.
    """
    if x <= 0.0:
        return 0.0
    if x < _Z_SERIES_CUT:
        y = x * x
        poly = 0.0
        for c in reversed(_Z_BRACKET_SERIES):
            poly = poly * y + c
        sinhc = math.sinh(x) / x  # -> 1 smoothly, no underflow
        return poly / (x * sinhc ** 5)
    if x > 40.0:
        if x > 360.0:
            return 0.0
        return -16.0 * math.exp(-2.0 * x)
    sh = math.sinh(x)
    bracket = (1.0 - 8.0 * x * x) * math.cosh(x) - math.cosh(3.0 * x) + 12.0 * x * sh
    return bracket / sh ** 5


def _z_weight(x):
    """x^2 * bare weight: the z integrand factor multiplying g(x xi)."""
    return x * x * _w_bare(x)


def patch_vz(xi: float, corr: PatchCorrelation, spec: QuadratureSpec = None):
    """Both patch form factors at xi = ell / psi: returns (v, v_err, z, z_err).

    v(xi) = -(2/pi) xi^2 int_0^inf dx x^2/(e^{2x}-1) g(x xi)
    z(xi) = (1/16 pi) xi^2 int_0^inf dx x^2 W(x) g(x xi)

    For xi >= 1 the integrals are taken in u = x xi instead, which keeps the
    integrand support at O(1) scale when the correlation length dominates.
    """
    if xi <= 0.0:
        raise KernelError("patch form factors need xi > 0")
    spec = spec or DEFAULT_SPEC
    g = corr.g
    if xi < 1.0:
        iv, iv_err = integrate_improper(lambda x: _bose_weight(x) * g(x * xi), spec)
        iz, iz_err = integrate_improper(lambda x: _z_weight(x) * g(x * xi), spec)
        cv = (2.0 / math.pi) * xi * xi
        cz = xi * xi / (16.0 * math.pi)
    else:
        # substitute u = x xi: x^2 dx = u^2 du / xi^3
        iv, iv_err = integrate_improper(
            lambda u: (u * u / math.expm1(2.0 * u / xi) if 0.0 < u / xi <= 360.0 else 0.0)
            * g(u),
            spec,
        )
        iz, iz_err = integrate_improper(lambda u: u * u * _w_bare(u / xi) * g(u), spec)
        cv = 2.0 / (math.pi * xi)
        cz = 1.0 / (16.0 * math.pi * xi)
    return -cv * iv, cv * iv_err, cz * iz, cz * iz_err


def patch_v(xi: float, corr: PatchCorrelation, spec: QuadratureSpec = None) -> float:
    """Dimensionless patch form factor v(xi); see :func:`patch_vz`."""
    return patch_vz(xi, corr, spec)[0]


def patch_z(xi: float, corr: PatchCorrelation, spec: QuadratureSpec = None) -> float:
    """Dimensionless patch form factor z(xi); see :func:`patch_vz`."""
    return patch_vz(xi, corr, spec)[2]


def kernel_patch(corr: PatchCorrelation, v_rms: float, ell: float,
                 epsilon0: float = 1.0, spec: QuadratureSpec = None) -> InteractionKernel:
    """Patch-potential kernel V = eps0 V_rms^2 v(ell/psi) / psi (same shape for Z).

    Requires ``corr`` normalized to int u g du = 2*pi; otherwise the V_rms
    bookkeeping would be inconsistent, and construction is refused with the
    measured integral in the message (use ``corr.normalized()``).
    (v, z) pairs are memoized per gap under a lock, so kernels stay safe for
    concurrent evaluation.
    """
    if ell <= 0.0 or v_rms <= 0.0:
        raise KernelError("patch kernel needs positive V_rms and ell")
    if not math.isfinite(corr.norm) or abs(corr.norm / PATCH_NORMALIZATION - 1.0) > 1e-6:
        raise KernelError(
            f"correlation {corr.name!r} is not normalized: int u g(u) du = "
            f"{corr.norm:.9g}, expected 2*pi = {PATCH_NORMALIZATION:.9g} "
            f"(call .normalized() first)"
        )
    spec = spec or DEFAULT_SPEC
    amp = epsilon0 * v_rms ** 2
    cache: dict = {}
    lock = threading.Lock()

    def lookup(psi):
        xi = ell / psi
        with lock:
            hit = cache.get(xi)
        if hit is None:
            vz = patch_vz(xi, corr, spec)
            hit = (vz[0], vz[2])
            with lock:
                cache[xi] = hit
        return hit

    return InteractionKernel(
        name=f"patch[{corr.name}]",
        base_dim=2,
        v=lambda psi: amp * lookup(psi)[0] / psi,
        z=lambda psi: amp * lookup(psi)[1] / psi,
        prefactors={"V_rms": v_rms, "ell": ell, "epsilon0": epsilon0},
    )
