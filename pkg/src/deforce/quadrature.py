"""Adaptive quadrature over planform domains.

Every integrator returns a ``(value, error_estimate)`` pair.  The adaptive
core is QUADPACK's Gauss-Kronrod scheme (``scipy.integrate.quad``); this
module adds the three planform-shaped entry points the rest of the package
needs:

* :func:`integrate_radial` -- axisymmetric reduction of an n-dimensional
  planform integral to ``|S^{n-1}| * int rho^{n-1} f(rho) drho``,
* :func:`integrate_improper` -- semi-infinite integrals, mapped to [0, 1)
  through ``x = t / (1 - t)`` so power-law and exponential tails are handled
  uniformly,
* :func:`integrate_nd` -- non-axisymmetric fallback for 1-D intervals,
  rectangles/boxes, disks and balls (nested adaptive rules).

All routines are stateless and deterministic for a fixed
:class:`QuadratureSpec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from scipy.integrate import quad

__all__ = [
    "UNIT_SPHERE_SURFACE",
    "QuadratureError",
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "integrate_improper",
    "integrate_radial",
    "integrate_nd",
]

#: |S^{n-1}|: angular measure multiplying the radial integral in n base
#: dimensions (2 points for a symmetric line integral, 2*pi for the disk,
#: 4*pi for the ball, 2*pi^2 for n=4).
UNIT_SPHERE_SURFACE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi, 4: 2.0 * math.pi ** 2}


class QuadratureError(RuntimeError):
    """Adaptive integration did not converge to the requested tolerance.

    Attributes
    ----------
    best : float
        Best available estimate of the integral.
    err_estimate : float
        Error estimate attached to ``best``.
    """

    def __init__(self, message, best=None, err_estimate=None):
        super().__init__(message)
        self.best = best
        self.err_estimate = err_estimate


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and limits for the adaptive integrators.

    ``rel_tol`` must lie in (1e-14, 1e-2); ``abs_tol`` is an absolute floor
    (0 means purely relative control); ``max_subdivisions`` caps the number
    of adaptive panels; ``axisymmetric_reduction`` lets the engine collapse
    axisymmetric planform integrals to a single radial quadrature.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 0.0
    max_subdivisions: int = 500
    axisymmetric_reduction: bool = True

    def __post_init__(self):
        if not 1e-14 < self.rel_tol < 1e-2:
            raise ValueError(f"rel_tol must lie in (1e-14, 1e-2), got {self.rel_tol}")
        if self.abs_tol < 0.0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Copy with rel_tol multiplied by ``factor`` (clipped to the legal range)."""
        return replace(self, rel_tol=max(self.rel_tol * factor, 2e-14))


DEFAULT_SPEC = QuadratureSpec()


def _quad_finite(f, a, b, spec, points=None):
    """scipy.integrate.quad on [a, b], raising QuadratureError on non-convergence."""

    def checked(x):
        y = f(x)
        if not math.isfinite(y):
            raise QuadratureError(f"integrand is not finite at x = {x!r}")
        return y

    value, err, info, *tail = quad(
        checked,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        points=points,
        full_output=1,
    )
    if tail:
        message = tail[0]
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not converge: {message} "
            f"(best estimate {value:.6e} +- {err:.1e})",
            best=value,
            err_estimate=err,
        )
    return value, err


def integrate_improper(f, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integrate ``f`` over [0, inf).

    The half line is mapped onto [0, 1) with ``x = t / (1 - t)``; the
    adaptive rule then refines near t = 1 as needed, which treats power-law
    (p > 1) and exponential tails on the same footing.  ``f`` must decay
    fast enough to be integrable; otherwise a :class:`QuadratureError`
    carrying the best estimate is raised.
    """

    def transformed(t):
        one_minus = 1.0 - t
        if one_minus <= 0.0:
            # adaptive panels hugging t=1 can round a node onto the endpoint;
            # the point has measure zero for any integrable f
            return 0.0
        return f(t / one_minus) / (one_minus * one_minus)

    return _quad_finite(transformed, 0.0, 1.0, spec)


def integrate_radial(f, rho_max, n, spec: QuadratureSpec = DEFAULT_SPEC, points=None):
    """Integrate an axisymmetric density over an n-dimensional planform.

    Computes ``|S^{n-1}| * int_0^{rho_max} rho^{n-1} f(rho) drho``.
    ``rho_max`` may be ``inf`` for decaying integrands, in which case the
    improper transform is used.  ``points`` optionally lists interior
    breakpoints (e.g. the scale of a sharp near-contact peak).
    """
    if n not in UNIT_SPHERE_SURFACE:
        raise ValueError(f"unsupported base dimension {n}")
    if rho_max <= 0.0:
        raise ValueError("rho_max must be positive")
    surface = UNIT_SPHERE_SURFACE[n]

    if n == 1:
        weighted = f
    else:
        def weighted(rho, _f=f, _k=n - 1):
            return rho ** _k * _f(rho)

    if math.isinf(rho_max):
        value, err = integrate_improper(weighted, spec)
    else:
        if points is not None:
            points = [p for p in points if 0.0 < p < rho_max]
            points = points or None
        value, err = _quad_finite(weighted, 0.0, rho_max, spec, points=points)
    return surface * value, surface * err


def _nested_rect(f, bounds, spec):
    # Tensor nesting; inner level runs one decade tighter so the outer error
    # estimate dominates the reported one.
    (a, b), *rest = bounds
    if not rest:
        return _quad_finite(f, a, b, spec)

    inner_spec = spec.tightened(0.1)
    inner_errs = []

    def outer(x):
        val, err = _nested_rect(lambda *ys: f(x, *ys), rest, inner_spec)
        inner_errs.append(err)
        return val

    value, err = _quad_finite(outer, a, b, spec)
    width = b - a
    inner_part = (max(inner_errs) if inner_errs else 0.0) * abs(width)
    return value, err + inner_part


def integrate_nd(f, domain, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integrate a point function over a simple domain, n in {1, 2, 3}.

    ``domain`` is a tuple tag:

    * ``("interval", a, b)``            -- f(x)
    * ``("rect", (a1,b1), (a2,b2)[, (a3,b3)])`` -- f(x1, x2[, x3])
    * ``("disk", R)``                   -- f(x1, x2), integrated in polar form
    * ``("ball", R)``                   -- f(x1, x2, x3), spherical form

    This is the non-axisymmetric fallback; when the integrand happens to be
    axisymmetric it agrees with :func:`integrate_radial` to the combined
    error estimate.
    """
    kind = domain[0]
    if kind == "interval":
        _, a, b = domain
        return _quad_finite(f, a, b, spec)
    if kind == "rect":
        bounds = domain[1:]
        if not 1 <= len(bounds) <= 3:
            raise ValueError("rect domains support 1 to 3 dimensions")
        return _nested_rect(f, list(bounds), spec)
    if kind == "disk":
        radius = domain[1]

        def polar(phi, rho):
            return rho * f(rho * math.cos(phi), rho * math.sin(phi))

        return _nested_rect(polar, [(0.0, 2.0 * math.pi), (0.0, radius)], spec)
    if kind == "ball":
        radius = domain[1]

        def spherical(phi, theta, r):
            st = math.sin(theta)
            return r * r * st * f(
                r * st * math.cos(phi), r * st * math.sin(phi), r * math.cos(theta)
            )

        return _nested_rect(
            spherical, [(0.0, 2.0 * math.pi), (0.0, math.pi), (0.0, radius)], spec
        )
    raise ValueError(f"unknown domain kind {kind!r}")
