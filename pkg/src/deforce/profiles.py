"""Surface height profiles over an n-dimensional base plane.

A profile is the gap function psi(x) > 0 between the flat plate at height 0
and the curved surface above it, together with its planform (the region of
the base plane the integrals run over).  Analytic kinds (sphere cap,
cylinder, paraboloid, constant, Gaussian bump) expose exact gradients and
Hessians; gridded data uses O(h^2) central differences with one-sided
stencils at the planform edge.

Conventions
-----------
* Lengths are plain floats in one consistent user-chosen unit; all derived
  energies come out in natural units (hbar = c = 1, epsilon_0 explicit).
* Profiles are immutable after construction and safe to evaluate from many
  threads.
* Compact objects (sphere, cylinder) default to a near planform of
  0.9 * R; results should be checked against 0.7 * R (the analysis module
  automates that).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProfileError",
    "RadialPlanform",
    "RectPlanform",
    "SurfaceProfile",
    "make_sphere",
    "make_cylinder",
    "make_paraboloid",
    "make_constant",
    "make_gaussian_bump",
    "make_grid",
    "load_grid_csv",
    "scale_lateral",
    "eval_profile",
    "DEFAULT_RHO_FRACTION",
    "ALT_RHO_FRACTION",
]

#: Default and convergence-check planform fractions rho_max / R for compact
#: objects.
DEFAULT_RHO_FRACTION = 0.9
ALT_RHO_FRACTION = 0.7


class ProfileError(ValueError):
    """Invalid profile parameters or evaluation outside the planform."""


@dataclass(frozen=True)
class RadialPlanform:
    """Strip (dim 1), disk (dim 2) or ball (dim 3/4) centred at the origin."""

    dim: int
    rho_max: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3, 4):
            raise ProfileError(f"unsupported planform dimension {self.dim}")
        if not self.rho_max > 0.0:
            raise ProfileError("planform radius must be positive")

    @property
    def kind(self) -> str:
        return {1: "strip", 2: "disk", 3: "ball", 4: "ball4"}[self.dim]

    def contains(self, x) -> bool:
        r = float(np.linalg.norm(np.atleast_1d(x)))
        return r <= self.rho_max * (1.0 + 1e-12)

    def scaled(self, factor: float) -> "RadialPlanform":
        return RadialPlanform(self.dim, self.rho_max * factor)


@dataclass(frozen=True)
class RectPlanform:
    """Axis-aligned rectangle (or box), bounds ((lo1, hi1), (lo2, hi2), ...)."""

    bounds: tuple

    def __post_init__(self):
        for lo, hi in self.bounds:
            if not hi > lo:
                raise ProfileError("rectangle bounds must satisfy hi > lo")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def kind(self) -> str:
        return "rect"

    def contains(self, x) -> bool:
        x = np.atleast_1d(x)
        pad = 1e-12
        return all(
            lo - pad * (hi - lo) <= xi <= hi + pad * (hi - lo)
            for xi, (lo, hi) in zip(x, self.bounds)
        )

    def scaled(self, factor: float) -> "RectPlanform":
        return RectPlanform(tuple((lo * factor, hi * factor) for lo, hi in self.bounds))


def _as_point(x, dim):
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if pt.shape != (dim,):
        raise ProfileError(f"expected a point with {dim} component(s), got shape {pt.shape}")
    return pt


class SurfaceProfile:
    """Base class: a gap function with planform, derivatives and metadata.

    Axisymmetric subclasses implement the radial triple
    ``radial_value / radial_slope / radial_curvature``; point evaluation is
    derived from those.  Non-axisymmetric subclasses override
    ``value / gradient / hessian`` directly.
    """

    kind = "abstract"
    axisymmetric = False
    has_hessian = True

    def __init__(self, base_dim, planform, params, min_gap):
        self.base_dim = int(base_dim)
        self.planform = planform
        self.params = dict(params)
        self.min_gap = float(min_gap)

    # -- radial interface (axisymmetric kinds) --------------------------------
    def radial_value(self, rho: float) -> float:
        raise ProfileError(f"profile kind {self.kind!r} has no radial form")

    def radial_slope(self, rho: float) -> float:
        raise ProfileError(f"profile kind {self.kind!r} has no radial form")

    def radial_curvature(self, rho: float) -> float:
        raise ProfileError(f"profile kind {self.kind!r} has no radial form")

    # -- point interface -------------------------------------------------------
    def value(self, x) -> float:
        pt = _as_point(x, self.base_dim)
        return self.radial_value(float(np.linalg.norm(pt)))

    def gradient(self, x) -> np.ndarray:
        pt = _as_point(x, self.base_dim)
        rho = float(np.linalg.norm(pt))
        if rho < 1e-300:
            return np.zeros(self.base_dim)
        return self.radial_slope(rho) * pt / rho

    def hessian(self, x) -> np.ndarray:
        # H_ij = h'' e_i e_j + (h'/rho) (delta_ij - e_i e_j) for psi = h(|x|).
        pt = _as_point(x, self.base_dim)
        rho = float(np.linalg.norm(pt))
        n = self.base_dim
        curv = self.radial_curvature(rho)
        if rho < 1e-12 * max(self.min_gap, 1.0):
            return curv * np.eye(n)
        unit = pt / rho
        proj = np.outer(unit, unit)
        return curv * proj + (self.radial_slope(rho) / rho) * (np.eye(n) - proj)

    def scale(self, lam: float) -> "SurfaceProfile":
        return scale_lateral(self, lam)

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "base_dim": self.base_dim, "planform": self.planform.kind}
        if isinstance(self.planform, RadialPlanform):
            d["rho_max"] = self.planform.rho_max
        else:
            d["bounds"] = [list(b) for b in self.planform.bounds]
        d.update(self.params)
        return d

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({inner}, base_dim={self.base_dim})"


class SphereCapProfile(SurfaceProfile):
    """Near cap of a sphere (or cylinder for a 1-D base) of radius R.

    psi(rho) = a + R (1 - sqrt(1 - rho^2 / R^2)), valid on rho <= rho_max < R.
    """

    axisymmetric = True

    def __init__(self, a, R, rho_max, base_dim=2, kind="sphere"):
        if a <= 0.0 or R <= 0.0:
            raise ProfileError("sphere profile needs positive a and R")
        if not 0.0 < rho_max < R:
            raise ProfileError(
                f"planform radius must satisfy 0 < rho_max < R (the profile slope "
                f"is singular at the rim); got rho_max={rho_max}, R={R}"
            )
        self.kind = kind
        self.a = float(a)
        self.R = float(R)
        super().__init__(
            base_dim,
            RadialPlanform(base_dim, float(rho_max)),
            {"a": float(a), "R": float(R)},
            a,
        )

    def radial_value(self, rho):
        return self.a + self.R - math.sqrt(self.R ** 2 - rho * rho)

    def radial_slope(self, rho):
        return rho / math.sqrt(self.R ** 2 - rho * rho)

    def radial_curvature(self, rho):
        return self.R ** 2 / (self.R ** 2 - rho * rho) ** 1.5


class ParaboloidProfile(SurfaceProfile):
    """Revolution paraboloid psi = a (1 + rho^2 / sigma^2)."""

    kind = "paraboloid"
    axisymmetric = True

    def __init__(self, a, sigma, rho_max=math.inf, base_dim=2):
        if a <= 0.0 or sigma <= 0.0:
            raise ProfileError("paraboloid needs positive a and sigma")
        self.a = float(a)
        self.sigma = float(sigma)
        super().__init__(
            base_dim,
            RadialPlanform(base_dim, rho_max),
            {"a": float(a), "sigma": float(sigma)},
            a,
        )

    def radial_value(self, rho):
        return self.a * (1.0 + (rho / self.sigma) ** 2)

    def radial_slope(self, rho):
        return 2.0 * self.a * rho / self.sigma ** 2

    def radial_curvature(self, rho):
        return 2.0 * self.a / self.sigma ** 2


class ConstantProfile(SurfaceProfile):
    """Parallel-plate gap psi = a over a finite planform."""

    kind = "constant"
    axisymmetric = True

    def __init__(self, a, planform):
        if a <= 0.0:
            raise ProfileError("gap must be positive")
        self.a = float(a)
        super().__init__(planform.dim, planform, {"a": float(a)}, a)

    def radial_value(self, rho):
        return self.a

    def radial_slope(self, rho):
        return 0.0

    def radial_curvature(self, rho):
        return 0.0

    def value(self, x):
        _as_point(x, self.base_dim)
        return self.a

    def gradient(self, x):
        return np.zeros(self.base_dim)

    def hessian(self, x):
        return np.zeros((self.base_dim, self.base_dim))


class GaussianBumpProfile(SurfaceProfile):
    """psi = a + amplitude * exp(-rho^2 / width^2); amplitude > -a keeps psi > 0."""

    kind = "gaussian-bump"
    axisymmetric = True

    def __init__(self, a, amplitude, width, rho_max=math.inf, base_dim=2):
        if a <= 0.0 or width <= 0.0:
            raise ProfileError("bump needs positive a and width")
        if a + amplitude <= 0.0:
            raise ProfileError("bump amplitude would close the gap (psi must stay > 0)")
        self.a = float(a)
        self.amplitude = float(amplitude)
        self.width = float(width)
        super().__init__(
            base_dim,
            RadialPlanform(base_dim, rho_max),
            {"a": float(a), "amplitude": float(amplitude), "width": float(width)},
            min(a, a + amplitude),
        )

    def _envelope(self, rho):
        return self.amplitude * math.exp(-((rho / self.width) ** 2))

    def radial_value(self, rho):
        return self.a + self._envelope(rho)

    def radial_slope(self, rho):
        return -2.0 * rho / self.width ** 2 * self._envelope(rho)

    def radial_curvature(self, rho):
        w2 = self.width ** 2
        return self._envelope(rho) * (4.0 * rho * rho / w2 - 2.0) / w2


class ScaledProfile(SurfaceProfile):
    """Laterally rescaled wrapper: psi_lam(x) = psi(lam * x), planform / lam."""

    axisymmetric = False

    def __init__(self, inner: SurfaceProfile, lam: float):
        if lam <= 0.0:
            raise ProfileError("scale factor must be positive")
        self.inner = inner
        self.lam = float(lam)
        self.kind = f"scaled[{inner.kind}]"
        self.axisymmetric = inner.axisymmetric
        self.has_hessian = inner.has_hessian
        params = {"lam": float(lam), "inner": inner.descriptor()}
        super().__init__(
            inner.base_dim, inner.planform.scaled(1.0 / lam), params, inner.min_gap
        )

    def radial_value(self, rho):
        return self.inner.radial_value(self.lam * rho)

    def radial_slope(self, rho):
        return self.lam * self.inner.radial_slope(self.lam * rho)

    def radial_curvature(self, rho):
        return self.lam ** 2 * self.inner.radial_curvature(self.lam * rho)

    def value(self, x):
        pt = _as_point(x, self.base_dim)
        return self.inner.value(self.lam * pt)

    def gradient(self, x):
        pt = _as_point(x, self.base_dim)
        return self.lam * self.inner.gradient(self.lam * pt)

    def hessian(self, x):
        pt = _as_point(x, self.base_dim)
        return self.lam ** 2 * self.inner.hessian(self.lam * pt)


class GridProfile(SurfaceProfile):
    """Gap sampled on a uniform Cartesian lattice, rectangle planform.

    Derivatives are precomputed with O(h^2) central differences (one-sided
    at the edges) and all quantities are interpolated bilinearly off-node,
    so the discretisation error is O(h^2) throughout.  The Hessian needs at
    least 3 nodes per axis.
    """

    kind = "grid"
    axisymmetric = False

    def __init__(self, x1, x2, values):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (x1.size, x2.size):
            raise ProfileError(
                f"grid shape {values.shape} does not match axes ({x1.size}, {x2.size})"
            )
        if x1.size < 2 or x2.size < 2:
            raise ProfileError("grid needs at least 2 nodes per axis")
        for ax in (x1, x2):
            steps = np.diff(ax)
            if steps.min() <= 0.0 or not np.allclose(steps, steps[0], rtol=1e-8):
                raise ProfileError("grid axes must be strictly increasing and uniform")
        if values.min() <= 0.0:
            raise ProfileError("grid gap values must be positive everywhere")

        self.x1 = x1
        self.x2 = x2
        self.values = values
        self.h1 = float(x1[1] - x1[0])
        self.h2 = float(x2[1] - x2[0])
        self.has_hessian = x1.size >= 3 and x2.size >= 3

        edge = 2 if min(x1.size, x2.size) >= 3 else 1
        self.d1 = np.gradient(values, self.h1, axis=0, edge_order=edge)
        self.d2 = np.gradient(values, self.h2, axis=1, edge_order=edge)
        if self.has_hessian:
            self.d11 = np.gradient(self.d1, self.h1, axis=0, edge_order=edge)
            self.d22 = np.gradient(self.d2, self.h2, axis=1, edge_order=edge)
            self.d12 = np.gradient(self.d1, self.h2, axis=1, edge_order=edge)

        planform = RectPlanform(((float(x1[0]), float(x1[-1])), (float(x2[0]), float(x2[-1]))))
        super().__init__(
            2,
            planform,
            {"shape": list(values.shape), "spacing": [self.h1, self.h2]},
            float(values.min()),
        )

    def _bilinear(self, arr, x):
        i = min(max(int((x[0] - self.x1[0]) / self.h1), 0), self.x1.size - 2)
        j = min(max(int((x[1] - self.x2[0]) / self.h2), 0), self.x2.size - 2)
        t = (x[0] - self.x1[i]) / self.h1
        u = (x[1] - self.x2[j]) / self.h2
        t = min(max(t, 0.0), 1.0)
        u = min(max(u, 0.0), 1.0)
        return (
            arr[i, j] * (1 - t) * (1 - u)
            + arr[i + 1, j] * t * (1 - u)
            + arr[i, j + 1] * (1 - t) * u
            + arr[i + 1, j + 1] * t * u
        )

    def value(self, x):
        pt = _as_point(x, 2)
        return float(self._bilinear(self.values, pt))

    def gradient(self, x):
        pt = _as_point(x, 2)
        return np.array([self._bilinear(self.d1, pt), self._bilinear(self.d2, pt)])

    def hessian(self, x):
        if not self.has_hessian:
            raise ProfileError("grid too small for Hessian stencils (needs 3 nodes per axis)")
        pt = _as_point(x, 2)
        h11 = self._bilinear(self.d11, pt)
        h22 = self._bilinear(self.d22, pt)
        h12 = self._bilinear(self.d12, pt)
        return np.array([[h11, h12], [h12, h22]])


# -- factories ------------------------------------------------------------------


def make_sphere(a, R, rho_max=None, base_dim=2) -> SurfaceProfile:
    """Sphere of radius R at closest distance a, near planform rho <= rho_max < R.

    ``base_dim`` 2 is the physical sphere-plane case; 3 serves the d=4
    high-temperature check (4 is accepted for user-supplied d=5 studies).
    """
    if base_dim not in (2, 3, 4):
        raise ProfileError("sphere base_dim must be 2, 3 or 4 (use make_cylinder for 1)")
    if rho_max is None:
        rho_max = DEFAULT_RHO_FRACTION * R
    return SphereCapProfile(a, R, rho_max, base_dim=base_dim, kind="sphere")


def make_cylinder(a, R, x_max=None) -> SurfaceProfile:
    """Cylinder of radius R over a 1-D base; energies are per unit length."""
    if x_max is None:
        x_max = DEFAULT_RHO_FRACTION * R
    return SphereCapProfile(a, R, x_max, base_dim=1, kind="cylinder")


def make_paraboloid(a, sigma, rho_max=math.inf, base_dim=2) -> SurfaceProfile:
    """Revolution paraboloid psi = a (1 + rho^2 / sigma^2); planform may be infinite."""
    return ParaboloidProfile(a, sigma, rho_max=rho_max, base_dim=base_dim)


def make_constant(a, rho_max=1.0, base_dim=2, bounds=None) -> SurfaceProfile:
    """Flat gap psi = a; planform is a disk/strip of radius rho_max or a rectangle."""
    if bounds is not None:
        return ConstantProfile(a, RectPlanform(tuple(tuple(b) for b in bounds)))
    if math.isinf(rho_max):
        raise ProfileError("a constant profile needs a finite planform")
    return ConstantProfile(a, RadialPlanform(base_dim, rho_max))


def make_gaussian_bump(a, amplitude, width, rho_max=math.inf, base_dim=2) -> SurfaceProfile:
    return GaussianBumpProfile(a, amplitude, width, rho_max=rho_max, base_dim=base_dim)


def make_grid(x1, x2, values) -> SurfaceProfile:
    return GridProfile(x1, x2, values)


def scale_lateral(profile: SurfaceProfile, lam: float) -> SurfaceProfile:
    """Return psi_lam(x) = psi(lam x) with the planform shrunk by 1/lam."""
    if lam <= 0.0:
        raise ProfileError("scale factor must be positive")
    return ScaledProfile(profile, lam)


def eval_profile(profile: SurfaceProfile, x):
    """Evaluate (psi, grad psi, Hessian psi) at a planform point.

    Raises :class:`ProfileError` when the point lies outside the planform.
    """
    pt = _as_point(x, profile.base_dim)
    if not profile.planform.contains(pt):
        raise ProfileError(f"point {pt.tolist()} lies outside the {profile.planform.kind} planform")
    return profile.value(pt), profile.gradient(pt), profile.hessian(pt)


def load_grid_csv(path) -> SurfaceProfile:
    """Load a gridded profile from CSV.

    Expected layout::

        # spacing: <h1> <h2>
        x1,x2,psi
        0.0,0.0,1.25
        ...

    Rows must cover a full uniform lattice; the declared spacing is checked
    against the data.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith("#") or "spacing:" not in first:
            raise ProfileError("grid CSV must start with a '# spacing: h1 h2' header")
        try:
            h1, h2 = (float(tok) for tok in first.split("spacing:", 1)[1].split())
        except ValueError as exc:
            raise ProfileError(f"malformed spacing header {first!r}") from exc
        header = fh.readline().strip().lower().replace(" ", "")
        if header != "x1,x2,psi":
            raise ProfileError(f"grid CSV column header must be 'x1,x2,psi', got {header!r}")
        rows = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ProfileError(f"malformed grid CSV row {line!r}")
            rows.append(tuple(float(p) for p in parts))
    if not rows:
        raise ProfileError("grid CSV holds no data rows")

    data = np.array(rows)
    x1 = np.unique(data[:, 0])
    x2 = np.unique(data[:, 1])
    if x1.size * x2.size != len(rows):
        raise ProfileError("grid CSV rows do not form a complete lattice")
    for ax, h in ((x1, h1), (x2, h2)):
        if ax.size > 1 and not np.allclose(np.diff(ax), h, rtol=1e-6, atol=1e-12):
            raise ProfileError("grid CSV spacing disagrees with the declared header")

    values = np.full((x1.size, x2.size), np.nan)
    i1 = np.searchsorted(x1, data[:, 0])
    i2 = np.searchsorted(x2, data[:, 1])
    values[i1, i2] = data[:, 2]
    if np.isnan(values).any():
        raise ProfileError("grid CSV rows do not form a complete lattice")
    return GridProfile(x1, x2, values)
