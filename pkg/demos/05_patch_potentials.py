"""
Patch-potential form factors across their two asymptotic regimes
================================================================

Random surface potentials with autocorrelation V_rms^2 ell^2 g(k ell) give
densities V = eps0 V_rms^2 v(xi)/psi, Z = eps0 V_rms^2 z(xi)/psi with
xi = ell/psi. The dimensionless v, z interpolate between

  xi << 1 (patches smaller than the gap):   Casimir-like 1/psi^3 scaling,
      v -> -g(0) zeta(3) xi^2 / (2 pi),
      z -> -g(0) (1 + 6 zeta(3)) xi^2 / (24 pi),
  xi >> 1 (patches larger than the gap):    constant-potential behaviour,
      v -> -2,  z -> -2/3  (so Z/V -> 1/3, the electrostatic ratio).

The normalization int u g(u) du = 2 pi is what makes V_rms the physical
rms potential; both built-in correlations carry it exactly.
"""

import math

from deforce import gaussian_correlation, patch_vz

corr = gaussian_correlation()
z3 = 1.2020569031595943

print(f"{'xi':>8}{'v(xi)':>16}{'z(xi)':>16}{'z/v':>10}")
for xi in (1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3):
    v, _, z, _ = patch_vz(xi, corr)
    print(f"{xi:>8g}{v:>16.8e}{z:>16.8e}{z / v:>10.5f}")

print("\nsmall-xi laws at xi = 1e-3:")
xi = 1e-3
v, _, z, _ = patch_vz(xi, corr)
print(f"  v/(-g0 zeta3 xi^2/2pi)      - 1 = {v / (-corr.g0 * z3 * xi**2 / (2 * math.pi)) - 1:+.2e}")
print(f"  z/(-g0 (1+6 zeta3) xi^2/24pi) - 1 = "
      f"{z / (-corr.g0 * (1 + 6 * z3) * xi**2 / (24 * math.pi)) - 1:+.2e}")
print(f"\nlarge-xi limit: v(1e3) = {patch_vz(1e3, corr)[0]:.6f}  (-> -2)")
