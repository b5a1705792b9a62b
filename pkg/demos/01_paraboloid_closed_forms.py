"""
Paraboloid gap: the two derivative-expansion orders in closed form
==================================================================

For the revolution paraboloid psi = a (1 + rho^2 / sigma^2) and densities
V = Z = 1/psi^3 the two leading functionals integrate exactly:

    F0 = (pi/2) sigma^2 / a^3        F2 = 2 pi / a

The second-order term is smaller by (a/sigma)^2, the generic pattern for
gently curved surfaces. We also show the lateral-scaling fingerprints that
identify each derivative order: F0 ~ 1/lam^2, F2 invariant, and the closed
fourth-order piece F42 ~ lam^2.
"""

import math

from deforce import eval_de2, eval_de4_term, kernel_power_law, make_paraboloid, scale_lateral

a, sigma = 1.0, 10.0
kernel = kernel_power_law(1.0, 1.0, 3.0, c0=1.0)

profile = make_paraboloid(a, sigma)
res = eval_de2(kernel, profile)
print(f"F0 numeric  = {res.f0:.12f}   closed form = {0.5 * math.pi * sigma**2 / a**3:.12f}")
print(f"F2 numeric  = {res.f2:.12f}   closed form = {2.0 * math.pi / a:.12f}")
print(f"F2/F0 = {res.f2 / res.f0:.6f}  ~ 4 (a/sigma)^2 = {4 * (a / sigma) ** 2:.6f}")

# lateral scaling: each order reacts with its own power of lam
finite = make_paraboloid(a, sigma, rho_max=30.0)
base = eval_de2(kernel, finite)
f4_base, _ = eval_de4_term(kernel.c, finite)
print("\nlam      F0*lam^2/F0      F2/F2           F42/(lam^2 F42)")
for lam in (0.5, 2.0, 4.0):
    scaled = scale_lateral(finite, lam)
    r = eval_de2(kernel, scaled)
    f4, _ = eval_de4_term(kernel.c, scaled)
    print(f"{lam:<8g}{r.f0 * lam**2 / base.f0:<16.12f}{r.f2 / base.f2:<16.12f}"
          f"{f4 / (lam**2 * f4_base):<16.12f}")
