"""Zoll reference constants and the Zoll polynomial, two ways.

The generic polynomial integrates pairing data <(c0 + t e0)^m, [M]>
term-by-term; the closed form evaluates the constant-curvature expression
K_eff [(1 + A/(pi a^2(1)))^{2n} - 1].  On the derived model-bundle pairings
the two routes must agree to full precision -- a digit-level cross-check of
both implementations.
"""

import math

from magsys_lab import (inequality_constant_C, k_tilde, kahler_bundle_pairings,
                        make_reference, reference_length,
                        zoll_polynomial_generic, zoll_polynomial_kahler)

for kappa, s in ((1.0, 1.0), (0.0, 1.0), (-1.0, 2.0)):
    ref = make_reference(kappa, s)
    print(f"kappa={kappa:+g} s={s:g}:  a^2(1) = {ref.a1_squared:.9f}   "
          f"pi a^2(1) = {ref.reference_magnetic_length:.9f}")

print("\nfull-inequality constant for the round sphere (kappa=1, s=1, n=1):")
vol = 4 * math.pi
print(f"    K_tilde = {k_tilde(1.0, 1.0, 1):.9f}")
print(f"    C       = {inequality_constant_C(1.0, 1.0, 1, vol):.9f}   "
      "(coefficient of the volume defect in the affine bound)")

print("\nP(A) via closed form vs generic pairings (flat torus, s = 1):")
coh = kahler_bundle_pairings(0.0, 1.0, 1)
print(f"    derived pairings: {[f'{p:.6f}' for p in coh.pairings]}")
ref_len = reference_length(0.0, 1.0)
print(f"    {'A':>10s} {'P_kahler':>14s} {'P_generic':>14s} {'diff':>9s}")
for frac in (-0.4, -0.1, 0.0, 0.1, 0.4):
    a = frac * ref_len
    pk = zoll_polynomial_kahler(0.0, 1.0, 1, None, a)
    pg = zoll_polynomial_generic(coh, a)
    print(f"    {a:10.6f} {pk:14.9f} {pg:14.9f} {abs(pk - pg):9.1e}")
