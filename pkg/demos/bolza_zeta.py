"""Bolza surface: length spectrum, truncated Selberg zeta and the density factor.

Run: python3 demos/bolza_zeta.py
"""

import math

from polyakov import bolza_group, enumerate_spectrum, polyakov_density, zeta_truncated

G = bolza_group()
spec = enumerate_spectrum(G, 6.0)
print(f"{len(spec)} oriented primitive classes up to L = {spec.cutoff}")
for c in spec.classes[:4]:
    print(f"  length {c.length:.6f}  multiplicity {c.multiplicity:3d}  |tr| = {2 * math.cosh(c.length / 2):.6f}")

for s in (1.5, 2.0, 3.0):
    z = zeta_truncated(spec, s)
    print(f"Z({s}) ~ {z.value:.8f}  (tail <= {z.tail_estimate:.2e})")

d = polyakov_density(spec, allow_unstable=True)
print(f"Z'(1) ~ {d.z_prime_at_1:.4g} +- {d.z_prime_uncertainty:.2g}")
lo, hi = d.interval
print(f"density ratio Z'(1)^-13 Z(2) ~ {d.density_ratio:.4g}, interval [{lo:.3g}, {hi:.3g}]")
