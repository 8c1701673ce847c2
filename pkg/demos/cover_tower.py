"""Finite covers of the genus-2 surface: census, a meet, lifted spectra and bundle weights.

Run: python3 demos/cover_tower.py
"""

from polyakov import bolza_group, enumerate_spectrum
from polyakov.bundles import limit_weight, mumford_weight
from polyakov.covers import cover_morphism, enumerate_covers, lift_spectrum, meet, trivial_node

for n in (1, 2, 3, 4):
    c = enumerate_covers(2, n)
    print(f"index {n}: {c.based_count} subgroups, {c.unbased_count} up to conjugacy")

base = trivial_node(2)
H, K = enumerate_covers(2, 2).nodes[:2]
M = meet(H, K)
print(f"meet of two index-2 covers: index {M.index}, genus {M.genus}")

spec = enumerate_spectrum(bolza_group(), 4.0)
for node in (H, K):
    L = lift_spectrum(spec, node)
    print(f"  cover genus {node.genus}: shortest lifted length {L.classes[0].length:.6f} x{L.classes[0].multiplicity}")

paths = {"via H": [cover_morphism(H, base), cover_morphism(M, H)],
         "via K": [cover_morphism(K, base), cover_morphism(M, K)]}
for n in (0, 1, 2, 3):
    w = {k: limit_weight(p, mumford_weight(base, n)) for k, p in paths.items()}
    print(f"DET_{n}: normalized weight {w}")
