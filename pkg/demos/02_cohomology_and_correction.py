"""Cocycles, coboundaries and the correction of an automorphism by an inner one.

An automorphism that is trivial modulo p but not modulo p^2 leaves behind a
crossed homomorphism. When that class is a coboundary we can compose with an
inner automorphism and push the deviation one level deeper.
"""

import numpy as np

from lazard.cohomology import adjoint_action, correct_automorphism, section_action, z1_space
from lazard.corpus import corpus_ring
from lazard.group import Endomorphism, inner_automorphism, lazard_group

G = lazard_group(corpus_ring("heisenberg-scaled-p3"), 3)

for action in (section_action(G, 1, 2), adjoint_action(G, 1)):
    S = z1_space(action)
    print(f"{action.label}: |Z1| = 3^{S.z1_exp}, |B1| = 3^{S.b1_exp}, |H1| = 3^{S.h1_exp}")

shear = Endomorphism(G, ((1, 0, 0), (9, 1, 0), (0, 0, 1)))
phi = inner_automorphism(G, (0, 1, 0)).compose(shear)
res = correct_automorphism(G, phi, 1)
print(f"correction found: {res.found}, inner part g = {res.g}, new level {res.level}")

E = G.elements()
moved = (res.phi_prime.apply_batch(E) - E) % G.p**res.level
print(f"phi' is the identity modulo 3^{res.level} on all {len(E)} elements: {not moved.any()}")
