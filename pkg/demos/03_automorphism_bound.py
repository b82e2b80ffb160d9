"""Count automorphisms by brute force and compare with the level-by-level bound.

For sl2 scaled by p, Der/Inn settles at every level, so k is read off a
short table. The bound |Aut(U_i)| <= |Aut(U_k)| p^(d^2 k) |Inn(U_i)| is then
compared with exact counts at small levels.
"""

from lazard.autbound import aut_bruteforce, bound_chain, bound_report, stabilization_k
from lazard.corpus import corpus_ring
from lazard.group import lazard_group

ring = corpus_ring("sl2-scaled-p3")
stab = stabilization_k(ring)
print(f"Der/Inn stabilises: {stab.stabilizes}, k = {stab.k}")
for i, der, inn, h1, ann, _ in stab.table:
    print(f"  level {i}: |Der| = 3^{der}, |Inn| = 3^{inn}, |Der/Inn| = 3^{h1}, annihilated by 3^{ann}")

for m in (1, 2):
    res = aut_bruteforce(lazard_group(ring, m))
    print(f"|Aut(U_{m})| = {res.order}")

rep = bound_report(ring, i_max=3, exact_levels=(2,))
print(f"D = {rep.D_text()}, theorem-style conclusion holds: {rep.theorem_holds}")
for line in rep.chain_text():
    print("  " + line)

print("symbolic chain for d = 41, z = 1, k = 2:")
for line in bound_chain(41, 1, 2, i_max=3).chain_text():
    print("  " + line)
