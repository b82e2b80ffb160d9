"""Build a finite group from a Lie ring and check it against matrices.

The scaled Heisenberg ring over Z_3 has [e1, e2] = 3 e3. Truncated BCH turns
L/27L into a group of order 3^9, and that group is the unitriangular
group seen through the log map. We check both facts directly.
"""

from fractions import Fraction

import numpy as np

from lazard.bch import truncation_degree
from lazard.corpus import corpus_ring
from lazard.group import check_group_axioms, lazard_group, ppower_subgroup
from lazard.liering import uniformity

ring = corpus_ring("heisenberg-scaled-p3")
s, uniform = uniformity(ring)
print(f"rank {ring.rank}, prime {ring.prime}, valuation s = {s}, uniform: {uniform}")

cert = truncation_degree(ring.prime, 3, s)
print(f"BCH can stop at degree {cert.degree} modulo 27")
for n, coeff_val, term_val, src in cert.margins[:6]:
    print(f"  degree {n}: coefficient valuation {coeff_val}, term valuation {term_val} ({src})")

G = lazard_group(ring, 3)
print(f"|U_3| = {G.order}")
rep = check_group_axioms(G, "sampled", samples=20_000, seed=1)
print(f"group axioms on {rep.checked} sampled triples: ok = {rep.ok}")
for j in range(4):
    print(f"  index of the 3^{j}-th powers: 3^{ppower_subgroup(G, j)[1]}")


def exp_matrix(x):
    """exp(a E12 + 3b E23 + c E13) over Q; the square term is the only one."""
    a, b, c = x
    return [[1, a, c + Fraction(3 * a * b, 2)], [0, 1, 3 * b], [0, 0, 1]]


def log_coords(M, mod):
    """Coordinates of log(M) reduced mod ``mod``, with 1/2 read as a residue."""
    a, b3, c13 = M[0][1], M[1][2], M[0][2]
    c = c13 - a * b3 / 2
    return tuple(int(v.numerator * pow(v.denominator, -1, mod) % mod) for v in map(Fraction, (a, b3 / 3, c)))


def matmul(X, Y):
    return [[sum(X[i][r] * Y[r][j] for r in range(3)) for j in range(3)] for i in range(3)]


rng = np.random.default_rng(0)
mod = G.modulus
for _ in range(3):
    x, y = (tuple(int(v) for v in rng.integers(0, mod, 3)) for _ in range(2))
    xy = G.mul(x, y)
    same = xy == log_coords(matmul(exp_matrix(x), exp_matrix(y)), mod)
    print(f"{x} * {y} = {xy}; matches the matrix product: {same}")
