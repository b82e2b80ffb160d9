from fractions import Fraction

import numpy as np
import pytest

from lazard.bch import (
    BchEvaluator,
    associative_bch,
    bch_series,
    evaluate_bch,
    hall_basis,
    hall_word,
    lazard_bound,
    series_to_associative,
    truncation_degree,
)
from lazard.corpus import corpus_ring
from lazard.errors import DenominatorError, UniformityError
from lazard.liering import LieRingData, reduce_ring
from lazard.residue import vp_fraction

from oracles import all_vectors, heisenberg_matrix_mul, witt_dimension


def test_hall_counts_match_witt():
    basis = hall_basis(12)
    for n in range(1, 13):
        assert len(basis[n]) == witt_dimension(n), n
    assert [str(w) for w in basis[1]] == ["a", "b"]
    assert sorted(str(w) for w in basis[3]) == ["[a,[a,b]]", "[b,[a,b]]"]


def test_low_degree_coefficients():
    S = bch_series(3)
    assert S.coefficient("a") == 1 and S.coefficient("b") == 1
    assert S.coefficient("[a,b]") == Fraction(1, 2)
    assert S.coefficient("[a,[a,b]]") == Fraction(1, 12)
    assert S.coefficient("[b,[a,b]]") == Fraction(-1, 12)


@pytest.mark.parametrize("D", [2, 4, 6])
def test_series_matches_associative_expansion(D):
    assert series_to_associative(bch_series(D)) == associative_bch(D)


def test_prefix_stability():
    big = bch_series(9)
    for D in range(1, 9):
        assert big.truncate(D) == bch_series(D)


def test_lazard_denominator_bound():
    S = bch_series(12)
    for p in (2, 3, 5, 7, 11, 13):
        for w, c in S.coefficients:
            assert vp_fraction(c, p) >= lazard_bound(w.degree, p), (p, str(w), c)


def _scan_oracle(p, k, s, top=8):
    # free Lie ring is a direct summand of the tensor algebra, so the least
    # valuation of Hall coefficients equals that of the word coefficients
    full = associative_bch(top)
    def v(n):
        vals = [vp_fraction(c, p) for w, c in full.items() if len(w) == n]
        return min(vals)
    D = 1
    while any((n - 1) * s + v(n) < k for n in range(D + 1, top + 1)):
        D += 1
    return D


@pytest.mark.parametrize("p,k,s,D", [(3, 1, 1, 1), (5, 1, 1, 1), (7, 1, 1, 1), (5, 3, 1, 3), (3, 2, 2, 1), (3, 3, 1, 5)])
def test_truncation_degree(p, k, s, D):
    cert = truncation_degree(p, k, s)
    assert cert.degree == D
    assert _scan_oracle(p, k, s) == D
    assert all(m >= k for n, _, m, _ in cert.margins if n > D)
    assert cert.margins[-1][0] == D + cert.scan_window
    assert any(m < k for n, _, m, _ in cert.margins if n == D) or D == 1


def test_truncation_rejects_p2_s1():
    with pytest.raises(UniformityError):
        truncation_degree(2, 3, 1)
    assert truncation_degree(2, 2, 2).degree >= 1


def test_evaluate_examples():
    heis = reduce_ring(corpus_ring("heisenberg-scaled-p3"), 2)
    S = bch_series(8)
    assert evaluate_bch(S, heis, (1, 0, 0), (0, 1, 0)) == (1, 1, 6)
    ab = reduce_ring(corpus_ring("abelian-d2-p3"), 3)
    assert evaluate_bch(S, ab, (5, 7), (25, 1)) == (3, 8)


def test_short_series_rejected():
    ring = reduce_ring(corpus_ring("heisenberg-scaled-p3"), 3)
    with pytest.raises(ValueError):
        evaluate_bch(bch_series(2), ring, (1, 0, 0), (0, 1, 0))


def test_denominator_error_when_brackets_too_shallow():
    # unscaled Heisenberg: the 1/2 on [a,b] is fine at p=3 but 1/12 needs s >= 1
    heis = reduce_ring(corpus_ring("heisenberg-p3"), 2)
    with pytest.raises(DenominatorError):
        BchEvaluator(bch_series(3), heis)


@pytest.mark.parametrize("m", [2, 3])
def test_heisenberg_against_matrix_oracle(m):
    ring = reduce_ring(corpus_ring("heisenberg-scaled-p3"), m)
    ev = BchEvaluator(bch_series(8), ring, truncation_degree(3, m, 1).degree)
    V = all_vectors(3, 3**m)
    rng = np.random.default_rng(1)
    if m == 2:
        X = np.repeat(V, len(V), axis=0)
        Y = np.tile(V, (len(V), 1))
    else:
        X = V[rng.integers(0, len(V), 50000)]
        Y = V[rng.integers(0, len(V), 50000)]
    assert np.array_equal(ev.batch(X, Y), heisenberg_matrix_mul(X, Y, 3, 3**m))
    # scalar path agrees with the vector path
    for x, y in zip(X[:200].tolist(), Y[:200].tolist()):
        assert ev(x, y) == tuple(heisenberg_matrix_mul([x], [y], 3, 3**m)[0])


@pytest.mark.parametrize("name,m", [("heisenberg-scaled-p3", 3), ("sl2-scaled-p3", 3), ("sl2-scaled-p5", 2), ("sl2-scaled2-p5", 3)])
def test_inverse_and_identity_laws(name, m):
    ring = reduce_ring(corpus_ring(name), m)
    mod = ring.modulus
    ev = BchEvaluator(bch_series(12), ring, truncation_degree(ring.p, m, ring.s).degree)
    rng = np.random.default_rng(7)
    X = rng.integers(0, mod, (10_000, 3))
    assert not ev.batch(X, (-X) % mod).any()
    assert np.array_equal(ev.batch(X, np.zeros_like(X)), X)
    assert np.array_equal(ev.batch(np.zeros_like(X), X), X)


def test_hall_word_parse_roundtrip():
    for words in hall_basis(6).values():
        for w in words:
            assert hall_word(str(w)) == w
    with pytest.raises(ValueError):
        hall_word("[b,a]")
