import itertools

import pytest
from hypothesis import given, settings, strategies as st

from lazard.corpus import corpus, corpus_ring
from lazard.errors import RingValidationError
from lazard.liering import (
    INFINITE_VALUATION,
    LieRingData,
    center,
    center_rank_table,
    check_valid,
    derivations,
    derived_ideal,
    exp_ad,
    h1_lie,
    is_derivation,
    reduce_ring,
    scale,
    uniformity,
    validate,
)
from lazard.residue import span_order

from oracles import leibniz_count

HEIS = LieRingData(3, 3, {(0, 1): (0, 0, 1)})
SL2 = LieRingData(3, 5, {(0, 1): (0, 2, 0), (0, 2): (0, 0, -2), (1, 2): (1, 0, 0)})


def test_validate_examples():
    assert validate(corpus_ring("abelian-d2-p3")).valid
    assert validate(HEIS).valid
    bad = LieRingData(3, 3, {(0, 1): (0, 0, 1), (0, 2): (1, 0, 0)})
    rep = validate(bad)
    assert not rep.valid and rep.first_violation == (1, 2, 3)
    with pytest.raises(RingValidationError) as exc:
        check_valid(bad)
    assert exc.value.triple == (1, 2, 3)


def test_structure_rejects_bad_shapes():
    with pytest.raises(RingValidationError):
        LieRingData(2, 3, {(1, 0): (1, 0)})
    with pytest.raises(RingValidationError):
        LieRingData(2, 3, {(0, 1): (1,)})
    with pytest.raises(RingValidationError):
        LieRingData(2, 4, {})


def test_uniformity_examples():
    assert uniformity(corpus_ring("abelian-d2-p3")) == (INFINITE_VALUATION, True)
    assert uniformity(corpus_ring("heisenberg-scaled-p3")) == (1, True)
    assert uniformity(HEIS) == (0, False)
    assert uniformity(scale(HEIS, 1)) == (1, True)
    assert uniformity(LieRingData(2, 2, {(0, 1): (2, 0)})) == (1, False)


def test_scale_examples():
    ab = corpus_ring("abelian-d2-p3")
    assert scale(ab, 2).brackets == ab.brackets
    assert scale(HEIS, 1).brackets == {(0, 1): (0, 0, 3)}
    sl = scale(SL2, 2)
    assert sl.brackets == {(0, 1): (0, 50, 0), (0, 2): (0, 0, -50), (1, 2): (25, 0, 0)}
    assert uniformity(sl) == (2, True) and validate(sl).valid


def test_corpus_documented():
    entries = corpus()
    assert len(entries) >= 6
    for e in entries:
        assert validate(e.ring.data).valid
        s, ok = uniformity(e.ring.data)
        assert (s, ok) == (e.s, e.uniform), e.name


def _center_scan(ring):
    mod = ring.modulus
    d = ring.dim
    out = set()
    for v in itertools.product(range(mod), repeat=d):
        if all(not any(ring.bracket(v, e)) for e in ring.basis()):
            out.add(v)
    return out


@pytest.mark.parametrize("name,k,exp", [("abelian-d2-p3", 2, 4), ("heisenberg-scaled-p3", 2, 4), ("sl2-scaled-p5", 1, 3), ("sl2-scaled-p3", 2, None), ("heisenberg-p3", 2, None)])
def test_center_against_scan(name, k, exp):
    ring = reduce_ring(corpus_ring(name), k)
    H, e = center(ring)
    scan = _center_scan(ring)
    assert set(H.elements()) == scan
    assert ring.p**e == len(scan)
    if exp is not None:
        assert e == exp
    if name == "heisenberg-scaled-p3":
        assert scan == {(3 * a % 9, 3 * b % 9, c) for a in range(3) for b in range(3) for c in range(9)}


def test_center_rank():
    assert center_rank_table(corpus_ring("heisenberg-scaled-p3"))[-1][1] == 1
    assert center_rank_table(corpus_ring("sl2-scaled-p5"))[-1][1] == 0
    assert center_rank_table(corpus_ring("abelian-d2-p3"))[-1][1] == 2


def test_derived_ideal():
    assert span_order(derived_ideal(reduce_ring(corpus_ring("abelian-d2-p3"), 2))) == 0
    H = derived_ideal(reduce_ring(corpus_ring("heisenberg-scaled-p3"), 2))
    assert H.rows == ((0, 0, 3),) and span_order(H) == 1
    # scaled sl2 at p = 5: 2 is a unit, so the image is 5 L mod 25
    assert span_order(derived_ideal(reduce_ring(corpus_ring("sl2-scaled-p5"), 2))) == 3


@pytest.mark.parametrize(
    "data,k",
    [
        (HEIS, 1),
        (SL2, 1),
        (LieRingData(3, 3, {(0, 1): (0, 2, 0), (0, 2): (0, 0, -2), (1, 2): (1, 0, 0)}), 1),
        (corpus_ring("heisenberg-scaled-p3"), 1),
        (corpus_ring("abelian-d2-p3"), 3),
        (corpus_ring("abelian-d2-p5"), 2),
        (LieRingData(2, 3, {(0, 1): (0, 3)}), 2),
    ],
)
def test_derivations_against_filter(data, k):
    ring = reduce_ring(data, k)
    D = derivations(ring)
    count, found = leibniz_count(data.structure, data.rank, data.prime, k)
    assert data.prime**D.der_order_exp == count
    if count <= 20000:
        assert set(D.der_basis.elements()) == {tuple(m) for m in found}
    for M in D.matrices("der"):
        assert is_derivation(ring, M)
    assert D.der_basis.contains_span(D.inn_basis)
    assert D.h1_order_exp == D.der_order_exp - D.inn_order_exp


def test_abelian_closed_form():
    for k in (1, 2, 3):
        ring = reduce_ring(corpus_ring("abelian-d2-p5"), k)
        D = derivations(ring)
        assert (D.der_order_exp, D.inn_order_exp, D.h1_order_exp) == (4 * k, 0, 4 * k)
        assert h1_lie(ring) == 4 * k


def test_sl2_at_5_has_only_inner_derivations():
    # integral sl2 at an odd prime: H^1 of a semisimple algebra vanishes
    assert h1_lie(reduce_ring(SL2, 1)) == 0
    assert h1_lie(reduce_ring(SL2, 2)) == 0


def test_ad_is_derivation_everywhere():
    for e in corpus():
        ring = reduce_ring(e.ring.data, 2)
        for x in ring.basis():
            assert is_derivation(ring, ring.ad(x))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2), st.sampled_from(["heisenberg-p3", "sl2-scaled-p5", "abelian-d2-p3"]))
def test_scale_shifts_valuation(s, name):
    data = corpus_ring(name)
    old, _ = uniformity(data)
    new, _ = uniformity(scale(data, s))
    assert new == old + s


def test_exp_ad_is_automorphism():
    ring = reduce_ring(corpus_ring("sl2-scaled-p3"), 3)
    mod = ring.modulus
    for x in [(1, 0, 0), (0, 1, 2), (2, 2, 1)]:
        A = exp_ad(ring, x)
        col = lambda v: tuple(sum(A[r][c] * v[c] for c in range(3)) % mod for r in range(3))  # noqa: E731
        for a, b in itertools.combinations(ring.basis(), 2):
            assert col(ring.bracket(a, b)) == ring.bracket(col(a), col(b))
