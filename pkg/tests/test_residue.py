import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lazard.errors import ContainmentError, DenominatorError
from lazard.residue import (
    Residue,
    ResidueMatrix,
    howell_form,
    howell_span,
    quotient_order,
    solve_linear,
    span_order,
    to_residue,
    vp_fraction,
)


def brute_span(rows, mod, ncols):
    """All Z-combinations of the rows, mod ``mod``."""
    span = {tuple([0] * ncols)}
    for r in rows:
        span = {tuple((s[j] + t * r[j]) % mod for j in range(ncols)) for s in span for t in range(mod)}
    return span


def test_identity_howell():
    H = howell_form(ResidueMatrix.identity(2, 3, 2))
    assert H.rows == ((1, 0), (0, 1))
    assert [v for _, _, v in H.pivots] == [0, 0]


def test_span_orders_small():
    assert span_order(ResidueMatrix.from_rows([(3, 0), (0, 1)], 3, 2)) == 3
    rows = [(2, 2), (2, 6)]
    assert len(brute_span(rows, 8, 2)) == 8
    assert span_order(ResidueMatrix.from_rows(rows, 2, 3)) == 3
    assert span_order(ResidueMatrix.zeros(0, 3, 5, 1)) == 0


def test_solve_examples():
    x, ker = solve_linear(ResidueMatrix.zeros(2, 2, 3, 1), (0, 0))
    assert x == (0, 0) and ker.order_exponent() == 2
    M = ResidueMatrix.from_rows([(3, 0, 0), (0, 3, 0), (0, 0, 3)], 3, 2)
    x, ker = solve_linear(M, (0, 0, 0))
    assert ker.order_exponent() == 3
    assert all(all(c % 3 == 0 for c in r) for r in ker.rows)
    assert solve_linear(ResidueMatrix.from_rows([(2,)], 2, 2), (1,)) is None


def test_quotient_order_examples():
    full = howell_span([(1, 0), (0, 1)], 2, 2, 2)
    double = howell_span([(2, 0), (0, 2)], 2, 2, 2)
    assert quotient_order(full, double) == 2
    assert quotient_order(full, full) == 0
    assert quotient_order(howell_span([(1, 0), (0, 1)], 5, 1, 2), howell_span([], 5, 1, 2)) == 2
    with pytest.raises(ContainmentError) as exc:
        quotient_order(double, full)
    assert exc.value.witness is not None


def test_residue_and_rationals():
    assert to_residue(Fraction(1, 2), 3, 2) == 5
    with pytest.raises(DenominatorError):
        to_residue(Fraction(1, 6), 3, 2)
    assert vp_fraction(Fraction(1, 12), 3) == -1
    r = Residue(7, 3, 2)
    assert (r * r.inverse()).value == 1
    assert Residue(6, 3, 2).valuation() == 1


small_moduli = st.sampled_from([(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2)])


@st.composite
def small_matrices(draw):
    p, k = draw(small_moduli)
    mod = p**k
    nrows = draw(st.integers(0, 4))
    ncols = draw(st.integers(1, 3 if mod > 4 else 4))
    rows = [tuple(draw(st.integers(0, mod - 1)) for _ in range(ncols)) for _ in range(nrows)]
    return ResidueMatrix.from_rows(rows, p, k, ncols)


@settings(max_examples=150, deadline=None)
@given(small_matrices())
def test_howell_span_equals_enumeration(M):
    mod = M.modulus
    H = howell_form(M)
    expect = brute_span(M.rows, mod, M.ncols)
    assert set(H.elements()) == expect
    assert M.p ** H.order_exponent() == len(expect)
    # membership agrees with the enumeration on every vector
    for v in itertools.product(range(mod), repeat=M.ncols):
        assert H.contains(v) == (v in expect)
    # certificate
    for t, b in zip(H.transform.rows, H.basis.rows):
        assert M.vecmul(t) == b
    cols = [c for _, c, _ in H.pivots]
    assert cols == sorted(set(cols))
    for r, c, v in H.pivots:
        assert H.basis.rows[r][c] == M.p**v
    # deterministic
    assert howell_form(M) == H


@settings(max_examples=120, deadline=None)
@given(small_matrices(), st.data())
def test_solve_linear_against_search(M, data):
    if M.nrows == 0:
        return
    mod = M.modulus
    b = tuple(data.draw(st.integers(0, mod - 1)) for _ in range(M.ncols))
    res = solve_linear(M, b)
    sols = [x for x in itertools.product(range(mod), repeat=M.nrows) if M.vecmul(x) == b]
    if res is None:
        assert sols == []
        return
    x, ker = res
    assert M.vecmul(x) == b
    kern = {x for x in itertools.product(range(mod), repeat=M.nrows) if M.vecmul(x) == (0,) * M.ncols}
    assert set(ker.elements()) == kern
    assert len(sols) == len(kern)


@settings(max_examples=80, deadline=None)
@given(small_matrices(), st.data())
def test_span_order_invariant_under_row_ops(M, data):
    if M.nrows < 2:
        return
    e = span_order(M)
    rows = list(M.rows)
    data.draw(st.randoms()).shuffle(rows)
    unit = data.draw(st.sampled_from([u for u in range(1, M.modulus) if u % M.p]))
    rows[0] = tuple(unit * c for c in rows[0])
    rows[1] = tuple(a + b for a, b in zip(rows[1], rows[0]))
    assert span_order(ResidueMatrix.from_rows(rows, M.p, M.k, M.ncols)) == e
