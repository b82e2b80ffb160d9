from fractions import Fraction

import numpy as np
import pytest

from lazard.autbound import (
    aut_bruteforce,
    bound_chain,
    bound_report,
    inn_order,
    lie_matrix_automorphisms,
    stabilization_k,
    totient,
    totient_ratio,
)
from lazard.corpus import corpus, corpus_ring
from lazard.errors import BudgetExceeded, UniformityError
from lazard.group import Endomorphism, lazard_group
from lazard.liering import LieRingData, ReducedLieRing, center, center_rank_table

from oracles import invertible_matrices_2x2

ABELIAN = corpus_ring("abelian-d2-p3")
HEIS = corpus_ring("heisenberg-scaled-p3")


def test_abelian_counts_match_matrix_enumeration():
    assert aut_bruteforce(lazard_group(ABELIAN, 1)).order == invertible_matrices_2x2(3, 3) == 48
    assert aut_bruteforce(lazard_group(ABELIAN, 2)).order == invertible_matrices_2x2(3, 9) == 3888


def test_cyclic_group_units():
    G = lazard_group(LieRingData(1, 3, {}), 2)
    assert aut_bruteforce(G).order == totient(3, 2) == 6


def test_chain_factors_multiply_to_order():
    r = aut_bruteforce(lazard_group(ABELIAN, 2))
    assert r.factors == (72, 54)
    assert np.prod(r.factors) == r.order


@pytest.mark.parametrize("name,m", [("abelian-d2-p3", 1), ("heisenberg-scaled-p3", 1), ("abelian-d2-p5", 1)])
def test_enumerate_agrees_with_chain(name, m):
    G = lazard_group(corpus_ring(name), m)
    full = aut_bruteforce(G, mode="enumerate")
    assert full.order == aut_bruteforce(G).order
    assert 0 < len(full.generator_images) <= 16


def test_witnesses_are_automorphisms():
    G = lazard_group(HEIS, 1)
    r = aut_bruteforce(G, mode="enumerate")
    for images in r.generator_images:
        A = np.array(images, dtype=np.int64).T % G.modulus
        phi = Endomorphism(G, A)
        assert phi.is_bijective()
        assert phi.homomorphism_failures()[0] == 0


def test_identity_is_counted():
    G = lazard_group(HEIS, 1)
    r = aut_bruteforce(G, mode="enumerate")
    ident = tuple(tuple(int(i == j) for j in range(3)) for i in range(3))
    assert ident in {tuple(map(tuple, w)) for w in r.generator_images}


def test_group_and_lie_counts_agree_on_small_corpus_groups():
    for entry in corpus():
        if not entry.uniform:
            continue
        G = lazard_group(entry.ring.data, 1)
        lie = lie_matrix_automorphisms(ReducedLieRing(entry.ring.data, 1))
        assert aut_bruteforce(G).order == lie.order, entry.name


def test_sl2_order_729_counts_agree():
    data = corpus_ring("sl2-scaled-p3")
    G = lazard_group(data, 2)
    assert G.order == 729
    assert aut_bruteforce(G).order == lie_matrix_automorphisms(ReducedLieRing(data, 2)).order == 472392


def test_lie_count_abelian_is_gl2():
    assert lie_matrix_automorphisms(ReducedLieRing(ABELIAN, 2)).order == 3888


def test_budget_refusals():
    G = lazard_group(corpus_ring("sl2-scaled-p3"), 2)
    with pytest.raises(BudgetExceeded):
        aut_bruteforce(G, budget=1)
    with pytest.raises(BudgetExceeded):
        aut_bruteforce(G, node_budget=10)
    with pytest.raises(BudgetExceeded):
        lie_matrix_automorphisms(ReducedLieRing(ABELIAN, 3), budget=10)


def test_search_is_deterministic():
    G = lazard_group(HEIS, 1)
    a, b = aut_bruteforce(G), aut_bruteforce(G)
    assert a.to_dict() == b.to_dict()


def test_inn_order():
    assert inn_order(lazard_group(ABELIAN, 2)).exponent == 0
    r = inn_order(lazard_group(HEIS, 2))
    assert r.center_exponent == 4 and r.exponent == 2
    assert r.method == "exhaustive"
    # the Lie-side center agrees with the exhaustive scan
    assert inn_order(lazard_group(HEIS, 2), budget=1).center_exponent == 4


def test_inn_bounded_by_noncentral_rank():
    for entry in corpus():
        if not entry.uniform:
            continue
        for m in (1, 2):
            G = lazard_group(entry.ring.data, m)
            if G.order > 729:
                continue
            d = entry.ring.data.rank
            z = center_rank_table(entry.ring.data)[-1][1]
            assert inn_order(G).exponent <= (d - z) * m


def test_lie_center_matches_exhaustive():
    for m in (1, 2):
        G = lazard_group(HEIS, m)
        assert inn_order(G).center_exponent == center(ReducedLieRing(HEIS, m))[1]


def test_stabilization_abelian_does_not_stabilize():
    r = stabilization_k(ABELIAN)
    assert not r.stabilizes
    assert [row[1] for row in r.table] == [4 * i for i in (1, 2, 3, 4, 5)]
    assert all(row[2] == 0 for row in r.table)


def test_stabilization_sl2_p5():
    r = stabilization_k(corpus_ring("sl2-scaled-p5"))
    assert r.stabilizes
    assert r.k == 1
    assert {row[3] for row in r.table} == {9}
    assert all(row[5] == "lie-der-inn" for row in r.table)


def test_stabilization_group_side_rows():
    r = stabilization_k(corpus_ring("sl2-scaled-p3"), levels=(1, 2, 3), group_budget=729)
    assert [row[0] for row in r.group_side] == [1, 2]
    assert r.to_dict()["groupSide"][0]["note"].startswith("finite-quotient")


def test_bound_chain_rank_41():
    rep = bound_chain(41, 1, k=3, i_max=5)
    assert rep.kernel_bound_exp == 1681 * 3
    assert [r.group_exp for r in rep.per_level] == [41 * i for i in range(1, 6)]
    assert [r.inn_exp_bound for r in rep.per_level] == [40 * i for i in range(1, 6)]
    assert rep.ratio_exponent == Fraction(40, 41)
    assert rep.D is None and rep.theorem_holds
    assert rep.to_dict()["ratioExponent"] == "40/41"


def test_bound_chain_numeric():
    rep = bound_chain(3, 1, k=1, i_max=2, p=3, aut_uk=11232)
    assert rep.D == 11232 * 3**9
    assert [r.aut_bound for r in rep.per_level] == [rep.D * 9, rep.D * 81]


def test_bound_chain_refuses_full_center():
    rep = bound_chain(2, 2, k=1, i_max=2)
    assert not rep.theorem_holds
    assert rep.ratio_exponent == 0


def test_heisenberg_bound_dominates_exact():
    rep = bound_report(HEIS, k=1, i_max=2, exact_levels=(2,))
    assert rep.z == 1 and rep.ratio_exponent == Fraction(2, 3)
    row = rep.per_level[1]
    assert row.exact_aut == 8503056
    assert row.dominates and row.exact_aut < row.aut_bound


def test_abelian_report_refuses():
    rep = bound_report(ABELIAN, i_max=2, levels=(1, 2, 3))
    assert not rep.theorem_holds
    assert any("Der/Inn" in r for r in rep.refusals)
    assert any("z = d" in r for r in rep.refusals)


def test_sl2_report_end_to_end():
    rep = bound_report(corpus_ring("sl2-scaled-p5"), i_max=3)
    assert rep.theorem_holds and rep.k == 1 and rep.k_source == "stabilization"
    assert rep.aut_uk == 1488000
    assert rep.D == 1488000 * 5**9


def test_report_rejects_non_uniform():
    with pytest.raises(UniformityError):
        bound_report(corpus_ring("heisenberg-p3"))


def test_totient_ratio():
    assert totient(3, 4) == 54 and totient(5, 0) == 1
    r = totient_ratio(3, 4, 3888)
    assert r.ratio == 72
    r = totient_ratio(3, 6, 8503056, d=3, z=1)
    assert r.power_ratio == Fraction(8503056**3, totient(3, 6) ** 2)
    assert r.approx == pytest.approx(8503056 / totient(3, 6) ** (2 / 3))
