import itertools

import numpy as np
import pytest

from projconsensus import connectivity as cn
from projconsensus import digraph as dg
from projconsensus.connectivity import PopulationOracle, SubsetClass
from projconsensus.errors import CapacityError, InvalidInputError
from projconsensus.generators import (random_blocks, random_graph,
                                      random_strongly_connected, split_arcs)
from projconsensus.linalg import Subspace

from conftest import PAPER_A

C = dg.DiGraph
PAPER_PARTIAL = [{1}, {2}, {3}, {4}, {1, 3}, {2, 4}]


@pytest.fixture
def paper_oracle():
    return PopulationOracle.from_blocks([PAPER_A[[i]] for i in range(4)])


def test_paper_classification(paper_oracle):
    for k in range(1, 5):
        for E in itertools.combinations(range(1, 5), k):
            expected = (SubsetClass.PARTIALLY_POPULATED if set(E) in PAPER_PARTIAL
                        else SubsetClass.FULLY_POPULATED)
            assert cn.classify_subset(paper_oracle, E) is expected
    assert cn.classify_subset(paper_oracle, range(1, 5)) is SubsetClass.FULLY_POPULATED
    with pytest.raises(InvalidInputError):
        cn.classify_subset(paper_oracle, [])


def test_zero_kernel_member_forces_full(rng):
    blocks = [np.eye(3), rng.standard_normal((1, 3)), rng.standard_normal((2, 3))]
    o = PopulationOracle.from_blocks(blocks)
    assert o.is_unique
    for E in ([1], [1, 2], [1, 3], [1, 2, 3]):
        assert o.is_fully_populated(E)


def test_global_intersection_inside_each_kernel(rng):
    for _ in range(30):
        o = PopulationOracle.from_blocks(random_blocks(rng, 4, 5, kernel_dim=2))
        B = o.global_intersection.basis
        for P in o.projectors:
            assert np.allclose(P @ B, B, atol=1e-9)


def test_strongly_connected_always_d_connected(rng):
    for _ in range(50):
        m = int(rng.integers(2, 7))
        o = PopulationOracle.from_blocks(random_blocks(rng, m, int(rng.integers(2, 6))))
        G = random_strongly_connected(rng, m)
        assert cn.is_d_connected(o, G) and cn.is_d_connected_bruteforce(o, G)


def test_fast_check_examples(paper_oracle):
    assert cn.is_d_connected(paper_oracle, C.complete(4))
    assert not cn.is_d_connected(paper_oracle, C.self_arcs_only(4))


def test_fast_check_matches_bruteforce(rng):
    for _ in range(200):
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        kd = int(rng.integers(0, n))
        o = PopulationOracle.from_blocks(random_blocks(rng, m, n, kernel_dim=kd,
                                                       dup_prob=0.5))
        G = random_graph(rng, m, rng.random() * 0.5)
        assert cn.is_d_connected(o, G) == cn.is_d_connected_bruteforce(o, G)


def test_bruteforce_cap(paper_oracle):
    with pytest.raises(CapacityError):
        cn.is_d_connected_bruteforce(paper_oracle, C.complete(4), cap=3)


def test_witness_searches(paper_oracle):
    D = lambda G: cn.is_d_connected(paper_oracle, G)
    g1 = cn.search_witness(4, lambda G: D(G) and not dg.is_strongly_connected(G))
    g2 = cn.search_witness(4, lambda G: D(G) and not dg.is_rooted(G))
    g3 = cn.search_witness(4, lambda G: dg.is_rooted(G) and not D(G))
    for g in (g1, g2, g3):
        assert g is not None and g.has_all_self_arcs and g.m == 4
    assert cn.is_d_connected_bruteforce(paper_oracle, g2) and not dg.is_rooted(g2)
    assert not cn.is_d_connected_bruteforce(paper_oracle, g3)


def test_jointly_predicates(paper_oracle, rng):
    G = C.complete(4)
    assert cn.is_jointly_d_connected(paper_oracle, [G])
    assert cn.is_jointly_rooted([G]) and cn.is_jointly_strongly_connected([G])
    I = C.self_arcs_only(4)
    assert not cn.is_jointly_rooted([I, I, I])
    assert not cn.is_jointly_d_connected(paper_oracle, [I, I])
    # cycle split into halves: neither half D-connected, the pair is
    cycle = C(4, [(1, 2), (2, 3), (3, 4), (4, 1)], add_self_arcs=True)
    parts = split_arcs(cycle, 2, rng)
    while any(cn.is_d_connected(paper_oracle, p) for p in parts):
        parts = split_arcs(cycle, 2, rng)
    assert cn.is_jointly_d_connected(paper_oracle, parts + parts)


def test_repeated_windows(paper_oracle):
    D = lambda G: cn.is_d_connected(paper_oracle, G)
    K, I = C.complete(4), C.self_arcs_only(4)
    seq = dg.PeriodicSequence([K, I])
    for h in (1, 5, 40):
        assert cn.is_repeatedly_jointly(seq, 2, 1, h, D).ok
    assert cn.is_repeatedly_jointly(dg.PeriodicSequence([K]), 1, 1, 10, D)
    bad = dg.ExplicitSequence([K, I, I, I, K, I])
    rep = cn.is_repeatedly_jointly(bad, 2, 1, 3, D)
    assert not rep.ok and rep.failing_windows == [1]
    with pytest.raises(InvalidInputError):
        cn.is_repeatedly_jointly(bad, 2, 1, 4, D)


def test_strong_equivalence(paper_oracle, rng):
    o = PopulationOracle.from_blocks([rng.standard_normal((1, 4)) for _ in range(3)])
    assert cn.check_strong_equivalence(o)
    assert not cn.check_strong_equivalence(paper_oracle)
    assert paper_oracle.is_fully_populated({1, 2})
    o2 = PopulationOracle([Subspace.zero(3), Subspace.full(3)])
    assert not cn.check_strong_equivalence(o2)


def test_strong_equivalence_means_d_iff_sc(rng):
    o = PopulationOracle.from_blocks([rng.standard_normal((1, 4)) for _ in range(4)])
    assert cn.check_strong_equivalence(o)
    for _ in range(100):
        G = random_graph(rng, 4, rng.random() * 0.5)
        assert cn.is_d_connected(o, G) == dg.is_strongly_connected(G)


def test_connectivity_report(paper_oracle):
    rep = cn.connectivity_report(paper_oracle, C.self_arcs_only(4))
    assert rep["d_connected"] is False
    assert rep["failing_subsets"] == [[1], [2], [3], [4], [1, 3], [2, 4]]
    assert rep["global_intersection_dim"] == 2
