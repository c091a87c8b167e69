import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dualize.algebra import (FiniteAlgebra, PartialOperation, Relation, algebra_homs, all_subuniverses,
                             build_power, closed_subsets, hom_set, hom_vectors, is_subuniverse,
                             structure_homs, subpower_algebra, subuniverse_closure, substructure)
from dualize.catalog import R5, THREE, algebra_Q, three
from dualize.errors import InputError

from oracles import naive_homs

ALGEBRAS = {"three": three(), "Q": algebra_Q()}


def test_r5_has_six_homs():
    r = Relation.from_names(THREE, 5, R5)
    assert len(hom_set(three(), r)) == 6


def test_homs_are_partial_operations_on_r():
    r = Relation.from_names(THREE, 5, R5)
    for h in hom_set(three(), r):
        assert h.domain == r


def test_projections_are_homs():
    M = three()
    for r in all_subuniverses(M, 2):
        if len(r):
            vecs = set(hom_vectors(M, r))
            assert {r.column(0), r.column(1)} <= vecs


def test_non_subuniverse_rejected():
    r = Relation.from_names(THREE, 2, ["0a", "a0"])
    assert not is_subuniverse(three(), r)
    with pytest.raises(InputError):
        hom_set(three(), r)


def test_subuniverse_counts_match_closure_oracle():
    # every subset of 3^2 closed under join and meet and containing 00 and 11
    M = three()
    pts = list(itertools.product(range(3), repeat=2))
    expect = 0
    for bits in range(1 << len(pts)):
        s = {p for i, p in enumerate(pts) if bits >> i & 1}
        if s and (0, 0) in s and (2, 2) in s and all(
                (max(a[0], b[0]), max(a[1], b[1])) in s and (min(a[0], b[0]), min(a[1], b[1])) in s
                for a in s for b in s):
            expect += 1
    assert len([r for r in all_subuniverses(M, 2) if len(r)]) == expect


def test_power_and_substructures():
    from dualize.catalog import load_fixture
    E = load_fixture("three_h").payload.as_structure()
    P = build_power(E, 2)
    assert P.size == 9
    subs = closed_subsets(P)
    assert () in subs and tuple(range(9)) in subs
    for S in subs:
        X = substructure(P, S)
        assert X.size == len(S)


def test_coordinate_projections_are_structure_homs():
    from dualize.catalog import load_fixture
    E = load_fixture("three_h").payload.as_structure()
    P = build_power(E, 2)
    for S in closed_subsets(P)[1:]:
        X = substructure(P, S)
        homs = set(structure_homs(X, E))
        for i in range(2):
            assert tuple(E.index[x[i]] for x in X.carrier) in homs


def test_subpower_algebra_homs_back_to_M():
    M = three()
    r = Relation.from_names(THREE, 2, ["00", "0a", "a1", "11"])
    A = subpower_algebra(M, r)
    assert len(algebra_homs(A, M)) == len(hom_vectors(M, r))


def test_from_functions_tables():
    M = FiniteAlgebra.from_functions("two", ("0", "1"), {"m": (2, lambda x, y: min(x, y))})
    assert M.tables["m"].tolist() == [[0, 0], [0, 1]]


def test_partial_operation_roundtrip():
    h = PartialOperation.from_names(THREE, 2, {"00": "0", "0a": "a"})
    assert h.domain.tuples == ((0, 0), (0, 1))
    assert PartialOperation.on_domain(h.domain, h.values) == h


@st.composite
def subuniverses(draw):
    name = draw(st.sampled_from(sorted(ALGEBRAS)))
    M = ALGEBRAS[name]
    k = draw(st.integers(1, 3 if M.size == 3 else 2))
    gens = draw(st.lists(st.tuples(*[st.integers(0, M.size - 1)] * k), min_size=1, max_size=3))
    return M, subuniverse_closure(M, k, gens)


@settings(max_examples=60, deadline=None)
@given(subuniverses())
def test_hom_set_agrees_with_filter_all_maps(case):
    M, r = case
    if len(r) > 8:
        return
    assert sorted(hom_vectors(M, r)) == naive_homs(M, r)
