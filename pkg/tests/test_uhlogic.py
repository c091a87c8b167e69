import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dualize.algebra import FiniteStructure, PartialOperation, Relation, build_power, closed_subsets, substructure
from dualize.catalog import R5, SIGNATURE_3, SIGNATURE_Q, THREE, load_fixture, sentences
from dualize.duality import sharp_enrich
from dualize.errors import InputError
from dualize.syntax import BOTTOM, App, Eq, Rel, Var
from dualize.uhlogic import (BetaTable, UHSentence, canonical_embedding_failure, in_finite_dual_class,
                             is_pure, models, naturalize, parse_sentence, parse_sentences, premise_relation,
                             print_sentence, purify, same_up_to_renaming, validate_basis)

SIG = {"f": ("op", 1), "g": ("op", 1), "s": ("op", 2), "r": ("rel", 2)}
VARS = ["u", "v", "w", "x"]


# ---------------------------------------------------------------- syntax

def terms(depth=2):
    leaf = st.sampled_from(VARS).map(Var)
    return st.recursive(leaf, lambda t: st.one_of(
        st.builds(lambda a: App("f", (a,)), t),
        st.builds(lambda a: App("g", (a,)), t),
        st.builds(lambda a, b: App("s", (a, b)), t, t)), max_leaves=4)


apps = terms().filter(lambda t: isinstance(t, App))
atoms = st.one_of(
    st.builds(Eq, terms(), terms()),
    apps.map(lambda t: Eq(t, t)),
    st.builds(lambda a, b: Rel("r", (a, b)), terms(), terms()))


@st.composite
def uh_sentences(draw):
    premise = draw(st.lists(atoms, max_size=3))
    conclusion = draw(st.one_of(atoms, st.just(BOTTOM)))
    return UHSentence(VARS, premise, conclusion)


@settings(max_examples=150, deadline=None)
@given(uh_sentences())
def test_print_parse_roundtrip(s):
    assert parse_sentence(print_sentence(s), SIG) == s


def test_parse_forms():
    s = parse_sentence("! u v : f(u)=v -> def g(v)", SIG)
    assert s.premise == (Eq(App("f", (Var("u"),)), Var("v")),)
    assert s.conclusion == Eq(App("g", (Var("v"),)), App("g", (Var("v"),)))
    assert parse_sentence("! u : true -> false", SIG).premise == ()
    assert parse_sentence("! u : f(u)=u", SIG).premise == ()
    assert parse_sentence("! u v : r(u,v) -> u=v", SIG).premise == (Rel("r", (Var("u"), Var("v"))),)


@pytest.mark.parametrize("text, where", [
    ("! u : f(u)= -> u=u", "column 13"),
    ("! u : f(z)=u", "column 9"),
    ("! u : q(u)=u", "column 7"),
    ("! u u : u=u", "column 5"),
    ("! u : r(u)=u", "column 7"),
    ("! u : u=u $", "column 11"),
])
def test_parse_errors_have_positions(text, where):
    with pytest.raises(InputError, match=f"line 3, {where}"):
        parse_sentence(text, SIG, line=3)


def test_parse_sentences_labels_and_comments():
    got = parse_sentences("# c\n[7] ! u : f(u)=u\n\n! u : g(u)=u  # trailing\n", SIG)
    assert [lab for lab, _ in got] == ["7", "2"]


# ---------------------------------------------------------------- purification

def _labeled(name):
    return load_fixture(name).payload


def test_purify_Q_basis():
    basis = dict(_labeled("basis_Q1"))
    sig = SIGNATURE_Q
    one = purify(basis["1"])
    assert len(one) == 2
    assert same_up_to_renaming(one[0], parse_sentence("! u v : f(u)=v -> def g(v)", sig))
    assert same_up_to_renaming(one[1], parse_sentence("! u v w : f(u)=v & g(v)=w -> w=u", sig))
    assert purify(basis["3"]) == [basis["3"]]


def test_purify_sigma_sentence_3():
    s = dict(_labeled("sigma_basis_three"))["3"]
    (p,) = purify(s)
    assert same_up_to_renaming(
        p, parse_sentence("! u v a b : sigma(u,v)=a & sigma(v,u)=b -> u=v", SIGNATURE_3))


@pytest.mark.parametrize("name", ["sigma_basis_three", "basis_Q1", "sentence_4prime", "h_sentences"])
def test_purify_outputs_are_pure(name):
    for s in sentences(name):
        for p in purify(s):
            assert is_pure(p)
        if is_pure(s):
            assert purify(s) == [s]


def _fixture_structures():
    out = []
    for name in ("three0", "three_sigma", "three_h", "three_empty", "Q0", "Q1"):
        E = load_fixture(name).payload.as_structure()
        out.append(E)
        P = build_power(E, 2)
        subs = closed_subsets(P)
        out += [substructure(P, S) for S in subs[:: max(1, len(subs) // 40)]]
    return out


FIXTURE_SENTENCES = [s for n in ("sigma_basis_three", "basis_Q1", "sentence_4prime", "h_sentences")
                     for s in sentences(n)]


def _applies(s, X):
    return all(sym in X.signature and X.signature[sym] == (k, a) for k, sym, a in s.symbols())


def test_purify_preserves_truth_on_fixture_structures():
    checked = 0
    for X in _fixture_structures():
        for s in FIXTURE_SENTENCES:
            if _applies(s, X):
                assert models(X, s) == all(models(X, p) for p in purify(s)), (X.name, str(s))
                checked += 1
    assert checked > 100


@st.composite
def partial_structures(draw, signature):
    n = draw(st.integers(1, 3))
    carrier = tuple(str(i) for i in range(n))
    ops, rels = {}, {}
    for sym, (kind, k) in sorted(signature.items()):
        if kind == "op":
            items = []
            for args in itertools.product(range(n), repeat=k):
                v = draw(st.one_of(st.none(), st.integers(0, n - 1)))
                if v is not None:
                    items.append((args, v))
            ops[sym] = PartialOperation(carrier, k, tuple(items))
        else:
            rows = draw(st.sets(st.tuples(*[st.integers(0, n - 1)] * k)))
            rels[sym] = Relation(carrier, k, rows)
    return FiniteStructure(carrier, rels, ops)


@settings(max_examples=80, deadline=None)
@given(partial_structures(SIGNATURE_3), st.sampled_from(
    [s for n in ("sigma_basis_three", "sentence_4prime", "h_sentences") for s in sentences(n)]))
def test_purify_preserves_truth_on_random_structures(X, s):
    assert models(X, s) == all(models(X, p) for p in purify(s))


@settings(max_examples=60, deadline=None)
@given(partial_structures(SIGNATURE_Q), st.sampled_from(sentences("basis_Q1")))
def test_purify_preserves_truth_on_random_Q_structures(X, s):
    assert models(X, s) == all(models(X, p) for p in purify(s))


# ---------------------------------------------------------------- models and premise relations

@pytest.mark.parametrize("ego, basis", [("three_sigma", "sigma_basis_three"), ("Q1", "basis_Q1"),
                                        ("three_h", "h_sentences")])
def test_egos_satisfy_their_sentences(ego, basis):
    E = load_fixture(ego).payload.as_structure()
    for s in sentences(basis):
        assert models(E, s)


def test_three0_fails_sentence_4prime_premise_relation():
    X = load_fixture("three0").payload.as_structure()
    (s,) = sentences("sentence_4prime")
    (p,) = purify(s)
    r = premise_relation(X, p)
    # columns follow the quantifier order u v w x y
    assert r == Relation.from_names(THREE, 5, R5)


def test_validate_basis_of_Q1():
    res = validate_basis(load_fixture("Q1").payload, sentences("basis_Q1"), size_bound=2)
    assert res.verdict == "pass"


def test_validate_basis_detects_false_sentence():
    bad = parse_sentence("! u : -> def f(u)", SIGNATURE_Q)
    res = validate_basis(load_fixture("Q1").payload, [bad])
    assert res.verdict == "fail" and res.failing_sentence == bad


def test_structures_from_powers_lie_in_dual_class():
    E = load_fixture("three_h").payload
    P = build_power(E.as_structure(), 2)
    for S in closed_subsets(P):
        assert in_finite_dual_class(substructure(P, S), E)


def test_structure_outside_dual_class():
    # f(x) = y with f undefined at y cannot embed: f is idempotent on its domain in three_h
    carrier = ("x", "y")
    f = PartialOperation(carrier, 1, (((0,), 1),))
    X = FiniteStructure(carrier, {}, {"f": f, "g": PartialOperation(carrier, 1, ()),
                                      "h": PartialOperation(carrier, 2, ())})
    assert canonical_embedding_failure(X, load_fixture("three_h").payload) is not None


def test_naturalized_sentences_agree_with_enriched_structures():
    Eh = load_fixture("three_h").payload
    Es = load_fixture("three_sigma").payload
    betas = BetaTable(Eh, Es)
    pure = [p for s in sentences("sigma_basis_three") for p in purify(s)]
    nats = [naturalize(p, betas) for p in pure]
    P = build_power(Eh.as_structure(), 2)
    for S in closed_subsets(P):
        X = substructure(P, S)
        enriched = sharp_enrich(X, betas, ["sigma"])
        for p, nat in zip(pure, nats):
            assert models(X, nat) == models(enriched, p)
