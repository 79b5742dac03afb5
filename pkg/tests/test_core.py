import itertools

import pytest
from hypothesis import given, settings, strategies as st

from stablemodels.core import (
    INT64_MAX,
    Literal,
    OptimizeStatement,
    OptKind,
    Program,
    RawStatement,
    RuleKind,
    UnrepresentableWeight,
    atoms_of,
    basic,
    build_program,
    combine_minimize,
    maximize_to_minimize,
    nonnegative_statement,
    normalize_weight_rule,
)
from stablemodels.semantics import optimal_bruteforce
from stablemodels.textio import parse, render

from programs import random_program


def applicable(entries, bound, at_most, true_atoms):
    total = sum(w for x, w in entries if (x.atom in true_atoms) == x.positive)
    return total <= bound if at_most else total >= bound


def rule_applicable(rule, true_atoms):
    return applicable(rule.weighted_body(), rule.bound, False, true_atoms)


def test_literal_complement_is_involution():
    x = Literal(3, True)
    assert x.complement() == Literal(3, False)
    assert x.complement().complement() == x


def test_empty_build():
    p = build_program([])
    assert p.num_atoms == 0 and p.rules == ()


def test_cardinality_body_deduplicated():
    p = parse("h :- 2 {a, a, b}.")
    (r,) = p.rules
    assert r.kind is RuleKind.CARDINALITY
    assert p.names_of(r.pos) == ["a", "b"] and r.bound == 2


def test_weight_duplicates_summed():
    p = parse("h :- {a=1, a=2} >= 3.")
    (r,) = p.rules
    assert [(p.names[a], w) for a, w in zip(r.pos, r.pos_weights)] == [("a", 3)]
    assert r.bound == 3
    # h holds exactly when a does
    for s in ({"a"}, set()):
        assert rule_applicable(r, p.atomset(s)) == ("a" in s)


def test_negative_weight_complemented():
    # h <- {a=2, b=-3} >= 1 becomes h <- {a=2, not b=3} >= 4
    r = normalize_weight_rule(0, [(Literal(1, True), 2), (Literal(2, True), -3)], 1)
    assert sorted(r.weighted_body()) == sorted([(Literal(1, True), 2), (Literal(2, False), 3)])
    assert r.bound == 4


def test_at_most_form_flipped():
    # h <- {a=1, b=2} <= 2 becomes h <- {not a=1, not b=2} >= 1
    r = normalize_weight_rule(0, [(Literal(1, True), 1), (Literal(2, True), 2)], 2, at_most=True)
    assert sorted(r.weighted_body()) == sorted([(Literal(1, False), 1), (Literal(2, False), 2)])
    assert r.bound == 1


def test_positive_rule_unchanged():
    entries = [(Literal(1, True), 1), (Literal(2, False), 4)]
    r = normalize_weight_rule(0, entries, 3)
    assert sorted(r.weighted_body()) == sorted(entries) and r.bound == 3


weighted_bodies = st.lists(
    st.tuples(st.integers(0, 9), st.booleans(), st.integers(-6, 6)), min_size=0, max_size=10
)


@settings(max_examples=200, deadline=None)
@given(weighted_bodies, st.integers(-12, 12), st.booleans())
def test_normalization_preserves_applicability(body, bound, at_most):
    entries = [(Literal(a, pos), w) for a, pos, w in body]
    r = normalize_weight_rule(99, entries, bound, at_most)
    assert all(w >= 0 for _, w in r.weighted_body())
    atoms = sorted({a for a, _, _ in body})
    for bits in itertools.product([False, True], repeat=len(atoms)):
        s = {a for a, b in zip(atoms, bits) if b}
        assert applicable(entries, bound, at_most, s) == rule_applicable(r, s)


def test_maximize_negates():
    s = OptimizeStatement(OptKind.MAXIMIZE, ((Literal(0, True), 3), (Literal(1, False), 5)))
    m = maximize_to_minimize(s)
    assert m.kind is OptKind.MINIMIZE
    assert m.entries == ((Literal(0, True), -3), (Literal(1, False), -5))


def test_maximize_shifted_form():
    s = OptimizeStatement(OptKind.MAXIMIZE, ((Literal(0, True), 3), (Literal(1, False), 5)))
    m = maximize_to_minimize(s, shift=5)
    assert m.entries == ((Literal(0, True), 2), (Literal(1, False), 0))


def test_maximize_empty():
    m = maximize_to_minimize(OptimizeStatement(OptKind.MAXIMIZE, ()))
    assert m.kind is OptKind.MINIMIZE and m.entries == ()


def test_maximize_converted_at_load_keeps_order():
    p = parse("{a, b}. maximize {a = 1, b = 1}.")
    (s,) = p.optimize
    assert s.kind is OptKind.MINIMIZE and all(w >= 0 for _, w in s.entries)
    best = optimal_bruteforce(p)
    assert [p.names_of(m.model) for m in best] == [["a", "b"]]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.booleans(), st.integers(-5, 5)), max_size=6))
def test_nonnegative_statement_preserves_order(entries):
    s = OptimizeStatement(OptKind.MINIMIZE, tuple((Literal(a, pos), w) for a, pos, w in entries))
    t = nonnegative_statement(s)
    assert all(w >= 0 for _, w in t.entries)
    models = [frozenset(a for a in range(4) if m >> a & 1) for m in range(16)]
    # constant offset between the two weightings
    offsets = {s.weight_of(m) - t.weight_of(m) for m in models}
    assert len(offsets) == 1


def test_combine_two_unit_statements():
    s1 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(0, True), 1),), 0)
    s2 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(1, True), 1),), 1)
    c = combine_minimize(s1, s2)
    assert dict(c.entries) == {Literal(0, True): 2, Literal(1, True): 1}
    models = [frozenset(m) for m in ([], [0], [1], [0, 1])]
    lex = sorted(models, key=lambda m: (s1.weight_of(m), s2.weight_of(m)))
    assert sorted(models, key=c.weight_of) == lex


def test_combine_with_empty_second():
    s1 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(0, True), 7),))
    c = combine_minimize(s1, OptimizeStatement(OptKind.MINIMIZE, ()))
    assert c.entries == s1.entries


def test_combine_scale_exceeds_total():
    s1 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(0, True), 1),))
    s2 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(1, True), 3), (Literal(2, True), 4)))
    c = combine_minimize(s1, s2)
    assert dict(c.entries)[Literal(0, True)] == 8  # 2^3 > 7


def test_combine_overflow_reported():
    s1 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(0, True), INT64_MAX // 2),))
    s2 = OptimizeStatement(OptKind.MINIMIZE, ((Literal(1, True), 5),))
    with pytest.raises(UnrepresentableWeight):
        combine_minimize(s1, s2)


def test_weights_outside_64_bits_rejected():
    with pytest.raises(UnrepresentableWeight):
        normalize_weight_rule(0, [(Literal(1, True), INT64_MAX), (Literal(1, True), 1)], 1)


@pytest.mark.parametrize("seed", range(60))
def test_combine_preserves_lexicographic_argmin(seed):
    p = random_program(seed, max_atoms=8, minimize=False)
    p = Program(p.names, p.rules, p.compute, ())
    n = p.num_atoms
    s1 = OptimizeStatement(OptKind.MINIMIZE, tuple((Literal(a, True), (a * 7 + seed) % 4) for a in range(n)), 0)
    s2 = OptimizeStatement(OptKind.MINIMIZE, tuple((Literal(a, a % 2 == 0), (a + seed) % 3 + 1) for a in range(n)), 1)
    lex = optimal_bruteforce(Program(p.names, p.rules, p.compute, (s1, s2)))
    single = optimal_bruteforce(Program(p.names, p.rules, p.compute, (combine_minimize(s1, s2),)))
    assert {m.model for m in lex} == {m.model for m in single}


def test_atoms_of():
    assert atoms_of(Program()) == frozenset()
    p = parse("a :- b, not c. d :- not a. e :- not b.")
    assert p.names_of(atoms_of(p)) == ["a", "b", "c", "d", "e"]
    q = parse("a. compute { z }.")
    assert "z" in q.names_of(atoms_of(q))


def test_compute_statements_unioned():
    p = build_program([
        RawStatement("compute", body=[("a", True)]),
        RawStatement("compute", body=[("b", False), ("a", True)]),
    ])
    assert p.compute == (Literal(0, True), Literal(1, False))


def test_duplicate_names_rejected():
    with pytest.raises(ValueError):
        Program(("a", "a"))


@pytest.mark.parametrize("seed", range(100))
def test_build_idempotent(seed):
    p = random_program(seed)
    q = parse(render(p))
    assert parse(render(q)).canonical() == q.canonical()
    # atoms mentioned nowhere are not part of the text
    assert q.canonical()[1:] == p.canonical()[1:]


def test_rule_renamed():
    r = basic(0, [1], [2])
    assert r.renamed([2, 0, 1]) == basic(2, [0], [1])
