import itertools

import pytest
from hypothesis import given, settings, strategies as st

from stablemodels.core import Literal, Program, basic, cardinality, choice, normalize_weight_rule
from stablemodels.propagate import expand
from stablemodels.semantics import (
    UniverseTooLarge,
    deductive_closure,
    enumerate_bruteforce,
    f_r,
    f_r_prime,
    gfp,
    gP,
    is_stable,
    lfp,
    optimal_bruteforce,
    reduct,
    well_founded,
)
from stablemodels.textio import parse

from programs import chain_program, corpus, random_normal_program, random_program


def names(p, atoms):
    return p.names_of(atoms)


def horn_names(p, horn):
    return sorted((p.names[h], tuple(sorted(p.names[a] for a in body))) for h, body in horn)


def test_reduct_of_unique_model_program():
    p = corpus("unique_model")
    horn = reduct(p, p.atomset("abc"))
    assert horn_names(p, horn) == [("a", ("b",)), ("b", ("c",)), ("c", ("a",))]
    assert deductive_closure(horn) == frozenset()


def test_reduct_empty_set_strips_negation():
    p = corpus("unique_model")
    horn = reduct(p, ())
    assert len(horn) == len(p.rules)
    assert ("d", ()) in horn_names(p, horn)


def test_reduct_of_horn_program_is_identity():
    p = chain_program(5)
    assert reduct(p, {0, 2}) == [(r.head, r.pos) for r in p.rules]


def test_reduct_rejects_extended_rules():
    with pytest.raises(ValueError):
        reduct(parse("{a}."), ())


@pytest.mark.parametrize("text, expected", [("a.", ["a"]), ("a :- b. b.", ["a", "b"])])
def test_deductive_closure(text, expected):
    p = parse(text)
    assert names(p, deductive_closure(reduct(p, ()))) == expected


def test_f_r_weight_example():
    p = parse("h :- {a = 1, b = 2, not c = 3} >= 4.")
    (r,) = p.rules
    a = p.atomset("a")
    assert names(p, f_r(r, a, a)) == ["h"]


def test_f_r_choice_filter():
    r = choice([0])
    assert f_r(r, (), {0}) == frozenset()
    assert f_r_prime(r, (), ()) == {0}


def test_f_r_cardinality():
    p = parse("h :- 2 {a, b, not c}.")
    (r,) = p.rules
    ab = p.atomset("ab")
    assert names(p, f_r(r, ab, ab)) == ["h"]


def test_gP_examples():
    cc = corpus("choice_card")
    assert names(cc, gP(cc, cc.atomset(["a"]))) == ["a"]
    um = corpus("unique_model")
    assert names(um, gP(um, um.atomset("d"))) == ["d"]
    assert gP(Program(), ()) == frozenset()


def test_is_stable_examples():
    p = corpus("unique_model")
    assert is_stable(p, p.atomset("d"))
    assert not is_stable(p, p.atomset("abc"))
    assert is_stable(Program(), ())


def test_choice_card_models():
    p = corpus("choice_card")
    got = [names(p, m.model) for m in enumerate_bruteforce(p)]
    expected = [[], ["a"], ["b"], ["c"], ["a", "b", "true"], ["a", "c", "true"], ["b", "c", "true"], ["a", "b", "c", "true"]]
    assert sorted(got) == sorted(expected)


def test_choice_card_compute_models():
    p = corpus("choice_card_compute")
    got = sorted(names(p, m.model) for m in enumerate_bruteforce(p))
    assert got == [["a", "b", "c", "true"], ["a", "b", "true"], ["a", "c", "true"], ["b", "c", "true"]]


def test_choice_card_minimize_optimum():
    p = corpus("choice_card_minimize")
    (best,) = optimal_bruteforce(p)
    assert names(p, best.model) == ["a", "c", "true"] and best.weights == (1,)


def test_model_order_is_bitset_order():
    p = corpus("choice_card")
    keys = [sum(1 << a for a in m.model) for m in enumerate_bruteforce(p)]
    assert keys == sorted(keys)


def test_oracle_guard():
    p = chain_program(21)
    with pytest.raises(UniverseTooLarge):
        enumerate_bruteforce(p)
    assert len(enumerate_bruteforce(p, limit=21)) == 1


def test_lfp_gfp_trivial():
    u = frozenset(range(4))
    assert lfp(lambda a: frozenset(), u) == frozenset()
    assert lfp(lambda a: a | {"x"}, {"x"}) == {"x"}
    assert gfp(lambda a: a, u) == u
    assert gfp(lambda a: frozenset(), u) == frozenset()


implications = st.lists(st.tuples(st.frozensets(st.integers(0, 7), max_size=3), st.integers(0, 7)), max_size=15)


def closure_op(rules):
    def f(a):
        return frozenset(h for body, h in rules if body <= a)

    return f


@settings(max_examples=100, deadline=None)
@given(implications)
def test_lfp_below_closed_sets(rules):
    f = closure_op(rules)
    u = frozenset(range(8))
    least = lfp(f, u)
    greatest = gfp(f, u)
    assert f(least) == least and f(greatest) == greatest
    for m in range(256):
        a = frozenset(i for i in range(8) if m >> i & 1)
        if f(a) <= a:
            assert least <= a
        if a <= f(a):
            assert a <= greatest


def random_rule(rng_seed):
    import random

    rng = random.Random(rng_seed)
    pos = rng.sample(range(6), rng.randint(0, 3))
    neg = rng.sample(range(6), rng.randint(0, 3))
    kind = rng.choice(["basic", "card", "weight"])
    if kind == "basic":
        return basic(6, pos, neg)
    if kind == "card":
        return cardinality(6, rng.randint(0, 4), pos, neg)
    entries = [(Literal(a, True), rng.randint(-2, 4)) for a in pos] + [(Literal(b, False), rng.randint(-2, 4)) for b in neg]
    return normalize_weight_rule(6, entries, rng.randint(-2, 6), rng.random() < 0.3)


subsets = st.frozensets(st.integers(0, 6), max_size=7)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6), subsets, subsets, subsets, subsets)
def test_f_r_monotone_in_closure_antimonotone_in_model(seed, s, ds, c, dc):
    r = random_rule(seed)
    s2, c2 = s | ds, c | dc
    assert f_r(r, s, c) <= f_r(r, s, c2)
    assert f_r(r, s2, c) <= f_r(r, s, c)


@pytest.mark.parametrize("seed", range(150))
def test_stability_agrees_with_reduct(seed):
    p = random_normal_program(seed, max_atoms=8)
    for m in range(1 << p.num_atoms):
        s = frozenset(a for a in range(p.num_atoms) if m >> a & 1)
        assert is_stable(p, s) == (deductive_closure(reduct(p, s)) == s)


@pytest.mark.parametrize("seed", range(200))
def test_models_form_an_antichain_without_choice(seed):
    p = random_program(seed, kinds=("basic", "cardinality", "weight"), compute=False, minimize=False)
    models = [m.model for m in enumerate_bruteforce(p)]
    for x, y in itertools.combinations(models, 2):
        assert not (x < y or y < x)


def test_choice_rules_escape_minimality():
    p = parse("{h}.")
    assert [names(p, m.model) for m in enumerate_bruteforce(p)] == [[], ["h"]]


def test_report_weights_match_entries():
    p = corpus("two_minimize")
    reports = {tuple(names(p, m.model)): m.weights for m in enumerate_bruteforce(p)}
    assert reports == {("a",): (1, 0), ("b",): (0, 1)}


def test_well_founded_examples():
    p = corpus("unique_model")
    t, f = well_founded(p)
    assert names(p, t) == ["d"] and names(p, f) == ["a", "b", "c"]
    q = corpus("odd_loop")
    assert well_founded(q) == (frozenset(), frozenset())
    h = chain_program(6)
    t, f = well_founded(h)
    assert t == deductive_closure(reduct(h, ())) and f == frozenset()


def test_well_founded_rejects_extended_rules():
    with pytest.raises(ValueError):
        well_founded(parse("{a}."))


@pytest.mark.parametrize("seed", range(100))
def test_well_founded_equals_expand(seed):
    p = random_normal_program(seed)
    lits, conflict = expand(p)
    if not conflict:
        t, f = well_founded(p)
        assert lits == {Literal(a, True) for a in t} | {Literal(a, False) for a in f}
