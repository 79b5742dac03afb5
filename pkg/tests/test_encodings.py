import itertools
import math

import pytest

from stablemodels.encodings import (
    CnfFormula,
    FormatError,
    UndirectedGraph,
    complete_graph,
    count_packings,
    decode_edges,
    decode_words,
    encode_3sat,
    encode_binpacking,
    encode_code,
    encode_hamiltonian,
    encode_pigeonhole,
    hamming,
    is_hamiltonian_cycle,
    max_code_size,
    random_3sat,
    read_dimacs,
    read_graph,
    var_name,
)
from stablemodels.search import enumerate_models, find_optimal_oracle, optimize
from stablemodels.semantics import enumerate_bruteforce, is_stable
from stablemodels.textio import parse, render


def sat_assignments(f: CnfFormula) -> set[frozenset[int]]:
    out = set()
    for bits in itertools.product([False, True], repeat=f.num_atoms):
        true = {i + 1 for i, b in enumerate(bits) if b}
        if f.satisfied_by(true):
            out.add(frozenset(true))
    return out


def decoded_assignment(p, model) -> frozenset[int]:
    return frozenset(int(p.names[a][1:]) for a in model if p.names[a].startswith("x"))


def test_three_sat_example_models():
    f = CnfFormula(3, ((1, -2, 3), (-1, 2, 3), (1, 2, -3)))
    p = encode_3sat(f)
    models = enumerate_models(p).models
    assert {decoded_assignment(p, m) for m in models} == sat_assignments(f)


@pytest.mark.parametrize("seed", range(40))
def test_three_sat_models_biject_with_assignments(seed):
    f = random_3sat(6, seed, ratio=3.0)
    p = encode_3sat(f)
    models = enumerate_models(p).models
    decoded = [decoded_assignment(p, m) for m in models]
    assert len(decoded) == len(set(decoded))
    assert set(decoded) == sat_assignments(f)


def test_random_3sat_is_reproducible():
    assert random_3sat(20, 5) == random_3sat(20, 5)
    assert random_3sat(20, 5) != random_3sat(20, 6)
    f = random_3sat(50, 0)
    assert len(f.clauses) == round((4.258 + 58.26 * 50 ** (-5 / 3)) * 50)
    assert all(len(set(map(abs, c))) == 3 for c in f.clauses)


@pytest.mark.parametrize("n, k, count", [(3, 3, 6), (2, 3, 6), (3, 2, 0), (4, 3, 0), (1, 1, 1)])
def test_pigeonhole_counts(n, k, count):
    # injective maps from n pigeons to k holes
    expected = math.perm(k, n) if n <= k else 0
    assert expected == count
    assert len(enumerate_models(encode_pigeonhole(n, k)).models) == count


def test_pigeonhole_small_agrees_with_oracle():
    p = encode_pigeonhole(2, 2)
    models = enumerate_models(p).models
    assert len(models) == 2 and set(models) == {m.model for m in enumerate_bruteforce(p)}


@pytest.mark.parametrize("n, cycles", [(3, 1), (4, 3), (5, 12)])
def test_hamiltonian_complete_graphs(n, cycles):
    g = complete_graph(n)
    assert cycles == math.factorial(n - 1) // 2
    p = encode_hamiltonian(g)
    models = enumerate_models(p).models
    decoded = [frozenset(decode_edges(p, m)) for m in models]
    assert len(set(decoded)) == len(decoded) == cycles
    assert all(is_hamiltonian_cycle(g, set(e)) for e in decoded)


def test_hamiltonian_path_graph_unsat():
    g = UndirectedGraph.from_pairs(4, [(1, 2), (2, 3), (3, 4)])
    assert enumerate_models(encode_hamiltonian(g)).models == []


def test_hamiltonian_two_triangles_unsat():
    g = UndirectedGraph.from_pairs(6, [(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6)])
    assert enumerate_models(encode_hamiltonian(g)).models == []


def all_cycles(g: UndirectedGraph) -> int:
    edges = sorted(g.edges)
    return sum(is_hamiltonian_cycle(g, set(c)) for c in itertools.combinations(edges, g.vertices))


@pytest.mark.parametrize("seed", range(10))
def test_hamiltonian_random_graphs(seed):
    import random

    rng = random.Random(seed)
    pairs = [e for e in itertools.combinations(range(1, 7), 2) if rng.random() < 0.6]
    g = UndirectedGraph.from_pairs(6, pairs)
    p = encode_hamiltonian(g)
    models = enumerate_models(p).models
    assert all(is_hamiltonian_cycle(g, decode_edges(p, m)) for m in models)
    assert len({frozenset(decode_edges(p, m)) for m in models}) == len(models) == all_cycles(g)


def test_is_hamiltonian_cycle_rejects():
    g = complete_graph(6)
    two_triangles = {(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6)}
    assert not is_hamiltonian_cycle(g, two_triangles)
    assert not is_hamiltonian_cycle(g, {(1, 2), (2, 3)})
    assert is_hamiltonian_cycle(g, {(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)})


def test_hamming():
    assert hamming(0b1011, 0b0001) == 2 and hamming(7, 7) == 0


@pytest.mark.parametrize("n, d", [(3, 2), (4, 2), (4, 3), (5, 3)])
def test_code_optimum_matches_exhaustive(n, d):
    p = encode_code(n, d)
    best = optimize(p).incumbent
    words = decode_words(p, best.model)
    assert len(words) == max_code_size(n, d)
    assert all(hamming(a, b) >= d for a, b in itertools.combinations(words, 2))


def test_code_five_three():
    assert max_code_size(5, 3) == 4
    p = encode_code(5, 3)
    out = optimize(p)
    assert len(decode_words(p, out.incumbent.model)) == 4
    assert find_optimal_oracle(p).weights == out.incumbent.weights


def test_code_models_are_codes():
    p = encode_code(4, 2)
    for m in enumerate_models(p).models:
        words = decode_words(p, m)
        assert 0 in words
        assert all(hamming(a, b) >= 2 for a, b in itertools.combinations(words, 2))


def test_code_guards():
    with pytest.raises(ValueError):
        encode_code(13, 3)
    with pytest.raises(ValueError):
        encode_code(4, 5)


@pytest.mark.parametrize(
    "sizes, m, b", [([3, 3], 1, 6), ([4, 4], 1, 6), ([1, 2, 2], 2, 3), ([2, 2, 2], 2, 4), ([5], 3, 4), ([1, 1, 1, 2], 3, 2)]
)
def test_binpacking_counts(sizes, m, b):
    p = encode_binpacking(sizes, m, b)
    assert len(enumerate_models(p).models) == count_packings(sizes, m, b)


def test_binpacking_examples():
    assert count_packings([3, 3], 1, 6) == 1
    assert count_packings([4, 4], 1, 6) == 0
    assert count_packings([1, 2, 2], 2, 3) == 4


@pytest.mark.parametrize(
    "program",
    [
        encode_3sat(random_3sat(8, 1)),
        encode_pigeonhole(3, 2),
        encode_hamiltonian(complete_graph(4)),
        encode_code(4, 3),
        encode_binpacking([1, 2, 2], 2, 3),
    ],
)
def test_encodings_round_trip(program):
    q = parse(render(program))
    assert q.canonical() == parse(render(q)).canonical()
    models = enumerate_models(q).models
    assert all(is_stable(q, m) for m in models)


def test_read_dimacs():
    f = read_dimacs("c comment\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n")
    assert f == CnfFormula(3, ((1, -2), (2, 3, -1)))
    p = encode_3sat(f)
    assert var_name(1) in p.names


@pytest.mark.parametrize(
    "text, line",
    [
        ("1 2 0\n", 1),
        ("p cnf 2 1\n1 3 0\n", 2),
        ("p cnf 2 1\n1 x 0\n", 2),
        ("p cnf 2 1\n1 2\n", 2),
        ("p cnf 2 2\n1 2 0\n", 2),
        ("p dnf 2 1\n", 1),
        ("p cnf 2 1\n0\n", 2),
        ("", 0),
    ],
)
def test_read_dimacs_errors(text, line):
    with pytest.raises(FormatError) as info:
        read_dimacs(text)
    assert info.value.line == line


def test_read_graph():
    g = read_graph("c tri\np edge 3 3\ne 1 2\ne 3 2\ne 1 3\n")
    assert g == complete_graph(3)


@pytest.mark.parametrize(
    "text, line",
    [
        ("e 1 2\n", 1),
        ("p edge 3 1\ne 1 4\n", 2),
        ("p edge 3 1\ne 1 1\n", 2),
        ("p edge 3 1\ne 1\n", 2),
        ("p edge 3 2\ne 1 2\n", 2),
        ("p edge 3 1\nq 1 2\n", 2),
    ],
)
def test_read_graph_errors(text, line):
    with pytest.raises(FormatError) as info:
        read_graph(text)
    assert info.value.line == line
