"""Benchmark families as ground programs, plus DIMACS and edge-list readers."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .core import Program, RawStatement, build_program

FALSE = "false"


class FormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass(frozen=True)
class CnfFormula:
    num_atoms: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            for x in c:
                if x == 0 or abs(x) > self.num_atoms:
                    raise ValueError(f"literal {x} out of range")

    def satisfied_by(self, true_vars: set[int]) -> bool:
        return all(any((abs(x) in true_vars) == (x > 0) for x in c) for c in self.clauses)


@dataclass(frozen=True)
class UndirectedGraph:
    vertices: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        for u, v in self.edges:
            if u == v:
                raise ValueError("self-loop")
            if not (1 <= u <= self.vertices and 1 <= v <= self.vertices):
                raise ValueError(f"edge {u}-{v} out of range")
            if u > v:
                raise ValueError("edges must be stored as (low, high)")

    @classmethod
    def from_pairs(cls, vertices: int, pairs) -> "UndirectedGraph":
        return cls(vertices, frozenset((min(u, v), max(u, v)) for u, v in pairs))

    def incident(self, v: int) -> list[tuple[int, int]]:
        return sorted(e for e in self.edges if v in e)


def complete_graph(n: int) -> UndirectedGraph:
    return UndirectedGraph.from_pairs(n, itertools.combinations(range(1, n + 1), 2))


# 3-SAT

def var_name(i: int) -> str:
    return f"x{i}"


def encode_3sat(f: CnfFormula) -> Program:
    st = [RawStatement("choice", heads=[var_name(i) for i in range(1, f.num_atoms + 1)])] if f.num_atoms else []
    for clause in f.clauses:
        # false holds when every literal of the clause is false
        st.append(RawStatement("basic", heads=[FALSE], body=[(var_name(abs(x)), x < 0) for x in clause]))
    st.append(RawStatement("compute", body=[(FALSE, False)]))
    return build_program(st)


def random_3sat(num_atoms: int, seed: int, ratio: float | None = None) -> CnfFormula:
    """Uniform random 3-CNF; the default ratio sits at the hard threshold."""
    if ratio is None:
        ratio = 4.258 + 58.26 * num_atoms ** (-5 / 3)
    rng = random.Random(seed)
    clauses = []
    for _ in range(round(ratio * num_atoms)):
        vs = rng.sample(range(1, num_atoms + 1), min(3, num_atoms))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return CnfFormula(num_atoms, tuple(clauses))


# Pigeon-hole

def pigeon(i: int, j: int) -> str:
    return f"p_{i}_{j}"


def encode_pigeonhole(n: int, k: int) -> Program:
    """n pigeons into k holes, at most one pigeon per hole."""
    if n < 1 or k < 1:
        raise ValueError("need at least one pigeon and one hole")
    st = []
    for i in range(1, n + 1):
        row = [pigeon(i, j) for j in range(1, k + 1)]
        st.append(RawStatement("choice", heads=row))
        st.append(RawStatement("cardinality", heads=[FALSE], body=[(a, True) for a in row], bound=2))
        st.append(RawStatement("basic", heads=[FALSE], body=[(a, False) for a in row]))
    for j in range(1, k + 1):
        col = [(pigeon(i, j), True) for i in range(1, n + 1)]
        st.append(RawStatement("cardinality", heads=[FALSE], body=col, bound=2))
    st.append(RawStatement("compute", body=[(FALSE, False)]))
    return build_program(st)


# Hamiltonian cycles

def edge_name(u: int, v: int) -> str:
    u, v = min(u, v), max(u, v)
    return f"e_{u}_{v}"


def vertex_name(v: int) -> str:
    return f"v_{v}"


def encode_hamiltonian(g: UndirectedGraph) -> Program:
    st = []
    anchor = 1
    for v in range(1, g.vertices + 1):
        inc = [edge_name(*e) for e in g.incident(v)]
        deg = len(inc)
        if inc:
            st.append(RawStatement("choice", heads=inc))
        # at most two incident edges
        st.append(RawStatement("cardinality", heads=[FALSE], body=[(e, True) for e in inc], bound=3))
        # at least two incident edges: false once deg-1 of them are absent
        st.append(RawStatement("cardinality", heads=[FALSE], body=[(e, False) for e in inc], bound=deg - 1))
    st.append(RawStatement("basic", heads=[vertex_name(anchor)]))
    for u, v in sorted(g.edges):
        e = edge_name(u, v)
        for a, b in ((u, v), (v, u)):
            if b != anchor:
                st.append(RawStatement("basic", heads=[vertex_name(b)], body=[(vertex_name(a), True), (e, True)]))
    body = [(vertex_name(v), True) for v in range(1, g.vertices + 1)] + [(FALSE, False)]
    st.append(RawStatement("compute", body=body))
    return build_program(st)


def decode_edges(p: Program, model) -> set[tuple[int, int]]:
    out = set()
    for a in model:
        name = p.names[a]
        if name.startswith("e_"):
            _, u, v = name.split("_")
            out.add((int(u), int(v)))
    return out


def is_hamiltonian_cycle(g: UndirectedGraph, edges: set[tuple[int, int]]) -> bool:
    n = g.vertices
    if n < 3 or len(edges) != n or not edges <= g.edges:
        return False
    adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    if any(len(x) != 2 for x in adj.values()):
        return False
    prev, cur, seen = None, 1, {1}
    while True:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        if nxt == 1:
            break
        if nxt in seen:
            return False
        seen.add(nxt)
        prev, cur = cur, nxt
    return len(seen) == n


# Error-correcting codes

def word_name(i: int) -> str:
    return f"w_{i}"


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")


def encode_code(n: int, d: int, allow_large: bool = False) -> Program:
    """Codes of length n with minimum distance d; optimization maximizes the size."""
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    if n > 12 and not allow_large:
        raise ValueError("word length above 12 needs allow_large=True")
    words = range(1 << n)
    st = []
    for i in words:
        close = [j for j in words if 0 < hamming(i, j) < d]
        st.append(RawStatement("basic", heads=[word_name(i)], body=[(word_name(j), False) for j in close]))
    st.append(RawStatement("basic", heads=[word_name(0)]))
    low = (1 << d) - 1
    st.append(RawStatement("basic", heads=[FALSE], body=[(word_name(j), False) for j in words if j & low == low]))
    st.append(RawStatement("compute", body=[(FALSE, False)]))
    st.append(RawStatement("maximize", body=[(word_name(i), True) for i in words], weights=[1] * (1 << n)))
    return build_program(st)


def decode_words(p: Program, model) -> set[int]:
    return {int(p.names[a][2:]) for a in model if p.names[a].startswith("w_")}


def max_code_size(n: int, d: int) -> int:
    """Largest code by exhaustive search, for small n only."""
    words = list(range(1 << n))
    best = 0

    def extend(code: list[int], start: int) -> None:
        nonlocal best
        best = max(best, len(code))
        for w in range(start, len(words)):
            if all(hamming(w, c) >= d for c in code):
                code.append(w)
                extend(code, w + 1)
                code.pop()

    extend([], 0)
    return best


# Bin packing

def bin_atom(i: int, j: int) -> str:
    return f"b_{i}_{j}"


def encode_binpacking(sizes: list[int], m: int, b: int) -> Program:
    if any(s <= 0 for s in sizes):
        raise ValueError("item sizes must be positive")
    st = []
    items = range(1, len(sizes) + 1)
    bins = range(1, m + 1)
    for i in items:
        row = [bin_atom(i, j) for j in bins]
        st.append(RawStatement("choice", heads=row))
        st.append(RawStatement("cardinality", heads=[FALSE], body=[(a, True) for a in row], bound=2))
        st.append(RawStatement("basic", heads=[FALSE], body=[(a, False) for a in row]))
    for j in bins:
        body = [(bin_atom(i, j), True) for i in items]
        st.append(RawStatement("weight", heads=[FALSE], body=body, weights=list(sizes), bound=b + 1))
    st.append(RawStatement("compute", body=[(FALSE, False)]))
    return build_program(st)


def count_packings(sizes: list[int], m: int, b: int) -> int:
    count = 0
    for assignment in itertools.product(range(m), repeat=len(sizes)):
        load = [0] * m
        for s, j in zip(sizes, assignment):
            load[j] += s
        count += all(x <= b for x in load)
    return count


# Readers

def read_dimacs(text: str) -> CnfFormula:
    num_atoms = num_clauses = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    last_line = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        last_line = lineno
        s = line.strip()
        if not s or s.startswith("c") or s.startswith("%"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise FormatError(lineno, "expected 'p cnf VARS CLAUSES'")
            try:
                num_atoms, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(lineno, "header counts must be integers") from None
            continue
        if num_atoms is None:
            raise FormatError(lineno, "clause before the 'p cnf' header")
        for tok in s.split():
            try:
                x = int(tok)
            except ValueError:
                raise FormatError(lineno, f"bad literal {tok!r}") from None
            if x == 0:
                if not current:
                    raise FormatError(lineno, "empty clause")
                clauses.append(tuple(current))
                current = []
            else:
                if abs(x) > num_atoms:
                    raise FormatError(lineno, f"variable {abs(x)} exceeds {num_atoms}")
                current.append(x)
    if num_atoms is None:
        raise FormatError(last_line, "missing 'p cnf' header")
    if current:
        raise FormatError(last_line, "last clause is not terminated by 0")
    if num_clauses is not None and num_clauses != len(clauses):
        raise FormatError(last_line, f"header announces {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_atoms, tuple(clauses))


def read_graph(text: str) -> UndirectedGraph:
    vertices = None
    edges: set[tuple[int, int]] = set()
    announced = None
    last_line = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        last_line = lineno
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        parts = s.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "edge":
                raise FormatError(lineno, "expected 'p edge VERTICES EDGES'")
            try:
                vertices, announced = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(lineno, "header counts must be integers") from None
        elif parts[0] == "e":
            if vertices is None:
                raise FormatError(lineno, "edge before the 'p edge' header")
            if len(parts) != 3:
                raise FormatError(lineno, "expected 'e U V'")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise FormatError(lineno, "vertices must be integers") from None
            if u == v:
                raise FormatError(lineno, "self-loop")
            if not (1 <= u <= vertices and 1 <= v <= vertices):
                raise FormatError(lineno, "vertex out of range")
            edges.add((min(u, v), max(u, v)))
        else:
            raise FormatError(lineno, f"unexpected line {s!r}")
    if vertices is None:
        raise FormatError(last_line, "missing 'p edge' header")
    if announced is not None and announced != len(edges):
        raise FormatError(last_line, f"header announces {announced} edges, found {len(edges)}")
    return UndirectedGraph(vertices, frozenset(edges))
