"""Reference semantics used as ground truth by the tests.

Everything here favours directness over speed: stability is checked from
the rule interpretation functions, the closures are naive fixpoint
iterations, and the enumeration oracle tries every subset of atoms.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .core import Literal, Program, Rule, RuleKind

AtomSet = frozenset


class UniverseTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ModelReport:
    model: frozenset[int]
    weights: tuple[int, ...]
    satisfies_compute: bool


# Fixpoint utilities

def lfp(f: Callable[[frozenset], frozenset], universe: Iterable = ()) -> frozenset:
    """Least fixpoint of a monotone ``f`` by iteration from the empty set."""
    cur: frozenset = frozenset()
    bound = len(frozenset(universe)) + 1
    for _ in range(bound + 1):
        nxt = frozenset(f(cur))
        if nxt == cur:
            return cur
        cur = nxt
    raise RuntimeError("iteration did not converge; is f monotone on the universe?")


def gfp(f: Callable[[frozenset], frozenset], universe: Iterable) -> frozenset:
    """Greatest fixpoint of a monotone ``f`` by iteration from the universe."""
    cur = frozenset(universe)
    for _ in range(len(cur) + 2):
        nxt = frozenset(f(cur))
        if nxt == cur:
            return cur
        cur = nxt
    raise RuntimeError("iteration did not converge; is f monotone on the universe?")


# Reducts and Horn closure

HornRule = tuple[int, tuple[int, ...]]


def reduct(p: Program, s: Iterable[int]) -> list[HornRule]:
    """Delete rules blocked by ``s`` and strip the remaining not-atoms."""
    s = frozenset(s)
    out: list[HornRule] = []
    for r in p.rules:
        if r.kind is not RuleKind.BASIC:
            raise ValueError("the reduct is only defined for basic rules")
        if not s.intersection(r.neg):
            out.append((r.head, r.pos))
    return out


def deductive_closure(horn: Iterable[HornRule]) -> frozenset[int]:
    """Least model of a Horn program with one counter per rule."""
    rules = list(horn)
    counter = [len(set(body)) for _, body in rules]
    watch: dict[int, list[int]] = {}
    for i, (_, body) in enumerate(rules):
        for a in set(body):
            watch.setdefault(a, []).append(i)
    closure: set[int] = set()
    queue = [h for (h, _), c in zip(rules, counter) if c == 0]
    while queue:
        a = queue.pop()
        if a in closure:
            continue
        closure.add(a)
        for i in watch.get(a, ()):
            counter[i] -= 1
            if counter[i] == 0:
                queue.append(rules[i][0])
    return frozenset(closure)


# Rule interpretation

def f_r(r: Rule, s: Iterable[int], c: Iterable[int], prime: bool = False) -> frozenset[int]:
    """Atoms derived by ``r`` from closure ``c`` with negation read against ``s``.

    ``prime=True`` gives the variant in which a choice rule derives all of
    its heads instead of only those in ``s``.
    """
    s = s if isinstance(s, frozenset) else frozenset(s)
    c = c if isinstance(c, frozenset) else frozenset(c)
    if r.kind is RuleKind.BASIC:
        ok = all(a in c for a in r.pos) and not any(b in s for b in r.neg)
        return frozenset(r.heads) if ok else frozenset()
    if r.kind is RuleKind.CHOICE:
        ok = all(a in c for a in r.pos) and not any(b in s for b in r.neg)
        if not ok:
            return frozenset()
        return frozenset(r.heads) if prime else frozenset(h for h in r.heads if h in s)
    if r.kind is RuleKind.CARDINALITY:
        count = sum(1 for a in r.pos if a in c) + sum(1 for b in r.neg if b not in s)
        return frozenset(r.heads) if count >= r.bound else frozenset()
    total = sum(w for a, w in zip(r.pos, r.pos_weights) if a in c)
    total += sum(w for b, w in zip(r.neg, r.neg_weights) if b not in s)
    return frozenset(r.heads) if total >= r.bound else frozenset()


def f_r_prime(r: Rule, s: Iterable[int], c: Iterable[int]) -> frozenset[int]:
    return f_r(r, s, c, prime=True)


def gP(p: Program, s: Iterable[int]) -> frozenset[int]:
    s = frozenset(s)
    return lfp(lambda c: frozenset().union(*(f_r(r, s, c) for r in p.rules)), range(p.num_atoms))


def is_stable(p: Program, s: Iterable[int]) -> bool:
    s = frozenset(s)
    return gP(p, s) == s


def satisfies_compute(p: Program, s: Iterable[int]) -> bool:
    s = frozenset(s)
    return all((x.atom in s) == x.positive for x in p.compute)


def weights_of(p: Program, s: Iterable[int]) -> tuple[int, ...]:
    s = frozenset(s)
    return tuple(st.weight_of(s) for st in p.optimize)


def report(p: Program, s: Iterable[int]) -> ModelReport:
    s = frozenset(s)
    return ModelReport(s, weights_of(p, s), satisfies_compute(p, s))


# Brute-force enumeration over all subsets, vectorised with numpy.

def _bits(mask_atoms: Iterable[int], subsets: np.ndarray) -> list[np.ndarray]:
    return [((subsets >> a) & 1).astype(bool) for a in mask_atoms]


def _all_subsets_stable(p: Program) -> np.ndarray:
    n = p.num_atoms
    subsets = np.arange(1 << n, dtype=np.int64)
    if not p.rules:
        return subsets == 0
    member = [((subsets >> a) & 1).astype(bool) for a in range(n)]
    # parts that only depend on S can be computed once
    prepared = []
    for r in p.rules:
        if r.kind in (RuleKind.BASIC, RuleKind.CHOICE):
            neg_ok = np.ones(subsets.shape, dtype=bool)
            for b in r.neg:
                neg_ok &= ~member[b]
            if r.kind is RuleKind.BASIC:
                head_val = np.int64(1 << r.head)
                prepared.append((r, neg_ok, head_val))
            else:
                heads = np.int64(sum(1 << h for h in r.heads))
                prepared.append((r, neg_ok, subsets & heads))
        else:
            weights = [1] * len(r.neg) if r.kind is RuleKind.CARDINALITY else list(r.neg_weights)
            neg_sum = np.zeros(subsets.shape, dtype=np.int64)
            for b, w in zip(r.neg, weights):
                neg_sum += np.where(member[b], 0, w)
            prepared.append((r, neg_sum, np.int64(1 << r.head)))
    closure = np.zeros(subsets.shape, dtype=np.int64)
    for _ in range(n + 2):
        cbits = [((closure >> a) & 1).astype(bool) for a in range(n)]
        new = np.zeros(subsets.shape, dtype=np.int64)
        for r, pre, head_val in prepared:
            if r.kind in (RuleKind.BASIC, RuleKind.CHOICE):
                ok = pre.copy()
                for a in r.pos:
                    ok &= cbits[a]
                new |= np.where(ok, head_val, 0)
            else:
                weights = [1] * len(r.pos) if r.kind is RuleKind.CARDINALITY else list(r.pos_weights)
                total = pre.copy()
                for a, w in zip(r.pos, weights):
                    total += np.where(cbits[a], w, 0)
                new |= np.where(total >= r.bound, head_val, 0)
        if np.array_equal(new, closure):
            break
        closure = new
    return closure == subsets


def enumerate_bruteforce(
    p: Program, limit: int = 20, respect_compute: bool = True
) -> list[ModelReport]:
    """All stable models, sorted by their atom bitset read as an integer."""
    if p.num_atoms > limit:
        raise UniverseTooLarge(f"{p.num_atoms} atoms exceed the oracle limit of {limit}")
    stable = np.nonzero(_all_subsets_stable(p))[0]
    out = []
    for mask in stable.tolist():
        s = frozenset(a for a in range(p.num_atoms) if mask >> a & 1)
        rep = report(p, s)
        if respect_compute and not rep.satisfies_compute:
            continue
        out.append(rep)
    return out


def optimal_bruteforce(p: Program, limit: int = 20) -> list[ModelReport]:
    """All compute-satisfying models with the lexicographically least weights."""
    models = enumerate_bruteforce(p, limit)
    if not models:
        return []
    best = min(m.weights for m in models)
    return [m for m in models if m.weights == best]


# Well-founded model of a normal program

def well_founded(p: Program) -> tuple[frozenset[int], frozenset[int]]:
    if not p.is_normal():
        raise ValueError("the well-founded model is only defined here for basic rules")
    universe = frozenset(range(p.num_atoms))

    def gamma(a: frozenset) -> frozenset:
        return atmost_reference(p, a, frozenset())

    def gamma2(a: frozenset) -> frozenset:
        return gamma(gamma(a))

    true = lfp(gamma2, universe)
    possible = gfp(gamma2, universe)
    return true, universe - possible


# Reference closures over literal sets (pos, neg atom sets)

def _agreeing(r: Rule, pos: frozenset, neg: frozenset):
    """All C over the rule's own atoms that agree with (pos, neg)."""
    atoms = sorted(r.atoms())
    fixed = frozenset(a for a in atoms if a in pos)
    free = [a for a in atoms if a not in pos and a not in neg]
    for mask in range(1 << len(free)):
        yield fixed | frozenset(a for i, a in enumerate(free) if mask >> i & 1)


@lru_cache(maxsize=200_000)
def _min_max(r: Rule, pos: frozenset, neg: frozenset) -> tuple[frozenset, frozenset]:
    lo: frozenset | None = None
    hi: frozenset = frozenset()
    for c in _agreeing(r, pos, neg):
        got = f_r(r, c, c)
        lo = got if lo is None else lo & got
        hi = hi | got
    return (lo if lo is not None else frozenset()), hi


def min_max_r(r: Rule, pos: frozenset, neg: frozenset, universe: frozenset) -> tuple[frozenset, frozenset]:
    """Inevitable and possible consequences of the rule under (pos, neg)."""
    if pos & neg:
        return universe, frozenset()
    own = r.atoms()
    return _min_max(r, pos & own, neg & own)


def _consistent(pos: frozenset, neg: frozenset) -> bool:
    return not (pos & neg)


def atleast_reference(
    p: Program, pos: Iterable[int], neg: Iterable[int]
) -> tuple[frozenset[int], frozenset[int]]:
    """Least fixpoint of the four inference cases, started from (pos, neg).

    An inconsistent result is returned as all atoms positive and negative.
    """
    universe = frozenset(range(p.num_atoms))
    pos, neg = frozenset(pos), frozenset(neg)
    a_pos, a_neg = pos, neg
    while True:
        if not _consistent(pos, neg):
            return universe, universe
        new_pos, new_neg = set(a_pos | pos), set(a_neg | neg)
        mm = [min_max_r(r, pos, neg, universe) for r in p.rules]
        supporters: dict[int, list[int]] = {}
        for i, (lo, hi) in enumerate(mm):
            new_pos |= lo
            for h in hi:
                supporters.setdefault(h, []).append(i)
        for a in universe:
            if a not in supporters:
                new_neg.add(a)
        for a in pos:
            sup = supporters.get(a, [])
            if len(sup) == 1:
                r = p.rules[sup[0]]
                for x in _literals_over(r):
                    xp, xn = _extend(pos, neg, x)
                    _, hi = min_max_r(r, xp, xn, universe)
                    if a not in hi:
                        _add(new_pos, new_neg, x.complement())
        for a in neg:
            for r in p.rules:
                if a not in r.heads:
                    continue
                for x in _literals_over(r):
                    xp, xn = _extend(pos, neg, x)
                    lo, _ = min_max_r(r, xp, xn, universe)
                    if a in lo:
                        _add(new_pos, new_neg, x.complement())
        new_pos_f, new_neg_f = frozenset(new_pos), frozenset(new_neg)
        if new_pos_f == pos and new_neg_f == neg:
            return pos, neg
        pos, neg = new_pos_f, new_neg_f


def _literals_over(r: Rule) -> list[Literal]:
    return [Literal(a, s) for a in sorted(r.atoms()) for s in (True, False)]


def _extend(pos: frozenset, neg: frozenset, x: Literal) -> tuple[frozenset, frozenset]:
    return (pos | {x.atom}, neg) if x.positive else (pos, neg | {x.atom})


def _add(pos: set, neg: set, x: Literal) -> None:
    (pos if x.positive else neg).add(x.atom)


def atmost_reference(p: Program, pos: Iterable[int], neg: Iterable[int]) -> frozenset[int]:
    """Least fixpoint of B -> union of f'_r(A+, B - A-) minus A-."""
    pos, neg = frozenset(pos), frozenset(neg)
    universe = frozenset(range(p.num_atoms))

    def step(b: frozenset) -> frozenset:
        c = b - neg
        return frozenset().union(*(f_r(r, pos, c, prime=True) for r in p.rules)) - neg

    return lfp(step, universe)


def expand_reference(
    p: Program, pos: Iterable[int], neg: Iterable[int]
) -> tuple[frozenset[int], frozenset[int]]:
    """Alternate the two reference closures until neither adds anything."""
    universe = frozenset(range(p.num_atoms))
    pos, neg = frozenset(pos), frozenset(neg)
    while True:
        pos, neg = atleast_reference(p, pos, neg)
        if pos & neg:
            return universe, universe
        upper = atmost_reference(p, pos, neg)
        extra = universe - upper - neg
        if not extra:
            return pos, neg
        neg = neg | extra
