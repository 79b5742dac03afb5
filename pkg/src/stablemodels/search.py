"""Backtracking search for stable models on top of :mod:`propagate`."""
from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import networkx as nx

from .core import Literal, Program, RuleKind, check_int64, fresh_name, nb, weight_rule, with_rules
from .propagate import PropState
from .semantics import ModelReport, report

SATISFIABLE = "satisfiable"
UNSATISFIABLE = "unsatisfiable"
OPTIMAL = "optimal"


@dataclass
class SearchOptions:
    max_models: int | None = 1  # None means all
    lookahead: bool = True
    backjump: bool = True
    restrict: bool = True
    seed: int = 0


@dataclass
class SearchStats:
    choice_points: int = 0
    conflicts: int = 0
    expand_calls: int = 0
    lookahead_expand_calls: int = 0
    backjumps: int = 0
    nodes: int = 0
    elapsed: float = 0.0


@dataclass
class Incumbent:
    model: frozenset[int]
    weights: tuple[int, ...]


@dataclass
class SearchOutcome:
    verdict: str
    models: list[frozenset[int]] = field(default_factory=list)
    incumbent: Incumbent | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def satisfiable(self) -> bool:
        return self.verdict != UNSATISFIABLE


class HeuristicScore(NamedTuple):
    p: int
    n: int

    def key(self) -> tuple[int, int]:
        return (min(self.p, self.n), max(self.p, self.n))


def choice_point_set(p: Program) -> frozenset[int]:
    """Atoms heading choice rules or whose not-edge lies on a cycle."""
    g = nx.DiGraph()
    for a in range(p.num_atoms):
        g.add_node(("a", a))
    for i, r in enumerate(p.rules):
        g.add_node(("r", i))
        for h in r.heads:
            g.add_edge(("r", i), ("a", h))
        for a in r.pos:
            g.add_edge(("a", a), ("r", i))
        for b in r.neg:
            g.add_edge(("a", b), ("r", i))
    comp = {}
    for k, members in enumerate(nx.strongly_connected_components(g)):
        for v in members:
            comp[v] = k
    out = set()
    for i, r in enumerate(p.rules):
        if r.kind is RuleKind.CHOICE:
            out.update(r.heads)
        for b in r.neg:
            if comp[("a", b)] == comp[("r", i)]:
                out.add(b)
    return frozenset(out)


def independent(
    state: PropState,
    x1: Literal,
    x2: Literal,
    rules_of: list[list[int]] | None = None,
    members: list[list[int]] | None = None,
) -> bool:
    """No path between the two atoms through active rules and non-false atoms."""
    if x1.atom == x2.atom:
        return False
    if rules_of is None:
        rules_of = atom_rules(state.program)
    if members is None:
        members = rule_atoms(state.program)
    neg = state.neg
    if neg[x1.atom] or neg[x2.atom]:
        return True
    seen = {x1.atom}
    stack = [x1.atom]
    seen_rules: set[int] = set()
    target = x2.atom
    while stack:
        u = stack.pop()
        for r in rules_of[u]:
            if r in seen_rules or state.rule_inactive(r):
                continue
            seen_rules.add(r)
            for v in members[r]:
                if v in seen or neg[v]:
                    continue
                if v == target:
                    return False
                seen.add(v)
                stack.append(v)
    return True


def rule_atoms(p: Program) -> list[list[int]]:
    return [sorted(r.atoms()) for r in p.rules]


def atom_rules(p: Program) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(p.num_atoms)]
    for i, r in enumerate(p.rules):
        for a in sorted(r.atoms()):
            out[a].append(i)
    return out


def _code(c: int) -> int:
    """Assigned entry (a or ~a) to a literal code 2a / 2a+1."""
    return 2 * c if c >= 0 else 2 * ~c + 1


def _lit(code: int) -> Literal:
    return Literal(code >> 1, not (code & 1))


class Solver:
    """One search over one :class:`PropState`."""

    def __init__(self, program: Program, options: SearchOptions | None = None, optimizing: bool = False):
        self.program = program
        self.options = options or SearchOptions()
        self.optimizing = optimizing
        self.state = PropState(program)
        self.stats = SearchStats()
        self.choice_points = choice_point_set(program)
        n = program.num_atoms
        self.in_b = [a in self.choice_points for a in range(n)] if self.options.restrict else None
        self.lru: OrderedDict[int, None] = OrderedDict((c, None) for c in range(2 * n))
        self.rules_of = atom_rules(program)
        self.members = rule_atoms(program)
        self.incumbent: Incumbent | None = None
        self.models: list[frozenset[int]] = []
        self.top = 0
        self.conflict_lit: Literal | None = None
        self._exact: dict[int, int] = {}
        self._bound: dict[int, int] = {}
        self.on_model: Callable[[frozenset[int]], bool] | None = None
        # Backjumping is not used while optimizing: a subtree that fails only
        # because of the incumbent bound says nothing about independence.
        self.backjump = self.options.backjump and not optimizing

    # --------------------------------------------------------------

    def unacceptable(self) -> bool:
        inc = self.incumbent
        return inc is not None and tuple(self.state.opt_sums) >= inc.weights

    def _failed(self) -> bool:
        return self.state.conflict or (self.optimizing and self.unacceptable())

    def _delta_size(self, delta: list[int]) -> int:
        if self.in_b is None:
            return len(delta)
        in_b = self.in_b
        return sum(1 for c in delta if in_b[c if c >= 0 else ~c])

    def _probe(self, x: Literal, counted: bool) -> tuple[bool, list[int]]:
        st = self.state
        st.assume(x)
        ok = st.expand() and not (self.optimizing and self.unacceptable())
        if counted:
            self.stats.lookahead_expand_calls += 1
        delta = st.assigned_since(-1)
        st.backtrack()
        return ok, delta

    def lookahead(self) -> bool:
        """Test uncovered literals; commit complements of failing ones."""
        st = self.state
        while True:
            exact: dict[int, int] = {}
            bound: dict[int, int] = {}
            restart = False
            for code in list(self.lru):
                a = code >> 1
                if st.decided(a) or code in exact or code in bound:
                    continue
                x = _lit(code)
                ok, delta = self._probe(x, True)
                self.lru.move_to_end(code)
                if not ok:
                    st.add(nb(x))
                    if not st.expand() or self._failed():
                        return False
                    restart = True
                    break
                d = self._delta_size(delta)
                exact[code] = d
                for c in delta:
                    cc = _code(c)
                    if cc != code and cc not in exact:
                        prev = bound.get(cc)
                        if prev is None or d < prev:
                            bound[cc] = d
            if not restart:
                self._exact, self._bound = exact, bound
                return True

    def heuristic(self) -> Literal:
        """Literal maximising (min(p, n), max(p, n)); ties to the lowest atom."""
        st = self.state
        exact, bound = self._exact, self._bound
        counted = self.options.lookahead
        inf = float("inf")
        best: tuple | None = None
        best_lit: Literal | None = None

        def value(code: int) -> float:
            if code in exact:
                return exact[code]
            return bound.get(code, inf)

        def measure(code: int) -> int:
            ok, delta = self._probe(_lit(code), counted)
            exact[code] = self._delta_size(delta)
            bound.pop(code, None)
            return exact[code]

        for a in range(st.num_atoms):
            if st.decided(a):
                continue
            pc, nc = 2 * a, 2 * a + 1
            p, n = value(pc), value(nc)
            if best is not None and (min(p, n), max(p, n)) <= best:
                continue
            if pc not in exact:
                p = measure(pc)
                if best is not None and (min(p, n), max(p, n)) <= best:
                    continue
            if nc not in exact:
                n = measure(nc)
            key = (min(p, n), max(p, n))
            if best is None or key > best:
                best = key
                best_lit = Literal(a, p >= n)
        assert best_lit is not None
        return best_lit

    # --------------------------------------------------------------

    def _node(self) -> str:
        """Expand the current node; returns 'fail', 'model' or 'branch'."""
        st = self.state
        self.stats.nodes += 1
        ok = st.expand() and not self._failed()
        if ok and self.options.lookahead:
            ok = self.lookahead()
        if not ok:
            self.stats.conflicts += 1
            return "fail"
        if st.covered():
            return "model"
        if not self.options.lookahead:
            self._exact, self._bound = {}, {}
        return "branch"

    def _stable(self) -> bool:
        """Handle a model; True stops the search."""
        model = self.state.pos_atoms()
        if self.optimizing:
            self.incumbent = Incumbent(model, tuple(self.state.opt_sums))
            self.models.append(model)
            return False
        self.models.append(model)
        if self.on_model is not None and self.on_model(model):
            return True
        mm = self.options.max_models
        return mm is not None and len(self.models) >= mm

    def run(self, assumptions: Iterable[Literal] = ()) -> SearchOutcome:
        start = time.perf_counter()
        st = self.state
        for x in self.program.compute:
            st.add(x)
        for x in assumptions:
            st.add(x)
        self._search()
        self.stats.expand_calls = st.expand_calls
        self.stats.elapsed = time.perf_counter() - start
        if self.optimizing:
            verdict = OPTIMAL if self.incumbent is not None else UNSATISFIABLE
        else:
            verdict = SATISFIABLE if self.models else UNSATISFIABLE
        return SearchOutcome(verdict, list(self.models), self.incumbent, self.stats)

    def _search(self) -> bool:
        st = self.state
        stack: list[list] = []  # [choice literal, phase]
        level = 0
        result: bool | None = None
        while True:
            if result is None:
                status = self._node()
                if status == "fail":
                    result = False
                elif status == "model":
                    self.top = level
                    result = self._stable()
                else:
                    x = self.heuristic()
                    self.stats.choice_points += 1
                    self.conflict_lit = x
                    stack.append([x, 0])
                    st.assume(x)
                    level += 1
                    continue
            # return ``result`` to the parent frame
            while stack:
                frame = stack[-1]
                st.backtrack()
                level -= 1
                x = frame[0]
                if frame[1] == 0 and not result:
                    if self.backjump and level >= self.top and independent(st, self.conflict_lit, x, self.rules_of, self.members):
                        self.stats.backjumps += 1
                        stack.pop()
                        continue
                    if level < self.top:
                        self.top = level
                    frame[1] = 1
                    st.assume(nb(x))
                    level += 1
                    result = None
                    break
                stack.pop()
            else:
                if result is None:
                    continue
                return bool(result)


def solve(
    p: Program,
    assumptions: Iterable[Literal] = (),
    options: SearchOptions | None = None,
    on_model: Callable[[frozenset[int]], bool] | None = None,
) -> SearchOutcome:
    """Stable models of ``p`` agreeing with compute and ``assumptions``."""
    s = Solver(p, options)
    s.on_model = on_model
    return s.run(assumptions)


def enumerate_models(p: Program, options: SearchOptions | None = None) -> SearchOutcome:
    opts = SearchOptions(**{**(options or SearchOptions()).__dict__, "max_models": None})
    return solve(p, (), opts)


def optimize(p: Program, options: SearchOptions | None = None, assumptions: Iterable[Literal] = ()) -> SearchOutcome:
    """Lexicographically weight-minimal stable model satisfying compute."""
    s = Solver(p, options, optimizing=True)
    return s.run(assumptions)


def _bounded(p: Program, statement: int, limit: int) -> Program:
    """``p`` plus a rule deriving a fresh atom when the weight exceeds ``limit``."""
    name = fresh_name(p, "false")
    atom = p.num_atoms
    st = p.optimize[statement]
    rule = weight_rule(atom, st.entries, check_int64(limit + 1, "bound"))
    return with_rules(p, [rule], [name], [Literal(atom, False)])


def find_optimal_oracle(p: Program, options: SearchOptions | None = None) -> ModelReport | None:
    """Optimal model by binary search on weights with a satisfiability oracle."""
    opts = SearchOptions(**{**(options or SearchOptions()).__dict__, "max_models": 1})
    fixed: dict[int, bool] = {}

    def agree() -> list[Literal]:
        return [Literal(a, v) for a, v in fixed.items()]

    def exists(prog: Program, extra: list[Literal]) -> bool:
        if any(x.atom in fixed and fixed[x.atom] != x.positive for x in extra):
            return False
        return solve(prog, agree() + extra, opts).satisfiable

    if not exists(p, []):
        return None
    for i, st in enumerate(p.optimize):
        lo, hi = 0, st.total()
        while lo < hi:
            mid = (lo + hi) // 2
            if exists(_bounded(p, i, mid), []):
                hi = mid
            else:
                lo = mid + 1
        at_opt = _bounded(p, i, lo)
        for x, _ in st.entries:
            if x.atom in fixed:
                continue
            if exists(at_opt, [x]):
                fixed[x.atom] = x.positive
            else:
                fixed[x.atom] = not x.positive
    for a in range(p.num_atoms):
        if a in fixed:
            continue
        x = Literal(a, True)
        fixed[a] = exists(p, [x])
    model = frozenset(a for a, v in fixed.items() if v)
    return report(p, model)
