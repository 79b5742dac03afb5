"""Counter-based propagation: the lower closure, the upper closure and expand.

All mutable state of a :class:`PropState` lives in flat lists. Every write
to one of them is recorded in an undo log as ``(list, index, old value)``,
so backtracking restores the state exactly.

Per rule the engine keeps
  * ``lit`` / ``inact``: body literals not yet true / already false
    (cardinality rules start them at k and k - body size),
  * ``wmin`` / ``wmax``: bounds on the body weight of weight rules,
  * ``upper`` / ``lower``: support in the upper closure. For basic and choice
    rules ``upper`` counts positive body atoms of the head's component that
    are outside the closure. For cardinality and weight rules ``upper`` is the
    weight of such atoms inside the closure and ``lower`` the weight of the
    remaining body literals that are not false.
"""
from __future__ import annotations

from collections import deque
from typing import Iterable

import networkx as nx

from .core import Literal, Program, RuleKind

BASIC, CHOICE, CARD, WEIGHT = 0, 1, 2, 3
_KIND = {RuleKind.BASIC: BASIC, RuleKind.CHOICE: CHOICE, RuleKind.CARDINALITY: CARD, RuleKind.WEIGHT: WEIGHT}
NO_SOURCE = -1


def compute_sccs(p: Program) -> list[int]:
    """Component id per atom in the positive body -> head graph."""
    g = nx.DiGraph()
    g.add_nodes_from(range(p.num_atoms))
    for r in p.rules:
        for a in r.pos:
            for h in r.heads:
                g.add_edge(a, h)
    comp = [0] * p.num_atoms
    for i, members in enumerate(nx.strongly_connected_components(g)):
        for a in members:
            comp[a] = i
    return comp


class PropState:
    """Partial model plus the counters of both closures."""

    def __init__(self, program: Program, scc_filter: bool = True, use_sources: bool = True):
        self.program = program
        self.scc_filter = scc_filter
        self.use_sources = use_sources
        n = program.num_atoms
        self.num_atoms = n
        rules = program.rules
        nr = len(rules)
        comp = compute_sccs(program) if scc_filter else None

        self.kind = [_KIND[r.kind] for r in rules]
        self.heads = [list(r.heads) for r in rules]
        self.bound = [r.bound if r.bound is not None else 0 for r in rules]
        self.body = [
            [(a, True) for a in r.pos] + [(b, False) for b in r.neg] for r in rules
        ]
        # weight rules: body in decreasing weight order for the cursors
        self.wbody: list[list[tuple[int, bool, int]] | None] = [None] * nr

        self.plist: list[list[tuple[int, int, bool]]] = [[] for _ in range(n)]
        self.nlist: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.hlist: list[list[int]] = [[] for _ in range(n)]
        self.plist_upper: list[list[tuple[int, int]]] = [[] for _ in range(n)]

        self.lit = [0] * nr
        self.inact = [0] * nr
        self.wmin = [0] * nr
        self.wmax = [0] * nr
        self.upper = [0] * nr
        self.lower = [0] * nr
        self.lastp = [0] * nr
        self.lastn = [0] * nr

        self.pos = [False] * n
        self.neg = [False] * n
        self.headof = [0] * n
        self.in_upper = [False] * n
        self.source = [NO_SOURCE] * n

        nstat = len(program.optimize)
        self.opt_sums = [0] * nstat
        self.opt_pos: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.opt_neg: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for s in program.optimize:
            for x, w in s.entries:
                (self.opt_pos if x.positive else self.opt_neg)[x.atom].append((s.rank, w))

        self.state_conflict = [False]
        self.log: list[tuple[list, int, object]] = []
        self.frames: list[tuple[int, int, Literal]] = []
        self.assigned: list[int] = []  # a for true, ~a for false

        self.posq: deque[int] = deque()
        self.negq: deque[int] = deque()
        self.onposq = [False] * n
        self.onnegq = [False] * n
        self.remq: deque[int] = deque()
        self.onremq = [False] * n
        self.pending_false: list[int] = []

        self.expand_calls = 0

        for r, rule in enumerate(rules):
            k = self.kind[r]
            heads = self.heads[r]
            for h in heads:
                self.hlist[h].append(r)
            if k == WEIGHT:
                pw = list(zip(rule.pos, rule.pos_weights))
                nw = list(zip(rule.neg, rule.neg_weights))
            else:
                pw = [(a, 1) for a in rule.pos]
                nw = [(b, 1) for b in rule.neg]
            loop_weight = 0
            other_weight = 0
            for a, w in pw:
                loop = comp is None or any(comp[a] == comp[h] for h in heads)
                self.plist[a].append((r, w, loop))
                if loop:
                    self.plist_upper[a].append((r, w))
                    loop_weight += w
                else:
                    other_weight += w
            for b, w in nw:
                self.nlist[b].append((r, w))
                other_weight += w
            size = len(pw) + len(nw)
            if k in (BASIC, CHOICE):
                self.lit[r] = size
                self.upper[r] = sum(1 for a, _ in pw if comp is None or any(comp[a] == comp[h] for h in heads))
            elif k == CARD:
                self.lit[r] = rule.bound
                self.inact[r] = rule.bound - size
                self.lower[r] = other_weight
            else:
                self.wmax[r] = sum(w for _, w in pw) + sum(w for _, w in nw)
                self.lower[r] = other_weight
                body = [(a, True, w) for a, w in pw] + [(b, False, w) for b, w in nw]
                body.sort(key=lambda e: (-e[2], e[0], not e[1]))
                self.wbody[r] = body
            if self._active(r):
                for h in heads:
                    self.headof[h] += 1
            if self._fired(r):
                self._push_pos(heads[0])

        for a in range(n):
            if self.headof[a] == 0:
                self._push_neg(a)

        # initial upper closure: everything derivable from the empty set
        addq: deque[int] = deque()
        onaddq = [False] * n
        for r in range(nr):
            if self._upper_active(r):
                for h in self.heads[r]:
                    if not onaddq[h]:
                        onaddq[h] = True
                        self.source[h] = r
                        addq.append(h)
        self._add_stage(addq, onaddq)
        self.pending_false = [a for a in range(n) if not self.in_upper[a]]
        self.log.clear()

    # ------------------------------------------------------------------
    # rule status

    def _active(self, r: int) -> bool:
        k = self.kind[r]
        if k == WEIGHT:
            return self.wmax[r] >= self.bound[r]
        return self.inact[r] <= 0

    def _fired(self, r: int) -> bool:
        k = self.kind[r]
        if k == BASIC:
            return self.lit[r] == 0
        if k == CARD:
            return self.lit[r] <= 0
        if k == WEIGHT:
            return self.wmin[r] >= self.bound[r]
        return False

    def _upper_active(self, r: int) -> bool:
        k = self.kind[r]
        if k == BASIC or k == CHOICE:
            return self.upper[r] == 0 and self.inact[r] == 0
        return self.upper[r] + self.lower[r] >= self.bound[r]

    # ------------------------------------------------------------------
    # queues

    def _push_pos(self, a: int) -> None:
        if not self.onposq[a] and not self.pos[a]:
            self.onposq[a] = True
            self.posq.append(a)

    def _push_neg(self, a: int) -> None:
        if not self.onnegq[a] and not self.neg[a]:
            self.onnegq[a] = True
            self.negq.append(a)

    def _push(self, x: Literal) -> None:
        if x.positive:
            self._push_pos(x.atom)
        else:
            self._push_neg(x.atom)

    def _push_lit(self, a: int, positive: bool) -> None:
        if positive:
            self._push_pos(a)
        else:
            self._push_neg(a)

    def _queue_removal(self, r: int) -> None:
        """Heads of ``r`` may have lost their support in the upper closure."""
        in_upper = self.in_upper
        source = self.source
        for h in self.heads[r]:
            if in_upper[h] and not self.onremq[h] and (
                not self.use_sources or source[h] == r or source[h] == NO_SOURCE
            ):
                self.onremq[h] = True
                self.remq.append(h)

    def _clear_queues(self) -> None:
        for q, flags in ((self.posq, self.onposq), (self.negq, self.onnegq), (self.remq, self.onremq)):
            for a in q:
                flags[a] = False
            q.clear()
        self.pending_false.clear()

    def _set_conflict(self) -> None:
        if not self.state_conflict[0]:
            self.log.append((self.state_conflict, 0, False))
            self.state_conflict[0] = True

    # ------------------------------------------------------------------
    # lower closure

    def _fire(self, r: int, w: int) -> None:
        k = self.kind[r]
        log = self.log
        if k == WEIGHT:
            arr = self.wmin
            old = arr[r]
            log.append((arr, r, old))
            arr[r] = new = old + w
            b = self.bound[r]
            if self.wmax[r] >= b and old < b:
                h = self.heads[r][0]
                if new >= b:
                    self._push_pos(h)
                elif self.neg[h]:
                    self._backchain_false(r)
            return
        arr = self.lit
        log.append((arr, r, arr[r]))
        arr[r] -= 1
        if k == CHOICE:
            return
        h = self.heads[r][0]
        if arr[r] == 0:
            self._push_pos(h)
        elif self.neg[h]:
            self._backchain_false(r)

    def _inactivate(self, r: int, w: int) -> None:
        k = self.kind[r]
        log = self.log
        if k == WEIGHT:
            arr = self.wmax
            old = arr[r]
            log.append((arr, r, old))
            arr[r] = new = old - w
            b = self.bound[r]
            if old >= b and self.wmin[r] < b:
                if new < b:
                    self._became_inactive(r)
                else:
                    h = self.heads[r][0]
                    if self.pos[h] and self.headof[h] == 1:
                        self._backchain_true(r)
            return
        arr = self.inact
        log.append((arr, r, arr[r]))
        arr[r] += 1
        if arr[r] == 1:
            self._became_inactive(r)
        elif k == CARD and arr[r] == 0:
            h = self.heads[r][0]
            if self.pos[h] and self.headof[h] == 1:
                self._backchain_true(r)

    def _became_inactive(self, r: int) -> None:
        headof = self.headof
        log = self.log
        for h in self.heads[r]:
            log.append((headof, h, headof[h]))
            headof[h] -= 1
            if headof[h] == 0:
                self._push_neg(h)
            elif headof[h] == 1 and self.pos[h]:
                self._backchain_true(self._only_active(h))
        if self.kind[r] <= CHOICE:
            self._queue_removal(r)

    def _only_active(self, a: int) -> int:
        for r in self.hlist[a]:
            if self._active(r):
                return r
        raise AssertionError("headof out of sync")

    def _lower_drop(self, r: int, w: int) -> None:
        arr = self.lower
        old = arr[r]
        self.log.append((arr, r, old))
        arr[r] = old - w
        b = self.bound[r]
        if self.upper[r] + old >= b and old - w < b:
            self._queue_removal(r)

    def _undecided(self, a: int) -> bool:
        return not self.pos[a] and not self.neg[a]

    def _backchain_true(self, r: int) -> None:
        """The head is true and ``r`` is its only active rule."""
        k = self.kind[r]
        pos, neg = self.pos, self.neg
        if k == BASIC:
            for a, positive in self.body[r]:
                if not pos[a] and not neg[a]:
                    self._push_lit(a, positive)
        elif k == CHOICE:
            if self.lit[r] > 0:
                for a, positive in self.body[r]:
                    if not pos[a] and not neg[a]:
                        self._push_lit(a, positive)
        elif k == CARD:
            if self.lit[r] > 0 and self.inact[r] == 0:
                for a, positive in self.body[r]:
                    if not pos[a] and not neg[a]:
                        self._push_lit(a, positive)
        else:
            b = self.bound[r]
            if self.wmin[r] >= b:
                return
            body = self.wbody[r]
            mx = self.wmax[r]
            i = start = self.lastp[r]
            while i < len(body):
                a, positive, w = body[i]
                if not pos[a] and not neg[a]:
                    if mx - w < b:
                        self._push_lit(a, positive)
                    else:
                        break
                i += 1
            if i != start:
                self.log.append((self.lastp, r, start))
                self.lastp[r] = i

    def _backchain_false(self, r: int) -> None:
        """The head is false; block the last ways ``r`` could still fire."""
        k = self.kind[r]
        pos, neg = self.pos, self.neg
        if k == BASIC:
            if self.lit[r] == 1 and self.inact[r] == 0:
                for a, positive in self.body[r]:
                    if not (pos[a] if positive else neg[a]):
                        self._push_lit(a, not positive)
                        return
        elif k == CARD:
            if self.lit[r] == 1 and self.inact[r] <= 0:
                for a, positive in self.body[r]:
                    if not pos[a] and not neg[a]:
                        self._push_lit(a, not positive)
        elif k == WEIGHT:
            b = self.bound[r]
            mn = self.wmin[r]
            if self.wmax[r] < b or mn >= b:
                return
            body = self.wbody[r]
            i = start = self.lastn[r]
            while i < len(body):
                a, positive, w = body[i]
                if not pos[a] and not neg[a]:
                    if mn + w >= b:
                        self._push_lit(a, not positive)
                    else:
                        break
                i += 1
            if i != start:
                self.log.append((self.lastn, r, start))
                self.lastn[r] = i

    def _set_true(self, a: int) -> None:
        log = self.log
        log.append((self.pos, a, False))
        self.pos[a] = True
        self.assigned.append(a)
        sums = self.opt_sums
        for s, w in self.opt_pos[a]:
            log.append((sums, s, sums[s]))
            sums[s] += w
        for r, w, _ in self.plist[a]:
            self._fire(r, w)
        kind = self.kind
        for r, w in self.nlist[a]:
            self._inactivate(r, w)
            if kind[r] >= CARD:
                self._lower_drop(r, w)
        if self.headof[a] == 1:
            self._backchain_true(self._only_active(a))

    def _set_false(self, a: int) -> None:
        log = self.log
        log.append((self.neg, a, False))
        self.neg[a] = True
        self.assigned.append(~a)
        sums = self.opt_sums
        for s, w in self.opt_neg[a]:
            log.append((sums, s, sums[s]))
            sums[s] += w
        for r, w in self.nlist[a]:
            self._fire(r, w)
        kind = self.kind
        for r, w, loop in self.plist[a]:
            self._inactivate(r, w)
            if not loop and kind[r] >= CARD:
                self._lower_drop(r, w)
        if self.headof[a] > 0:
            for r in self.hlist[a]:
                if kind[r] != CHOICE:
                    self._backchain_false(r)
        if self.in_upper[a] and not self.onremq[a]:
            self.onremq[a] = True
            self.remq.append(a)

    def propagate_atleast(self) -> bool:
        """Run the lower closure until both queues drain; False on conflict."""
        if self.state_conflict[0]:
            self._clear_queues()
            return False
        posq, negq = self.posq, self.negq
        onposq, onnegq = self.onposq, self.onnegq
        pos, neg = self.pos, self.neg
        while posq or negq:
            if posq:
                a = posq.popleft()
                onposq[a] = False
                if pos[a]:
                    continue
                if neg[a]:
                    self._set_conflict()
                    self._clear_queues()
                    return False
                self._set_true(a)
            else:
                a = negq.popleft()
                onnegq[a] = False
                if neg[a]:
                    continue
                if pos[a]:
                    self._set_conflict()
                    self._clear_queues()
                    return False
                self._set_false(a)
        return True

    # ------------------------------------------------------------------
    # upper closure

    def _remove_stage(self) -> list[int]:
        remq, onremq = self.remq, self.onremq
        in_upper, source = self.in_upper, self.source
        upper, lower, inact, bound, kind = self.upper, self.lower, self.inact, self.bound, self.kind
        log = self.log
        removed: list[int] = []
        while remq:
            a = remq.popleft()
            onremq[a] = False
            if not in_upper[a]:
                continue
            log.append((in_upper, a, True))
            in_upper[a] = False
            if source[a] != NO_SOURCE:
                log.append((source, a, source[a]))
                source[a] = NO_SOURCE
            removed.append(a)
            for r, w in self.plist_upper[a]:
                old = upper[r]
                if kind[r] <= CHOICE:
                    log.append((upper, r, old))
                    upper[r] = old + 1
                    if old == 0 and inact[r] == 0:
                        self._queue_removal(r)
                else:
                    log.append((upper, r, old))
                    upper[r] = old - w
                    if old + lower[r] >= bound[r] and lower[r] < bound[r]:
                        self._queue_removal(r)
        return removed

    def _add_stage(self, addq: deque, onaddq: list[bool]) -> None:
        in_upper, source, neg = self.in_upper, self.source, self.neg
        upper, lower, inact, bound, kind = self.upper, self.lower, self.inact, self.bound, self.kind
        heads = self.heads
        log = self.log
        while addq:
            a = addq.popleft()
            onaddq[a] = False
            if in_upper[a] or neg[a]:
                continue
            log.append((in_upper, a, False))
            in_upper[a] = True
            for r, w in self.plist_upper[a]:
                old = upper[r]
                if kind[r] <= CHOICE:
                    log.append((upper, r, old))
                    upper[r] = old - 1
                    fires = old == 1 and inact[r] == 0
                else:
                    log.append((upper, r, old))
                    upper[r] = old + w
                    fires = old + lower[r] < bound[r] <= old + w + lower[r]
                if fires:
                    for h in heads[r]:
                        if not in_upper[h] and not neg[h] and not onaddq[h]:
                            if source[h] == NO_SOURCE:
                                log.append((source, h, NO_SOURCE))
                                source[h] = r
                            onaddq[h] = True
                            addq.append(h)

    def propagate_atmost(self) -> None:
        """Remove atoms that lost support, then re-derive what still follows."""
        if not self.remq:
            return
        removed = self._remove_stage()
        addq: deque[int] = deque()
        onaddq = [False] * self.num_atoms if len(removed) * 8 > self.num_atoms else _SparseFlags()
        in_upper, neg, source = self.in_upper, self.neg, self.source
        for a in removed:
            if in_upper[a] or neg[a]:
                continue
            for r in self.hlist[a]:
                if self._upper_active(r):
                    if source[a] == NO_SOURCE:
                        self.log.append((source, a, NO_SOURCE))
                        source[a] = r
                    onaddq[a] = True
                    addq.append(a)
                    break
        self._add_stage(addq, onaddq)
        for a in removed:
            if not in_upper[a]:
                self.pending_false.append(a)

    # ------------------------------------------------------------------
    # public interface

    @property
    def conflict(self) -> bool:
        return self.state_conflict[0]

    def expand(self) -> bool:
        """Alternate both closures to a joint fixpoint; False on conflict."""
        self.expand_calls += 1
        in_upper, neg = self.in_upper, self.neg
        while True:
            if not self.propagate_atleast():
                return False
            self.propagate_atmost()
            pushed = False
            for a in self.pending_false:
                if not in_upper[a] and not neg[a]:
                    self._push_neg(a)
                    pushed = True
            self.pending_false.clear()
            if not pushed:
                return True

    def assume(self, x: Literal) -> None:
        """Open a new frame and queue ``x``; call :meth:`expand` next."""
        self.frames.append((len(self.log), len(self.assigned), x))
        self._push(x)

    def add(self, x: Literal) -> None:
        """Queue ``x`` inside the current frame."""
        self._push(x)

    def backtrack(self) -> Literal:
        if not self.frames:
            raise IndexError("backtrack on an empty trail")
        log_len, asg_len, x = self.frames.pop()
        self._clear_queues()
        log = self.log
        while len(log) > log_len:
            arr, i, old = log.pop()
            arr[i] = old
        del self.assigned[asg_len:]
        return x

    @property
    def level(self) -> int:
        return len(self.frames)

    def apply_raw(self, lits: Iterable[Literal]) -> None:
        """Record literals in the counters without deriving consequences."""
        self._clear_queues()
        for x in lits:
            if x.positive and not self.pos[x.atom]:
                self._set_true(x.atom)
            elif not x.positive and not self.neg[x.atom]:
                self._set_false(x.atom)
        for q, flags in ((self.posq, self.onposq), (self.negq, self.onnegq)):
            for a in q:
                flags[a] = False
            q.clear()

    def is_true(self, a: int) -> bool:
        return self.pos[a]

    def is_false(self, a: int) -> bool:
        return self.neg[a]

    def decided(self, a: int) -> bool:
        return self.pos[a] or self.neg[a]

    def covered(self) -> bool:
        return len(self.assigned) == self.num_atoms

    def pos_atoms(self) -> frozenset[int]:
        return frozenset(a for a in range(self.num_atoms) if self.pos[a])

    def neg_atoms(self) -> frozenset[int]:
        return frozenset(a for a in range(self.num_atoms) if self.neg[a])

    def upper_atoms(self) -> frozenset[int]:
        return frozenset(a for a in range(self.num_atoms) if self.in_upper[a])

    def literals(self) -> frozenset[Literal]:
        return frozenset(Literal(c, True) if c >= 0 else Literal(~c, False) for c in self.assigned)

    def assigned_since(self, frame_index: int) -> list[int]:
        return self.assigned[self.frames[frame_index][1]:]

    def rule_inactive(self, r: int) -> bool:
        return not self._active(r)

    def snapshot(self) -> tuple:
        """Every piece of mutable state, for exact comparisons."""
        return (
            tuple(self.pos), tuple(self.neg), tuple(self.headof), tuple(self.in_upper), tuple(self.source),
            tuple(self.lit), tuple(self.inact), tuple(self.wmin), tuple(self.wmax), tuple(self.upper),
            tuple(self.lower), tuple(self.lastp), tuple(self.lastn), tuple(self.opt_sums),
            self.state_conflict[0], tuple(self.assigned), tuple(self.frames), len(self.log),
        )


class _SparseFlags(dict):
    """Boolean flags defaulting to False, for small removal batches."""

    def __missing__(self, key):
        return False


def init(p: Program, **kw) -> PropState:
    return PropState(p, **kw)


def expand(p: Program, lits: Iterable[Literal] = (), **kw) -> tuple[frozenset[Literal], bool]:
    """Expand ``lits`` from a fresh state; returns (literal set, conflict)."""
    st = PropState(p, **kw)
    for x in lits:
        st.add(x)
    ok = st.expand()
    return st.literals(), not ok


def atleast(p: Program, lits: Iterable[Literal] = (), **kw) -> tuple[frozenset[Literal], bool]:
    st = PropState(p, **kw)
    for x in lits:
        st.add(x)
    ok = st.propagate_atleast()
    return st.literals(), not ok


def atmost(p: Program, lits: Iterable[Literal] = (), **kw) -> frozenset[int]:
    """Upper closure of exactly ``lits`` (no lower-closure inferences).

    With component filtering one pass may keep atoms whose support runs
    through removed atoms of other components, so atoms that drop out are
    recorded as false and the pass repeats until nothing drops out.

    The result is exact when every true literal of ``lits`` lies inside the
    closure. Otherwise ``lits`` has no stable model and expand reports a
    conflict, so the engine never relies on that case.
    """
    st = PropState(p, **kw)
    st.apply_raw(lits)
    while True:
        st.propagate_atmost()
        st.pending_false.clear()
        out = [a for a in range(st.num_atoms) if not (st.in_upper[a] or st.pos[a] or st.neg[a])]
        if not out:
            return st.upper_atoms()
        st.apply_raw(Literal(a, False) for a in out)
