"""Ground programs: atoms, literals, the four rule forms and optimize statements.

Programs are built from name-level raw statements by :func:`build_program`,
which interns atoms and applies the weight and statement normalizations.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class UnrepresentableWeight(ValueError):
    """A weight or bound left the signed 64-bit range."""


def check_int64(value: int, what: str = "weight") -> int:
    if not INT64_MIN <= value <= INT64_MAX:
        raise UnrepresentableWeight(f"{what} {value} does not fit in 64 bits")
    return value


class Literal(NamedTuple):
    """An atom (``positive=True``) or its default negation."""

    atom: int
    positive: bool = True

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.positive)


def nb(x: Literal) -> Literal:
    return x.complement()


class RuleKind(enum.Enum):
    BASIC = "basic"
    CHOICE = "choice"
    CARDINALITY = "cardinality"
    WEIGHT = "weight"


@dataclass(frozen=True)
class Rule:
    """A normalized ground rule.

    ``pos_weights``/``neg_weights`` are aligned with ``pos``/``neg`` and only
    used by weight rules. ``bound`` is k for cardinality rules and w for
    weight rules.
    """

    kind: RuleKind
    heads: tuple[int, ...]
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()
    pos_weights: tuple[int, ...] = ()
    neg_weights: tuple[int, ...] = ()
    bound: int | None = None

    @property
    def head(self) -> int:
        return self.heads[0]

    def atoms(self) -> set[int]:
        return set(self.heads) | set(self.pos) | set(self.neg)

    def weighted_body(self) -> list[tuple[Literal, int]]:
        if self.kind is RuleKind.WEIGHT:
            return [(Literal(a, True), w) for a, w in zip(self.pos, self.pos_weights)] + [
                (Literal(b, False), w) for b, w in zip(self.neg, self.neg_weights)
            ]
        return [(Literal(a, True), 1) for a in self.pos] + [(Literal(b, False), 1) for b in self.neg]

    def renamed(self, mapping: Sequence[int]) -> "Rule":
        return Rule(
            self.kind,
            tuple(mapping[a] for a in self.heads),
            tuple(mapping[a] for a in self.pos),
            tuple(mapping[a] for a in self.neg),
            self.pos_weights,
            self.neg_weights,
            self.bound,
        )


def basic(head: int, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> Rule:
    return Rule(RuleKind.BASIC, (head,), _dedup(pos), _dedup(neg))


def choice(heads: Iterable[int], pos: Iterable[int] = (), neg: Iterable[int] = ()) -> Rule:
    hs = _dedup(heads)
    if not hs:
        raise ValueError("choice rule needs at least one head")
    return Rule(RuleKind.CHOICE, hs, _dedup(pos), _dedup(neg))


def cardinality(head: int, bound: int, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> Rule:
    return Rule(RuleKind.CARDINALITY, (head,), _dedup(pos), _dedup(neg), bound=check_int64(bound, "bound"))


def weight_rule(head: int, entries: Iterable[tuple[Literal, int]], bound: int) -> Rule:
    """Weight rule from already nonnegative entries; duplicates are summed."""
    merged = _merge(entries)
    for _, w in merged:
        if w < 0:
            raise ValueError("weight_rule expects nonnegative weights; use normalize_weight_rule")
    pos = [(x.atom, w) for x, w in merged if x.positive]
    neg = [(x.atom, w) for x, w in merged if not x.positive]
    return Rule(
        RuleKind.WEIGHT,
        (head,),
        tuple(a for a, _ in pos),
        tuple(b for b, _ in neg),
        tuple(w for _, w in pos),
        tuple(w for _, w in neg),
        check_int64(bound, "bound"),
    )


def _dedup(xs: Iterable[int]) -> tuple[int, ...]:
    return tuple(dict.fromkeys(xs))


def _merge(entries: Iterable[tuple[Literal, int]]) -> list[tuple[Literal, int]]:
    acc: dict[Literal, int] = {}
    for x, w in entries:
        acc[x] = check_int64(acc.get(x, 0) + w)
    return list(acc.items())


def normalize_weight_entries(
    entries: Iterable[tuple[Literal, int]], bound: int, at_most: bool = False
) -> tuple[list[tuple[Literal, int]], int]:
    """Rewrite ``{entries} >= bound`` (or ``<= bound``) with nonnegative weights.

    A ``<=`` constraint is first flipped by negating every weight and the
    bound. A literal with weight -w is then replaced by its complement with
    weight w, raising the bound by w.
    """
    items = _merge(entries)
    if at_most:
        items = [(x, -w) for x, w in items]
        bound = -bound
    out: list[tuple[Literal, int]] = []
    for x, w in items:
        if w < 0:
            out.append((x.complement(), -w))
            bound += -w
        else:
            out.append((x, w))
    return _merge(out), check_int64(bound, "bound")


def normalize_weight_rule(
    head: int, entries: Iterable[tuple[Literal, int]], bound: int, at_most: bool = False
) -> Rule:
    merged, bound = normalize_weight_entries(entries, bound, at_most)
    return weight_rule(head, merged, bound)


class OptKind(enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass(frozen=True)
class OptimizeStatement:
    kind: OptKind
    entries: tuple[tuple[Literal, int], ...]
    rank: int = 0

    def weight_of(self, model: Iterable[int] | set[int]) -> int:
        s = model if isinstance(model, (set, frozenset)) else set(model)
        return sum(w for x, w in self.entries if (x.atom in s) == x.positive)

    def total(self) -> int:
        return sum(w for _, w in self.entries)


def maximize_to_minimize(s: OptimizeStatement, shift: int | None = None) -> OptimizeStatement:
    """Turn a maximize statement into a minimize statement.

    Without ``shift`` every weight is negated. With ``shift=k`` each weight w
    becomes k - w, which keeps weights nonnegative when k >= max weight; that
    form only orders models the same way when every model satisfies the same
    number of entries. :func:`nonnegative_statement` is the general way to
    remove the negative weights.
    """
    if s.kind is not OptKind.MAXIMIZE:
        raise ValueError("expected a maximize statement")
    if shift is None:
        entries = tuple((x, check_int64(-w)) for x, w in s.entries)
    else:
        entries = tuple((x, check_int64(shift - w)) for x, w in s.entries)
    return OptimizeStatement(OptKind.MINIMIZE, entries, s.rank)


def nonnegative_statement(s: OptimizeStatement) -> OptimizeStatement:
    """Same model order, nonnegative weights.

    An entry x = -w contributes -w exactly when x holds, which equals
    w for the complement minus the constant w. Dropping the constant keeps
    the order of all models.
    """
    if s.kind is not OptKind.MINIMIZE:
        raise ValueError("expected a minimize statement")
    out = []
    for x, w in _merge(s.entries):
        out.append((x.complement(), -w) if w < 0 else (x, w))
    return OptimizeStatement(OptKind.MINIMIZE, tuple(_merge(out)), s.rank)


def combine_minimize(s1: OptimizeStatement, s2: OptimizeStatement) -> OptimizeStatement:
    """One statement whose order equals the lexicographic order of (s1, s2).

    s1 is scaled by the smallest 2^k exceeding the total weight of s2.
    """
    for s in (s1, s2):
        if s.kind is not OptKind.MINIMIZE or any(w < 0 for _, w in s.entries):
            raise ValueError("combine_minimize needs nonnegative minimize statements")
    total2 = s2.total()
    k = 0
    while (1 << k) <= total2:
        k += 1
    scale = 1 << k
    entries = [(x, w * scale) for x, w in s1.entries] + list(s2.entries)
    try:
        merged = _merge(entries)
    except UnrepresentableWeight as exc:
        raise UnrepresentableWeight(f"combined statement is unrepresentable: {exc}") from None
    check_int64(sum(w for _, w in merged), "combined total")
    return OptimizeStatement(OptKind.MINIMIZE, tuple(merged), min(s1.rank, s2.rank))


@dataclass(frozen=True)
class Program:
    names: tuple[str, ...] = ()
    rules: tuple[Rule, ...] = ()
    compute: tuple[Literal, ...] = ()
    optimize: tuple[OptimizeStatement, ...] = ()
    _index: dict[str, int] = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        index = {n: i for i, n in enumerate(self.names)}
        if len(index) != len(self.names):
            raise ValueError("atom names must be unique")
        object.__setattr__(self, "_index", index)

    @property
    def num_atoms(self) -> int:
        return len(self.names)

    def atom(self, name: str) -> int:
        return self._index[name]

    def has_atom(self, name: str) -> bool:
        return name in self._index

    def lit(self, text: str) -> Literal:
        """``"a"`` or ``"not a"`` to a literal."""
        text = text.strip()
        if text.startswith("not "):
            return Literal(self.atom(text[4:].strip()), False)
        return Literal(self.atom(text), True)

    def atomset(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self.atom(n) for n in names)

    def names_of(self, atoms: Iterable[int]) -> list[str]:
        return sorted(self.names[a] for a in atoms)

    def is_normal(self) -> bool:
        return all(r.kind is RuleKind.BASIC for r in self.rules)

    def canonical(self) -> tuple:
        """Name-level structure, independent of atom numbering."""

        def lit(x: Literal) -> tuple[str, bool]:
            return (self.names[x.atom], x.positive)

        def nm(xs: Iterable[int]) -> tuple[str, ...]:
            return tuple(self.names[a] for a in xs)

        rules = tuple(
            (r.kind.value, nm(r.heads), nm(r.pos), nm(r.neg), r.pos_weights, r.neg_weights, r.bound)
            for r in self.rules
        )
        opt = tuple((s.kind.value, tuple((lit(x), w) for x, w in s.entries), s.rank) for s in self.optimize)
        return (frozenset(self.names), rules, tuple(lit(x) for x in self.compute), opt)


def atoms_of(p: Program) -> frozenset[int]:
    seen: set[int] = set()
    for r in p.rules:
        seen |= r.atoms()
    seen.update(x.atom for x in p.compute)
    for s in p.optimize:
        seen.update(x.atom for x, _ in s.entries)
    return frozenset(seen)


# Raw, name-level statements as produced by the parser.

@dataclass
class RawStatement:
    kind: str  # basic, choice, cardinality, weight, compute, minimize, maximize
    heads: list[str] = field(default_factory=list)
    body: list[tuple[str, bool]] = field(default_factory=list)
    weights: list[int] = field(default_factory=list)
    bound: int | None = None
    at_most: bool = False


def build_program(statements: Iterable[RawStatement]) -> Program:
    names: dict[str, int] = {}

    def intern(n: str) -> int:
        if n not in names:
            names[n] = len(names)
        return names[n]

    rules: list[Rule] = []
    compute: dict[Literal, None] = {}
    optimize: list[OptimizeStatement] = []
    for st in statements:
        heads = [intern(h) for h in st.heads]
        body = [Literal(intern(n), positive) for n, positive in st.body]
        pos = [x.atom for x in body if x.positive]
        neg = [x.atom for x in body if not x.positive]
        if st.kind == "basic":
            rules.append(basic(heads[0], pos, neg))
        elif st.kind == "choice":
            rules.append(choice(heads, pos, neg))
        elif st.kind == "cardinality":
            rules.append(cardinality(heads[0], st.bound, pos, neg))
        elif st.kind == "weight":
            rules.append(normalize_weight_rule(heads[0], zip(body, st.weights), st.bound, st.at_most))
        elif st.kind == "compute":
            compute.update(dict.fromkeys(body))
        elif st.kind in ("minimize", "maximize"):
            kind = OptKind.MINIMIZE if st.kind == "minimize" else OptKind.MAXIMIZE
            s = OptimizeStatement(kind, tuple(_merge(zip(body, st.weights))), len(optimize))
            if kind is OptKind.MAXIMIZE:
                s = maximize_to_minimize(s)
            optimize.append(nonnegative_statement(s))
        else:
            raise ValueError(f"unknown statement kind {st.kind!r}")
    return Program(tuple(names), tuple(rules), tuple(compute), tuple(optimize))


def with_rules(p: Program, extra: Sequence[Rule], names: Sequence[str] = (), compute: Sequence[Literal] = ()) -> Program:
    """A copy of ``p`` with new atoms, rules and compute literals appended."""
    return Program(
        p.names + tuple(names),
        p.rules + tuple(extra),
        tuple(dict.fromkeys(p.compute + tuple(compute))),
        p.optimize,
    )


def fresh_name(p: Program, stem: str) -> str:
    name, i = stem, 0
    while p.has_atom(name):
        i += 1
        name = f"{stem}_{i}"
    return name
