"""Text format for ground programs.

::

    a :- b, not c.            % basic rule
    {h1, h2} :- a.            % choice rule
    h :- 2 {a, b, not c}.     % cardinality rule
    h :- {a = 1, not c = 3} >= 2.
    compute {not false}.
    minimize {a = 1, b = 2}.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .core import INT64_MAX, INT64_MIN, Program, RawStatement, RuleKind, build_program


class ErrorKind(enum.Enum):
    SYNTAX = "syntax"
    BAD_WEIGHT = "bad-weight"
    BAD_BOUND = "bad-bound"


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str, kind: ErrorKind = ErrorKind.SYNTAX):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.kind = kind


KEYWORDS = {"not", "compute", "minimize", "maximize"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<arrow>:-)
  | (?P<cmp>>=|<=)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[{}=,.()])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, t: Token, msg: str, kind: ErrorKind = ErrorKind.SYNTAX) -> ParseError:
        return ParseError(t.line, t.col, msg, kind)

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind == "eof":
            raise self.error(t, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind != "eof"

    def integer(self, kind: ErrorKind) -> int:
        t = self.next()
        if t.kind != "int":
            raise self.error(t, f"expected an integer, found {t.text or 'end of input'!r}", kind)
        value = int(t.text)
        if not INT64_MIN <= value <= INT64_MAX:
            raise self.error(t, f"integer {t.text} does not fit in 64 bits", kind)
        return value

    def atom(self) -> str:
        t = self.next()
        if t.kind != "name" or t.text in KEYWORDS:
            raise self.error(t, f"expected an atom, found {t.text or 'end of input'!r}")
        name = t.text
        if self.at("(") and self.peek().line == t.line and self.peek().col == t.col + len(t.text):
            name += self._group()
        return name

    def _group(self) -> str:
        # opaque compound name such as p(1,f(x))
        parts = [self.expect("(").text]
        depth = 1
        while depth:
            t = self.next()
            if t.kind == "eof" or t.text in {".", "{", "}"}:
                raise self.error(t, "unbalanced parenthesis in atom name")
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            parts.append(t.text)
        return "".join(parts)

    def lit(self) -> tuple[str, bool]:
        t = self.peek()
        if t.kind == "name" and t.text == "not":
            self.next()
            return self.atom(), False
        return self.atom(), True

    def litlist(self, closer: str | None) -> list[tuple[str, bool]]:
        out: list[tuple[str, bool]] = []
        if closer is not None and self.at(closer):
            return out
        if closer is None and self.at("."):
            return out
        out.append(self.lit())
        while self.at(","):
            self.next()
            out.append(self.lit())
        return out

    def wlitlist(self) -> tuple[list[tuple[str, bool]], list[int]]:
        body: list[tuple[str, bool]] = []
        weights: list[int] = []
        if self.at("}"):
            return body, weights
        while True:
            body.append(self.lit())
            self.expect("=")
            weights.append(self.integer(ErrorKind.BAD_WEIGHT))
            if not self.at(","):
                return body, weights
            self.next()

    def statement(self) -> RawStatement:
        t = self.peek()
        if t.kind == "name" and t.text in ("compute", "minimize", "maximize"):
            self.next()
            self.expect("{")
            if t.text == "compute":
                st = RawStatement("compute", body=self.litlist("}"))
            else:
                body, weights = self.wlitlist()
                st = RawStatement(t.text, body=body, weights=weights)
            self.expect("}")
            return st
        if self.at("{"):
            self.next()
            heads = [self.atom()]
            while self.at(","):
                self.next()
                heads.append(self.atom())
            self.expect("}")
            body: list[tuple[str, bool]] = []
            if self.at(":-"):
                self.next()
                body = self.litlist(None)
            return RawStatement("choice", heads=heads, body=body)
        head = self.atom()
        if not self.at(":-"):
            return RawStatement("basic", heads=[head])
        self.next()
        nxt = self.peek()
        if nxt.kind == "int":
            bound = self.integer(ErrorKind.BAD_BOUND)
            self.expect("{")
            body = self.litlist("}")
            self.expect("}")
            return RawStatement("cardinality", heads=[head], body=body, bound=bound)
        if self.at("{"):
            self.next()
            body, weights = self.wlitlist()
            self.expect("}")
            cmp = self.next()
            if cmp.kind != "cmp":
                raise self.error(cmp, f"expected '>=' or '<=', found {cmp.text or 'end of input'!r}")
            bound = self.integer(ErrorKind.BAD_BOUND)
            return RawStatement(
                "weight", heads=[head], body=body, weights=weights, bound=bound, at_most=cmp.text == "<="
            )
        return RawStatement("basic", heads=[head], body=self.litlist(None))

    def program(self) -> list[RawStatement]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.statement())
            self.expect(".")
        return out


def parse_statements(text: str) -> list[RawStatement]:
    return _Parser(text).program()


def parse(text: str) -> Program:
    """Parse program text; raises :class:`ParseError` on the first error."""
    return build_program(parse_statements(text))


def _lit(p: Program, atom: int, positive: bool) -> str:
    return p.names[atom] if positive else "not " + p.names[atom]


def render(p: Program) -> str:
    lines = []
    for r in p.rules:
        body = [_lit(p, a, True) for a in r.pos] + [_lit(p, b, False) for b in r.neg]
        if r.kind is RuleKind.BASIC:
            head = p.names[r.head]
            lines.append(f"{head} :- {', '.join(body)}." if body else f"{head}.")
        elif r.kind is RuleKind.CHOICE:
            heads = "{" + ", ".join(p.names[h] for h in r.heads) + "}"
            lines.append(f"{heads} :- {', '.join(body)}." if body else f"{heads}.")
        elif r.kind is RuleKind.CARDINALITY:
            lines.append(f"{p.names[r.head]} :- {r.bound} {{{', '.join(body)}}}.")
        else:
            wl = [f"{_lit(p, a, True)} = {w}" for a, w in zip(r.pos, r.pos_weights)]
            wl += [f"{_lit(p, b, False)} = {w}" for b, w in zip(r.neg, r.neg_weights)]
            lines.append(f"{p.names[r.head]} :- {{{', '.join(wl)}}} >= {r.bound}.")
    if p.compute:
        lines.append("compute {" + ", ".join(_lit(p, x.atom, x.positive) for x in p.compute) + "}.")
    for s in p.optimize:
        lines.append("minimize {" + ", ".join(f"{_lit(p, x.atom, x.positive)} = {w}" for x, w in s.entries) + "}.")
    return "".join(line + "\n" for line in lines)
