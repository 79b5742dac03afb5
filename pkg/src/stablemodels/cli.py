"""Command-line front end.

Exit codes: 10 satisfiable, 20 unsatisfiable, 30 optimum found, 0 for
successful ``gen``/``check``/``wfs``, 1 usage error, 2 parse error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

from .core import Literal, OptimizeStatement, Program, UnrepresentableWeight
from . import encodings
from .encodings import FormatError
from .search import SearchOptions, SearchStats, optimize, solve
from .semantics import UniverseTooLarge, enumerate_bruteforce, is_stable, satisfies_compute, well_founded
from .textio import ParseError, parse, render

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_OPTIMUM = 30

MASK64 = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea and Flood's 64-bit mixing generator."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next()
            if r >= threshold:
                return r % n

    def permutation(self, n: int) -> list[int]:
        out = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


def shuffle(p: Program, seed: int) -> Program:
    """Same program with rules reordered and atoms renumbered."""
    rng = SplitMix64(seed)
    perm = rng.permutation(p.num_atoms)  # old index -> new index
    order = rng.permutation(len(p.rules))
    names = [""] * p.num_atoms
    for old, new in enumerate(perm):
        names[new] = p.names[old]

    def lit(x: Literal) -> Literal:
        return Literal(perm[x.atom], x.positive)

    rules = tuple(p.rules[i].renamed(perm) for i in order)
    opt = tuple(OptimizeStatement(s.kind, tuple((lit(x), w) for x, w in s.entries), s.rank) for s in p.optimize)
    return Program(tuple(names), rules, tuple(lit(x) for x in p.compute), opt)


def emit_stats(stats: SearchStats) -> str:
    rows = [
        ("choice_points", stats.choice_points),
        ("conflicts", stats.conflicts),
        ("expand_calls", stats.expand_calls),
        ("lookahead_expand_calls", stats.lookahead_expand_calls),
        ("backjumps", stats.backjumps),
        ("duration_s", f"{stats.elapsed:.6f}"),
    ]
    return "".join(f"{k}={v}\n" for k, v in rows)


def model_line(p: Program, model) -> str:
    return " ".join(["Stable Model:", *p.names_of(model)])


@dataclass
class RunConfig:
    subcommand: str
    source: str
    options: SearchOptions
    shuffle_seed: int | None = None
    stats: bool = False


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def _models_arg(text: str) -> int | None:
    if text == "all":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a count or 'all'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("count must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="stablemodels", description="Stable models of ground logic programs.")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    def search_command(name: str, help_text: str, models_default: str | None = None):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("file", nargs="?", default="-", help="program file, '-' for stdin")
        if models_default is not None:
            sp.add_argument("--models", type=_models_arg, default=_models_arg(models_default))
        sp.add_argument("--no-lookahead", action="store_true")
        sp.add_argument("--no-backjump", action="store_true")
        sp.add_argument("--no-restrict", action="store_true")
        sp.add_argument("--shuffle", action="store_true", help="randomly renumber atoms and reorder rules")
        sp.add_argument("--seed", type=int, default=None, help="shuffle seed, implies --shuffle")
        sp.add_argument("--stats", action="store_true")
        return sp

    search_command("solve", "print the first stable model")
    search_command("enumerate", "print stable models", models_default="all")
    search_command("optimize", "print an optimal stable model and its weights")
    o = sub.add_parser("oracle", help="enumerate stable models by brute force")
    o.add_argument("file", nargs="?", default="-")
    o.add_argument("--oracle-limit", type=int, default=20)
    c = sub.add_parser("check", help="test whether an atom set is a stable model")
    c.add_argument("file", nargs="?", default="-")
    c.add_argument("--model", required=True, help="space-separated atom names")
    w = sub.add_parser("wfs", help="well-founded model of a normal program")
    w.add_argument("file", nargs="?", default="-")
    g = sub.add_parser("gen", help="emit a benchmark program")
    g.add_argument("family", choices=["3sat", "dimacs", "pigeonhole", "hamiltonian", "complete", "code", "binpacking"])
    g.add_argument("params", nargs="*")
    g.add_argument("--ratio", type=float, default=None)
    g.add_argument("--allow-large", action="store_true")
    return top


def _read(path: str, stdin: TextIO) -> str:
    if path == "-":
        return stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _ints(params: list[str], count: int | None, usage: str) -> list[int]:
    if count is not None and len(params) != count:
        raise UsageError(f"expected {usage}")
    try:
        return [int(x) for x in params]
    except ValueError:
        raise UsageError(f"expected {usage}") from None


def generate(family: str, params: list[str], ratio: float | None, allow_large: bool, stdin: TextIO) -> Program:
    try:
        if family == "3sat":
            atoms, seed = _ints(params, 2, "ATOMS SEED")
            return encodings.encode_3sat(encodings.random_3sat(atoms, seed, ratio))
        if family == "dimacs":
            if len(params) > 1:
                raise UsageError("expected [FILE]")
            return encodings.encode_3sat(encodings.read_dimacs(_read(params[0] if params else "-", stdin)))
        if family == "pigeonhole":
            n, k = _ints(params, 2, "PIGEONS HOLES")
            return encodings.encode_pigeonhole(n, k)
        if family == "hamiltonian":
            if len(params) > 1:
                raise UsageError("expected [FILE]")
            return encodings.encode_hamiltonian(encodings.read_graph(_read(params[0] if params else "-", stdin)))
        if family == "complete":
            (n,) = _ints(params, 1, "VERTICES")
            return encodings.encode_hamiltonian(encodings.complete_graph(n))
        if family == "code":
            n, d = _ints(params, 2, "LENGTH DISTANCE")
            return encodings.encode_code(n, d, allow_large=allow_large)
        if family == "binpacking":
            values = _ints(params, None, "BINS CAPACITY SIZE...")
            if len(values) < 2:
                raise UsageError("expected BINS CAPACITY SIZE...")
            return encodings.encode_binpacking(values[2:], values[0], values[1])
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown family {family}")


def _options(args) -> SearchOptions:
    return SearchOptions(
        max_models=getattr(args, "models", 1),
        lookahead=not args.no_lookahead,
        backjump=not args.no_backjump,
        restrict=not args.no_restrict,
        seed=args.seed or 0,
    )


def _config(args) -> RunConfig:
    seed = args.seed
    if seed is None and args.shuffle:
        seed = 0
    return RunConfig(args.command, args.file, _options(args), seed, args.stats)


def _search(cfg: RunConfig, p: Program, out: TextIO) -> int:
    if cfg.shuffle_seed is not None:
        p = shuffle(p, cfg.shuffle_seed)
    if cfg.subcommand == "optimize":
        res = optimize(p, cfg.options)
        if res.incumbent is not None:
            out.write(model_line(p, res.incumbent.model) + "\n")
            out.write(" ".join(["Weights:", *map(str, res.incumbent.weights)]) + "\n")
            out.write("OPTIMUM FOUND\n")
            code = EXIT_OPTIMUM
        else:
            out.write("UNSATISFIABLE\n")
            code = EXIT_UNSAT
    else:
        res = solve(p, (), cfg.options)
        for m in res.models:
            out.write(model_line(p, m) + "\n")
        if cfg.subcommand == "enumerate":
            out.write(f"Models: {len(res.models)}\n")
        elif not res.models:
            out.write("UNSATISFIABLE\n")
        code = EXIT_SAT if res.models else EXIT_UNSAT
    if cfg.stats:
        out.write(emit_stats(res.stats))
    return code


def run(argv: Sequence[str] | None = None, stdin: TextIO | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        if args.command == "gen":
            p = generate(args.family, args.params, args.ratio, args.allow_large, stdin)
            out.write(render(p))
            return EXIT_OK
        p = parse(_read(args.file, stdin))
        if args.command in ("solve", "enumerate", "optimize"):
            return _search(_config(args), p, out)
        if args.command == "oracle":
            models = enumerate_bruteforce(p, limit=args.oracle_limit)
            for m in models:
                out.write(model_line(p, m.model) + "\n")
            out.write(f"Models: {len(models)}\n")
            return EXIT_SAT if models else EXIT_UNSAT
        if args.command == "check":
            names = args.model.split()
            if not all(p.has_atom(n) for n in names):
                out.write("NOT STABLE\n")
                return EXIT_UNSAT
            s = p.atomset(names)
            ok = is_stable(p, s) and satisfies_compute(p, s)
            out.write("STABLE\n" if ok else "NOT STABLE\n")
            return EXIT_OK if ok else EXIT_UNSAT
        if args.command == "wfs":
            if not p.is_normal():
                raise UsageError("wfs needs a program of basic rules")
            true, false = well_founded(p)
            undefined = set(range(p.num_atoms)) - true - false
            for label, atoms in (("True:", true), ("False:", false), ("Undefined:", undefined)):
                out.write(" ".join([label, *p.names_of(atoms)]) + "\n")
            return EXIT_OK
        raise UsageError(f"unknown subcommand {args.command}")
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ParseError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except (FormatError, UnrepresentableWeight) as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except UniverseTooLarge as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
