"""Command-line front end: ``bosonorder <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (bad expression, argument
out of range) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence, TextIO

from . import algebra, coherent, combinatorics, phasespace, wick

GRAMMAR = """\
expression grammar:
  expr   := ['+'|'-'] term (('+'|'-') term)*
  term   := coeff ['*'] factor* | factor+
  factor := base ['^' uint] | '(' expr ')' ['^' uint]
  base   := 'a' | 'ad'          ('a†' and 'a^+' are aliases for 'ad')
  coeff  := int | int '/' uint
juxtaposition is the operator product; '*' between factors is optional.
example: "2*ad^2 a^2 + (a ad)^2 - 1/2"
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{GRAMMAR}")
        raise SystemExit(2)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bosonorder",
        description="Normal ordering of boson expressions and the combinatorics behind it.",
        epilog=GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)

    for name, help in (("normal-order", "normal-order an expression"), ("double-dot", "apply the double-dot operation")):
        p = add(name, help)
        p.add_argument("expr")
        p.add_argument("--json", action="store_true")
        p.add_argument("--out")

    p = add("wick", "normal-order via Wick contractions")
    p.add_argument("expr")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("partitions", "list set partitions of {1..n}")
    p.add_argument("n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("stirling", "Stirling numbers of the second kind")
    p.add_argument("n", type=int, nargs="?")
    p.add_argument("k", type=int, nargs="?")
    p.add_argument("--table", type=int, metavar="N")
    p.add_argument("--out")

    p = add("bell", "Bell number B(n)")
    p.add_argument("n", type=int)

    p = add("bell-poly", "Bell polynomial B(n, x)")
    p.add_argument("n", type=int)
    p.add_argument("--json", action="store_true")

    p = add("dobinski", "evaluate B(n, x) from its Poisson series")
    p.add_argument("n", type=int)
    p.add_argument("x")
    p.add_argument("--eps", type=float, default=1e-10)

    p = add("verify", "check an exponential normal-ordering identity")
    p.add_argument("name", choices=sorted(coherent.IDENTITIES))
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = add("expect", "coherent-state expectation value <z|expr|z>")
    p.add_argument("expr")
    p.add_argument("--z", required=True, help="amplitude as 're,im'")
    p.add_argument("--json", action="store_true")

    p = add("husimi", "thermal Husimi vs classical density on a grid (CSV)")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--grid", default="-4:4:9,-4:4:9", help="'qmin:qmax:nq,pmin:pmax:np'")
    p.add_argument("--out")
    return parser


def _emit(text: str, args, stdout: TextIO) -> None:
    if not text.endswith("\n"):
        text += "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _dispatch(args, stdout: TextIO) -> None:
    cmd = args.command
    if cmd in ("normal-order", "double-dot"):
        poly = algebra.parse_expr(args.expr)
        nf = algebra.normal_order(poly) if cmd == "normal-order" else algebra.double_dot(poly)
        _emit(nf.to_json() if args.json else str(nf), args, stdout)
    elif cmd == "wick":
        poly = algebra.parse_expr(args.expr)
        total = algebra.NormalForm()
        words = []
        for word, c in poly.items():
            contractions = wick.enumerate_contractions(word)
            total = total + wick.wick_normal_order(word).scale(c)
            words.append({"word": str(word), "contractions": [[list(pr) for pr in x.pairs] for x in contractions]})
        if args.json:
            _emit(json.dumps({"normal_form": total.to_dict(), "words": words}), args, stdout)
        else:
            counts = ", ".join(f"{w['word']}: {len(w['contractions'])}" for w in words)
            _emit(f"{total}\n# contractions: {counts}", args, stdout)
    elif cmd == "partitions":
        parts = wick.enumerate_partitions(args.n, args.k)
        if args.json:
            _emit(json.dumps([[list(b) for b in p.blocks] for p in parts]), args, stdout)
        else:
            _emit("\n".join(str(p) for p in parts), args, stdout)
    elif cmd == "stirling":
        if args.table is not None:
            if args.table < 1:
                raise ValueError("table size must be positive")
            _emit(combinatorics.stirling_table_tsv(args.table), args, stdout)
        elif args.n is None or args.k is None:
            raise _Usage("stirling needs N K or --table N")
        else:
            _emit(str(combinatorics.stirling_rec(args.n, args.k)), args, stdout)
    elif cmd == "bell":
        if args.n < 0:
            raise ValueError("n must be non-negative")
        _emit(str(combinatorics.bell_number(args.n)), args, stdout)
    elif cmd == "bell-poly":
        if args.n < 0:
            raise ValueError("n must be non-negative")
        poly = combinatorics.bell_polynomial(args.n)
        _emit(json.dumps(poly.to_dict()) if args.json else str(poly), args, stdout)
    elif cmd == "dobinski":
        _emit(repr(combinatorics.dobinski(args.n, Fraction(args.x), args.eps)), args, stdout)
    elif cmd == "verify":
        report = coherent.verify_identity(args.name, args.order)
        if args.json:
            _emit(report.to_json(), args, stdout)
        else:
            line = f"{report.identity} order {report.order}: {'equal' if report.equal else 'MISMATCH'}"
            if not report.equal:
                line += f" at lam^{report.mismatch_order}: {report.diff_terms}"
            _emit(line, args, stdout)
    elif cmd == "expect":
        nf = algebra.normal_order(algebra.parse_expr(args.expr))
        z = coherent.ComplexAmplitude.parse(args.z)
        val = coherent.expectation(nf, z)
        if args.json:
            _emit(json.dumps({"normal_form": nf.to_dict(), "re": val.real, "im": val.imag}), args, stdout)
        else:
            _emit(f"{val.real!r},{val.imag!r}", args, stdout)
    elif cmd == "husimi":
        params = phasespace.ThermalParams(args.beta)
        grid = phasespace.PhaseGrid.parse(args.grid)
        _emit(phasespace.grid_csv(params, grid), args, stdout)


class _Usage(Exception):
    pass


_VALUE_FLAGS = ("--grid", "--z")


def _join_values(argv: Sequence[str]) -> list[str]:
    # values such as "-4:4:9,..." or "-1,2" would otherwise be read as flags
    out, it = [], iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    saved = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = stdout, stderr
    try:
        try:
            args = parser.parse_args(_join_values(sys.argv[1:] if argv is None else argv))
        except SystemExit as exc:
            return int(exc.code or 0)
        try:
            _dispatch(args, stdout)
        except _Usage as exc:
            stderr.write(f"bosonorder: error: {exc}\n\n{GRAMMAR}")
            return 2
        except (ValueError, ArithmeticError, OSError) as exc:
            stderr.write(f"bosonorder: {exc}\n")
            return 1
        return 0
    finally:
        sys.stdout, sys.stderr = saved


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
