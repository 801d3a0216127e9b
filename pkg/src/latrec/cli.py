"""Command-line interface.

Exit status: 0 success, 1 mathematical negative (no solution, failed
verification, broken hierarchy), 2 usage or document error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import documents, latex
from .conservation import find_densities
from .dsl import (SystemDocument, format_density, format_expression, format_rational,
                  parse_system)
from .errors import DocumentError, LatrecError, MathematicalNegative
from .opalgebra import PseudoDifferenceOperator
from .recursion import (RecursionConfig, generate_hierarchy, recursion_operator,
                        verify)
from .scaling import compute_weights
from .symmetry import find_symmetries

FORMAT_ENV = "LATREC_FORMAT"
RESULT_SCHEMA = "latrec.result"
RESULT_VERSION = 1
FORMATS = ("text", "latex", "json")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing


def _window(text: str):
    try:
        a, b = text.split(":")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like A:B, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


def _positive(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return k


def _rank(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational rank, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="system document (.dde)")
    common.add_argument("--window", type=_window, metavar="A:B",
                        help="shift window for candidate monomials")
    common.add_argument("--allow-nonpositive-weights", action="store_true",
                        help="accept zero or negative dilation weights")
    common.add_argument("--format", choices=FORMATS, default=None,
                        help=f"output format (default: ${FORMAT_ENV} or text)")
    common.add_argument("--out", metavar="PATH", help="write the result to PATH")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="latrec", description=(
        "Weights, conservation laws, symmetries and recursion operators of "
        "polynomial differential-difference systems."))
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("weights", parents=[common], help="dilation weights")
    d = sub.add_parser("densities", parents=[common], help="conserved densities and fluxes")
    d.add_argument("--rank", type=_rank, required=True)
    s = sub.add_parser("symmetries", parents=[common], help="generalized symmetries")
    s.add_argument("--level", type=int, required=True)
    r = sub.add_parser("recursion", parents=[common], help="recursion operator")
    r.add_argument("--gap", type=_positive, default=1)
    r.add_argument("--pairs", type=_positive, default=1)
    h = sub.add_parser("hierarchy", parents=[common], help="apply an operator repeatedly")
    h.add_argument("--operator", required=True, metavar="OP")
    h.add_argument("--count", type=_positive, required=True)
    v = sub.add_parser("verify", parents=[common], help="check a recursion operator")
    v.add_argument("--operator", required=True, metavar="OP")
    v.add_argument("--mode", choices=("action", "operator", "both"), default="both")
    v.add_argument("--length", type=_positive, default=3, help="hierarchy steps in action mode")
    return p


# --------------------------------------------------------------------------
# rendering helpers


def _vec_text(g, names) -> str:
    return "(" + ", ".join(format_expression(x, names) for x in g) + ")"


def _operator_text(r: PseudoDifferenceOperator, names) -> str:
    lines = []
    for i, j, e in r.cells():
        parts = []
        for k, c in e.locals.items():
            op = "I" if k == 0 else f"D^{k}"
            parts.append(op if c == 1 else f"({format_expression(c, names)})*{op}")
        for t in e.nonlocals:
            term = f"({format_expression(t.left, names)})*Delta^-1*({format_rational(t.right, names)})"
            parts.append(term + (f"*D^{t.power}" if t.power else ""))
        lines.append(f"R[{i + 1},{j + 1}] = " + (" + ".join(parts) if parts else "0"))
    return "\n".join(lines)


def _num(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Output:
    """Collects a command's result in all three formats, emits the requested one."""

    def __init__(self, command: str, fmt: str):
        self.command = command
        self.fmt = fmt
        self.text: List[str] = []
        self.tex: List[str] = []
        self.data: dict = {}

    def render(self) -> str:
        if self.fmt == "json":
            payload = {"schema": RESULT_SCHEMA, "version": RESULT_VERSION,
                       "command": self.command, "result": self.data}
            return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        lines = self.tex if self.fmt == "latex" else self.text
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands


def _load_system(path: str) -> SystemDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    try:
        return parse_system(text)
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from exc


def _load_operator(path: str, doc: SystemDocument) -> PseudoDifferenceOperator:
    try:
        op_doc = documents.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    except DocumentError as exc:
        raise DocumentError(f"{path}: {exc}") from exc
    if op_doc.variables != doc.names:
        raise DocumentError(f"{path}: operator variables {list(op_doc.variables)} "
                            f"do not match the system's {list(doc.names)}")
    return op_doc.operator


def _weights(doc: SystemDocument, args):
    return compute_weights(doc.system, allow_nonpositive=args.allow_nonpositive_weights,
                           overrides=doc.weights)


def cmd_weights(doc, args, out: Output) -> int:
    w = _weights(doc, args)
    names = doc.names
    for n, wi in zip(names, w.weights):
        out.text.append(f"w({n}) = {_num(wi)}")
        out.tex.append(f"w({latex._var(n, 0)}) = {latex._number(wi)}")
    out.text.append(f"w(D_t) = {_num(w.t_weight)}")
    out.tex.append(f"w(\\mathrm{{D}}_t) = {latex._number(w.t_weight)}")
    out.data = {"weights": {n: _num(wi) for n, wi in zip(names, w.weights)},
                "t_weight": _num(w.t_weight)}
    return 0


def cmd_densities(doc, args, out: Output) -> int:
    w = _weights(doc, args)
    names = doc.names
    pairs = find_densities(doc.system, w, args.rank, args.window)
    items = []
    for p in pairs:
        rho, flux = format_density(p.rho, names), format_expression(p.flux, names)
        out.text.append(f"rho = {rho}")
        out.text.append(f"  J = {flux}")
        out.tex.append(f"\\rho = {latex.density(p.rho, names)}, \\quad J = {latex.expression(p.flux, names)}")
        items.append({"rho": rho, "flux": flux})
    if not pairs:
        out.text.append(f"no densities of rank {_num(args.rank)}")
        out.tex.append(f"% no densities of rank {_num(args.rank)}")
    out.data = {"rank": _num(args.rank), "densities": items}
    return 0


def cmd_symmetries(doc, args, out: Output) -> int:
    w = _weights(doc, args)
    names = doc.names
    found = find_symmetries(doc.system, w, args.level, args.window)
    for s in found:
        out.text.append(f"G = {_vec_text(s.g, names)}")
        out.tex.append(f"G = {latex.vector(s.g, names)}")
    if not found:
        out.text.append(f"no symmetries at level {args.level}")
        out.tex.append(f"% no symmetries at level {args.level}")
    out.data = {"level": args.level,
                "symmetries": [[format_expression(x, names) for x in s.g] for s in found]}
    return 0


def cmd_recursion(doc, args, out: Output) -> int:
    w = _weights(doc, args)
    names = doc.names
    cfg = RecursionConfig(gap=args.gap, pairs=args.pairs, window=args.window)
    result = recursion_operator(doc.system, w, doc.symmetries or None,
                                doc.densities or None, cfg)
    op_doc = documents.OperatorDocument(names, result.operator)
    rm = [[_num(x) for x in row] for row in result.rank_matrix]
    out.text.append(f"gap: {result.gap}")
    out.text.append("rank matrix: " + "; ".join(" ".join(r) for r in rm))
    out.text.append(_operator_text(result.operator, names))
    out.text.append(f"verification: {_report_line(result.report)}")
    out.tex.append(latex.operator(result.operator, names))
    out.data = {"gap": result.gap, "rank_matrix": rm,
                "operator": documents.to_dict(op_doc),
                "verification": _report_data(result.report)}
    if args.out:
        documents.save(op_doc, args.out)
        args.out = None  # the document itself went to --out; the summary goes to stdout
    return 0


def _seed(doc: SystemDocument):
    if doc.symmetries:
        return doc.symmetries[min(doc.symmetries)]
    return doc.rhs


def cmd_hierarchy(doc, args, out: Output) -> int:
    r = _load_operator(args.operator, doc)
    names = doc.names
    hierarchy = generate_hierarchy(r, _seed(doc), args.count, doc.system)
    for step, g in enumerate(hierarchy, start=1):
        out.text.append(f"[{step}] G = {_vec_text(g, names)}")
        out.tex.append(f"G^{{[{step}]}} = {latex.vector(g, names)}")
    out.data = {"hierarchy": [[format_expression(x, names) for x in g] for g in hierarchy]}
    return 0


def _report_line(report) -> str:
    bits = []
    if report.operator_verdict is not None:
        bits.append(f"operator {report.operator_verdict}")
    if report.action_steps:
        ok = sum(s.ok for s in report.action_steps)
        bits.append(f"action {ok}/{len(report.action_steps)} steps")
    bits.append("PASS" if report.passed else "FAIL")
    return ", ".join(bits)


def _report_data(report) -> dict:
    return {"mode": report.mode, "passed": report.passed,
            "operator_verdict": None if report.operator_verdict is None else str(report.operator_verdict),
            "action_steps": [{"step": s.step, "ok": s.ok, "error": s.error} for s in report.action_steps]}


def cmd_verify(doc, args, out: Output) -> int:
    r = _load_operator(args.operator, doc)
    cfg = RecursionConfig(mode=args.mode, hierarchy_length=args.length)
    report = verify(r, doc.system, _seed(doc), cfg)
    out.text.append(_report_line(report))
    for s in report.action_steps:
        out.text.append(f"  step {s.step}: {'ok' if s.ok else 'FAILED ' + s.error}")
    if report.operator_note:
        out.text.append(f"  note: {report.operator_note}")
    out.tex.append(f"% {_report_line(report)}")
    out.data = _report_data(report)
    return 0 if report.passed else 1


COMMANDS = {"weights": cmd_weights, "densities": cmd_densities, "symmetries": cmd_symmetries,
            "recursion": cmd_recursion, "hierarchy": cmd_hierarchy, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    fmt = args.format or os.environ.get(FORMAT_ENV, "text")
    if fmt not in FORMATS:
        print(f"latrec: {FORMAT_ENV}={fmt!r} is not one of {', '.join(FORMATS)}", file=sys.stderr)
        return 2
    out = Output(args.command, fmt)
    try:
        doc = _load_system(args.file)
        status = COMMANDS[args.command](doc, args, out)
    except (UsageError, DocumentError) as exc:
        print(f"latrec: {exc}", file=sys.stderr)
        return 2
    except MathematicalNegative as exc:
        print(f"latrec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except LatrecError as exc:
        print(f"latrec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = out.render()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
