"""LaTeX rendering.  Delta^-1 is written (D - I)^{-1}."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .calculus import LogDensity
from .kernel import Expression, LinearForm, RationalFunction, format_coefficient
from .opalgebra import Entry, PseudoDifferenceOperator


def _var(name: str, shift: int) -> str:
    if shift == 0:
        return f"{name}_{{n}}"
    return f"{name}_{{n{shift:+d}}}"


def _number(c: Fraction) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def _monomial(m, names) -> str:
    parts = []
    for (comp, s), k in m:
        v = _var(names[comp], s)
        parts.append(v if k == 1 else f"{v}^{{{k}}}")
    return " ".join(parts)


def expression(e: Expression, names: Sequence[str]) -> str:
    e = Expression.lift(e)
    if not e:
        return "0"
    out = ""
    for idx, (m, c) in enumerate(e.items()):
        mono = _monomial(m, names)
        if isinstance(c, LinearForm):
            body = f"\\left({format_coefficient(c)}\\right) {mono}".rstrip()
            out += body if idx == 0 else f" + {body}"
            continue
        a = abs(c)
        body = mono if (a == 1 and mono) else (f"{_number(a)} {mono}".rstrip())
        if idx == 0:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out


def rational(b: RationalFunction, names: Sequence[str]) -> str:
    if b.is_polynomial:
        return expression(b.num, names)
    return rf"\frac{{{expression(b.num, names)}}}{{{expression(b.den, names)}}}"


def density(rho: LogDensity, names: Sequence[str]) -> str:
    text = expression(rho.poly, names) if rho.poly else ""
    for comp, a in rho.logs:
        term = rf"\ln {_var(names[comp], 0)}"
        if abs(a) != 1:
            term = f"{_number(abs(a))} {term}"
        if not text:
            text = ("-" if a < 0 else "") + term
        else:
            text += (" - " if a < 0 else " + ") + term
    return text or "0"


def _wrap(text: str) -> str:
    return text if (" + " not in text and " - " not in text[1:]) else rf"\left({text}\right)"


def _shift_op(k: int) -> str:
    if k == 0:
        return r"\mathrm{I}"
    return r"\mathrm{D}" if k == 1 else rf"\mathrm{{D}}^{{{k}}}"


def entry(e: Entry, names: Sequence[str]) -> str:
    parts = []
    for k, c in e.locals.items():
        if c == 1 or c == -1:
            parts.append(("-" if c == -1 else "") + _shift_op(k))
        else:
            parts.append(rf"{_wrap(expression(c, names))} \, {_shift_op(k)}")
    for t in e.nonlocals:
        term = (rf"{_wrap(expression(t.left, names))} \, (\mathrm{{D}} - \mathrm{{I}})^{{-1}}"
                rf" \, {_wrap(rational(t.right, names))}")
        if t.power:
            term += rf" \, {_shift_op(t.power)}"
        parts.append(term)
    return " + ".join(parts) if parts else "0"


def operator(r: PseudoDifferenceOperator, names: Sequence[str]) -> str:
    rows = [" & ".join(entry(r[i, j], names) for j in range(r.N)) for i in range(r.N)]
    body = " \\\\\n  ".join(rows)
    return "\\begin{pmatrix}\n  " + body + "\n\\end{pmatrix}"


def vector(g: Sequence[Expression], names: Sequence[str]) -> str:
    if len(g) == 1:
        return expression(g[0], names)
    return r"\begin{pmatrix} " + r" \\ ".join(expression(x, names) for x in g) + r" \end{pmatrix}"
