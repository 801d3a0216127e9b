"""Text format for lattice systems and expressions.

A system document looks like::

    # Toda lattice
    var u, v;
    weight v = 2;
    u' = v[-1] - v;
    v' = v*(u - u[1]);
    symmetry 1 = (v - v[-1], v*u[1] - u*v);
    density = ln(v);

``u`` is u_n and ``u[k]`` is u_{n+k}.  ``var`` fixes the component order;
without it the equations' order is used.  ``weight``, ``symmetry`` and
``density`` statements are optional.  The same expression grammar is used
inside operator documents, where ``/`` may build a rational right factor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .calculus import DDESystem, LogDensity
from .errors import DocumentError, NonPolynomialRHS, UndeclaredVariable
from .kernel import (Expression, LinearForm, RationalFunction, _clearing_monomial,
                     format_coefficient)

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<num>\d+) | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()\[\],;='])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num | name | op | end
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    out, line, col_start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DocumentError(f"unexpected character {text[pos]!r}", line, pos - col_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, col_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - col_start + 1))
        pos = m.end()
    out.append(Token("end", "", line, pos - col_start + 1))
    return out


# --------------------------------------------------------------------------
# values produced while parsing: a rational function plus optional log terms


def _fraction_of(num: Expression, den: Expression) -> RationalFunction:
    """num/den with Laurent parts cleared so both sides are honest polynomials."""
    for m in (_clearing_monomial(num), _clearing_monomial(den)):
        if m:
            e = Expression.monomial(m)
            num, den = num * e, den * e
    return RationalFunction(num, den)


@dataclass(frozen=True)
class _Value:
    rf: RationalFunction
    logs: Tuple[Tuple[int, Fraction], ...] = ()

    @staticmethod
    def of(e: Expression) -> "_Value":
        return _Value(RationalFunction(e))

    def constant(self) -> Optional[Fraction]:
        if self.logs or not self.rf.is_polynomial or not self.rf.num.is_constant():
            return None
        return Fraction(self.rf.num.constant_term())


class _Parser:
    def __init__(self, text: str, names: Sequence[str], allow_ln: bool = False):
        self.tokens = tokenize(text)
        self.i = 0
        self.names = list(names)
        self.allow_ln = allow_ln

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, msg, tok=None, cls=DocumentError):
        tok = tok or self.tok
        return cls(msg, tok.line, tok.column)

    def accept(self, text) -> Optional[Token]:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.i += 1
            return self.tokens[self.i - 1]
        return None

    def expect(self, text) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def expect_kind(self, kind) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind}, found {found!r}")
        self.i += 1
        return self.tokens[self.i - 1]

    def integer(self) -> int:
        sign = -1 if self.accept("-") else (self.accept("+") and 1) or 1
        return sign * int(self.expect_kind("num").text)

    # grammar: expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    #          unary := '-' unary | power ; power := atom ('^' exponent)?
    def expr(self) -> _Value:
        v = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.expect(self.tok.text).text
            rhs = self.term()
            v = self._add(v, rhs if op == "+" else self._neg(rhs))
        return v

    def term(self) -> _Value:
        v = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op_tok = self.expect(self.tok.text)
            rhs = self.unary()
            v = self._mul(v, rhs, op_tok) if op_tok.text == "*" else self._div(v, rhs, op_tok)
        return v

    def unary(self) -> _Value:
        if self.accept("-"):
            return self._neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> _Value:
        base = self.atom()
        tok = self.accept("^")
        if tok is None:
            return base
        if self.accept("("):
            k = self.integer()
            self.expect(")")
        else:
            k = self.integer()
        if base.logs:
            raise self.error("a logarithm cannot be raised to a power", tok)
        num, den = base.rf.num, base.rf.den
        if k < 0:
            if not num:
                raise self.error("zero raised to a negative power", tok)
            num, den, k = den, num, -k
        return _Value(_fraction_of(num ** k, den ** k))

    def atom(self) -> _Value:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return _Value.of(Expression.constant(int(t.text)))
        if self.accept("("):
            v = self.expr()
            self.expect(")")
            return v
        if t.kind == "name":
            self.i += 1
            if self.tok.text == "(" and self.tok.kind == "op":
                return self.call(t)
            if t.text not in self.names:
                raise self.error(f"undeclared variable {t.text!r}", t, UndeclaredVariable)
            comp = self.names.index(t.text)
            shift = 0
            if self.accept("["):
                shift = self.integer()
                self.expect("]")
            return _Value.of(Expression.var(comp, shift))
        found = t.text or "end of input"
        raise self.error(f"unexpected {found!r}")

    def call(self, fn: Token) -> _Value:
        if fn.text != "ln" or not self.allow_ln:
            raise self.error(f"function {fn.text!r} is not polynomial", fn, NonPolynomialRHS)
        self.expect("(")
        name = self.expect_kind("name")
        if name.text not in self.names:
            raise self.error(f"undeclared variable {name.text!r}", name, UndeclaredVariable)
        if self.tok.text == "[":
            raise self.error("only unshifted variables may appear under ln", self.tok)
        self.expect(")")
        return _Value(RationalFunction(Expression.zero()), ((self.names.index(name.text), Fraction(1)),))

    # arithmetic on values
    @staticmethod
    def _neg(v: _Value) -> _Value:
        return _Value(-v.rf, tuple((c, -a) for c, a in v.logs))

    @staticmethod
    def _add(a: _Value, b: _Value) -> _Value:
        if a.rf.den == b.rf.den:
            rf = RationalFunction(a.rf.num + b.rf.num, a.rf.den)
        else:
            rf = _fraction_of(a.rf.num * b.rf.den + b.rf.num * a.rf.den, a.rf.den * b.rf.den)
        logs = dict(a.logs)
        for c, x in b.logs:
            logs[c] = logs.get(c, 0) + x
        return _Value(rf, tuple(sorted((c, x) for c, x in logs.items() if x)))

    def _mul(self, a: _Value, b: _Value, tok) -> _Value:
        if a.logs or b.logs:
            k = b.constant() if a.logs else a.constant()
            lv = a if a.logs else b
            if k is None:
                raise self.error("logarithms may only be scaled by constants", tok)
            return _Value(lv.rf.scale(k), tuple((c, x * k) for c, x in lv.logs if x * k))
        return _Value(_fraction_of(a.rf.num * b.rf.num, a.rf.den * b.rf.den))

    def _div(self, a: _Value, b: _Value, tok) -> _Value:
        if b.logs:
            raise self.error("division by a logarithm", tok)
        if not b.rf.num:
            raise self.error("division by zero", tok)
        k = b.constant()
        if k is not None:
            return _Value(a.rf.scale(1 / k), tuple((c, x / k) for c, x in a.logs))
        if a.logs:
            raise self.error("logarithms may only be scaled by constants", tok)
        return _Value(_fraction_of(a.rf.num * b.rf.den, a.rf.den * b.rf.num))

    def at_end(self) -> bool:
        return self.tok.kind == "end"


def _laurent(v: _Value, p: _Parser, tok: Token, what: str) -> Expression:
    if v.logs:
        raise p.error(f"{what} may not contain logarithms", tok)
    if not v.rf.is_polynomial:
        raise p.error(f"{what} must be a (Laurent) polynomial", tok, NonPolynomialRHS)
    return v.rf.num


def _polynomial(v: _Value, p: _Parser, tok: Token, what: str) -> Expression:
    e = _laurent(v, p, tok, what)
    if any(k < 0 for m in e.terms for _, k in m):
        raise p.error(f"{what} must be polynomial (negative power found)", tok, NonPolynomialRHS)
    return e


def parse_expression(text: str, names: Sequence[str]) -> Expression:
    """A Laurent polynomial in the named variables."""
    p = _Parser(text, names)
    start = p.tok
    v = p.expr()
    if not p.at_end():
        raise p.error(f"unexpected {p.tok.text!r}")
    return _laurent(v, p, start, "expression")


def parse_rational(text: str, names: Sequence[str]) -> RationalFunction:
    p = _Parser(text, names)
    v = p.expr()
    if not p.at_end():
        raise p.error(f"unexpected {p.tok.text!r}")
    if v.logs:
        raise p.error("logarithms are not allowed here")
    return v.rf


def parse_density(text: str, names: Sequence[str]) -> LogDensity:
    p = _Parser(text, names, allow_ln=True)
    start = p.tok
    v = p.expr()
    if not p.at_end():
        raise p.error(f"unexpected {p.tok.text!r}")
    return LogDensity(_polynomial(_Value(v.rf), p, start, "density"), v.logs)


# --------------------------------------------------------------------------
# system documents


@dataclass
class SystemDocument:
    names: Tuple[str, ...]
    rhs: Tuple[Expression, ...]
    weights: Dict[str, Fraction] = field(default_factory=dict)
    symmetries: Dict[int, Tuple[Expression, ...]] = field(default_factory=dict)
    densities: List[LogDensity] = field(default_factory=list)

    @property
    def system(self) -> DDESystem:
        return DDESystem(self.names, self.rhs)

    def __eq__(self, other):
        return (isinstance(other, SystemDocument) and self.names == other.names
                and self.rhs == other.rhs and self.weights == other.weights
                and self.symmetries == other.symmetries and self.densities == other.densities)


def parse_system(text: str) -> SystemDocument:
    """Parse a system document; see the module docstring for the grammar."""
    # Pass 1 discovers the variable names so equations may precede nothing.
    toks = tokenize(text)
    declared: Optional[List[str]] = None
    eq_names: List[str] = []
    for i, t in enumerate(toks):
        at_start = i == 0 or toks[i - 1].text == ";"
        if at_start and t.kind == "name" and t.text == "var" and declared is None:
            declared = []
            j = i + 1
            while toks[j].kind == "name":
                declared.append(toks[j].text)
                if toks[j + 1].text != ",":
                    break
                j += 2
        if at_start and t.kind == "name" and toks[i + 1].text == "'":
            eq_names.append(t.text)
    names = declared if declared is not None else list(dict.fromkeys(eq_names))
    if not names:
        raise DocumentError("no variables declared and no equations found", 1, 1)

    p = _Parser(text, names, allow_ln=False)
    rhs: Dict[str, Expression] = {}
    weights: Dict[str, Fraction] = {}
    symmetries: Dict[int, Tuple[Expression, ...]] = {}
    densities: List[LogDensity] = []
    seen_var = False
    while not p.at_end():
        head = p.tok
        if head.kind != "name":
            raise p.error(f"expected a statement, found {head.text!r}")
        if head.text == "var" and p.tokens[p.i + 1].text != "'":
            if seen_var:
                raise p.error("duplicate var declaration")
            seen_var = True
            p.i += 1
            listed = [p.expect_kind("name").text]
            while p.accept(","):
                listed.append(p.expect_kind("name").text)
            if len(set(listed)) != len(listed):
                raise p.error("duplicate variable in declaration", head)
        elif head.text == "weight" and p.tokens[p.i + 1].text != "'":
            p.i += 1
            name_tok = p.expect_kind("name")
            if name_tok.text not in names:
                raise p.error(f"undeclared variable {name_tok.text!r}", name_tok, UndeclaredVariable)
            p.expect("=")
            v = p.expr()
            k = v.constant()
            if k is None:
                raise p.error("a weight must be a rational constant", name_tok)
            weights[name_tok.text] = k
        elif head.text == "symmetry" and p.tokens[p.i + 1].text != "'":
            p.i += 1
            level = p.integer()
            p.expect("=")
            p.expect("(")
            comps = []
            while True:
                t = p.tok
                comps.append(_laurent(p.expr(), p, t, "symmetry component"))
                if not p.accept(","):
                    break
            p.expect(")")
            if len(comps) != len(names):
                raise p.error(f"symmetry needs {len(names)} components, got {len(comps)}", head)
            if level in symmetries:
                raise p.error(f"duplicate symmetry level {level}", head)
            symmetries[level] = tuple(comps)
        elif head.text == "density" and p.tokens[p.i + 1].text != "'":
            p.i += 1
            p.expect("=")
            t = p.tok
            p.allow_ln = True
            v = p.expr()
            p.allow_ln = False
            densities.append(LogDensity(_polynomial(_Value(v.rf), p, t, "density"), v.logs))
        else:
            p.i += 1
            if head.text not in names:
                raise p.error(f"undeclared variable {head.text!r}", head, UndeclaredVariable)
            p.expect("'")
            p.expect("=")
            t = p.tok
            if head.text in rhs:
                raise p.error(f"second equation for {head.text!r}", head)
            rhs[head.text] = _polynomial(p.expr(), p, t, "right-hand side")
        p.expect(";")
    missing = [n for n in names if n not in rhs]
    if missing:
        raise DocumentError(f"no equation for {', '.join(missing)}", p.tok.line, p.tok.column)
    return SystemDocument(tuple(names), tuple(rhs[n] for n in names), weights, symmetries, densities)


# --------------------------------------------------------------------------
# printing


def _fmt_number(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_var(names, comp, shift) -> str:
    return names[comp] if shift == 0 else f"{names[comp]}[{shift}]"


def _fmt_monomial(m, names) -> str:
    parts = []
    for (comp, s), k in m:
        v = _fmt_var(names, comp, s)
        parts.append(v if k == 1 else f"{v}^{k}")
    return "*".join(parts)


def _signed_terms(e: Expression, names) -> List[Tuple[bool, str]]:
    out = []
    for m, c in e.items():
        mono = _fmt_monomial(m, names)
        if isinstance(c, LinearForm):
            txt = f"({format_coefficient(c)})"
            out.append((False, f"{txt}*{mono}" if mono else txt))
            continue
        neg = c < 0
        a = abs(c)
        if not mono:
            out.append((neg, _fmt_number(a)))
        elif a == 1:
            out.append((neg, mono))
        else:
            out.append((neg, f"{_fmt_number(a)}*{mono}"))
    return out


def _join(terms: List[Tuple[bool, str]]) -> str:
    if not terms:
        return "0"
    first_neg, first = terms[0]
    text = ("-" if first_neg else "") + first
    for neg, t in terms[1:]:
        text += (" - " if neg else " + ") + t
    return text


def format_expression(e: Expression, names: Sequence[str]) -> str:
    """Canonical text, leading monomial first; parses back to the same expression."""
    return _join(_signed_terms(Expression.lift(e), names))


def format_rational(b: RationalFunction, names: Sequence[str]) -> str:
    if b.is_polynomial:
        return format_expression(b.num, names)
    return f"({format_expression(b.num, names)})/({format_expression(b.den, names)})"


def format_density(rho: LogDensity, names: Sequence[str]) -> str:
    terms = _signed_terms(rho.poly, names)
    for comp, a in rho.logs:
        body = f"ln({names[comp]})"
        terms.append((a < 0, body if abs(a) == 1 else f"{_fmt_number(abs(a))}*{body}"))
    return _join(terms)


def format_system(doc: SystemDocument) -> str:
    names = doc.names
    lines = [f"var {', '.join(names)};"]
    for n in names:
        if n in doc.weights:
            lines.append(f"weight {n} = {_fmt_number(doc.weights[n])};")
    for n, f in zip(names, doc.rhs):
        lines.append(f"{n}' = {format_expression(f, names)};")
    for level in sorted(doc.symmetries):
        comps = ", ".join(format_expression(g, names) for g in doc.symmetries[level])
        lines.append(f"symmetry {level} = ({comps});")
    for rho in doc.densities:
        lines.append(f"density = {format_density(rho, names)};")
    return "\n".join(lines) + "\n"
