"""Exact-arithmetic core: Laurent polynomials in shifted lattice variables.

A shifted variable is a pair ``(component, shift)``; ``(1, -1)`` stands for
``v_{n-1}`` in a two-component system ``(u, v)``.  A monomial is a sorted tuple
of ``(variable, exponent)`` pairs with nonzero (possibly negative) exponents.

Coefficients are either :class:`fractions.Fraction` or :class:`LinearForm`,
an affine-linear combination of named parameters.  Parameters never get
multiplied together; the algorithms built on top only ever need linear
unknowns, which keeps every solve a linear one.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

from .errors import NoSolution, NotExactDivision, ParameterDegreeOverflow

Var = Tuple[int, int]
Monomial = Tuple[Tuple[Var, int], ...]
Number = Union[int, Fraction]

ONE_MONOMIAL: Monomial = ()

_PARAM_RE = re.compile(r"^(.*?)(\d*)$")


def param_key(name: str):
    """Natural sort key, so that ``c2`` sorts before ``c10``."""
    head, digits = _PARAM_RE.match(name).groups()
    return (head, int(digits) if digits else -1, name)


# --------------------------------------------------------------------------
# monomials


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        s = exps.get(v, 0) + e
        if s:
            exps[v] = s
        else:
            del exps[v]
    return tuple(sorted(exps.items()))


def mono_pow(m: Monomial, k: int) -> Monomial:
    if k == 0:
        return ONE_MONOMIAL
    return tuple((v, e * k) for v, e in m)


def mono_shift(m: Monomial, k: int) -> Monomial:
    if not k:
        return m
    return tuple(((c, s + k), e) for (c, s), e in m)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_key(m: Monomial):
    """Graded lexicographic key on (component, shift, exponent); larger leads."""
    return (mono_degree(m), tuple((c, s, e) for (c, s), e in m))


def mono_min_shift(m: Monomial) -> Optional[int]:
    if not m:
        return None
    return min(s for (_, s), _ in m)


def mono_max_shift(m: Monomial) -> Optional[int]:
    if not m:
        return None
    return max(s for (_, s), _ in m)


# --------------------------------------------------------------------------
# coefficients


class LinearForm:
    """``constant + sum(coef * param)`` with at least one parameter term."""

    __slots__ = ("constant", "terms", "_hash")

    def __init__(self, constant: Number = 0, terms: Mapping[str, Number] | Iterable = ()):
        self.constant = Fraction(constant)
        items = terms.items() if isinstance(terms, Mapping) else terms
        cleaned = {}
        for p, c in items:
            if c:
                cleaned[p] = cleaned.get(p, 0) + Fraction(c)
        self.terms = tuple(sorted(((p, c) for p, c in cleaned.items() if c),
                                  key=lambda t: param_key(t[0])))
        self._hash = None

    @staticmethod
    def make(constant: Number, terms: Mapping[str, Fraction]):
        """Build a coefficient, collapsing to a Fraction when no parameter survives."""
        nz = {p: c for p, c in terms.items() if c}
        if not nz:
            return Fraction(constant)
        return LinearForm(constant, nz)

    @classmethod
    def param(cls, name: str) -> "LinearForm":
        return cls(0, {name: 1})

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.terms)

    @property
    def parameters(self) -> Tuple[str, ...]:
        return tuple(p for p, _ in self.terms)

    def __add__(self, other):
        if isinstance(other, LinearForm):
            d = dict(self.terms)
            for p, c in other.terms:
                d[p] = d.get(p, 0) + c
            return LinearForm.make(self.constant + other.constant, d)
        if isinstance(other, (int, Fraction)):
            return LinearForm(self.constant + other, self.terms)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LinearForm(-self.constant, [(p, -c) for p, c in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LinearForm):
            raise ParameterDegreeOverflow(
                f"product of parameter-carrying coefficients {self} and {other}")
        if isinstance(other, (int, Fraction)):
            if not other:
                return Fraction(0)
            return LinearForm(self.constant * other, [(p, c * other) for p, c in self.terms])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        raise ParameterDegreeOverflow("division by a parameter-carrying coefficient")

    def __eq__(self, other):
        if isinstance(other, LinearForm):
            return self.constant == other.constant and self.terms == other.terms
        return False

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.constant, self.terms))
        return self._hash

    def __bool__(self):
        return True

    def substitute(self, values: Mapping[str, object]):
        out = self.constant
        for p, c in self.terms:
            if p in values:
                out = out + c * values[p]
            else:
                out = out + LinearForm(0, {p: c})
        return out

    def __repr__(self):
        return f"LinearForm({format_coefficient(self)})"


Coefficient = Union[Fraction, LinearForm]


def coeff_parameters(c) -> Tuple[str, ...]:
    return c.parameters if isinstance(c, LinearForm) else ()


def format_coefficient(c) -> str:
    if not isinstance(c, LinearForm):
        return str(c)
    parts = []
    for p, k in c.terms:
        if k == 1:
            parts.append(p)
        elif k == -1:
            parts.append(f"-{p}")
        else:
            parts.append(f"{k}*{p}")
    if c.constant:
        parts.append(str(c.constant))
    text = " + ".join(parts)
    return text.replace("+ -", "- ")


# --------------------------------------------------------------------------
# expressions


def _acc_add(acc: dict, m: Monomial, c) -> None:
    old = acc.get(m)
    acc[m] = c if old is None else old + c


def _pruned(acc: dict) -> dict:
    return {m: c for m, c in acc.items() if c}


class Expression:
    """Immutable Laurent polynomial with exact, parameter-linear coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, object]] = None):
        d = {}
        if terms:
            for m, c in terms.items():
                if not isinstance(c, LinearForm):
                    c = Fraction(c)
                if c:
                    m = tuple(sorted(m))
                    old = d.get(m)
                    d[m] = c if old is None else old + c
                    if not d[m]:
                        del d[m]
        self._terms = d
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Expression":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def from_acc(cls, acc: dict) -> "Expression":
        return cls._raw(_pruned(acc))

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> "Expression":
        return cls._raw({})

    @classmethod
    def constant(cls, c) -> "Expression":
        if not isinstance(c, LinearForm):
            c = Fraction(c)
        return cls._raw({ONE_MONOMIAL: c} if c else {})

    @classmethod
    def var(cls, component: int, shift: int = 0) -> "Expression":
        return cls._raw({(((component, shift), 1),): Fraction(1)})

    @classmethod
    def param(cls, name: str) -> "Expression":
        return cls._raw({ONE_MONOMIAL: LinearForm.param(name)})

    @classmethod
    def monomial(cls, m: Monomial, c=1) -> "Expression":
        return cls.constant(c) * cls._raw({m: Fraction(1)}) if m else cls.constant(c)

    @staticmethod
    def lift(x) -> "Expression":
        if isinstance(x, Expression):
            return x
        if isinstance(x, (int, Fraction, LinearForm)):
            return Expression.constant(x)
        raise TypeError(f"cannot lift {type(x).__name__} to Expression")

    # inspection --------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Coefficient]:
        return self._terms

    def items(self) -> Iterator[Tuple[Monomial, Coefficient]]:
        """Terms in canonical order, leading term first."""
        return iter(sorted(self._terms.items(), key=lambda t: mono_key(t[0]), reverse=True))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_term(self):
        return self._terms.get(ONE_MONOMIAL, Fraction(0))

    def has_parameters(self) -> bool:
        return any(isinstance(c, LinearForm) for c in self._terms.values())

    def parameters(self) -> Tuple[str, ...]:
        ps = set()
        for c in self._terms.values():
            ps.update(coeff_parameters(c))
        return tuple(sorted(ps, key=param_key))

    def variables(self) -> Tuple[Var, ...]:
        vs = set()
        for m in self._terms:
            vs.update(v for v, _ in m)
        return tuple(sorted(vs))

    def components(self) -> Tuple[int, ...]:
        return tuple(sorted({c for c, _ in self.variables()}))

    def shift_range(self, component: Optional[int] = None) -> Optional[Tuple[int, int]]:
        shifts = [s for c, s in self.variables() if component is None or c == component]
        if not shifts:
            return None
        return min(shifts), max(shifts)

    def leading(self) -> Tuple[Monomial, Coefficient]:
        if not self._terms:
            raise ValueError("zero expression has no leading term")
        m = max(self._terms, key=mono_key)
        return m, self._terms[m]

    def is_monomial(self) -> bool:
        return len(self._terms) == 1 and not self.has_parameters()

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=0)

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Expression):
            if isinstance(other, (int, Fraction, LinearForm)):
                other = Expression.constant(other)
            else:
                return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        for m, c in other._terms.items():
            _acc_add(acc, m, c)
        return Expression.from_acc(acc)

    __radd__ = __add__

    def __neg__(self):
        return Expression._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Expression):
            if isinstance(other, (int, Fraction, LinearForm)):
                other = Expression.constant(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, k) -> "Expression":
        if not isinstance(k, LinearForm):
            k = Fraction(k)
            if not k:
                return Expression.zero()
            if k == 1:
                return self
        return Expression.from_acc({m: c * k for m, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, LinearForm)):
            return self.scale(other)
        if not isinstance(other, Expression):
            return NotImplemented
        if self.has_parameters() and other.has_parameters():
            raise ParameterDegreeOverflow("both factors carry parameters")
        if len(other._terms) == 1 and not other.has_parameters():
            (m2, c2), = other._terms.items()
            if not m2:
                return self.scale(c2)
        acc: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                _acc_add(acc, mono_mul(m1, m2), c1 * c2)
        return Expression.from_acc(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if not self.is_monomial():
                raise NotExactDivision("only monomials have Laurent inverses")
            (m, c), = self._terms.items()
            return Expression._raw({mono_pow(m, k): Fraction(c) ** k})
        out = Expression.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, Expression):
            if other.is_monomial():
                return self * other ** -1
            return self.divide_exact(other)
        return NotImplemented

    def divide_exact(self, other: "Expression") -> "Expression":
        """Exact quotient by a parameter-free Laurent polynomial.

        Raises NotExactDivision when the remainder is nonzero.
        """
        if other.is_zero():
            raise ZeroDivisionError("division by the zero expression")
        if other.has_parameters():
            raise ParameterDegreeOverflow("division by a parameter-carrying expression")
        if other.is_monomial():
            return self * other ** -1
        if self.is_zero():
            return self
        # clear negative exponents so that ordinary multivariate division applies
        num_shift = _clearing_monomial(self)
        den_shift = _clearing_monomial(other)
        num = self * Expression.monomial(num_shift)
        den = other * Expression.monomial(den_shift)
        # division needs a multiplicative term order; mono_key is only a display order
        order = sorted(set(num.variables()) | set(den.variables()))

        def grlex(m: Monomial):
            d = dict(m)
            return (mono_degree(m), tuple(d.get(x, 0) for x in order))

        lead_m = max(den._terms, key=grlex)
        lead_c = den._terms[lead_m]
        rem = dict(num._terms)
        quot: dict = {}
        while rem:
            m = max(rem, key=grlex)
            c = rem[m]
            q = _mono_divide(m, lead_m)
            if q is None:
                raise NotExactDivision("nonzero remainder in exact division")
            qc = c / lead_c
            _acc_add(quot, q, qc)
            for dm, dc in den._terms.items():
                mm = mono_mul(q, dm)
                v = rem.get(mm, 0) - qc * dc
                if v:
                    rem[mm] = v
                else:
                    rem.pop(mm, None)
        q_expr = Expression.from_acc(quot)
        return q_expr * Expression.monomial(mono_mul(den_shift, mono_pow(num_shift, -1)))

    def __eq__(self, other):
        if isinstance(other, Expression):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({ONE_MONOMIAL: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # structure maps ----------------------------------------------------
    def shift(self, k: int) -> "Expression":
        if not k or not self._terms:
            return self
        return Expression._raw({mono_shift(m, k): c for m, c in self._terms.items()})

    def diff(self, v: Var) -> "Expression":
        """Partial derivative with respect to one shifted variable."""
        acc = {}
        for m, c in self._terms.items():
            for i, (w, e) in enumerate(m):
                if w == v:
                    if e == 1:
                        nm = m[:i] + m[i + 1:]
                    else:
                        nm = m[:i] + ((w, e - 1),) + m[i + 1:]
                    _acc_add(acc, nm, c * e)
                    break
        return Expression.from_acc(acc)

    def gradient(self) -> Dict[Var, "Expression"]:
        """All nonzero partial derivatives, keyed by variable."""
        accs: Dict[Var, dict] = {}
        for m, c in self._terms.items():
            for i, (w, e) in enumerate(m):
                nm = m[:i] + m[i + 1:] if e == 1 else m[:i] + ((w, e - 1),) + m[i + 1:]
                _acc_add(accs.setdefault(w, {}), nm, c * e)
        out = {}
        for v, acc in accs.items():
            ex = Expression.from_acc(acc)
            if ex:
                out[v] = ex
        return out

    def map_coefficients(self, fn) -> "Expression":
        acc = {}
        for m, c in self._terms.items():
            _acc_add(acc, m, fn(c))
        return Expression.from_acc(acc)

    def substitute(self, values: Mapping[str, object]) -> "Expression":
        """Replace parameters by rationals or by linear forms in other parameters."""
        return self.map_coefficients(
            lambda c: c.substitute(values) if isinstance(c, LinearForm) else c)

    def coefficient_of(self, param: Optional[str]) -> "Expression":
        """The part multiplying ``param`` (or the parameter-free part for None)."""
        acc = {}
        for m, c in self._terms.items():
            if isinstance(c, LinearForm):
                v = c.constant if param is None else c.as_dict().get(param, 0)
            else:
                v = c if param is None else 0
            if v:
                acc[m] = v
        return Expression._raw(acc)

    def monic(self) -> "Expression":
        """Scale so the leading coefficient is 1 (parameter-free leading only)."""
        _, c = self.leading()
        if isinstance(c, LinearForm):
            raise ParameterDegreeOverflow("cannot normalize by a parameter-carrying coefficient")
        return self.scale(1 / c)

    def evaluate(self, point: Mapping[Var, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self._terms.items():
            if isinstance(c, LinearForm):
                raise ParameterDegreeOverflow("cannot evaluate a parameter-carrying expression")
            t = c
            for v, e in m:
                t *= Fraction(point[v]) ** e
            total += t
        return total

    def __repr__(self):
        return f"Expression({format_plain(self)})"


def format_plain(e: Expression, names: Optional[Sequence[str]] = None) -> str:
    """Compact debugging format; the frontend owns the real printer."""
    if not e:
        return "0"
    parts = []
    for m, c in e.items():
        factors = []
        for (comp, s), k in m:
            name = names[comp] if names else f"x{comp}"
            txt = name if s == 0 else f"{name}[{s}]"
            factors.append(txt if k == 1 else f"{txt}^{k}")
        coeff = format_coefficient(c)
        if isinstance(c, LinearForm):
            coeff = f"({coeff})"
        if factors:
            parts.append("*".join(([coeff] if c != 1 else []) + factors))
        else:
            parts.append(coeff)
    return " + ".join(parts)


def _clearing_monomial(e: Expression) -> Monomial:
    neg: Dict[Var, int] = {}
    for m in e.terms:
        for v, k in m:
            if k < 0:
                neg[v] = max(neg.get(v, 0), -k)
    return tuple(sorted(neg.items()))


def _mono_divide(a: Monomial, b: Monomial) -> Optional[Monomial]:
    da = dict(a)
    for v, e in b:
        if da.get(v, 0) < e:
            return None
        da[v] -= e
        if not da[v]:
            del da[v]
    return tuple(sorted(da.items()))


def linear_combination(pairs: Iterable[Tuple[str, Expression]],
                       constant: Optional[Expression] = None) -> Expression:
    """``constant + sum(param * expr)`` built in one pass (parameter-free exprs)."""
    acc: Dict[Monomial, Tuple[Fraction, dict]] = {}
    if constant is not None:
        for m, c in constant.terms.items():
            if isinstance(c, LinearForm):
                acc[m] = [c.constant, c.as_dict()]
            else:
                acc[m] = [c, {}]
    for p, ex in pairs:
        for m, c in ex.terms.items():
            if isinstance(c, LinearForm):
                raise ParameterDegreeOverflow("parameter times parameter-carrying expression")
            slot = acc.get(m)
            if slot is None:
                slot = acc[m] = [Fraction(0), {}]
            d = slot[1]
            d[p] = d.get(p, 0) + c
    out = {}
    for m, (k, d) in acc.items():
        c = LinearForm.make(k, d)
        if c:
            out[m] = c
    return Expression._raw(out)


# --------------------------------------------------------------------------
# rational functions (only needed as right factors of nonlocal operator terms)


class RationalFunction:
    """``num / den`` with a non-monomial parameter-free denominator of leading coefficient 1.

    Monomial denominators are absorbed into Laurent numerators, in which case
    ``den`` is the constant 1.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Expression, den: Optional[Expression] = None):
        num = Expression.lift(num)
        den = Expression.constant(1) if den is None else Expression.lift(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den == 1:
            pass
        elif den.is_monomial():
            num, den = num * den ** -1, Expression.constant(1)
        else:
            _, lc = den.leading()
            if lc != 1:
                num, den = num.scale(1 / lc), den.scale(1 / lc)
            if num:
                try:
                    num, den = num.divide_exact(den), Expression.constant(1)
                except NotExactDivision:
                    pass
            else:
                den = Expression.constant(1)
        self.num = num
        self.den = den

    @property
    def is_polynomial(self) -> bool:
        return self.den == 1

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, Expression):
            return self.is_polynomial and self.num == other
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return RationalFunction(self.num * other.num, self.den * other.den)
        if isinstance(other, (Expression, int, Fraction, LinearForm)):
            return RationalFunction(self.num * other, self.den)
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, RationalFunction):
            other = RationalFunction(Expression.lift(other))
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "RationalFunction":
        return RationalFunction(self.num.scale(k), self.den)

    def shift(self, k: int) -> "RationalFunction":
        return RationalFunction(self.num.shift(k), self.den.shift(k))

    def has_parameters(self) -> bool:
        return self.num.has_parameters()

    def variables(self) -> Tuple[Var, ...]:
        return tuple(sorted(set(self.num.variables()) | set(self.den.variables())))

    def substitute(self, values) -> "RationalFunction":
        return RationalFunction(self.num.substitute(values), self.den)

    def diff(self, v: Var) -> "RationalFunction":
        if self.is_polynomial:
            return RationalFunction(self.num.diff(v))
        return RationalFunction(self.num.diff(v) * self.den - self.num * self.den.diff(v),
                                self.den * self.den)

    def __repr__(self):
        if self.is_polynomial:
            return f"RationalFunction({format_plain(self.num)})"
        return f"RationalFunction(({format_plain(self.num)})/({format_plain(self.den)}))"


# --------------------------------------------------------------------------
# linear systems


class LinearSystem:
    """Affine-linear equations ``form = 0`` over a list of unknowns."""

    __slots__ = ("equations", "unknowns")

    def __init__(self, equations: Iterable = (), unknowns: Iterable[str] = ()):
        eqs = []
        order = list(dict.fromkeys(unknowns))
        seen = set(order)
        for eq in equations:
            if isinstance(eq, (int, Fraction)):
                eq = Fraction(eq)
            if eq == 0 and not isinstance(eq, LinearForm):
                continue
            eqs.append(eq)
            for p in coeff_parameters(eq):
                if p not in seen:
                    seen.add(p)
                    order.append(p)
        self.equations = tuple(eqs)
        self.unknowns = tuple(sorted(order, key=param_key))

    def __len__(self):
        return len(self.equations)

    def __add__(self, other: "LinearSystem") -> "LinearSystem":
        return LinearSystem(self.equations + other.equations,
                            tuple(self.unknowns) + tuple(other.unknowns))

    def holds(self, values: Mapping[str, object]) -> bool:
        for eq in self.equations:
            v = eq.substitute(values) if isinstance(eq, LinearForm) else eq
            if v != 0:
                return False
        return True

    def __repr__(self):
        return f"LinearSystem({len(self.equations)} equations, {len(self.unknowns)} unknowns)"


class Solution:
    """Values of determined unknowns (affine in the free ones) plus the free list."""

    def __init__(self, values: Dict[str, object], free: Sequence[str]):
        self.values = values
        self.free = tuple(free)

    @property
    def is_unique(self) -> bool:
        return not self.free

    def __getitem__(self, p):
        return self.values[p]

    def substitute(self, e):
        return e.substitute(self.values)

    def specialize(self, free_values: Mapping[str, Number]) -> Dict[str, Fraction]:
        """Concrete rational assignment for all unknowns."""
        out = {p: Fraction(free_values.get(p, 0)) for p in self.free}
        for p, v in self.values.items():
            out[p] = Fraction(v.substitute(out) if isinstance(v, LinearForm) else v)
        return out

    def basis(self):
        """One concrete assignment per free unknown (that one set to 1, the rest 0)."""
        return [self.specialize({p: 1}) for p in self.free]

    def __repr__(self):
        vals = ", ".join(f"{p}={format_coefficient(v)}" for p, v in
                         sorted(self.values.items(), key=lambda t: param_key(t[0])))
        return f"Solution({vals}; free={list(self.free)})"


def collect_zero_conditions(e: Expression) -> LinearSystem:
    """One equation per monomial: ``e`` vanishes identically iff all hold."""
    return LinearSystem(c for _, c in e.items())


def solve_linear(system: LinearSystem) -> Solution:
    """Sparse exact Gauss-Jordan elimination.

    Pivots are chosen as the smallest unknown (natural order) in each reduced
    equation, so the result is deterministic.  Raises NoSolution when the
    system is inconsistent.
    """
    rows: Dict[str, Dict[Optional[str], Fraction]] = {}
    occurs: Dict[str, set] = {}
    for eq in system.equations:
        if isinstance(eq, LinearForm):
            row = dict(eq.terms)
            if eq.constant:
                row[None] = eq.constant
        else:
            row = {None: Fraction(eq)}
        for p in [p for p in row if p is not None and p in rows]:
            k = row.get(p)
            if not k:
                continue
            for q, v in rows[p].items():
                nv = row.get(q, 0) - k * v
                if nv:
                    row[q] = nv
                else:
                    row.pop(q, None)
        params = [p for p in row if p is not None]
        if not params:
            if row.get(None):
                raise NoSolution(f"inconsistent equation 0 = {-row[None]}")
            continue
        piv = min(params, key=param_key)
        k = row[piv]
        if k != 1:
            row = {q: v / k for q, v in row.items()}
        # eliminate the new pivot from earlier rows
        for other in list(occurs.get(piv, ())):
            orow = rows[other]
            f = orow.get(piv)
            if not f:
                continue
            for q, v in row.items():
                nv = orow.get(q, 0) - f * v
                if nv:
                    orow[q] = nv
                else:
                    orow.pop(q, None)
                    if q is not None and q in occurs:
                        occurs[q].discard(other)
                if nv and q is not None and q != piv:
                    occurs.setdefault(q, set()).add(other)
            occurs[piv].discard(other)
        rows[piv] = row
        for q in row:
            if q is not None and q != piv:
                occurs.setdefault(q, set()).add(piv)
    free = [p for p in system.unknowns if p not in rows]
    values = {}
    for p, row in rows.items():
        values[p] = LinearForm.make(-row.get(None, 0),
                                    {q: -v for q, v in row.items() if q is not None and q != p})
    return Solution(values, free)
