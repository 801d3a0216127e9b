"""Pseudo-difference operators.

An operator is an N x N matrix whose entries are finite sums of

* local terms ``a * D^k``, and
* nonlocal terms ``A * Delta^-1 * B * D^k`` with ``Delta = D - I``.

Right factors ``B`` are :class:`RationalFunction` so that operators such as
the Ablowitz-Ladik ones (with ``1/(1 + u_n v_n)``) are representable.
Nonlocality is capped at depth one: composing two nonlocal terms is refused.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .calculus import DDESystem, antidifference, directional_derivative
from .errors import NonlocalDepthExceeded, NotExactDifference, NotExactDivision
from .kernel import (Expression, LinearForm, RationalFunction, _acc_add,
                     mono_key)


def _coeff_key(c):
    if isinstance(c, LinearForm):
        return (c.constant, c.terms)
    return (c, ())


def expr_key(e: Expression):
    return tuple((mono_key(m), _coeff_key(c)) for m, c in e.items())


def rf_key(b: RationalFunction):
    return (expr_key(b.num), expr_key(b.den))


def _as_rf(b) -> RationalFunction:
    return b if isinstance(b, RationalFunction) else RationalFunction(Expression.lift(b))


@dataclass(frozen=True)
class Nonlocal:
    """``left * Delta^-1 * right * D^power``."""

    left: Expression
    right: RationalFunction
    power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "left", Expression.lift(self.left))
        object.__setattr__(self, "right", _as_rf(self.right))

    def key(self):
        return (self.power, rf_key(self.right), expr_key(self.left))


def _sum_like_nonlocals(terms: Sequence[Nonlocal]) -> Tuple[Nonlocal, ...]:
    """Add the left factors of terms with identical right factor and power."""
    merged: Dict[tuple, Nonlocal] = {}
    for t in terms:
        key = (t.power, t.right)
        if key in merged:
            prev = merged[key]
            merged[key] = Nonlocal(prev.left + t.left, t.right, t.power)
        else:
            merged[key] = t
    return tuple(t for t in merged.values() if t.left)


class Entry:
    """One matrix entry: local coefficients by power plus a tuple of nonlocal terms."""

    __slots__ = ("locals", "nonlocals")

    def __init__(self, locals_: Optional[Dict[int, Expression]] = None,
                 nonlocals: Iterable[Nonlocal] = ()):
        loc = {}
        for k, c in (locals_ or {}).items():
            c = Expression.lift(c)
            if c:
                loc[int(k)] = c
        self.locals = dict(sorted(loc.items()))
        self.nonlocals = tuple(t for t in nonlocals if t.left and t.right)

    def is_zero(self) -> bool:
        return not self.locals and not self.nonlocals

    def is_local(self) -> bool:
        return not self.nonlocals

    def __add__(self, other: "Entry") -> "Entry":
        loc = dict(self.locals)
        for k, c in other.locals.items():
            loc[k] = loc[k] + c if k in loc else c
        return Entry(loc, _sum_like_nonlocals(self.nonlocals + other.nonlocals))

    def scale(self, k) -> "Entry":
        return Entry({p: c.scale(k) for p, c in self.locals.items()},
                     tuple(Nonlocal(t.left.scale(k), t.right, t.power) for t in self.nonlocals))

    def map_expressions(self, fn_local, fn_left) -> "Entry":
        return Entry({p: fn_local(c) for p, c in self.locals.items()},
                     tuple(Nonlocal(fn_left(t.left), t.right, t.power) for t in self.nonlocals))

    def __eq__(self, other):
        return (isinstance(other, Entry) and self.locals == other.locals
                and self.nonlocals == other.nonlocals)

    def __hash__(self):
        return hash((tuple(self.locals.items()), self.nonlocals))

    def __repr__(self):
        return f"Entry(locals={self.locals}, nonlocals={self.nonlocals})"


class PseudoDifferenceOperator:
    """Immutable N x N matrix of :class:`Entry`."""

    __slots__ = ("entries",)

    def __init__(self, entries: Sequence[Sequence[Entry]]):
        rows = tuple(tuple(e if isinstance(e, Entry) else Entry(*e) for e in row) for row in entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("operator matrix must be square")
        self.entries = rows

    @classmethod
    def from_locals(cls, locals_matrix) -> "PseudoDifferenceOperator":
        return cls([[Entry(e) for e in row] for row in locals_matrix])

    @classmethod
    def zero(cls, n: int) -> "PseudoDifferenceOperator":
        return cls([[Entry() for _ in range(n)] for _ in range(n)])

    @classmethod
    def identity(cls, n: int) -> "PseudoDifferenceOperator":
        return cls([[Entry({0: Expression.constant(1)} if i == j else {}) for j in range(n)]
                    for i in range(n)])

    @property
    def N(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij) -> Entry:
        i, j = ij
        return self.entries[i][j]

    def cells(self):
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                yield i, j, e

    def is_structurally_zero(self) -> bool:
        return all(e.is_zero() for _, _, e in self.cells())

    def has_nonlocal(self) -> bool:
        return any(e.nonlocals for _, _, e in self.cells())

    def parameters(self) -> Tuple[str, ...]:
        ps = set()
        for _, _, e in self.cells():
            for c in e.locals.values():
                ps.update(c.parameters())
            for t in e.nonlocals:
                ps.update(t.left.parameters())
                ps.update(t.right.num.parameters())
        from .kernel import param_key
        return tuple(sorted(ps, key=param_key))

    def _map(self, fn) -> "PseudoDifferenceOperator":
        return PseudoDifferenceOperator([[fn(e) for e in row] for row in self.entries])

    def __add__(self, other: "PseudoDifferenceOperator") -> "PseudoDifferenceOperator":
        if self.N != other.N:
            raise ValueError("size mismatch")
        return PseudoDifferenceOperator([[a + b for a, b in zip(ra, rb)]
                                         for ra, rb in zip(self.entries, other.entries)])

    def scale(self, k) -> "PseudoDifferenceOperator":
        return self._map(lambda e: e.scale(k))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def substitute(self, values) -> "PseudoDifferenceOperator":
        def sub(e: Entry) -> Entry:
            return Entry({p: c.substitute(values) for p, c in e.locals.items()},
                         tuple(Nonlocal(t.left.substitute(values), t.right.substitute(values),
                                        t.power) for t in e.nonlocals))
        return self._map(sub)

    def __eq__(self, other):
        return isinstance(other, PseudoDifferenceOperator) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"PseudoDifferenceOperator(N={self.N}, entries={self.entries})"


def add(p: PseudoDifferenceOperator, q: PseudoDifferenceOperator) -> PseudoDifferenceOperator:
    return p + q


def scale(p: PseudoDifferenceOperator, k) -> PseudoDifferenceOperator:
    return p.scale(k)


# --------------------------------------------------------------------------
# composition


def _compose_entries(a: Entry, b: Entry) -> Entry:
    loc: Dict[int, Expression] = {}
    nonloc: List[Nonlocal] = []
    for k, ca in a.locals.items():
        for m, cb in b.locals.items():
            term = ca * cb.shift(k)
            loc[k + m] = loc[k + m] + term if k + m in loc else term
        for t in b.nonlocals:
            # a D^k A Delta^-1 B D^m = a (D^k A) Delta^-1 (D^k B) D^(k+m)
            nonloc.append(Nonlocal(ca * t.left.shift(k), t.right.shift(k), k + t.power))
    for t in a.nonlocals:
        if b.nonlocals:
            raise NonlocalDepthExceeded("composition of two nonlocal terms")
        for m, cb in b.locals.items():
            nonloc.append(Nonlocal(t.left, t.right * cb.shift(t.power), t.power + m))
    return Entry(loc, nonloc)


def compose(p: PseudoDifferenceOperator, q: PseudoDifferenceOperator) -> PseudoDifferenceOperator:
    n = p.N
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = Entry()
            for l in range(n):
                if p.entries[i][l].is_zero() or q.entries[l][j].is_zero():
                    continue
                e = e + _compose_entries(p.entries[i][l], q.entries[l][j])
            row.append(e)
        rows.append(row)
    return PseudoDifferenceOperator(rows)


# --------------------------------------------------------------------------
# action on vector expressions


def _split_scale(a: Expression):
    """(a / s, s) with a deterministic rational s, so scalar multiples share a key."""
    _, c = a.leading()
    s = c if not isinstance(c, LinearForm) else (c.terms[0][1] if c.terms else c.constant)
    return a.scale(1 / s), s


def apply(r: PseudoDifferenceOperator, g: Sequence[Expression]) -> Tuple[Expression, ...]:
    """Act with the operator on a column vector.

    Nonlocal terms of a row that share their left factor (up to a rational
    multiple) and denominator are summed under a single Delta^-1, since the
    summands need not be exact differences individually.
    """
    g = tuple(Expression.lift(x) for x in g)
    out = []
    for i, row in enumerate(r.entries):
        acc: dict = {}
        groups: Dict[tuple, list] = {}
        order: List[tuple] = []
        for j, e in enumerate(row):
            if e.is_zero() or not g[j]:
                continue
            for k, c in e.locals.items():
                for m, v in (c * g[j].shift(k)).terms.items():
                    _acc_add(acc, m, v)
            for t in e.nonlocals:
                left, s = _split_scale(t.left)
                key = (left, t.right.den)
                if key not in groups:
                    groups[key] = []
                    order.append(key)
                groups[key].append((t.right.num * g[j].shift(t.power)).scale(s))
        for key in order:
            left, den = key
            total = Expression.zero()
            for part in groups[key]:
                total = total + part
            if not total:
                continue
            if den != 1:
                try:
                    total = total.divide_exact(den)
                except NotExactDivision:
                    raise NotExactDifference(
                        "argument of Delta^-1 is not a Laurent polynomial") from None
            j_expr = antidifference(total)
            for m, v in (left * j_expr).terms.items():
                _acc_add(acc, m, v)
        out.append(Expression.from_acc(acc))
    return tuple(out)


# --------------------------------------------------------------------------
# Fréchet derivative of an operator


def rf_directional(b: RationalFunction, f: Sequence[Expression]) -> RationalFunction:
    if b.is_polynomial:
        return RationalFunction(directional_derivative(b.num, f))
    num = directional_derivative(b.num, f) * b.den - b.num * directional_derivative(b.den, f)
    return RationalFunction(num, b.den * b.den)


def frechet_in_direction(r: PseudoDifferenceOperator, f: Sequence[Expression],
                         system: Optional[DDESystem] = None) -> PseudoDifferenceOperator:
    f = tuple(Expression.lift(x) for x in f)

    def entry(e: Entry) -> Entry:
        loc = {k: directional_derivative(c, f) for k, c in e.locals.items()}
        nonloc = []
        for t in e.nonlocals:
            nonloc.append(Nonlocal(directional_derivative(t.left, f), t.right, t.power))
            nonloc.append(Nonlocal(t.left, rf_directional(t.right, f), t.power))
        return Entry(loc, nonloc)

    return r._map(entry)


# --------------------------------------------------------------------------
# normal form


def _normalize_entry(e: Entry) -> Entry:
    loc: Dict[int, Expression] = dict(e.locals)

    def add_local(k, c):
        loc[k] = loc[k] + c if k in loc else c

    pending = list(e.nonlocals)
    flat: List[Nonlocal] = []
    while pending:
        t = pending.pop()
        if t.power == 0:
            flat.append(t)
        elif t.power > 0:
            # A Delta^-1 B D^k = A (D^-1 B) D^(k-1) + A Delta^-1 (D^-1 B) D^(k-1)
            b1 = t.right.shift(-1)
            if not b1.is_polynomial:
                add_local_rf(loc, t.left, b1, t.power - 1)
            else:
                add_local(t.power - 1, t.left * b1.num)
            pending.append(Nonlocal(t.left, b1, t.power - 1))
        else:
            # A Delta^-1 B D^k = -A B D^k + A Delta^-1 (D B) D^(k+1)
            if not t.right.is_polynomial:
                add_local_rf(loc, -t.left, t.right, t.power)
            else:
                add_local(t.power, -(t.left * t.right.num))
            pending.append(Nonlocal(t.left, t.right.shift(1), t.power + 1))
    return Entry(loc, _merge_nonlocals(flat))


def add_local_rf(loc, left: Expression, b: RationalFunction, k: int):
    """Local coefficient left * b must be a Laurent polynomial."""
    prod = left * b
    if not prod.is_polynomial:
        raise NotExactDivision("local coefficient would be a non-polynomial rational function")
    loc[k] = loc[k] + prod.num if k in loc else prod.num


def _canonical_right(t: Nonlocal) -> Nonlocal:
    b = t.right
    if not b.num or b.has_parameters():
        return t
    _, c = b.num.leading()
    if c == 1:
        return t
    return Nonlocal(t.left.scale(c), b.scale(1 / c), t.power)


def _merge_nonlocals(terms: Iterable[Nonlocal]) -> Tuple[Nonlocal, ...]:
    merged: Dict[RationalFunction, Expression] = {}
    for t in terms:
        t = _canonical_right(t)
        if not t.left or not t.right:
            continue
        merged[t.right] = merged[t.right] + t.left if t.right in merged else t.left
    out = [Nonlocal(a, b, 0) for b, a in merged.items() if a]
    out.sort(key=lambda t: t.key())
    return tuple(out)


def normalize(r: PseudoDifferenceOperator) -> PseudoDifferenceOperator:
    """Rewrite to normal form: nonlocal terms end in D^0, locals collected by power."""
    return r._map(_normalize_entry)


# --------------------------------------------------------------------------
# zero testing


@dataclass(frozen=True)
class ZeroVerdict:
    kind: str  # "zero" | "nonzero_local" | "inconclusive"
    residual: Optional[PseudoDifferenceOperator] = None
    detail: str = ""

    ZERO = "zero"
    NONZERO_LOCAL = "nonzero_local"
    INCONCLUSIVE = "inconclusive"

    @property
    def is_zero(self) -> bool:
        return self.kind == self.ZERO

    def __str__(self):
        return {"zero": "Zero", "nonzero_local": "NonzeroLocal",
                "inconclusive": "Inconclusive"}[self.kind]


def _polynomial_rows(rights: Sequence[RationalFunction]) -> List[Expression]:
    dens = []
    for b in rights:
        if b.den not in dens:
            dens.append(b.den)
    out = []
    for b in rights:
        factor = Expression.constant(1)
        for d in dens:
            if d != b.den:
                factor = factor * d
        out.append(b.num * factor)
    return out


def _fold_nonlocal(terms: Sequence[Nonlocal]) -> List[Expression]:
    """Group A_i Delta^-1 B_i by rational linear dependence of the B_i.

    Returns the folded left factors of a maximal independent subset of the
    B_i; the nonlocal part vanishes if all of them do.
    """
    rights = [t.right for t in terms]
    if any(b.has_parameters() for b in rights):
        raise ValueError("right factors must be parameter-free for the zero test")
    polys = _polynomial_rows(rights)
    # echelon rows: (pivot monomial, vector dict, combination over basis indices)
    echelon: List[Tuple[tuple, dict, Dict[int, Fraction]]] = []
    basis: List[int] = []
    folded: Dict[int, Expression] = {}
    for idx, p in enumerate(polys):
        vec = dict(p.terms)
        combo: Dict[int, Fraction] = {}
        for piv, row, rcombo in echelon:
            f = vec.get(piv)
            if not f:
                continue
            for m, c in row.items():
                v = vec.get(m, 0) - f * c
                if v:
                    vec[m] = v
                else:
                    vec.pop(m, None)
            for b_idx, c in rcombo.items():
                combo[b_idx] = combo.get(b_idx, 0) + f * c
        if vec:
            piv = max(vec, key=mono_key)
            pc = vec[piv]
            row = {m: c / pc for m, c in vec.items()}
            # row = (B_idx - sum combo_b B_b) / pc
            rcombo = {b: -c / pc for b, c in combo.items() if c}
            rcombo[idx] = Fraction(1) / pc
            echelon.append((piv, row, rcombo))
            basis.append(idx)
            folded[idx] = terms[idx].left
        else:
            # B_idx = sum combo_b B_b
            for b_idx, c in combo.items():
                if c:
                    folded[b_idx] = folded[b_idx] + terms[idx].left.scale(c)
    return [folded[b] for b in basis]


def zero_conditions(r: PseudoDifferenceOperator) -> Tuple[List[Expression], List[Expression]]:
    """Expressions whose vanishing makes the (normalized) operator zero.

    Returns (local coefficients, folded nonlocal left factors).
    """
    r = normalize(r)
    local_conds: List[Expression] = []
    nonlocal_conds: List[Expression] = []
    for _, _, e in r.cells():
        local_conds.extend(c for c in e.locals.values() if c)
        if e.nonlocals:
            nonlocal_conds.extend(x for x in _fold_nonlocal(e.nonlocals) if x)
    return local_conds, nonlocal_conds


def is_zero(r: PseudoDifferenceOperator, context=None) -> ZeroVerdict:
    """One-sided zero test: never reports nonzero from nonlocal residue alone."""
    r = normalize(r)
    if r.parameters():
        raise ValueError("is_zero needs a parameter-free operator")
    local_conds, nonlocal_conds = zero_conditions(r)
    if local_conds:
        return ZeroVerdict(ZeroVerdict.NONZERO_LOCAL, r, "nonzero local coefficients remain")
    if nonlocal_conds:
        return ZeroVerdict(ZeroVerdict.INCONCLUSIVE, r,
                           f"{len(nonlocal_conds)} nonlocal group(s) do not cancel")
    return ZeroVerdict(ZeroVerdict.ZERO)


def commutator_residual(r: PseudoDifferenceOperator, system: DDESystem) -> PseudoDifferenceOperator:
    """R'[F] + R o F' - F' o R for a time-independent operator R."""
    from .calculus import frechet_operator

    fprime = frechet_operator(system.rhs, system)
    return normalize(frechet_in_direction(r, system.rhs)
                     + compose(r, fprime) - compose(fprime, r))
