"""Discrete calculus on lattice expressions.

Shifts, the forward difference and its canonical inverse, the total time
derivative along a lattice system, Fréchet derivatives and their adjoint,
and the discrete Euler (variational) operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, Mapping, Sequence, Tuple

from .errors import DocumentError, NotExactDifference
from .kernel import (Expression, LinearForm, Var, _acc_add, mono_min_shift,
                     mono_shift)

VectorExpression = Tuple[Expression, ...]


@dataclass(frozen=True)
class DDESystem:
    """``d/dt (u_i)_n = F_i`` for i in range(N), F polynomial and parameter-free."""

    names: Tuple[str, ...]
    rhs: VectorExpression

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "rhs", tuple(Expression.lift(f) for f in self.rhs))
        if len(self.names) != len(self.rhs):
            raise DocumentError("one right-hand side per dependent variable is required")
        if len(set(self.names)) != len(self.names):
            raise DocumentError("duplicate variable names")
        for f in self.rhs:
            if f.has_parameters():
                raise DocumentError("right-hand sides must be parameter-free")
            for c, _ in f.variables():
                if not 0 <= c < len(self.names):
                    raise DocumentError(f"component index {c} out of range")

    @property
    def N(self) -> int:
        return len(self.names)

    @cached_property
    def rhs_variables(self) -> Tuple[Var, ...]:
        vs = set()
        for f in self.rhs:
            vs.update(f.variables())
        return tuple(sorted(vs))

    @cached_property
    def shift_span(self) -> Tuple[int, int]:
        """(most negative, most positive) shift occurring in F, always containing 0."""
        shifts = [s for _, s in self.rhs_variables] or [0]
        return min(min(shifts), 0), max(max(shifts), 0)

    def shifted_rhs(self, component: int, k: int) -> Expression:
        return self._shift_cache.setdefault((component, k), self.rhs[component].shift(k))

    @cached_property
    def _shift_cache(self) -> Dict[Tuple[int, int], Expression]:
        return {}

    def zero_vector(self) -> VectorExpression:
        return tuple(Expression.zero() for _ in self.names)


@dataclass(frozen=True)
class LogDensity:
    """``poly + sum(a_i * ln((u_i)_n))``."""

    poly: Expression = field(default_factory=Expression.zero)
    logs: Tuple[Tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "poly", Expression.lift(self.poly))
        merged: Dict[int, Fraction] = {}
        for c, a in dict(self.logs).items() if isinstance(self.logs, Mapping) else self.logs:
            merged[c] = merged.get(c, 0) + Fraction(a)
        object.__setattr__(self, "logs", tuple(sorted((c, a) for c, a in merged.items() if a)))

    @property
    def is_polynomial(self) -> bool:
        return not self.logs

    def scale(self, k) -> "LogDensity":
        return LogDensity(self.poly.scale(k), tuple((c, a * k) for c, a in self.logs))


def shift(e, k: int):
    return e.shift(k)


def delta(e: Expression) -> Expression:
    return e.shift(1) - e


def antidifference(e: Expression) -> Expression:
    """Canonical J with ``delta(J) == e``.

    Each monomial is telescoped onto its shift-minimal representative (the
    copy whose smallest shift is 0); whatever does not cancel there is not a
    difference.  No additive constant is ever produced.
    """
    acc: dict = {}
    residue: dict = {}
    for m, c in e.terms.items():
        lo = mono_min_shift(m)
        if lo is None:
            _acc_add(residue, m, c)
            continue
        if lo > 0:
            # tau = Delta(sum_{j=1..lo} D^-j tau) + D^-lo tau
            for j in range(1, lo + 1):
                _acc_add(acc, mono_shift(m, -j), c)
        elif lo < 0:
            # tau = -Delta(sum_{j=0..|lo|-1} D^j tau) + D^|lo| tau
            for j in range(0, -lo):
                _acc_add(acc, mono_shift(m, j), -c)
        _acc_add(residue, mono_shift(m, -lo), c)
    rest = Expression.from_acc(residue)
    if rest:
        raise NotExactDifference("expression is not an exact difference", residue=rest)
    return Expression.from_acc(acc)


def is_exact_difference(e: Expression) -> bool:
    try:
        antidifference(e)
    except NotExactDifference:
        return False
    return True


def _chain(e: Expression, direction: Sequence[Expression], shifted) -> Expression:
    """sum over variables (j, k) of d e / d (u_j)_{n+k} * shifted(j, k)."""
    out = Expression.zero()
    parts = []
    for (j, k), g in e.gradient().items():
        d = shifted(j, k)
        if d:
            parts.append(g * d)
    if not parts:
        return out
    acc: dict = {}
    for p in parts:
        for m, c in p.terms.items():
            _acc_add(acc, m, c)
    return Expression.from_acc(acc)


def t_derivative(e, system: DDESystem) -> Expression:
    """Total time derivative on solutions of the system."""
    if isinstance(e, LogDensity):
        out = t_derivative(e.poly, system)
        for c, a in e.logs:
            out = out + (system.rhs[c] * Expression.var(c) ** -1).scale(a)
        return out
    return _chain(e, system.rhs, system.shifted_rhs)


def directional_derivative(e: Expression, f: Sequence[Expression]) -> Expression:
    """Fréchet derivative of a scalar expression in the direction of vector f."""
    cache: Dict[Tuple[int, int], Expression] = {}

    def shifted(j, k):
        key = (j, k)
        if key not in cache:
            cache[key] = f[j].shift(k)
        return cache[key]

    return _chain(e, f, shifted)


def frechet_apply(f: Sequence[Expression], g: Sequence[Expression],
                  system: DDESystem | None = None) -> VectorExpression:
    """F'[G] componentwise."""
    return tuple(directional_derivative(fi, g) for fi in f)


def frechet_operator(f: Sequence[Expression], system: DDESystem):
    """Matrix of local operators sum_k d f_i / d (u_j)_{n+k} D^k."""
    from .opalgebra import PseudoDifferenceOperator

    n = system.N
    entries = [[{} for _ in range(n)] for _ in range(n)]
    for i, fi in enumerate(f):
        if fi.has_parameters():
            raise ValueError("frechet_operator needs a parameter-free vector")
        for (j, k), g in fi.gradient().items():
            entries[i][j][k] = g
    return PseudoDifferenceOperator.from_locals(entries)


def euler_derivative(e: Expression, component: int) -> Expression:
    """sum_k D^{-k} (d e / d (u_component)_{n+k})."""
    acc: dict = {}
    for (j, k), g in e.gradient().items():
        if j != component:
            continue
        for m, c in g.terms.items():
            _acc_add(acc, mono_shift(m, -k), c)
    return Expression.from_acc(acc)


def variational_gradient(e: Expression, n: int) -> VectorExpression:
    return tuple(euler_derivative(e, j) for j in range(n))


def adjoint_frechet_apply(system: DDESystem, gamma: Sequence[Expression]) -> VectorExpression:
    """Row vector F'^dagger(gamma): component j = sum_{i,k} D^{-k}(gamma_i dF_i/d(u_j)_{n+k})."""
    accs = [dict() for _ in range(system.N)]
    for i, fi in enumerate(system.rhs):
        gi = Expression.lift(gamma[i])
        if not gi:
            continue
        for (j, k), g in fi.gradient().items():
            for m, c in (gi * g).terms.items():
                _acc_add(accs[j], mono_shift(m, -k), c)
    return tuple(Expression.from_acc(a) for a in accs)


def symmetry_residual(system: DDESystem, g: Sequence[Expression]) -> VectorExpression:
    """D_t G - F'[G]; vanishes exactly for generalized symmetries."""
    g = tuple(Expression.lift(x) for x in g)
    fg = frechet_apply(system.rhs, g)
    return tuple(t_derivative(gi, system) - fgi for gi, fgi in zip(g, fg))


def vector_is_zero(v: Sequence[Expression]) -> bool:
    return all(not Expression.lift(x) for x in v)


