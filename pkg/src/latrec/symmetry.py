"""Generalized symmetries: D_t G = F'[G] on solutions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .calculus import (DDESystem, VectorExpression, directional_derivative,
                       symmetry_residual, t_derivative)
from .errors import NoSolution
from .kernel import (Expression, LinearSystem, collect_zero_conditions,
                     linear_combination, solve_linear)
from .scaling import WeightAssignment, monomial_basis, rank_of


@dataclass(frozen=True)
class Symmetry:
    g: VectorExpression
    level: int

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(Expression.lift(x) for x in self.g))

    def ranks(self, w: WeightAssignment) -> Tuple[Fraction, ...]:
        return symmetry_ranks(self.g, self.level, w)

    def __getitem__(self, i):
        return self.g[i]

    def __len__(self):
        return len(self.g)


def symmetry_ranks(g: Sequence[Expression], level, w: WeightAssignment) -> Tuple[Fraction, ...]:
    """Component ranks; zero components take the level + weight rule."""
    return tuple(rank_of(gi, w) if gi else Fraction(level) * w.t_weight + w[i]
                 for i, gi in enumerate(g))


def default_symmetry_window(system: DDESystem, level: int) -> Tuple[int, int]:
    lo, hi = system.shift_span
    return (level * lo, level * hi)


def normalize_vector(g: Sequence[Expression]) -> VectorExpression:
    """Scale so the leading coefficient of the first nonzero component is 1."""
    for gi in g:
        if gi:
            _, c = gi.leading()
            return tuple(x.scale(1 / c) for x in g)
    return tuple(g)


def verify_symmetry(system: DDESystem, g: Sequence[Expression]) -> bool:
    return all(not r for r in symmetry_residual(system, g))


def find_symmetries(system: DDESystem, w: WeightAssignment, level: int,
                    window: Optional[Tuple[int, int]] = None) -> List[Symmetry]:
    """Polynomial symmetries whose i-th component has rank level + w(u_i)."""
    if window is None:
        window = default_symmetry_window(system, level)
    n = system.N
    unknowns = []  # (param, component, monomial)
    for i in range(n):
        target = Fraction(level) + w[i]
        for m in monomial_basis(target, w, window, mod_shift=False):
            unknowns.append((f"c{len(unknowns) + 1}", i, m))
    if not unknowns:
        return []
    params = [p for p, _, _ in unknowns]
    # residual_i = D_t G_i - sum_{j,k} dF_i/d(u_j)_{n+k} D^k G_j, linear in the unknowns
    grads = [f.gradient() for f in system.rhs]
    per_component: List[List[Tuple[str, Expression]]] = [[] for _ in range(n)]
    for p, comp, m in unknowns:
        mono = Expression.monomial(m)
        per_component[comp].append((p, t_derivative(mono, system)))
        for i in range(n):
            for (j, k), dfi in grads[i].items():
                if j == comp:
                    per_component[i].append((p, -(dfi * mono.shift(k))))
    conditions = LinearSystem((), params)
    for i in range(n):
        conditions = conditions + collect_zero_conditions(linear_combination(per_component[i]))
    try:
        sol = solve_linear(conditions)
    except NoSolution:
        return []
    found = []
    for vec in sol.basis():
        accs = [dict() for _ in range(n)]
        for p, comp, m in unknowns:
            if vec[p]:
                accs[comp][m] = vec[p]
        g = tuple(Expression(a) for a in accs)
        if any(g):
            found.append(normalize_vector(g))
    found = _reduce_basis(found)
    out = []
    for g in found:
        assert verify_symmetry(system, g)
        out.append(Symmetry(g, level))
    return out


def _reduce_basis(vectors: List[VectorExpression]) -> List[VectorExpression]:
    """Row-reduce a list of linearly independent symmetry vectors for a canonical basis."""
    if len(vectors) <= 1:
        return vectors
    keys = []
    for g in vectors:
        for i, gi in enumerate(g):
            for m, _ in gi.items():
                keys.append((i, m))
    keys = list(dict.fromkeys(sorted(set(keys), key=lambda t: (t[0],), reverse=False)))
    rows = [list(g) for g in vectors]
    reduced = []
    for key in keys:
        i, m = key
        pivot = next((r for r in rows if r[i].terms.get(m)), None)
        if pivot is None:
            continue
        rows.remove(pivot)
        c = pivot[i].terms[m]
        pivot = [x.scale(1 / c) for x in pivot]
        rows = [[x - y.scale(r[i].terms.get(m, 0)) for x, y in zip(r, pivot)] for r in rows]
        reduced = [[x - y.scale(r[i].terms.get(m, 0)) for x, y in zip(r, pivot)] for r in reduced]
        reduced.append(pivot)
    return [normalize_vector(tuple(r)) for r in reduced if any(r)]
