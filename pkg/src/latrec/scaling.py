"""Dilation weights, ranks, and rank-constrained monomial enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

from .calculus import DDESystem, LogDensity
from .errors import (InfiniteBasis, NoDilationSymmetry, NonpositiveWeights,
                     NoSolution, NotUniform)
from .kernel import (Expression, LinearForm, LinearSystem, Monomial, Var,
                     format_coefficient, solve_linear)


@dataclass(frozen=True)
class WeightAssignment:
    """One weight per dependent variable; ``t_weight`` is the weight of D_t.

    ``t_weight`` is 1 for every genuinely dilation-invariant system.  It is 0
    only for systems such as Ablowitz-Ladik whose sole scaling leaves t alone,
    accepted when nonpositive weights are explicitly allowed.
    """

    weights: Tuple[Fraction, ...]
    t_weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        object.__setattr__(self, "t_weight", Fraction(self.t_weight))

    def __getitem__(self, i) -> Fraction:
        return self.weights[i]

    def __len__(self):
        return len(self.weights)

    @property
    def all_positive(self) -> bool:
        return all(w > 0 for w in self.weights)


def _weight_name(i: int) -> str:
    return f"w{i}"


def _uniformity_equations(system: DDESystem, t_weight) -> List:
    eqs = []
    for i, f in enumerate(system.rhs):
        for m, _ in f.items():
            terms = {}
            for (c, _), e in m:
                terms[_weight_name(c)] = terms.get(_weight_name(c), 0) + e
            terms[_weight_name(i)] = terms.get(_weight_name(i), 0) - 1
            if isinstance(t_weight, str):
                terms[t_weight] = terms.get(t_weight, 0) - 1
                eqs.append(LinearForm.make(0, terms))
            else:
                eqs.append(LinearForm.make(-Fraction(t_weight), terms))
    return eqs


def _override_equations(system: DDESystem, overrides: Mapping[str, object]) -> List:
    eqs = []
    for name, value in (overrides or {}).items():
        i = system.names.index(name)
        eqs.append(LinearForm(-Fraction(value), {_weight_name(i): 1}))
    return eqs


def _relations(system: DDESystem, solution) -> List[str]:
    out = []
    for p, v in solution.values.items():
        i = int(p[1:])
        expr = {p: Fraction(1)}
        const = Fraction(0)
        if isinstance(v, LinearForm):
            for q, k in v.terms:
                expr[q] = expr.get(q, 0) - k
            const = -v.constant
        else:
            const = -v
        lhs = LinearForm.make(0, {f"w({system.names[int(q[1:])]})": k for q, k in expr.items()})
        out.append(f"{format_coefficient(lhs)} = {-const}")
    return out


def compute_weights(system: DDESystem, allow_nonpositive: bool = False,
                    overrides: Optional[Mapping[str, object]] = None) -> WeightAssignment:
    """Solve the rank-uniformity equations rank(m) = w(u_i) + w(D_t) for every term.

    Free weights default to 1.  ``overrides`` pins weights by variable name.
    """
    unknowns = [_weight_name(i) for i in range(system.N)]
    eqs = _uniformity_equations(system, 1) + _override_equations(system, overrides)
    try:
        sol = solve_linear(LinearSystem(eqs, unknowns))
    except NoSolution:
        sol = None
    if sol is not None:
        vals = sol.specialize({p: 1 for p in sol.free})
        wa = WeightAssignment(tuple(vals[u] for u in unknowns))
        if not wa.all_positive and not allow_nonpositive:
            raise NonpositiveWeights(
                f"weights {[str(w) for w in wa.weights]} are not all positive",
                weights=wa, relations=_relations(system, sol))
        return wa

    # No scaling with w(D_t) = 1; look for one that leaves t unscaled.
    eqs0 = _uniformity_equations(system, 0) + _override_equations(system, overrides)
    try:
        sol0 = solve_linear(LinearSystem(eqs0, unknowns))
    except NoSolution:
        sol0 = None
    if sol0 is None or not sol0.free:
        raise NoDilationSymmetry("the rank-uniformity equations have no solution")
    vals = sol0.specialize({p: 1 for p in sol0.free})
    wa = WeightAssignment(tuple(vals[u] for u in unknowns), t_weight=0)
    relations = _relations(system, sol0)
    if not allow_nonpositive:
        raise NonpositiveWeights(
            "uniformity forces mixed-sign weights with w(D_t) = 0: " + "; ".join(relations),
            weights=wa, relations=relations)
    return wa


def monomial_rank(m: Monomial, w: WeightAssignment) -> Fraction:
    return sum((w[c] * e for (c, _), e in m), Fraction(0))


def rank_of(e, w: WeightAssignment) -> Fraction:
    """Common rank of all terms; NotUniform (with the offending pair) otherwise."""
    if isinstance(e, LogDensity):
        if e.poly:
            r = rank_of(e.poly, w)
            if r != 0:
                raise NotUniform("logarithms have rank 0 but the polynomial part does not")
        return Fraction(0)
    if not e:
        raise NotUniform("the zero expression has no rank")
    first = None
    for m, _ in e.items():
        r = monomial_rank(m, w)
        if first is None:
            first = (m, r)
        elif r != first[1]:
            raise NotUniform(f"ranks {first[1]} and {r} differ", pair=(first[0], m))
    return first[1]


def is_uniform(e, w: WeightAssignment) -> bool:
    try:
        rank_of(e, w)
    except NotUniform:
        return False
    return True


def _enumerate(pool: Sequence[Var], w: WeightAssignment, target: Fraction,
               max_degree: Optional[int]) -> Iterable[Monomial]:
    """Exponent vectors over ``pool`` in descending lexicographic order."""
    weights = [w[c] for c, _ in pool]
    n = len(pool)
    exps = [0] * n

    def rec(i, remaining, deg):
        if i == n:
            if remaining == 0:
                yield tuple((pool[j], exps[j]) for j in range(n) if exps[j])
            return
        wi = weights[i]
        if wi > 0:
            hi = int(remaining / wi) if remaining > 0 else 0
        else:
            hi = None
        if max_degree is not None:
            cap = max_degree - deg
            hi = cap if hi is None else min(hi, cap)
        for e in range(hi, -1, -1):
            exps[i] = e
            yield from rec(i + 1, remaining - wi * e, deg + e)
        exps[i] = 0

    yield from rec(0, Fraction(target), 0)


def monomial_basis(target_rank, w: WeightAssignment, window: Tuple[int, int] = (0, 0),
                   mod_shift: bool = False, components: Optional[Sequence[int]] = None,
                   pool: Optional[Sequence[Var]] = None,
                   max_degree: Optional[int] = None) -> List[Monomial]:
    """All monomials of exactly ``target_rank``.

    Without ``mod_shift`` the variables range over every shift in ``window``.
    With ``mod_shift`` one representative per shift class is returned, the
    one whose smallest shift is 0, and its shift span is at most the window
    radius ``max(-lo, hi)``.  An explicit ``pool`` overrides the window.
    """
    target = Fraction(target_rank)
    comps = list(range(len(w))) if components is None else list(components)
    lo, hi = window
    if pool is None:
        if mod_shift:
            radius = max(-lo, hi, 0)
            shifts = range(0, radius + 1)
        else:
            shifts = range(lo, hi + 1)
        pool = [(c, s) for c in comps for s in shifts]
    pool = sorted(pool)
    if max_degree is None and any(w[c] <= 0 for c, _ in pool):
        raise InfiniteBasis("nonpositive weights need an explicit degree cap")
    if target < 0 and max_degree is None:
        return []
    out = []
    for m in _enumerate(pool, w, target, max_degree):
        if mod_shift and m and min(s for (_, s), _ in m) != 0:
            continue
        out.append(m)
    return out
