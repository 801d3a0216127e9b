"""Randomized property suites, 1000 cases each."""

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from latrec.calculus import antidifference, delta, directional_derivative, euler_derivative
from latrec.kernel import Expression, RationalFunction
from latrec.opalgebra import Entry, Nonlocal, PseudoDifferenceOperator, apply, compose, normalize

from helpers import numeric_directional, evaluate

pytestmark = pytest.mark.criterion(8)

CASES = settings(max_examples=1000, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])

coefficients = st.builds(Fraction, st.integers(-6, 6).filter(bool), st.integers(1, 4))


def monomials(components=2, shifts=(-2, 2), exponents=(1, 2), max_factors=3):
    factor = st.tuples(st.integers(0, components - 1), st.integers(*shifts),
                       st.integers(*exponents).filter(bool))
    return st.lists(factor, min_size=0, max_size=max_factors).map(_as_monomial)


def _as_monomial(factors):
    e = Expression.constant(1)
    for comp, s, k in factors:
        e = e * Expression.var(comp, s) ** k
    return e


def expressions(components=2, shifts=(-2, 2), exponents=(1, 2), max_terms=4, max_factors=3):
    term = st.tuples(coefficients, monomials(components, shifts, exponents, max_factors))
    return st.lists(term, min_size=1, max_size=max_terms).map(
        lambda ts: sum((m.scale(c) for c, m in ts), Expression.zero()))


small = expressions(max_terms=3, max_factors=2)
scalar_small = expressions(components=1, max_terms=3, max_factors=2)


def local_entries(components, max_powers=2):
    return st.dictionaries(st.integers(-1, 1), expressions(components, (-1, 1), (1, 1), 2, 2),
                           max_size=max_powers)


def local_operators(n):
    return st.lists(local_entries(n), min_size=n * n, max_size=n * n).map(
        lambda cells: PseudoDifferenceOperator.from_locals(
            [cells[i * n:(i + 1) * n] for i in range(n)]))


# ---------------------------------------------------------------- Delta, Delta^-1


@CASES
@given(expressions(exponents=(-1, 2)))
def test_antidifference_inverts_delta(e):
    d = delta(e)
    j = antidifference(d)
    assert delta(j) == d
    assert (j - e).is_constant()


# ---------------------------------------------------------------- Euler


@CASES
@given(expressions(exponents=(-1, 3)))
def test_euler_annihilates_differences(e):
    d = delta(e)
    assert all(not euler_derivative(d, j) for j in range(2))


# ---------------------------------------------------------------- apply / compose


@CASES
@given(local_operators(2), local_operators(2), st.tuples(small, small))
def test_apply_compose_consistency_local(p, q, g):
    assert apply(compose(p, q), g) == apply(p, apply(q, g))


DELTA = PseudoDifferenceOperator.from_locals([[{1: Expression.constant(1), 0: Expression.constant(-1)}]])


@CASES
@given(local_entries(1), local_entries(1), scalar_small, coefficients, scalar_small)
def test_apply_compose_consistency_nonlocal(p_loc, l_loc, a, b, h):
    # P = p + a Delta^-1 b, Q = Delta o L: the Delta^-1 argument b * Q(g) is always exact
    p = PseudoDifferenceOperator([[Entry(p_loc, [Nonlocal(a, RationalFunction(Expression.constant(b)))])]])
    q = compose(DELTA, PseudoDifferenceOperator.from_locals([[l_loc]]))
    g = (h,)
    assert apply(compose(p, q), g) == apply(p, apply(q, g))
    # local after nonlocal: p_loc o (a Delta^-1 b) acting on a difference
    local_p = PseudoDifferenceOperator.from_locals([[p_loc]])
    nl = PseudoDifferenceOperator([[Entry({}, [Nonlocal(a, RationalFunction(Expression.constant(b)))])]])
    dg = (delta(h),)
    assert apply(compose(local_p, nl), dg) == apply(local_p, apply(nl, dg))


# ---------------------------------------------------------------- normalize


nonlocal_specs = st.lists(
    st.tuples(expressions(1, (-1, 1), (1, 1), 2, 2), monomials(1, (-1, 1), (-1, 1), 2),
              st.integers(-2, 2), expressions(1, (-1, 1), (1, 2), 2, 2)),
    min_size=1, max_size=2)


def _normalize_case(loc, specs):
    """Operator with terms a Delta^-1 m D^k and an input making every argument exact."""
    terms, g = [], Expression.zero()
    for a, m, k, h in specs:
        terms.append(Nonlocal(a, RationalFunction(m), k))
    op = PseudoDifferenceOperator([[Entry(loc, terms)]])
    # a single input must make all arguments exact: use terms that share m and k
    a, m, k, h = specs[0]
    g = (delta(h) * m ** -1).shift(-k)
    shared = [Nonlocal(t.left, RationalFunction(m), k) for t in terms]
    return PseudoDifferenceOperator([[Entry(loc, shared)]]), (g,), op


@CASES
@given(local_entries(1), nonlocal_specs)
def test_normalize_is_sound_and_idempotent(loc, specs):
    op, g, raw = _normalize_case(loc, specs)
    n = normalize(op)
    assert apply(n, g) == apply(op, g)
    assert normalize(n) == n
    assert normalize(normalize(raw)) == normalize(raw)
    assert all(t.power == 0 for _, _, e in n.cells() for t in e.nonlocals)


# ---------------------------------------------------------------- Frechet vs numeric


points = st.lists(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 7)), min_size=18, max_size=18)


@CASES
@given(small, st.tuples(small, small), points)
def test_frechet_matches_numeric_derivative(f, g, values):
    point = {(c, s): values[c * 9 + s + 4] for c in range(2) for s in range(-4, 5)}
    exact = evaluate(directional_derivative(f, g), point)
    assert exact == numeric_directional(f, g, point)
