"""Shared test helpers: fixture loading and compact expression literals."""

from fractions import Fraction

from latrec import fixture_path, parse_expression, parse_system
from latrec.documents import loads as load_operator_text
from latrec.kernel import Expression


def system_doc(name):
    return parse_system(fixture_path(f"{name}.dde").read_text())


def operator(name):
    return load_operator_text(fixture_path(f"{name}.op").read_text()).operator


def E(text, names=("u", "v")):
    return parse_expression(text, names)


def V(*texts, names=("u", "v")):
    return tuple(E(t, names) for t in texts)


def u(k=0):
    return Expression.var(0, k)


def v(k=0):
    return Expression.var(1, k)


def evaluate(e, point, offset=0):
    """Independent evaluator: point maps (component, shift) to a Fraction."""
    total = Fraction(0)
    for m, c in e.terms.items():
        term = Fraction(c)
        for (comp, s), k in m:
            term *= point[(comp, s + offset)] ** k
        total += term
    return total


def proportional(a, b):
    """a == c*b for some nonzero rational c (componentwise, same c)."""
    a, b = tuple(a), tuple(b)
    ratio = None
    for x, y in zip(a, b):
        if bool(x) != bool(y):
            return False
        if not x:
            continue
        mx, cx = x.leading()
        my, cy = y.leading()
        if mx != my:
            return False
        r = Fraction(cx) / Fraction(cy)
        if ratio is None:
            ratio = r
        if r != ratio or x != y.scale(r):
            return False
    return ratio is not None


def numeric_directional(f, g, point):
    """d/de f(u + e g) at e = 0 from exact values at e = 0..deg (Lagrange differentiation)."""
    deg = max(1, f.degree())
    nodes = list(range(deg + 1))
    values = []
    for e in nodes:
        moved = {}
        for comp, s in f.variables():
            moved[(comp, s)] = point[(comp, s)] + e * evaluate(g[comp], point, offset=s)
        values.append(evaluate(f, moved))
    # derivative of the interpolating polynomial at 0
    total = Fraction(0)
    for i, xi in enumerate(nodes):
        # L_i'(0) = sum_{m != i} prod_{k != i, m} (0 - x_k) / prod_{k != i} (x_i - x_k)
        denom = Fraction(1)
        for k, xk in enumerate(nodes):
            if k != i:
                denom *= xi - xk
        deriv = Fraction(0)
        for m, _ in enumerate(nodes):
            if m == i:
                continue
            prod = Fraction(1)
            for k, xk in enumerate(nodes):
                if k not in (i, m):
                    prod *= -xk
            deriv += prod
        total += values[i] * deriv / denom
    return total
