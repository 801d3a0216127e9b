from fractions import Fraction

import pytest

from latrec import fixture_path
from latrec.calculus import LogDensity
from latrec.dsl import (format_density, format_expression, format_rational, format_system,
                        parse_density, parse_expression, parse_rational, parse_system)
from latrec.errors import DocumentError, NonPolynomialRHS, UndeclaredVariable
from latrec.kernel import Expression, RationalFunction

from helpers import u, v

FIXTURES = ["kvm", "toda", "al", "rt"]


def test_parse_kvm_and_toda():
    kvm = parse_system("u' = u*(u[1]-u[-1]);")
    assert kvm.names == ("u",)
    assert kvm.rhs == (u() * (u(1) - u(-1)),)
    toda = parse_system("u' = v[-1]-v; v' = v*(u-u[1]);")
    assert toda.names == ("u", "v")
    assert toda.rhs == (v(-1) - v(), v() * (u() - u(1)))


def test_var_declaration_fixes_order():
    doc = parse_system("var v, u;\nu' = v;\nv' = u^2;")
    assert doc.names == ("v", "u")
    assert doc.rhs == (Expression.var(1) ** 2, Expression.var(0))


def test_weights_symmetries_densities():
    doc = parse_system("var u, v;\nweight v = 2;\nu' = v[-1] - v;\nv' = v*(u - u[1]);\n"
                       "symmetry 1 = (v - v[-1], v*(u[1] - u));\ndensity = 2*ln(v) + u/2;\n")
    assert doc.weights == {"v": 2}
    assert doc.symmetries[1] == (v() - v(-1), v() * (u(1) - u()))
    assert doc.densities == [LogDensity(u().scale(Fraction(1, 2)), ((1, 2),))]


@pytest.mark.parametrize("text,exc,line,col", [
    ("u' = exp(u);", NonPolynomialRHS, 1, 6),
    ("u' = u/(1 + u);", NonPolynomialRHS, 1, 6),
    ("u' = u^-1;", NonPolynomialRHS, 1, 6),
    ("u' = w;", UndeclaredVariable, 1, 6),
    ("u' = u;\nu' = u;", DocumentError, 2, 1),
    ("var u, v;\nu' = u;", DocumentError, None, None),
    ("u' = u *;", DocumentError, 1, 9),
    ("u' = u[1.5];", DocumentError, 1, 9),
    ("u' = ln(u);", NonPolynomialRHS, 1, 6),
])
def test_errors_carry_positions(text, exc, line, col):
    with pytest.raises(exc) as info:
        parse_system(text)
    if line is not None:
        assert (info.value.line, info.value.column) == (line, col)


def test_expression_printing_round_trips():
    names = ("u", "v")
    for text in ["u*u[1] - 3/2*v[-2]^3 + 7", "-u", "0", "u^-2*v", "-1/3"]:
        e = parse_expression(text, names)
        assert parse_expression(format_expression(e, names), names) == e


def test_rational_printing_round_trips():
    names = ("u", "v")
    b = parse_rational("v/(1 + u*v)", names)
    assert isinstance(b, RationalFunction) and not b.is_polynomial
    assert format_rational(b, names) == "(v)/(u*v + 1)"
    assert parse_rational(format_rational(b, names), names) == b


def test_density_printing():
    names = ("u", "v")
    rho = parse_density("1/2*u^2 + v - ln(v)", names)
    assert format_density(rho, names) == "1/2*u^2 + v - ln(v)"


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_files_round_trip(name):
    text = fixture_path(f"{name}.dde").read_text()
    doc = parse_system(text)
    assert format_system(doc) == text
    assert parse_system(format_system(doc)) == doc
