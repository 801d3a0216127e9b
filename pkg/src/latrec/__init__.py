"""Symbolic tools for polynomial differential-difference (lattice) systems.

Computes dilation weights, conserved densities with fluxes, generalized
symmetries and recursion operators, and generates symmetry hierarchies.
All arithmetic is exact.
"""

from importlib import resources

from .calculus import DDESystem, LogDensity
from .conservation import DensityFluxPair, covariant, find_densities, find_log_densities
from .documents import OperatorDocument
from .dsl import SystemDocument, format_expression, format_system, parse_expression, parse_system
from .errors import *  # noqa: F401,F403
from .kernel import Expression, LinearSystem, RationalFunction, solve_linear
from .opalgebra import (Entry, Nonlocal, PseudoDifferenceOperator, apply, commutator_residual,
                        compose, is_zero, normalize)
from .recursion import (RecursionConfig, build_candidate, generate_hierarchy, inverse_pair_check,
                        rank_matrix, recursion_operator, solve_candidate, verify)
from .scaling import WeightAssignment, compute_weights, monomial_basis, rank_of
from .symmetry import Symmetry, find_symmetries, verify_symmetry

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to a bundled example document such as ``"toda.dde"`` or ``"kvm.op"``."""
    return resources.files(__name__).joinpath("fixtures", name)
