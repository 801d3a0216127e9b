"""Conserved densities, their fluxes, and covariants.

Sign convention: D_t rho + Delta J = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .calculus import (DDESystem, LogDensity, adjoint_frechet_apply,
                       antidifference, delta, euler_derivative, t_derivative)
from .kernel import (Expression, LinearSystem, collect_zero_conditions,
                     linear_combination, solve_linear)
from .errors import NoSolution
from .scaling import WeightAssignment, monomial_basis, rank_of


@dataclass(frozen=True)
class DensityFluxPair:
    rho: LogDensity
    flux: Expression
    rank: Fraction

    def residual(self, system: DDESystem) -> Expression:
        return t_derivative(self.rho, system) + delta(self.flux)

    def holds(self, system: DDESystem) -> bool:
        return not self.residual(system)


Covariant = Tuple[Expression, ...]


def default_density_window(rank, w: WeightAssignment) -> Tuple[int, int]:
    wmin = min(w.weights)
    max_degree = int(Fraction(rank) / wmin) if wmin > 0 else 1
    radius = max(1, max_degree - 1)
    return (-radius, radius)


def _normalize_log_density(rho: LogDensity) -> LogDensity:
    if rho.logs:
        return rho.scale(1 / rho.logs[0][1])
    _, c = rho.poly.leading()
    return rho.scale(1 / c)


def _exactness_conditions(images: Sequence[Tuple[str, Expression]], n: int) -> LinearSystem:
    """sum(c * image) is an exact difference: every Euler derivative and the constant vanish."""
    params = [p for p, _ in images]
    system = LinearSystem((), params)
    for j in range(n):
        euler_j = linear_combination((p, euler_derivative(img, j)) for p, img in images)
        system = system + collect_zero_conditions(euler_j)
    const = linear_combination((p, Expression.constant(img.constant_term())) for p, img in images)
    return system + collect_zero_conditions(const)


def _solution_vectors(images, n):
    try:
        sol = solve_linear(_exactness_conditions(images, n))
    except NoSolution:
        return []
    return sol.basis()


def find_densities(system: DDESystem, w: WeightAssignment, rank,
                   window: Optional[Tuple[int, int]] = None) -> List[DensityFluxPair]:
    """Polynomial densities of the given rank (rank 0 yields the logarithmic ones).

    The candidate is a combination of shift-class representatives, so the
    answer is free of exact differences by construction.
    """
    rank = Fraction(rank)
    if rank == 0:
        return find_log_densities(system)
    if rank < 0:
        return []
    if window is None:
        window = default_density_window(rank, w)
    basis = [m for m in monomial_basis(rank, w, window, mod_shift=True) if m]
    params = [f"c{i + 1}" for i in range(len(basis))]
    images = [(p, t_derivative(Expression.monomial(m), system)) for p, m in zip(params, basis)]
    pairs = []
    for vec in _solution_vectors(images, system.N):
        rho = Expression({m: vec[p] for p, m in zip(params, basis)})
        if not rho:
            continue
        rho = rho.monic()
        flux = -antidifference(t_derivative(rho, system))
        pair = DensityFluxPair(LogDensity(rho), flux, rank)
        assert pair.holds(system)
        pairs.append(pair)
    return pairs


def find_log_densities(system: DDESystem) -> List[DensityFluxPair]:
    """Densities sum(a_i ln (u_i)_n) that are conserved."""
    params = [f"a{i + 1}" for i in range(system.N)]
    images = [(p, t_derivative(LogDensity(logs=((i, 1),)), system)) for i, p in enumerate(params)]
    pairs = []
    for vec in _solution_vectors(images, system.N):
        rho = LogDensity(logs=tuple((i, vec[p]) for i, p in enumerate(params)))
        if not rho.logs:
            continue
        rho = _normalize_log_density(rho)
        flux = -antidifference(t_derivative(rho, system))
        pair = DensityFluxPair(rho, flux, Fraction(0))
        assert pair.holds(system)
        pairs.append(pair)
    return pairs


def covariant(rho: LogDensity, n: int) -> Covariant:
    """Variational gradient of rho: sum_k D^-k d rho / d (u_j)_{n+k}."""
    out = []
    for j in range(n):
        g = euler_derivative(rho.poly, j)
        for c, a in rho.logs:
            if c == j:
                g = g + (Expression.var(j) ** -1).scale(a)
        out.append(g)
    return tuple(out)


def covariant_residual(system: DDESystem, gamma: Sequence[Expression]) -> Tuple[Expression, ...]:
    """D_t gamma + F'^dagger(gamma); zero for adjoint symmetries."""
    adj = adjoint_frechet_apply(system, gamma)
    return tuple(t_derivative(g, system) + a for g, a in zip(gamma, adj))


def covariant_rank(gamma: Sequence[Expression], w: WeightAssignment) -> Tuple[Optional[Fraction], ...]:
    return tuple(rank_of(g, w) if g else None for g in gamma)
