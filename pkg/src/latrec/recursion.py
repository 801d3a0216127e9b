"""Recursion operators: rank matrix, candidate construction, solving, verification.

The candidate is R = R0 + R1 where R0 is local (powers of D with
rank-matched coefficients built from the variables occurring in F) and R1
sums products G^(j) Delta^-1 (x) gamma^(k) of symmetries and covariants whose
ranks fit the rank matrix.  Unknown coefficients are fixed by the action
constraints R G^(j) = G^(j+s), supplemented by the operator identity
R'[F] + R o F' - F' o R = 0 wherever its conditions are decidable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .calculus import DDESystem, LogDensity, VectorExpression
from .conservation import covariant, find_densities, find_log_densities
from .errors import (EmptyCandidate, HierarchyBroken, NoSolution,
                     NotExactDifference, NotExactDivision, Underdetermined)
from .kernel import (Expression, LinearSystem, Solution,
                     collect_zero_conditions, linear_combination, solve_linear)
from .opalgebra import (Entry, Nonlocal, PseudoDifferenceOperator, ZeroVerdict,
                        apply, commutator_residual, is_zero, zero_conditions)
from .scaling import WeightAssignment, compute_weights, monomial_basis, rank_of
from .symmetry import Symmetry, find_symmetries, symmetry_ranks, verify_symmetry

log = logging.getLogger(__name__)

RankMatrix = Tuple[Tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class RecursionConfig:
    gap: int = 1
    pairs: int = 1
    window: Optional[Tuple[int, int]] = None  # shift range of the R0 coefficient pool
    powers: Optional[Tuple[int, int]] = None  # explicit D-power range for R0
    mode: str = "both"  # action | operator | both
    hierarchy_length: int = 3
    operator_conditions: bool = True

    def __post_init__(self):
        if self.gap < 1:
            raise ValueError("gap must be at least 1")
        if self.pairs < 1:
            raise ValueError("at least one symmetry pair is needed")
        if self.mode not in ("action", "operator", "both"):
            raise ValueError(f"unknown verification mode {self.mode!r}")


@dataclass(frozen=True)
class CandidateBundle:
    operator: PseudoDifferenceOperator
    parameters: Tuple[str, ...]
    provenance: Tuple[Tuple[str, int, int], ...]  # (parameter, symmetry level, covariant index)
    rank_matrix: RankMatrix


# --------------------------------------------------------------------------
# rank matrix


def rank_matrix(g_low: Symmetry, g_high: Symmetry, w: WeightAssignment) -> RankMatrix:
    lo = symmetry_ranks(g_low.g, g_low.level, w)
    hi = symmetry_ranks(g_high.g, g_high.level, w)
    return tuple(tuple(hi[i] - lo[j] for j in range(len(lo))) for i in range(len(hi)))


# --------------------------------------------------------------------------
# candidate construction


def _power_range(g_lo: Expression, g_hi: Expression) -> Optional[Tuple[int, int]]:
    """Shifts k for which D^k g_lo stays inside g_hi's shift extent, variable by variable."""
    overall = g_hi.shift_range()
    lo_k, hi_k = None, None
    for comp in g_lo.components():
        src = g_lo.shift_range(comp)
        tgt = g_hi.shift_range(comp) or overall
        a, b = tgt[0] - src[0], tgt[1] - src[1]
        lo_k = a if lo_k is None else max(lo_k, a)
        hi_k = b if hi_k is None else min(hi_k, b)
    if lo_k is None or lo_k > hi_k:
        return None
    return lo_k, hi_k


def _entry_powers(pairs: Sequence[Tuple[Symmetry, Symmetry]], i: int, j: int,
                  system: DDESystem, cfg: RecursionConfig) -> List[int]:
    if cfg.powers is not None:
        return list(range(cfg.powers[0], cfg.powers[1] + 1))
    ks = set()
    for g_lo, g_hi in pairs:
        if not g_lo.g[j] or not g_hi.g[i]:
            lo, hi = system.shift_span
            ks.update(range(lo, hi + 1))
            continue
        r = _power_range(g_lo.g[j], g_hi.g[i])
        if r is not None:
            ks.update(range(r[0], r[1] + 1))
    return sorted(ks)


def _coefficient_pool(system: DDESystem, cfg: RecursionConfig):
    if cfg.window is None:
        return list(system.rhs_variables)
    lo, hi = cfg.window
    return [(c, s) for c in range(system.N) for s in range(lo, hi + 1)]


def _proportional(a: Sequence[Expression], b: Sequence[Expression]) -> bool:
    ratio = None
    for x, y in zip(a, b):
        if bool(x) != bool(y):
            return False
        if not x:
            continue
        (mx, cx), (my, cy) = x.leading(), y.leading()
        if mx != my:
            return False
        r = Fraction(cx) / Fraction(cy)
        if ratio is not None and r != ratio:
            return False
        ratio = r
        if x != y.scale(r):
            return False
    return ratio is not None


def _left_factor_source(g: Symmetry, system: DDESystem) -> Tuple[Expression, ...]:
    """The flow F itself stands in for any symmetry proportional to it."""
    return system.rhs if _proportional(g.g, system.rhs) else g.g


def build_candidate(system: DDESystem, w: WeightAssignment,
                    pairs: Sequence[Tuple[Symmetry, Symmetry]],
                    covariants: Sequence[Sequence[Expression]],
                    rm: RankMatrix, cfg: RecursionConfig = RecursionConfig()) -> CandidateBundle:
    """Parameter-linear candidate operator with rank-uniform entries."""
    n = system.N
    pool = _coefficient_pool(system, cfg)
    names: List[str] = []

    def fresh() -> str:
        names.append(f"c{len(names) + 1}")
        return names[-1]

    locals_ = [[{} for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            target = rm[i][j]
            if target < 0:
                continue
            monos = monomial_basis(target, w, pool=pool)
            for k in _entry_powers(pairs, i, j, system, cfg):
                terms = [(fresh(), Expression.monomial(m)) for m in monos]
                if terms:
                    locals_[i][j][k] = linear_combination(terms)

    nonlocals = [[[] for _ in range(n)] for _ in range(n)]
    provenance = []
    sym_by_level = {g.level: g for pair in pairs for g in pair}
    for level in sorted(sym_by_level):
        g = sym_by_level[level]
        g = Symmetry(_left_factor_source(g, system), g.level)
        g_ranks = symmetry_ranks(g.g, g.level, w)
        for kidx, gamma in enumerate(covariants):
            fits = True
            for i in range(n):
                for j in range(n):
                    if g.g[i] and gamma[j]:
                        if g_ranks[i] + rank_of(gamma[j], w) != rm[i][j]:
                            fits = False
            if not fits or not any(g.g) or not any(gamma):
                continue
            p = fresh()
            provenance.append((p, level, kidx))
            for i in range(n):
                if not g.g[i]:
                    continue
                left = linear_combination([(p, g.g[i])])
                for j in range(n):
                    if gamma[j]:
                        nonlocals[i][j].append(Nonlocal(left, gamma[j]))
    if not names:
        raise EmptyCandidate("no candidate term has the required ranks")
    op = PseudoDifferenceOperator([[Entry(locals_[i][j], nonlocals[i][j]) for j in range(n)]
                                   for i in range(n)])
    return CandidateBundle(op, tuple(names), tuple(provenance), rm)


# --------------------------------------------------------------------------
# solving


def action_conditions(op: PseudoDifferenceOperator,
                      pairs: Sequence[Tuple[Sequence[Expression], Sequence[Expression]]]) -> LinearSystem:
    system = LinearSystem()
    for g_lo, g_hi in pairs:
        image = apply(op, tuple(g_lo))
        for a, b in zip(image, g_hi):
            system = system + collect_zero_conditions(a - Expression.lift(b))
    return system


def operator_conditions(op: PseudoDifferenceOperator, system: DDESystem):
    """(local, nonlocal) linear conditions from the defining-equation residual."""
    residual = commutator_residual(op, system)
    local, nonlocal_ = zero_conditions(residual)
    loc = LinearSystem()
    for c in local:
        loc = loc + collect_zero_conditions(c)
    nl = LinearSystem()
    for c in nonlocal_:
        nl = nl + collect_zero_conditions(c)
    return loc, nl


def solve_coefficients(bundle: CandidateBundle, pairs, system: DDESystem,
                       cfg: RecursionConfig = RecursionConfig()) -> Solution:
    """Exact values of the candidate's parameters.

    Operator-identity conditions are tried first in full, then local-only,
    then dropped, since the nonlocal grouping is only a sufficient test.
    """
    pairs = [(tuple(a.g if isinstance(a, Symmetry) else a), tuple(b.g if isinstance(b, Symmetry) else b))
             for a, b in pairs]
    if not pairs:
        raise ValueError("at least one symmetry pair is required")
    base = LinearSystem(action_conditions(bundle.operator, pairs).equations, bundle.parameters)
    attempts = [base]
    if cfg.operator_conditions:
        try:
            loc, nl = operator_conditions(bundle.operator, system)
            attempts = [base + loc + nl, base + loc, base]
        except (NotExactDivision, NotExactDifference, ValueError) as exc:
            log.debug("operator conditions unavailable: %s", exc)
    last_error = None
    for attempt in attempts:
        try:
            sol = solve_linear(attempt)
        except NoSolution as exc:
            last_error = exc
            continue
        if sol.free:
            raise Underdetermined(
                f"{len(sol.free)} coefficient(s) remain free: {', '.join(sol.free)}", sol.free)
        return sol
    raise NoSolution(f"no recursion operator of this shape ({last_error})")


def solve_candidate(bundle: CandidateBundle, pairs, system: DDESystem,
                    cfg: RecursionConfig = RecursionConfig()) -> PseudoDifferenceOperator:
    sol = solve_coefficients(bundle, pairs, system, cfg)
    return bundle.operator.substitute(sol.values)


# --------------------------------------------------------------------------
# verification and hierarchy


@dataclass
class ActionStep:
    step: int
    ok: bool
    error: str = ""


@dataclass
class VerificationReport:
    mode: str
    operator_verdict: Optional[ZeroVerdict] = None
    operator_note: str = ""
    action_steps: List[ActionStep] = field(default_factory=list)

    @property
    def action_passed(self) -> bool:
        return bool(self.action_steps) and all(s.ok for s in self.action_steps)

    @property
    def passed(self) -> bool:
        if self.mode == "operator":
            return self.operator_verdict is not None and self.operator_verdict.is_zero
        ok = self.action_passed
        if self.mode == "both":
            ok = ok and self.operator_verdict is not None and self.operator_verdict.kind in (
                ZeroVerdict.ZERO, ZeroVerdict.INCONCLUSIVE)
        return ok


def operator_verdict(r: PseudoDifferenceOperator, system: DDESystem) -> Tuple[ZeroVerdict, str]:
    try:
        return is_zero(commutator_residual(r, system)), ""
    except NotExactDivision as exc:
        return ZeroVerdict(ZeroVerdict.INCONCLUSIVE, None, str(exc)), str(exc)


def generate_hierarchy(r: PseudoDifferenceOperator, seed: Sequence[Expression], count: int,
                       system: DDESystem) -> List[VectorExpression]:
    """``count`` successive images of the seed, each checked to be a symmetry."""
    if count < 1:
        raise ValueError("count must be at least 1")
    out: List[VectorExpression] = []
    g = tuple(Expression.lift(x) for x in seed)
    for step in range(1, count + 1):
        try:
            g = apply(r, g)
        except NotExactDifference as exc:
            raise HierarchyBroken(f"step {step}: {exc}", out, step) from exc
        if not verify_symmetry(system, g):
            raise HierarchyBroken(f"step {step}: image is not a symmetry", out, step)
        out.append(g)
    return out


def verify(r: PseudoDifferenceOperator, system: DDESystem, seed: Sequence[Expression],
           cfg: RecursionConfig = RecursionConfig(), context=None) -> VerificationReport:
    report = VerificationReport(cfg.mode)
    if cfg.mode in ("operator", "both"):
        report.operator_verdict, report.operator_note = operator_verdict(r, system)
    if cfg.mode in ("action", "both"):
        g = tuple(Expression.lift(x) for x in seed)
        for step in range(1, cfg.hierarchy_length + 1):
            try:
                g = apply(r, g)
            except NotExactDifference as exc:
                report.action_steps.append(ActionStep(step, False, str(exc)))
                break
            ok = verify_symmetry(system, g) and any(g)
            report.action_steps.append(ActionStep(step, ok, "" if ok else "not a symmetry"))
            if not ok:
                break
    return report


def inverse_pair_check(r1: PseudoDifferenceOperator, r2: PseudoDifferenceOperator,
                       seeds: Sequence[Sequence[Expression]]) -> bool:
    """R1 R2 g = g and R2 R1 g = g for every seed, checked by action."""
    for idx, seed in enumerate(seeds):
        g = tuple(Expression.lift(x) for x in seed)
        try:
            a = apply(r1, apply(r2, g))
            b = apply(r2, apply(r1, g))
        except NotExactDifference as exc:
            log.info("seed %d: %s", idx, exc)
            return False
        if a != g or b != g:
            log.info("seed %d: composition is not the identity", idx)
            return False
    return True


# --------------------------------------------------------------------------
# end-to-end


@dataclass
class RecursionResult:
    operator: PseudoDifferenceOperator
    weights: WeightAssignment
    symmetries: List[Symmetry]
    covariants: List[Tuple[Expression, ...]]
    rank_matrix: RankMatrix
    bundle: CandidateBundle
    solution: Solution
    gap: int
    report: Optional[VerificationReport] = None


def gather_covariants(system: DDESystem, w: WeightAssignment, gap: int,
                      densities: Optional[Sequence[LogDensity]] = None) -> List[Tuple[Expression, ...]]:
    if densities is None:
        rhos = [p.rho for p in find_log_densities(system)]
        for rank in range(1, gap):
            rhos.extend(p.rho for p in find_densities(system, w, rank))
    else:
        rhos = list(densities)
    return [covariant(rho, system.N) for rho in rhos]


def _symmetry_for_level(level, given: Dict[int, Symmetry], system, w, window):
    if level in given:
        return given[level]
    found = find_symmetries(system, w, level, window)
    if not found:
        raise NoSolution(f"no symmetry at level {level}")
    return found[0]


def recursion_operator(system: DDESystem, weights: Optional[WeightAssignment] = None,
                       symmetries: Optional[Dict[int, Sequence[Expression]]] = None,
                       densities: Optional[Sequence[LogDensity]] = None,
                       cfg: RecursionConfig = RecursionConfig()) -> RecursionResult:
    """Search for an operator end to end, then verify it.  Retries with gap 2 when gap 1 fails and
    the supplied symmetries are spaced that way."""
    w = weights or compute_weights(system)
    given = {lvl: Symmetry(g, lvl) for lvl, g in (symmetries or {}).items()}
    gaps = [cfg.gap]
    if cfg.gap == 1 and len(given) >= 2:
        levels = sorted(given)
        if any(b - a == 2 for a, b in zip(levels, levels[1:])):
            gaps.append(2)
    last_exc = None
    for gap in gaps:
        try:
            return _run(system, w, given, densities, cfg, gap)
        except (NoSolution, EmptyCandidate, NotExactDifference) as exc:
            last_exc = exc
            log.info("gap %d failed: %s", gap, exc)
    raise last_exc


def _run(system, w, given, densities, cfg: RecursionConfig, gap: int) -> RecursionResult:
    base = min(given) if given else 1
    levels = [base + gap * t for t in range(cfg.pairs + 1)]
    syms = [_symmetry_for_level(lvl, given, system, w, None) for lvl in levels]
    pairs = list(zip(syms, syms[1:]))
    rm = rank_matrix(pairs[0][0], pairs[0][1], w)
    covs = gather_covariants(system, w, gap, densities)
    bundle = build_candidate(system, w, pairs, covs, rm, cfg)
    sol = solve_coefficients(bundle, pairs, system, cfg)
    op = bundle.operator.substitute(sol.values)
    vcfg = RecursionConfig(gap=gap, pairs=cfg.pairs, mode=cfg.mode,
                           hierarchy_length=cfg.hierarchy_length)
    report = verify(op, system, syms[0].g, vcfg)
    result = RecursionResult(op, w, syms, covs, rm, bundle, sol, gap, report)
    if not report.passed:
        raise NoSolution("solved operator failed verification")
    return result
