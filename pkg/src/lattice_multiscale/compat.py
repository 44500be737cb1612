"""
Integrability Compatibility Conditions

At eps^7 the forcing f^(t2) of the phi^(2) evolution must admit an f^(t3)
with

    [d_t3 - K_3'] f^(t2) = [d_t2 - K_2'] f^(t3)

and at eps^9 the same holds in the phi-derivative picture for g^(t2),
g^(t3) with H_m' in place of K_m'. Both sides are expanded in a graded
basis; the unknown is the coordinate vector of f^(t3) (g^(t3)).

The right-hand side is carried once per forcing coordinate (symbolically)
plus once for the model's actual forcing, so the same elimination yields
the integrability conditions as linear forms in the forcing coordinates and
their values at the model.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence, Tuple

from .coeff import RatFunc, SignParams, render
from .diffalg import (
    DiffPoly,
    LinDiffOp,
    evolutionary_derive,
    frechet,
    jet,
    monomial_sort_key,
    render_monomial,
)
from .errors import Eps7Unsatisfied, StageMissing
from .graded import CoordVector, GradedBasis, basis, coords, space_system
from .kdv import FlowTable, field_linearization
from .linsolve import Constraint, LinSystem, rank_of_rows, solve
from .sparse import Monomial

if TYPE_CHECKING:
    from .pipeline import ReducedSystem

logger = logging.getLogger(__name__)

EPS7 = "eps7"
EPS9 = "eps9"
ACTUAL = "actual"


class Verdict(str, Enum):
    INTEGRABLE_CONSISTENT = "INTEGRABLE_CONSISTENT"
    OBSTRUCTED = "OBSTRUCTED"


@dataclass
class ObstructionReport:
    """
    Outcome of one compatibility stage.

    Attributes:
        model: Model name
        stage: "eps7" or "eps9"
        n_unknowns: Size of the f^(t3)/g^(t3) ansatz
        n_equations: Number of rows (dimension of the target graded space)
        rank: Rank of the coefficient matrix
        forcing_labels: Forcing coordinates the conditions are expressed in
        conditions: Symbolic conditions, one linear form per inconsistent row
        independent_conditions: Rank of the symbolic conditions
        constraints: Conditions evaluated at the model's forcing
        satisfied: True iff every evaluated constraint is zero
        resolved: f^(t3)/g^(t3) coordinates when satisfied
        system: The linear system the stage solved
    """

    model: str
    stage: str
    n_unknowns: int
    n_equations: int
    rank: int
    forcing_labels: Tuple[str, ...]
    conditions: Tuple[Constraint, ...]
    independent_conditions: int
    constraints: Tuple[RatFunc, ...]
    satisfied: bool
    resolved: Optional[CoordVector] = None
    system: Optional[LinSystem] = field(default=None, repr=False, compare=False)

    @property
    def raw_conditions(self) -> int:
        return len(self.conditions)

    @property
    def n_forcing(self) -> int:
        return len(self.forcing_labels)

    @property
    def free_forcing(self) -> int:
        """Forcing coordinates left free by the symbolic conditions."""
        return self.n_forcing - self.independent_conditions

    def render_conditions(self) -> List[str]:
        return [
            f"{Constraint(con.row_label, con.form[:-1]).render(self.forcing_labels)} = 0"
            for con in self.conditions
        ]

    def render_constraints(self) -> List[str]:
        return [render(value) for value in self.constraints]


@dataclass
class VerdictResult:
    """Verdict with the reduction and the chain of stage reports behind it."""

    model: str
    verdict: Verdict
    reduced: "ReducedSystem"
    reports: List[ObstructionReport] = field(default_factory=list)

    @property
    def last_report(self) -> Optional[ObstructionReport]:
        return self.reports[-1] if self.reports else None


def time_operator(flows: Callable[[int], Optional[DiffPoly]], linearization: LinDiffOp):
    """p -> d_t p - L p, with d_t acting through the per-level flows."""

    def apply(p: DiffPoly) -> DiffPoly:
        levels = p.levels()
        table = {level: flows(level) for level in levels}
        missing = [level for level, value in table.items() if value is None]
        if missing:
            raise StageMissing(f"No slow-time flow for levels {missing}")
        return evolutionary_derive(p, table) - linearization.apply(p)

    return apply


def forcing_monomials(forcing: DiffPoly, degree: int, level: int) -> Tuple[Monomial, ...]:
    """Nonlinear basis of P_degree^(level) together with the support of ``forcing``."""
    found = set(basis(degree, level, nonlinear=True).monomials)
    found.update(forcing.monomials())
    return tuple(sorted(found, key=monomial_sort_key, reverse=True))


def _ansatz(degree: int, level: int, include_linear: bool) -> GradedBasis:
    return basis(degree, level, nonlinear=not include_linear)


def compatibility(
    model: str,
    stage: str,
    ansatz: GradedBasis,
    rows: GradedBasis,
    left: Callable[[DiffPoly], DiffPoly],
    right: Callable[[DiffPoly], DiffPoly],
    forcing: DiffPoly,
    monomials: Sequence[Monomial],
) -> ObstructionReport:
    """
    Solve left(unknown) = right(forcing) for the unknown over ``ansatz``.

    Args:
        model: Model name for the report
        stage: Stage tag
        ansatz: Basis of the unknown forcing
        rows: Basis in which both sides are expanded
        left: Operator acting on the unknown
        right: Operator acting on the known forcing
        forcing: The model's actual forcing
        monomials: Forcing coordinates used for the symbolic conditions

    Returns:
        ObstructionReport with symbolic and evaluated conditions
    """
    images = [left(p) for p in ansatz.polys()]
    sources = [right(DiffPoly.from_monomial(m)) for m in monomials] + [right(forcing)]
    columns = [coords(p, rows).entries for p in sources]
    rhs = [tuple(col[i] for col in columns) for i in range(len(rows))]
    labels = tuple(render_monomial(m) for m in monomials)

    system = space_system(images, rows, rhs, ansatz.labels(), labels + (ACTUAL,))
    solution = solve(system)

    forms = [con.form[:-1] for con in solution.constraints]
    independent = rank_of_rows(forms)
    evaluated = tuple(con.form[-1] for con in solution.constraints)
    satisfied = not any(evaluated)
    resolved = None
    if satisfied:
        resolved = CoordVector(ansatz, solution.particular_column(len(labels)))

    logger.info(
        f"{model} {stage}: {system.n_rows}x{system.n_cols} system, rank {solution.rank}, "
        f"{len(solution.constraints)} conditions ({independent} independent), "
        f"{'satisfied' if satisfied else 'violated'}"
    )
    return ObstructionReport(
        model=model,
        stage=stage,
        n_unknowns=len(ansatz),
        n_equations=len(rows),
        rank=solution.rank,
        forcing_labels=labels,
        conditions=solution.constraints,
        independent_conditions=independent,
        constraints=evaluated,
        satisfied=satisfied,
        resolved=resolved,
        system=system,
    )


def solve_eps7_forcing(
    model: str, forcing: DiffPoly, flows: FlowTable, include_linear: bool = False
) -> ObstructionReport:
    """
    eps^7 condition for a given f^(t2) in P_6^(1).

    Args:
        model: Model name for the report
        forcing: f^(t2)
        flows: Hierarchy holding K_2 and K_3
        include_linear: Let the f^(t3) ansatz include the linear monomial
    """
    k2_flow, k3_flow = flows.flow(2), flows.flow(3)
    left = time_operator(lambda level: k2_flow if level == 1 else None, frechet(k2_flow, 1))
    right = time_operator(lambda level: k3_flow if level == 1 else None, frechet(k3_flow, 1))
    return compatibility(
        model,
        EPS7,
        _ansatz(8, 1, include_linear),
        basis(11, 1),
        left,
        right,
        forcing,
        forcing_monomials(forcing, 6, 1),
    )


def check_eps7(
    rs: "ReducedSystem", include_linear: bool = False, forcing: Optional[DiffPoly] = None
) -> ObstructionReport:
    """
    eps^7 compatibility of a reduced system.

    Args:
        rs: ReducedSystem run to eps^7 or deeper
        include_linear: Let the f^(t3) ansatz include the linear monomial
        forcing: Replacement for the model's f^(t2) (e.g. a rescaled or zero forcing)

    Raises:
        StageMissing: If the reduction stopped before eps^7
    """
    if forcing is None:
        forcing = rs.forcing(1, 2)
    return solve_eps7_forcing(rs.model, forcing, rs.flows, include_linear)


def _level_two_flow(rs: "ReducedSystem", m: int, f_m: DiffPoly) -> DiffPoly:
    return frechet(rs.flow(m), 1).apply(jet(2, 0)) + f_m


def check_eps9(
    rs: "ReducedSystem",
    eps7: Optional[ObstructionReport] = None,
    include_linear: bool = False,
    forcing: Optional[DiffPoly] = None,
) -> ObstructionReport:
    """
    eps^9 compatibility [d_t3 - H_3'] g^(t2) = [d_t2 - H_2'] g^(t3).

    d_tm acts on phi^(1) by K_m and on phi^(2) by K_m' phi^(2) + f^(tm),
    with f^(t2) from the reduction and f^(t3) from the eps^7 stage.

    Args:
        rs: ReducedSystem run to eps^9
        eps7: Report of the eps^7 stage (recomputed when omitted)
        include_linear: Let the g^(t3) ansatz include the linear monomials
        forcing: Replacement for the model's g^(t2)

    Raises:
        Eps7Unsatisfied: If the eps^7 stage has no solution
        StageMissing: If the reduction stopped before eps^9
    """
    if eps7 is None:
        eps7 = check_eps7(rs)
    if not eps7.satisfied:
        raise Eps7Unsatisfied(f"{rs.model}: eps^7 compatibility fails, eps^9 is undefined")
    if forcing is None:
        forcing = rs.forcing(2, 2)

    f2 = rs.forcing(1, 2)
    f3 = eps7.resolved.to_poly()
    flows = {}
    for m, f_m in ((2, f2), (3, f3)):
        flows[m] = {1: rs.flow(m), 2: _level_two_flow(rs, m, f_m)}

    left = time_operator(flows[2].get, field_linearization(frechet(rs.flow(2), 1)))
    right = time_operator(flows[3].get, field_linearization(frechet(rs.flow(3), 1)))
    return compatibility(
        rs.model,
        EPS9,
        _ansatz(11, 2, include_linear),
        basis(14, 2),
        left,
        right,
        forcing,
        forcing_monomials(forcing, 9, 2),
    )


def verdict(
    model: str,
    max_order: int = 9,
    params: Optional[SignParams] = None,
    include_linear: bool = False,
) -> VerdictResult:
    """
    Reduce a model and run the compatibility chain up to max_order.

    OBSTRUCTED means a necessary condition for integrability fails; the
    opposite outcome only records consistency up to the order reached.

    Example:
        >>> verdict("dnls").verdict
        <Verdict.OBSTRUCTED: 'OBSTRUCTED'>
    """
    from .pipeline import reduce

    rs = reduce(model, max_order, params, include_linear=include_linear)
    reports: List[ObstructionReport] = []
    if max_order >= 7:
        reports.append(check_eps7(rs, include_linear))
    if max_order >= 9 and reports[-1].satisfied:
        reports.append(check_eps9(rs, reports[-1], include_linear))

    outcome = Verdict.INTEGRABLE_CONSISTENT
    if any(not report.satisfied for report in reports):
        outcome = Verdict.OBSTRUCTED
    logger.info(f"{rs.model} to eps^{max_order}: {outcome.value}")
    return VerdictResult(model=rs.model, verdict=outcome, reduced=rs, reports=reports)
