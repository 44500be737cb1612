"""
Report models for the command line and the tool server.

JSON keys are fixed: model, order, c_sign, a, b, forcing, obstruction, verdict.
Coefficients are rendered as Q(h) text and monomials in the jet grammar, so
identical runs serialize to identical bytes.
"""

import logging
from typing import Dict, List, Optional

from pydantic import BaseModel

from .coeff import render
from .compat import ObstructionReport, VerdictResult
from .diffalg import render_monomial
from .pipeline import ReducedSystem

logger = logging.getLogger(__name__)


class ForcingEntry(BaseModel):
    monomial: str
    coeff: str


class ObstructionSummary(BaseModel):
    stage: str
    n_unknowns: int
    rank: int
    constraints: List[str]
    satisfied: bool


class Report(BaseModel):
    model: str
    order: int
    c_sign: int
    a: str
    b: Dict[str, str]
    forcing: List[ForcingEntry]
    obstruction: Optional[ObstructionSummary] = None
    verdict: Optional[str] = None


def _deepest_forcing(rs: ReducedSystem) -> List[ForcingEntry]:
    if not rs.forcing_t2:
        return []
    vector = rs.forcing_t2[max(rs.forcing_t2)]
    return [ForcingEntry(monomial=render_monomial(m), coeff=render(c)) for m, c in vector.items()]


def summarize(report: ObstructionReport) -> ObstructionSummary:
    return ObstructionSummary(
        stage=report.stage,
        n_unknowns=report.n_unknowns,
        rank=report.rank,
        constraints=report.render_constraints(),
        satisfied=report.satisfied,
    )


def build_report(rs: ReducedSystem, result: Optional[VerdictResult] = None) -> Report:
    """
    Assemble the JSON report of a reduction, optionally with its verdict.

    ``forcing`` lists the deepest forcing computed: f^(t2) at eps^7,
    g^(t2) at eps^9, nothing at eps^5. ``obstruction`` is the last stage of
    the verdict chain.
    """
    obstruction = None
    verdict = None
    if result is not None:
        verdict = result.verdict.value
        if result.last_report is not None:
            obstruction = summarize(result.last_report)
    return Report(
        model=rs.model,
        order=rs.max_order,
        c_sign=rs.params.c_sign,
        a=render(rs.a),
        b=rs.flows.describe(),
        forcing=_deepest_forcing(rs),
        obstruction=obstruction,
        verdict=verdict,
    )


def to_json(report: Report) -> str:
    return report.model_dump_json(indent=2)


def _render_stage(report: ObstructionReport) -> List[str]:
    lines = [
        f"{report.stage}: {report.n_unknowns} unknowns, {report.n_equations} equations, "
        f"rank {report.rank}",
        f"  conditions: {report.raw_conditions} raw, {report.independent_conditions} independent, "
        f"{report.free_forcing} of {report.n_forcing} forcing coordinates free",
    ]
    for text in report.render_conditions():
        lines.append(f"    {text}")
    if report.satisfied:
        lines.append("  satisfied at the model's forcing")
    else:
        lines.append("  violated at the model's forcing:")
        lines.extend(f"    {value}" for value in report.render_constraints() if value != "0")
    return lines


def render_text(rs: ReducedSystem, result: Optional[VerdictResult] = None) -> str:
    """Human-readable report in the coefficient and jet grammars."""
    c = rs.params.c_sign
    lines = [
        f"model: {rs.model} (sigma = {rs.params.sigma:+d}, c = {c:+d})",
        f"order: eps^{rs.max_order}",
        f"nu residual: {rs.spec.nu_residual_text()}",
        f"phi residual: {rs.spec.phi_residual_text()}",
        rs.eps2.render(),
        f"c^2 = {render(rs.dispersion.c_squared)}, c = {render(rs.c)}",
        f"a = {render(rs.a)}",
        f"gamma = {render(rs.gamma)}",
    ]
    for m in rs.flows.times():
        if m != 2:
            lines.append(f"b{m} = {render(rs.flows.b(m))}")
        lines.append(f"K_{m} = {rs.flow(m).render()}")

    for name, table in (("f^(t2)", rs.forcing_t2.get(1)), ("g^(t2)", rs.forcing_t2.get(2))):
        if table is None:
            continue
        lines.append(f"{name} ({table.nonzero_count} monomials):")
        lines.extend(f"  ({render(coef)})*{label}" for label, coef in _labelled(table))
    if 1 in rs.forcing_t3:
        lines.append(f"f^(t3) = {rs.forcing_t3[1].to_poly().render()}")

    if result is not None:
        for report in result.reports:
            lines.extend(_render_stage(report))
        lines.append(f"verdict: {result.verdict.value}")
    return "\n".join(lines)


def _labelled(vector):
    return [(render_monomial(m), c) for m, c in vector.items()]
