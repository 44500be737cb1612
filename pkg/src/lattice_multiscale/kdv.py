"""
KdV Hierarchy

Potential KdV flow K_2 = a D^3 phi + gamma (D phi)^2, the recursion operator

    L[f] = D^2 f + (4 gamma / 3a) D phi . f + (2 gamma / 3a) D^2 phi . Int f

and the higher flows K_j = b_j Int L^(j-1)[D^2 phi], all on level 1.
gamma defaults to -3/4, the DNLS value, for which L takes the familiar
form D^2 - (D phi / a) - (D^2 phi / 2a) Int.

H_j = D K_j are the same flows written for phi-derivative fields.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Mapping, Optional

from .coeff import RatFunc, Scalar, as_ratfunc, rational, render
from .diffalg import DiffPoly, LinDiffOp, frechet, integrate_xi, jet
from .errors import ZeroDispersion

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = rational(-3, 4)


def _check_dispersion(a: RatFunc) -> RatFunc:
    a = as_ratfunc(a)
    if not a:
        raise ZeroDispersion("Dispersion coefficient a must be nonzero")
    return a


def k2(a: Scalar, gamma: Scalar = DEFAULT_GAMMA) -> DiffPoly:
    """
    Potential KdV flow a D^3 phi + gamma (D phi)^2.

    Raises:
        ZeroDispersion: If a = 0
    """
    a = _check_dispersion(a)
    return jet(1, 3).scale(a) + (jet(1, 1) ** 2).scale(gamma)


def recursion_apply(f: DiffPoly, a: Scalar, gamma: Scalar = DEFAULT_GAMMA) -> DiffPoly:
    """
    Apply the recursion operator L to f.

    Raises:
        ZeroDispersion: If a = 0
        NotExact: If f has no exact antiderivative
    """
    a = _check_dispersion(a)
    if not f:
        return DiffPoly()
    gamma = as_ratfunc(gamma)
    multiplier = gamma * 4 / (3 * a)
    tail = gamma * 2 / (3 * a)
    return (
        f.derive_xi(2)
        + (jet(1, 1) * f).scale(multiplier)
        + (jet(1, 2) * integrate_xi(f)).scale(tail)
    )


@lru_cache(maxsize=None)
def _unit_flow(j: int, a: RatFunc, gamma: RatFunc) -> DiffPoly:
    density = jet(1, 2)
    for _ in range(j - 1):
        density = recursion_apply(density, a, gamma)
    result = integrate_xi(density)
    logger.debug(f"Unit flow K_{j} built with {len(result)} monomials")
    return result


def flow(j: int, b: Scalar, a: Scalar, gamma: Scalar = DEFAULT_GAMMA) -> DiffPoly:
    """
    Hierarchy flow K_j = b_j Int L^(j-1)[D^2 phi].

    Args:
        j: Slow-time index (>= 2)
        b: Free multiplier b_j (b_2 = a reproduces K_2)
        a: Dispersion coefficient of K_2
        gamma: Nonlinear coefficient of K_2

    Returns:
        Homogeneous polynomial of degree 2j whose linear term is b_j D^(2j-1) phi
    """
    if j < 2:
        raise ValueError(f"Flows start at j = 2, got {j}")
    b = as_ratfunc(b)
    a = _check_dispersion(a)
    if not b:
        return DiffPoly()
    return _unit_flow(j, a, as_ratfunc(gamma)).scale(b)


def h_flow(j: int, b: Scalar, a: Scalar, gamma: Scalar = DEFAULT_GAMMA) -> DiffPoly:
    """H_j = D K_j, the flow of the field D phi."""
    return flow(j, b, a, gamma).derive_xi()


def prepend_derivative(op: LinDiffOp) -> LinDiffOp:
    """D o op as an operator: (D c_k) D^k + c_k D^(k+1)."""
    out: Dict[int, DiffPoly] = {}
    for k, c in op.coefficients.items():
        for order, value in ((k, c.derive_xi()), (k + 1, c)):
            out[order] = out[order] + value if order in out else value
    return LinDiffOp(out)


def field_linearization(potential_op: LinDiffOp) -> LinDiffOp:
    """
    Linearization for derivative fields.

    If K' = sum c_k D^k (k >= 1) is the Frechet derivative of K along phi,
    the Frechet derivative of D K along D phi is D o sum c_k D^(k-1).
    """
    return prepend_derivative(potential_op.lowered())


def linearize_flow(
    j: int, b: Scalar, a: Scalar, gamma: Scalar = DEFAULT_GAMMA, picture: str = "potential"
) -> LinDiffOp:
    """
    Frechet derivative of a hierarchy flow at level 1.

    Args:
        picture: "potential" for K_j' acting on phi-jets, "field" for H_j'
    """
    potential = frechet(flow(j, b, a, gamma), 1)
    if picture == "potential":
        return potential
    if picture == "field":
        return field_linearization(potential)
    raise ValueError(f"Unknown picture: {picture}")


@dataclass
class FlowTable:
    """Flows K_m fixed by the reduction, with their multipliers b_m."""

    a: RatFunc
    gamma: RatFunc = DEFAULT_GAMMA
    coefficients: Dict[int, RatFunc] = field(default_factory=dict)

    def add(self, m: int, b: Scalar) -> DiffPoly:
        self.coefficients[m] = as_ratfunc(b)
        return self.flow(m)

    def flow(self, m: int) -> DiffPoly:
        if m not in self.coefficients:
            raise KeyError(f"Flow K_{m} has not been fixed")
        return flow(m, self.coefficients[m], self.a, self.gamma)

    def b(self, m: int) -> RatFunc:
        return self.coefficients[m]

    def times(self):
        return sorted(self.coefficients)

    def describe(self) -> Dict[str, str]:
        return {str(m): render(b) for m, b in sorted(self.coefficients.items())}


def build_hierarchy(
    a: Scalar, b: Optional[Mapping[int, Scalar]] = None, gamma: Scalar = DEFAULT_GAMMA
) -> FlowTable:
    """FlowTable with K_2 (b_2 = a) and any further multipliers given."""
    table = FlowTable(a=_check_dispersion(a), gamma=as_ratfunc(gamma))
    table.add(2, table.a)
    for m, value in sorted((b or {}).items()):
        if m != 2:
            table.add(m, value)
    return table
