"""
Multiscale Reduction Driver

Expands the Madelung residuals of a lattice model in epsilon and solves
them order by order:

- even orders 2k (phase residual) eliminate the amplitude nu^(k);
- order 3 fixes the linear wave speed c and the frame xi = kappa - c t_1;
- odd orders 2k+1 (amplitude residual) remove secular terms, fixing the
  hierarchy flow of phi^(1) and the t_2 evolution of phi^(k-1).

Slow-time derivatives that are still unknown when an order is processed
are carried as placeholder jets (see ``diffalg.placeholder``) and resolved
by the secularity condition of the next odd order.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Set, Tuple

from .coeff import RatFunc, SignParams, rational, render
from .diffalg import (
    DiffPoly,
    JetVar,
    evolutionary_derive,
    frechet,
    integrate_xi,
    jet,
    placeholder,
    render_monomial,
)
from .errors import (
    EngineError,
    Eps7Unsatisfied,
    ImaginarySpeed,
    NotInSpace,
    StageMissing,
    UnremovableSecularity,
    ZeroDispersion,
)
from .graded import CoordVector, basis, coords
from .kdv import FlowTable
from .models import ModelSpec, build_residuals, madelung
from .series import NU, PHI, ExtPoly, ExtVar, substitute_field
from .sparse import sum_polys

logger = logging.getLogger(__name__)

SUPPORTED_ORDERS = (5, 7, 9)


@dataclass(frozen=True)
class Eps2Relation:
    """nu^(1) = coefficient * d_t1 phi^(1), read off the phase residual at eps^2."""

    level: int
    coefficient: RatFunc

    def render(self) -> str:
        c = self.coefficient
        if c == 1:
            factor = ""
        elif c == -1:
            factor = "-"
        else:
            factor = f"({render(c)})*"
        return f"nu^({self.level}) = {factor}Dt1 phi^({self.level})"


@dataclass(frozen=True)
class Dispersion:
    """Linear wave operator A d_t1^2 + B D^2 on phi^(1) and its speed."""

    wave_time: RatFunc
    wave_space: RatFunc
    c_squared: RatFunc
    c: RatFunc


@dataclass
class StageRecord:
    """What one secular (odd) order fixed."""

    order: int
    secular_coefficient: RatFunc
    resolved: Dict[str, DiffPoly] = field(default_factory=dict)
    multipliers: Dict[int, RatFunc] = field(default_factory=dict)
    pre_absorption: Optional[DiffPoly] = None
    forcing: Optional[CoordVector] = None


@dataclass
class ReducedSystem:
    """
    Output of the reduction of one lattice model.

    forcing_t2[1] is f^(t2) over P_6^(1), forcing_t2[2] is g^(t2) over
    P_9^(2); forcing_t3[1] is f^(t3) over P_8^(1) once the order-7
    compatibility condition has been solved.
    """

    model: str
    params: SignParams
    spec: ModelSpec
    max_order: int
    c: RatFunc
    a: RatFunc
    gamma: RatFunc
    flows: FlowTable
    eps2: Eps2Relation
    dispersion: Dispersion
    forcing_t2: Dict[int, CoordVector] = field(default_factory=dict)
    forcing_t3: Dict[int, CoordVector] = field(default_factory=dict)
    stages: Dict[int, StageRecord] = field(default_factory=dict)
    amplitudes: Dict[int, DiffPoly] = field(default_factory=dict)

    def flow(self, m: int) -> DiffPoly:
        return self.flows.flow(m)

    def forcing(self, level: int, time: int = 2) -> DiffPoly:
        if time not in (2, 3):
            raise ValueError(f"Forcing is defined for t_2 and t_3, got t_{time}")
        table = self.forcing_t2 if time == 2 else self.forcing_t3
        if level not in table:
            raise StageMissing(
                f"Forcing of level {level} for t_{time} needs a deeper reduction "
                f"(ran to eps^{self.max_order})"
            )
        return table[level].to_poly()

    def phi2_flow(self, m: int) -> DiffPoly:
        """d_tm phi^(2) = K_m' phi^(2) + f^(tm)."""
        return frechet(self.flow(m), 1).apply(jet(2, 0)) + self.forcing(1, m)


def _placeholder_name(m: int, level: int) -> str:
    return f"Dt{m} phi^({level})"


class MultiscaleReducer:
    """
    Order-by-order solver for one model.

    Holds the amplitudes nu^(k) as jet polynomials and the slow-time flows
    fixed so far; ``run`` drives the stages and returns a ReducedSystem.
    """

    def __init__(
        self,
        spec: ModelSpec,
        params: SignParams,
        max_order: int = 9,
        include_linear: bool = False,
    ):
        if max_order not in SUPPORTED_ORDERS:
            raise ValueError(f"max_order must be one of {SUPPORTED_ORDERS}, got {max_order}")
        self.spec = spec
        self.params = params
        self.max_order = max_order
        self.include_linear = include_linear
        self.c: Optional[RatFunc] = None
        self.amplitudes: Dict[int, DiffPoly] = {}
        self.time_flows: Dict[int, Dict[int, DiffPoly]] = {}
        self.hierarchy: Optional[FlowTable] = None
        self.stages: Dict[int, StageRecord] = {}
        self.forcing_t2: Dict[int, CoordVector] = {}
        self.forcing_t3: Dict[int, CoordVector] = {}

    # Conversion from series variables to frame jets

    def _flow_or_placeholder(self, m: int, level: int) -> DiffPoly:
        value = self.time_flows.get(m, {}).get(level)
        if value is None:
            return DiffPoly.var(placeholder(m, level))
        return value

    def _time_derivative(self, p: DiffPoly, m: int) -> DiffPoly:
        if m == 1:
            return p.derive_xi().scale(-self.c)
        flows = {level: self._flow_or_placeholder(m, level) for level in p.levels()}
        return evolutionary_derive(p, flows)

    def _var_to_jets(self, v: ExtVar) -> DiffPoly:
        if v.kind == PHI:
            result = jet(v.level, v.kappa)
        else:
            if v.level not in self.amplitudes:
                raise StageMissing(f"nu^({v.level}) is needed before it has been eliminated")
            result = self.amplitudes[v.level].derive_xi(v.kappa)
        for m, d in v.times:
            for _ in range(d):
                result = self._time_derivative(result, m)
        return result

    def to_jets(self, p: ExtPoly) -> DiffPoly:
        """
        Rewrite a series coefficient in the moving frame.

        D = zeta d/dkappa becomes zeta d/dxi; the zeta powers pair up
        (every monomial carries an even number of D's) into powers of zeta^2.
        """
        cache: Dict[ExtVar, DiffPoly] = {}
        contributions = []
        for m, c in p.items():
            kappa_total = sum(v.kappa * e for v, e in m)
            if kappa_total % 2:
                raise UnremovableSecularity(
                    f"Monomial with an odd number of slow-space derivatives: "
                    f"{' * '.join(v.render() for v, _ in m)}"
                )
            term = DiffPoly.constant(c * self.spec.zeta_sq ** (kappa_total // 2))
            for v, e in m:
                if v not in cache:
                    cache[v] = self._var_to_jets(v)
                term = term * cache[v] ** e
            contributions.append(term)
        return sum_polys(contributions, DiffPoly)

    def _assign(self, m: int, level: int, value: DiffPoly) -> None:
        """Fix d_tm phi^(level) and substitute it into every stored amplitude."""
        self.time_flows.setdefault(m, {})[level] = value
        key = (placeholder(m, level).field, level)
        self.amplitudes = {j: p.substitute({key: value}) for j, p in self.amplitudes.items()}
        logger.debug(f"Fixed {_placeholder_name(m, level)} ({len(value)} monomials)")

    # Stages

    def eps2_stage(self, expr: ExtPoly) -> Tuple[ExtPoly, Eps2Relation]:
        """Solve the eps^2 phase residual for nu^(1)."""
        value = _solve_linear_amplitude(expr, 1)
        driver = ExtVar(PHI, 1, 0, ((1, 1),))
        coefficient = value.coefficient(((driver, 1),))
        if value != ExtPoly.var(driver, coefficient):
            raise UnremovableSecularity(f"Unexpected eps^2 relation: nu^(1) = {value.render()}")
        return value, Eps2Relation(1, coefficient)

    def amplitude_stage(self, k: int, expr: ExtPoly) -> DiffPoly:
        """Solve the eps^(2k) phase residual for nu^(k) in the frame."""
        target = ((ExtVar(NU, k), 1),)
        m_k = expr.coefficient(target)
        rest = expr - ExtPoly.from_monomial(target, m_k)
        self._check_amplitude_rest(k, m_k, rest)
        value = self.to_jets(rest).scale(-1 / m_k)
        logger.info(
            f"{self.spec.name}: eps^{2 * k} gives nu^({k}) with {len(value)} monomials"
        )
        return value

    @staticmethod
    def _check_amplitude_rest(k: int, m_k: RatFunc, rest: ExtPoly) -> None:
        if not m_k:
            raise UnremovableSecularity(f"nu^({k}) does not enter the eps^{2 * k} phase residual")
        for v in rest.variables():
            if v.kind == NU and v.level >= k:
                raise UnremovableSecularity(
                    f"nu^({k}) enters the eps^{2 * k} phase residual through {v.render()}"
                )

    def secular_stage(self, order: int, expr: ExtPoly) -> StageRecord:
        """
        Remove secular terms at an odd order 2k+1 (k = 2, 3, 4).

        The residual reads kappa * D(d_t2 phi^(k-1) + d_tk phi^(1)) + rest;
        rest must be free of phi^(k) (the frame condition on the newest
        phase) and determines both slow-time derivatives.
        """
        k = (order - 1) // 2
        residual = self.to_jets(expr)
        expected = {(2, k - 1), (k, 1)}
        kappa, rest = _split_placeholders(residual, expected, order)
        for v in rest.variables():
            if v.level >= k:
                raise UnremovableSecularity(
                    f"eps^{order}: source term on phi^({v.level}) survives ({v.render()})"
                )
        record = StageRecord(order=order, secular_coefficient=kappa)
        logger.info(f"{self.spec.name}: eps^{order} secular coefficient {render(kappa)}")

        if k == 2:
            self._potential_kdv(rest, kappa, record)
        elif k == 3:
            self._second_order_forcing(rest, kappa, record)
        else:
            self._third_order_forcing(rest, kappa, record)
        self.stages[order] = record
        return record

    def _potential_kdv(self, rest: DiffPoly, kappa: RatFunc, record: StageRecord) -> None:
        u = integrate_xi(rest).scale(-1 / kappa)
        a = u.jet_coefficient((JetVar(1, 3), 1))
        gamma = u.jet_coefficient((JetVar(1, 1), 2))
        if not a:
            raise ZeroDispersion(f"{self.spec.name}: eps^5 flow has no dispersive term")
        self.hierarchy = FlowTable(a=a, gamma=gamma)
        k2_flow = self.hierarchy.add(2, a)
        if k2_flow != u:
            raise UnremovableSecularity(
                f"eps^5 flow {u.render()} is not the potential KdV flow {k2_flow.render()}"
            )
        self._assign(2, 1, u)
        record.resolved[_placeholder_name(2, 1)] = u
        record.multipliers[2] = a
        logger.info(f"{self.spec.name}: a = {render(a)}, nonlinear coefficient {render(gamma)}")

    def _second_order_forcing(self, rest: DiffPoly, kappa: RatFunc, record: StageRecord) -> None:
        total = integrate_xi(rest).scale(-1 / kappa)
        k2_linear = frechet(self.hierarchy.flow(2), 1).apply(jet(2, 0))
        pre = total - k2_linear
        if pre.max_level() > 1 or pre.placeholders():
            raise UnremovableSecularity(
                f"eps^7: right-hand side depends on phi^(2) beyond K_2' ({pre.render()})"
            )
        b3 = pre.jet_coefficient((JetVar(1, 5), 1))
        k3_flow = self.hierarchy.add(3, b3)
        forcing = pre - k3_flow
        vector = self._forcing_vector(forcing, 6, 1, "f^(t2)")
        self.forcing_t2[1] = vector

        self._assign(3, 1, k3_flow)
        self._assign(2, 2, k2_linear + forcing)
        record.pre_absorption = pre
        record.forcing = vector
        record.multipliers[3] = b3
        record.resolved[_placeholder_name(3, 1)] = k3_flow
        record.resolved[_placeholder_name(2, 2)] = k2_linear + forcing
        logger.info(
            f"{self.spec.name}: b3 = {render(b3)}, f^(t2) has {vector.nonzero_count} monomials"
        )

        if self.max_order >= 9:
            from .compat import solve_eps7_forcing

            report = solve_eps7_forcing(
                self.spec.name, forcing, self.hierarchy, include_linear=self.include_linear
            )
            if not report.satisfied:
                raise Eps7Unsatisfied(
                    f"{self.spec.name}: order-7 compatibility fails with "
                    f"{report.raw_conditions} conditions"
                )
            f3 = report.resolved.to_poly()
            self.forcing_t3[1] = coords(f3, basis(8, 1))
            self._assign(3, 2, frechet(k3_flow, 1).apply(jet(2, 0)) + f3)

    def _third_order_forcing(self, rest: DiffPoly, kappa: RatFunc, record: StageRecord) -> None:
        # no integration: the source is D(d_t2 phi^(3) + d_t4 phi^(1))
        total = rest.scale(-1 / kappa)
        k2_linear = frechet(self.hierarchy.flow(2), 1).apply(jet(3, 0)).derive_xi()
        pre = total - k2_linear
        if pre.max_level() > 2 or pre.placeholders():
            raise UnremovableSecularity(
                f"eps^9: right-hand side depends on phi^(3) beyond H_2' ({pre.render()})"
            )
        b4 = pre.jet_coefficient((JetVar(1, 8), 1))
        k4_flow = self.hierarchy.add(4, b4)
        forcing = pre - k4_flow.derive_xi()
        vector = self._forcing_vector(forcing, 9, 2, "g^(t2)")
        self.forcing_t2[2] = vector

        self._assign(4, 1, k4_flow)
        record.pre_absorption = pre
        record.forcing = vector
        record.multipliers[4] = b4
        record.resolved[_placeholder_name(4, 1)] = k4_flow
        logger.info(
            f"{self.spec.name}: b4 = {render(b4)}, g^(t2) has {vector.nonzero_count} monomials"
        )

    def _forcing_vector(self, forcing: DiffPoly, n: int, r: int, name: str) -> CoordVector:
        try:
            return coords(forcing, basis(n, r))
        except NotInSpace as e:
            raise UnremovableSecularity(f"{name} is not in P_{n}^({r}): {e}") from e

    # Driver

    def run(self) -> ReducedSystem:
        order = self.max_order
        r_nu, r_phi = build_residuals(self.spec, order)
        _check_parity(r_nu, r_phi)

        nu1, eps2 = self.eps2_stage(r_phi.coefficient(2))
        dispersion = dispersion_stage(r_nu.coefficient(3), nu1, self.spec, self.params)
        self.c = dispersion.c
        self.amplitudes[1] = self.to_jets(nu1)
        if self.to_jets(r_nu.coefficient(3)):
            raise UnremovableSecularity("eps^3 residual does not vanish in the moving frame")

        k = 2
        while 2 * k + 1 <= order:
            self.amplitudes[k] = self.amplitude_stage(k, r_phi.coefficient(2 * k))
            self.secular_stage(2 * k + 1, r_nu.coefficient(2 * k + 1))
            k += 1

        return ReducedSystem(
            model=self.spec.name,
            params=self.params,
            spec=self.spec,
            max_order=order,
            c=self.c,
            a=self.hierarchy.a,
            gamma=self.hierarchy.gamma,
            flows=self.hierarchy,
            eps2=eps2,
            dispersion=dispersion,
            forcing_t2=dict(self.forcing_t2),
            forcing_t3=dict(self.forcing_t3),
            stages=dict(self.stages),
            amplitudes=dict(self.amplitudes),
        )


def _solve_linear_amplitude(expr: ExtPoly, k: int) -> ExtPoly:
    target = ((ExtVar(NU, k), 1),)
    m_k = expr.coefficient(target)
    rest = expr - ExtPoly.from_monomial(target, m_k)
    MultiscaleReducer._check_amplitude_rest(k, m_k, rest)
    return rest.scale(-1 / m_k)


def _split_placeholders(
    residual: DiffPoly, expected: Set[Tuple[int, int]], order: int
) -> Tuple[RatFunc, DiffPoly]:
    """Separate kappa * D(placeholders) from the rest of an odd-order residual."""
    found: Dict[Tuple[int, int], RatFunc] = {}
    rest = {}
    for m, c in residual.items():
        if not any(v.is_placeholder for v, _ in m):
            rest[m] = c
            continue
        var, exponent = m[0]
        if len(m) != 1 or exponent != 1 or var.order != 1:
            raise UnremovableSecularity(
                f"eps^{order}: undetermined slow-time derivative enters as {render_monomial(m)}"
            )
        key = (var.slow_time, var.level)
        if key not in expected:
            raise UnremovableSecularity(f"eps^{order}: unexpected unknown {var.render()}")
        found[key] = c

    if set(found) != expected:
        missing = sorted(expected - set(found))
        raise UnremovableSecularity(f"eps^{order}: secular terms missing for {missing}")
    values = set(found.values())
    if len(values) != 1:
        raise UnremovableSecularity(
            f"eps^{order}: secular coefficients differ: {[render(v) for v in values]}"
        )
    return values.pop(), DiffPoly(rest)


def _check_parity(r_nu, r_phi) -> None:
    for power in r_nu.powers():
        if power % 2 == 0:
            raise UnremovableSecularity(f"Amplitude residual has an even-order term at eps^{power}")
    for power in r_phi.powers():
        if power % 2:
            raise UnremovableSecularity(f"Phase residual has an odd-order term at eps^{power}")
    if 0 in r_phi.powers():
        raise UnremovableSecularity("Phase residual does not vanish on the background")


def dispersion_stage(
    expr3: ExtPoly, nu1: ExtPoly, spec: ModelSpec, params: SignParams
) -> Dispersion:
    """
    Read the linear wave operator off the eps^3 amplitude residual.

    After nu^(1) is eliminated the residual is A d_t1^2 phi + B D^2 phi;
    c^2 = -B zeta^2 / A must be +1 (c = c_sign) for a real speed.

    Raises:
        ImaginarySpeed: If c^2 = -1
    """
    wave = substitute_field(expr3, NU, 1, nu1)
    time_var = ExtVar(PHI, 1, 0, ((1, 2),))
    space_var = ExtVar(PHI, 1, 2, ())
    a_coef = wave.coefficient(((time_var, 1),))
    b_coef = wave.coefficient(((space_var, 1),))
    leftover = wave - ExtPoly.var(time_var, a_coef) - ExtPoly.var(space_var, b_coef)
    if leftover or not a_coef or not b_coef:
        raise UnremovableSecularity(f"eps^3 residual is not a wave operator: {wave.render()}")

    c_squared = -b_coef * spec.zeta_sq / a_coef
    if c_squared == -1:
        raise ImaginarySpeed(
            f"{spec.name} with sigma = {params.sigma}: c^2 = -1, the reduction needs sigma = +1"
        )
    if c_squared != 1:
        raise EngineError(f"{spec.name}: c^2 = {render(c_squared)} is not +-1")
    c = rational(params.c_sign)
    logger.info(f"{spec.name}: dispersion c^2 = 1, c = {render(c)}")
    return Dispersion(a_coef, b_coef, c_squared, c)


def reduce(
    model: str,
    max_order: int = 9,
    params: Optional[SignParams] = None,
    include_linear: bool = False,
) -> ReducedSystem:
    """
    Run the multiscale reduction of a lattice model.

    Args:
        model: "dnls" or "al"
        max_order: Deepest epsilon order (5, 7 or 9)
        params: Sign parameters (sigma, c_sign); defaults to sigma = c_sign = +1
        include_linear: Let the f^(t3) ansatz use linear monomials too

    Returns:
        ReducedSystem with a, the fixed flows and the forcing terms

    Example:
        >>> rs = reduce("dnls", 5)
        >>> render(rs.a)
        '(-h^2+3)/24'
    """
    params = params or SignParams()
    spec = madelung(model, params.sigma)
    if spec.zeta_equals_h != params.zeta_equals_h:
        params = SignParams(params.sigma, params.c_sign, spec.zeta_equals_h)
    logger.info(
        f"Reducing {spec.name} to eps^{max_order} (sigma={params.sigma}, c={params.c_sign})"
    )
    return MultiscaleReducer(spec, params, max_order, include_linear).run()
