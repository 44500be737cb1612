"""
Truncated Epsilon Series

Formal power series in the perturbation parameter epsilon, truncated at a
fixed order N, whose coefficients are polynomials in extended slow-field
jets (ExtVar): kappa-derivatives and slow-time derivatives of nu^(i) and
phi^(i).

The lattice shift acts as exp(+-eps D) with D = zeta d/dkappa; the zeta
powers are collected by the reduction driver, so an ExtVar's ``kappa``
counts powers of D and all series coefficients are rational.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Dict, Mapping, NamedTuple, Optional, Tuple

from .coeff import RatFunc, Scalar, as_ratfunc, rational
from .errors import NonSmallArgument, TruncationMismatch
from .sparse import Monomial, SparsePoly, _accumulate, mono_mul, mono_remove, sum_polys

logger = logging.getLogger(__name__)

NU = "nu"
PHI = "phi"
DEFAULT_ORDER = 9


class ExtVar(NamedTuple):
    """
    D^kappa d_t1^d1 d_t2^d2 ... applied to nu^(level) or phi^(level).

    ``times`` is a sorted tuple of (m, d_m) pairs with d_m > 0.
    """

    kind: str
    level: int
    kappa: int = 0
    times: Tuple[Tuple[int, int], ...] = ()

    def with_kappa(self, extra: int = 1) -> "ExtVar":
        return ExtVar(self.kind, self.level, self.kappa + extra, self.times)

    def with_time(self, m: int, extra: int = 1) -> "ExtVar":
        orders = dict(self.times)
        orders[m] = orders.get(m, 0) + extra
        return ExtVar(self.kind, self.level, self.kappa, tuple(sorted(orders.items())))

    def time_order(self, m: int) -> int:
        return dict(self.times).get(m, 0)

    def render(self) -> str:
        ops = []
        if self.kappa:
            ops.append("Dk" if self.kappa == 1 else f"Dk^{self.kappa}")
        for m, d in self.times:
            ops.append(f"Dt{m}" if d == 1 else f"Dt{m}^{d}")
        ops.append(f"{self.kind}^({self.level})")
        return " ".join(ops)


class ExtPoly(SparsePoly):
    """Polynomial in ExtVars with Q(h) coefficients."""

    __slots__ = ()

    @classmethod
    def field(cls, kind: str, level: int, kappa: int = 0, times=(), coefficient: Scalar = 1):
        return cls.var(ExtVar(kind, level, kappa, tuple(times)), coefficient)

    def derive(self, bump: Callable[[ExtVar], ExtVar]) -> "ExtPoly":
        """Leibniz derivation whose action on variables is ``bump``."""
        acc: Dict[Monomial, RatFunc] = {}
        for m, c in self.items():
            for v, e in m:
                _accumulate(acc, mono_mul(mono_remove(m, v), ((bump(v), 1),)), c * e)
        return ExtPoly(acc)

    def derive_kappa(self, times: int = 1) -> "ExtPoly":
        result = self
        for _ in range(times):
            result = result.derive(lambda v: v.with_kappa())
        return result

    def derive_time(self, m: int, times: int = 1) -> "ExtPoly":
        result = self
        for _ in range(times):
            result = result.derive(lambda v: v.with_time(m))
        return result

    def render(self) -> str:
        from .coeff import render

        if not self:
            return "0"
        parts = []
        for m, c in sorted(self.items(), reverse=True):
            factors = " * ".join(v.render() if e == 1 else f"({v.render()})^{e}" for v, e in m)
            parts.append(f"({render(c)})" + (f" * {factors}" if factors else ""))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ExtPoly({self.render()})"


class EpsSeries:
    """
    Epsilon series truncated at order N.

    Coefficients are ExtPoly values keyed by the epsilon power.
    """

    __slots__ = ("order", "_coefficients")

    def __init__(self, order: int = DEFAULT_ORDER, coefficients: Mapping[int, ExtPoly] = None):
        self.order = order
        self._coefficients: Dict[int, ExtPoly] = {
            k: p for k, p in (coefficients or {}).items() if 0 <= k <= order and p
        }

    @classmethod
    def constant(cls, value: Scalar, order: int = DEFAULT_ORDER) -> "EpsSeries":
        return cls(order, {0: ExtPoly.constant(value)})

    @classmethod
    def monomial(cls, power: int, poly: ExtPoly, order: int = DEFAULT_ORDER) -> "EpsSeries":
        return cls(order, {power: poly})

    def coefficient(self, k: int) -> ExtPoly:
        return self._coefficients.get(k, ExtPoly())

    def powers(self):
        return sorted(self._coefficients)

    def min_power(self) -> Optional[int]:
        return min(self._coefficients) if self._coefficients else None

    def is_zero(self) -> bool:
        return not self._coefficients

    def _check(self, other: "EpsSeries") -> None:
        if self.order != other.order:
            raise TruncationMismatch(
                f"Cannot combine series truncated at orders {self.order} and {other.order}"
            )

    def _coerce(self, other) -> "EpsSeries":
        if isinstance(other, EpsSeries):
            self._check(other)
            return other
        return EpsSeries.constant(other, self.order)

    def __add__(self, other) -> "EpsSeries":
        other = self._coerce(other)
        merged = dict(self._coefficients)
        for k, p in other._coefficients.items():
            merged[k] = merged[k] + p if k in merged else p
        return EpsSeries(self.order, merged)

    __radd__ = __add__

    def __neg__(self) -> "EpsSeries":
        return EpsSeries(self.order, {k: -p for k, p in self._coefficients.items()})

    def __sub__(self, other) -> "EpsSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "EpsSeries":
        return self._coerce(other) - self

    def scale(self, factor: Scalar) -> "EpsSeries":
        return EpsSeries(self.order, {k: p.scale(factor) for k, p in self._coefficients.items()})

    def __mul__(self, other) -> "EpsSeries":
        if not isinstance(other, EpsSeries):
            return self.scale(other)
        self._check(other)
        products: Dict[int, list] = {}
        for i, p in self._coefficients.items():
            for j, q in other._coefficients.items():
                if i + j <= self.order:
                    products.setdefault(i + j, []).append(p * q)
        return EpsSeries(self.order, {k: sum_polys(ps, ExtPoly) for k, ps in products.items()})

    def __rmul__(self, other) -> "EpsSeries":
        return self.scale(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EpsSeries):
            return NotImplemented
        return self.order == other.order and self._coefficients == other._coefficients

    def __hash__(self) -> int:
        return hash((self.order, frozenset(self._coefficients.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"eps^{k}: {p.render()}" for k, p in sorted(self._coefficients.items()))
        return f"EpsSeries(N={self.order}; {body})"


@dataclass(frozen=True)
class AnalyticKernel:
    """Scalar analytic function with exact rational Taylor coefficients at 0."""

    name: str
    taylor_fn: Callable[[int], Fraction]

    def taylor(self, k: int) -> Fraction:
        return self.taylor_fn(k)


def _sin_taylor(k: int) -> Fraction:
    if k % 2 == 0:
        return Fraction(0)
    return Fraction((-1) ** ((k - 1) // 2), factorial(k))


def _cos_taylor(k: int) -> Fraction:
    if k % 2:
        return Fraction(0)
    return Fraction((-1) ** (k // 2), factorial(k))


@lru_cache(maxsize=None)
def binomial_coefficient(q: Fraction, k: int) -> Fraction:
    """Generalized binomial coefficient C(q, k)."""
    value = Fraction(1)
    for i in range(k):
        value *= (q - i) / (i + 1)
    return value


SIN = AnalyticKernel("sin", _sin_taylor)
COS = AnalyticKernel("cos", _cos_taylor)
SQRT1P = AnalyticKernel("sqrt1p", lambda k: binomial_coefficient(Fraction(1, 2), k))
INV_SQRT1P = AnalyticKernel("inv_sqrt1p", lambda k: binomial_coefficient(Fraction(-1, 2), k))


def compose(kernel: AnalyticKernel, s: EpsSeries) -> EpsSeries:
    """
    Taylor composition kernel(s) truncated at the order of s.

    Raises:
        NonSmallArgument: If s has a nonzero epsilon^0 term
    """
    if s.coefficient(0):
        raise NonSmallArgument(f"{kernel.name} needs an argument without epsilon^0 term")
    result = EpsSeries.constant(rational(kernel.taylor(0)), s.order)
    low = s.min_power()
    if low is None:
        return result
    power = EpsSeries.constant(1, s.order)
    k = 1
    while k * low <= s.order:
        power = power * s
        c = kernel.taylor(k)
        if c:
            result = result + power.scale(rational(c))
        k += 1
    return result


def field_base_power(kind: str, level: int) -> int:
    """Epsilon power carried by nu^(i) (2i) or phi^(i) (2i - 1)."""
    return 2 * level if kind == NU else 2 * level - 1


def shift_expand(kind: str, direction: int, order: int = DEFAULT_ORDER) -> EpsSeries:
    """
    Expansion of the lattice field at site n + direction.

    nu_{n+-1} = 1 + sum_i eps^(2i) exp(+-eps D) nu^(i) and
    phi_{n+-1} = sum_i eps^(2i-1) exp(+-eps D) phi^(i); the phase background
    -sigma t is omitted since it cancels in every phase difference.

    Args:
        kind: "nu" or "phi"
        direction: +1, -1, or 0 for the unshifted site
        order: Truncation order N
    """
    if direction not in (1, 0, -1):
        raise ValueError(f"direction must be +1, 0 or -1, got {direction}")
    if kind not in (NU, PHI):
        raise ValueError(f"Unknown field kind: {kind}")

    terms: Dict[int, list] = {}
    if kind == NU:
        terms[0] = [ExtPoly.constant(1)]
    level = 1
    while field_base_power(kind, level) <= order:
        base = field_base_power(kind, level)
        for a in range(order - base + 1):
            if direction == 0 and a > 0:
                break
            weight = Fraction(direction**a, factorial(a))
            term = ExtPoly.field(kind, level, a, (), rational(weight))
            terms.setdefault(base + a, []).append(term)
        level += 1
    return EpsSeries(order, {k: sum_polys(ps, ExtPoly) for k, ps in terms.items()})


def time_expand(kind: str, order: int = DEFAULT_ORDER, sigma: int = 1) -> EpsSeries:
    """
    Expansion of d/dt of a lattice field: d/dt = sum_m eps^(2m-1) d/dt_m.

    For phi the background -sigma t contributes -sigma at epsilon^0.
    """
    if kind not in (NU, PHI):
        raise ValueError(f"Unknown field kind: {kind}")
    terms: Dict[int, list] = {}
    if kind == PHI:
        terms[0] = [ExtPoly.constant(-sigma)]
    m = 1
    while 2 * m - 1 + field_base_power(kind, 1) <= order:
        level = 1
        while 2 * m - 1 + field_base_power(kind, level) <= order:
            power = 2 * m - 1 + field_base_power(kind, level)
            terms.setdefault(power, []).append(ExtPoly.field(kind, level, 0, ((m, 1),)))
            level += 1
        m += 1
    return EpsSeries(order, {k: sum_polys(ps, ExtPoly) for k, ps in terms.items()})


def substitute_field(p: ExtPoly, kind: str, level: int, value: ExtPoly) -> ExtPoly:
    """
    Replace nu^(level) or phi^(level) by an ExtPoly, carrying derivatives through.

    Every ExtVar of that field is replaced by the matching kappa- and
    time-derivatives of ``value``.
    """

    def image(v: ExtVar) -> ExtPoly:
        if v.kind != kind or v.level != level:
            return ExtPoly.var(v)
        out = value.derive_kappa(v.kappa)
        for m, d in v.times:
            out = out.derive_time(m, d)
        return out

    return p.map_variables(image)
