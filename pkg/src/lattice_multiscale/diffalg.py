"""
Differential Polynomial Algebra

Polynomials in the jet variables D^l phi^(j) (l-th xi-derivative of the
level-j slow field) with Q(h) coefficients, together with the total
xi-derivative, exact integration, Frechet derivatives and evolutionary
derivations.

Grading: deg(D^l phi^(j)) = l + 2j - 1. Jets with l = 0 never appear in
reduced equations; only ``l >= 1`` monomials are enumerated by ``graded``.

Text grammar (round-trippable)::

    poly   := term (("+"|"-") term)*
    term   := coeff "*" factor ("*" factor)* | coeff | factor ("*" factor)*
    factor := "D" l "[" field "," j "]" ("^" exp)?
    coeff  := "(" rational function of h ")"

e.g. ``((-h^2+3)/24)*D3[phi,1]+(-3/4)*D1[phi,1]^2``.
"""

import logging
import re
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from . import coeff
from .coeff import RatFunc, Scalar, as_ratfunc
from .errors import MissingFlow, NotExact, ParseError
from .sparse import Monomial, SparsePoly, _accumulate, mono_mul, mono_remove, sum_polys

logger = logging.getLogger(__name__)

PHI = "phi"
_SLOW_TIME_PREFIX = "dt"


class JetVar(NamedTuple):
    """
    Jet variable D^order applied to a field of the given level.

    ``field`` is "phi" for the slow fields. Fields named "dt<m>" stand for
    the not yet determined slow-time derivative d/dt_m phi^(level) and are
    used as placeholders while the reduction resolves secular terms.
    """

    level: int
    order: int
    field: str = PHI

    @property
    def slow_time(self) -> int:
        """Slow-time index m of a placeholder field, 0 for phi."""
        if self.field == PHI:
            return 0
        return int(self.field[len(_SLOW_TIME_PREFIX):])

    @property
    def is_placeholder(self) -> bool:
        return self.field != PHI

    @property
    def degree(self) -> int:
        base = self.order + 2 * self.level - 1
        m = self.slow_time
        return base + 2 * m - 1 if m else base

    def derived(self, times: int = 1) -> "JetVar":
        return JetVar(self.level, self.order + times, self.field)

    def render(self) -> str:
        return f"D{self.order}[{self.field},{self.level}]"


def placeholder(m: int, level: int, order: int = 0) -> JetVar:
    """Jet of the unknown slow-time derivative d/dt_m phi^(level)."""
    return JetVar(level, order, f"{_SLOW_TIME_PREFIX}{m}")


def mono_degree(m: Monomial) -> int:
    """Total grading degree of a monomial."""
    return sum(v.degree * e for v, e in m)


def monomial_sort_key(m: Monomial):
    """Graded-lexicographic key (sort with reverse=True for canonical order)."""
    return (mono_degree(m), m)


def render_monomial(m: Monomial) -> str:
    factors = []
    for v, e in m:
        factors.append(v.render() if e == 1 else f"{v.render()}^{e}")
    return "*".join(factors)


class DiffPoly(SparsePoly):
    """Differential polynomial: map from jet monomials to Q(h) coefficients."""

    __slots__ = ()

    @classmethod
    def jet(cls, level: int, order: int, field: str = PHI, coefficient: Scalar = 1) -> "DiffPoly":
        return cls.var(JetVar(level, order, field), coefficient)

    @classmethod
    def parse(cls, text: str) -> "DiffPoly":
        return parse(text)

    # Grading

    def homogeneous_components(self) -> Dict[int, "DiffPoly"]:
        parts: Dict[int, Dict[Monomial, RatFunc]] = {}
        for m, c in self.items():
            parts.setdefault(mono_degree(m), {})[m] = c
        return {n: DiffPoly(t) for n, t in parts.items()}

    def degrees(self) -> set:
        return {mono_degree(m) for m in self.monomials()}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int:
        """Degree of a homogeneous polynomial (0 for the zero polynomial)."""
        degrees = self.degrees()
        if len(degrees) > 1:
            raise ValueError(f"Polynomial is not homogeneous: degrees {sorted(degrees)}")
        return degrees.pop() if degrees else 0

    def levels(self, field: str = PHI) -> set:
        return {v.level for v in self.variables() if v.field == field}

    def max_level(self) -> int:
        levels = self.levels()
        return max(levels) if levels else 0

    def placeholders(self) -> set:
        return {v for v in self.variables() if v.is_placeholder}

    def linear_part(self) -> "DiffPoly":
        return self.filter(lambda m: len(m) == 1 and m[0][1] == 1)

    def nonlinear_part(self) -> "DiffPoly":
        return self.filter(lambda m: sum(e for _, e in m) >= 2)

    def jet_coefficient(self, *factors: Tuple[JetVar, int]) -> RatFunc:
        """Coefficient of the monomial with the given (JetVar, exponent) factors."""
        return self.coefficient(tuple(sorted(factors, reverse=True)))

    # Calculus

    def derive_xi(self, times: int = 1) -> "DiffPoly":
        result = self
        for _ in range(times):
            result = _derive_once(result)
        return result

    def substitute(self, mapping: Mapping[Tuple[str, int], "DiffPoly"]) -> "DiffPoly":
        """
        Replace fields by differential polynomials.

        Args:
            mapping: (field, level) -> value; the jet D^l of that field becomes D^l(value)
        """

        def image(v: JetVar) -> DiffPoly:
            value = mapping.get((v.field, v.level))
            if value is None:
                return DiffPoly.var(v)
            return value.derive_xi(v.order)

        return self.map_variables(image)

    # Text

    def sorted_terms(self) -> List[Tuple[Monomial, RatFunc]]:
        return sorted(self.items(), key=lambda t: monomial_sort_key(t[0]), reverse=True)

    def render(self) -> str:
        if not self:
            return "0"
        out = []
        for i, (m, c) in enumerate(self.sorted_terms()):
            if not m:
                term = f"({coeff.render(c)})"
            elif c == 1:
                term = render_monomial(m)
            else:
                term = f"({coeff.render(c)})*{render_monomial(m)}"
            out.append(term if i == 0 else f"+{term}")
        return "".join(out)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"DiffPoly({self.render()})"


def _derive_once(p: DiffPoly) -> DiffPoly:
    acc: Dict[Monomial, RatFunc] = {}
    for m, c in p.items():
        for v, e in m:
            _accumulate(acc, mono_mul(mono_remove(m, v), ((v.derived(), 1),)), c * e)
    return DiffPoly(acc)


def jet(level: int, order: int, field: str = PHI) -> DiffPoly:
    """The jet variable D^order phi^(level) as a polynomial."""
    return DiffPoly.jet(level, order, field)


def derive_xi(p: DiffPoly, times: int = 1) -> DiffPoly:
    """Total xi-derivative (Leibniz rule); raises the homogeneous degree by one."""
    return p.derive_xi(times)


# Integration


def integrate_xi(p: DiffPoly) -> DiffPoly:
    """
    Exact xi-antiderivative with zero integration constant.

    Each homogeneous component of degree n is integrated by solving
    D q = p over the graded basis of degree n - 1.

    Args:
        p: Differential polynomial (placeholder-free)

    Returns:
        q with derive_xi(q) == p

    Raises:
        NotExact: If p is not a total xi-derivative in the l >= 1 algebra
    """
    if not p:
        return DiffPoly()
    parts = [_integrate_homogeneous(c, n) for n, c in sorted(p.homogeneous_components().items())]
    return sum_polys(parts, DiffPoly)


def _integrate_homogeneous(p: DiffPoly, n: int) -> DiffPoly:
    from .graded import basis, coords, derivative_system
    from .linsolve import solve

    if p.placeholders():
        raise NotExact(f"Cannot integrate placeholder terms in {p.render()}")
    if n < 3:
        raise NotExact(f"Degree-{n} polynomial {p.render()} has no preimage of degree >= 2")

    r = p.max_level()
    target = basis(n, r)
    system = derivative_system(n - 1, r, coords(p, target).entries)
    solution = solve(system)
    if not solution.consistent:
        raise NotExact(f"{p.render()} is not a total xi-derivative")
    source = basis(n - 1, r)
    return DiffPoly(
        {m: x for m, x in zip(source.monomials, solution.particular_column(0)) if x}
    )


# Linearization


class LinDiffOp:
    """Linear differential operator sum_k coeff_k * D^k with DiffPoly coefficients."""

    __slots__ = ("_coefficients",)

    def __init__(self, coefficients: Mapping[int, DiffPoly] = None):
        self._coefficients: Dict[int, DiffPoly] = {
            k: c for k, c in (coefficients or {}).items() if c
        }

    @classmethod
    def identity(cls) -> "LinDiffOp":
        return cls({0: DiffPoly.constant(1)})

    @property
    def coefficients(self) -> Dict[int, DiffPoly]:
        return dict(self._coefficients)

    def orders(self) -> List[int]:
        return sorted(self._coefficients)

    def is_zero(self) -> bool:
        return not self._coefficients

    def coefficient(self, k: int) -> DiffPoly:
        return self._coefficients.get(k, DiffPoly())

    def apply(self, v: DiffPoly) -> DiffPoly:
        return sum_polys(
            (c * v.derive_xi(k) for k, c in self._coefficients.items()), DiffPoly
        )

    __call__ = apply

    def lowered(self) -> "LinDiffOp":
        """The operator sum_k coeff_k * D^(k-1); requires no D^0 term."""
        if 0 in self._coefficients:
            raise ValueError("Operator has an undifferentiated term and cannot be lowered")
        return LinDiffOp({k - 1: c for k, c in self._coefficients.items()})

    def __add__(self, other: "LinDiffOp") -> "LinDiffOp":
        merged = dict(self._coefficients)
        for k, c in other._coefficients.items():
            merged[k] = merged[k] + c if k in merged else c
        return LinDiffOp(merged)

    def scale(self, factor: Scalar) -> "LinDiffOp":
        return LinDiffOp({k: c.scale(factor) for k, c in self._coefficients.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinDiffOp):
            return NotImplemented
        return self._coefficients == other._coefficients

    def __hash__(self) -> int:
        return hash(frozenset(self._coefficients.items()))

    def render(self) -> str:
        if not self._coefficients:
            return "0"
        ordered = sorted(self._coefficients.items(), reverse=True)
        parts = [f"({c.render()})*D^{k}" for k, c in ordered]
        return "+".join(parts)

    def __repr__(self) -> str:
        return f"LinDiffOp({self.render()})"


def frechet(p: DiffPoly, level: int = 1, field: str = PHI) -> LinDiffOp:
    """
    Frechet derivative of p along the field of the given level.

    The operator v -> d/dtheta p[phi^(level) -> phi^(level) + theta v] at theta = 0.
    """
    acc: Dict[int, Dict[Monomial, RatFunc]] = {}
    for m, c in p.items():
        for v, e in m:
            if v.field == field and v.level == level:
                _accumulate(acc.setdefault(v.order, {}), mono_remove(m, v), c * e)
    return LinDiffOp({k: DiffPoly(t) for k, t in acc.items()})


def apply_op(op: LinDiffOp, v: DiffPoly) -> DiffPoly:
    """Apply sum_k coeff_k D^k to v."""
    return op.apply(v)


def evolutionary_derive(p: DiffPoly, flows: Mapping[int, DiffPoly]) -> DiffPoly:
    """
    Evolutionary derivation with d/dt phi^(j) = flows[j].

    Each jet D^l phi^(j) is replaced by D^l flows[j] via the chain rule,
    summed with Leibniz over all factors.

    Raises:
        MissingFlow: If p involves a level without a flow, or a placeholder jet
    """
    prolonged: Dict[Tuple[int, int], DiffPoly] = {}
    contributions = []
    for m, c in p.items():
        for v, e in m:
            if v.is_placeholder:
                raise MissingFlow(v.level, f"placeholder {v.render()} has no evolution")
            flow = flows.get(v.level)
            if flow is None:
                raise MissingFlow(v.level)
            key = (v.level, v.order)
            if key not in prolonged:
                prolonged[key] = flow.derive_xi(v.order)
            contributions.append(DiffPoly.from_monomial(mono_remove(m, v), c * e) * prolonged[key])
    return sum_polys(contributions, DiffPoly)


# Parsing

_JET_RE = re.compile(r"^D(\d+)\[(\w+),(\d+)\](?:\^(\d+))?$")


def _split_top(text: str, separators: str) -> List[Tuple[str, str]]:
    """Split at depth-0 separators, returning (separator, chunk) pairs."""
    pieces: List[Tuple[str, str]] = []
    depth = 0
    start = 0
    sep = "+"
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth == 0 and ch in separators:
            if i == 0 or text[i - 1] in "^*/(":
                continue
            pieces.append((sep, text[start:i]))
            sep = ch
            start = i + 1
    pieces.append((sep, text[start:]))
    return pieces


def parse(text: str) -> DiffPoly:
    """
    Parse a differential polynomial written in the jet grammar.

    Raises:
        ParseError: On malformed input
    """
    s = "".join(text.split())
    if not s:
        raise ParseError("Empty differential polynomial")
    if s == "0":
        return DiffPoly()

    negative_first = s.startswith("-")
    if s[0] in "+-":
        s = s[1:]

    acc: Dict[Monomial, RatFunc] = {}
    for index, (sep, chunk) in enumerate(_split_top(s, "+-")):
        if not chunk:
            raise ParseError(f"Empty term in {text!r}")
        negative = sep == "-" or (index == 0 and negative_first)
        value = as_ratfunc(-1 if negative else 1)
        mono: Monomial = ()
        for _, factor in _split_top(chunk, "*"):
            match = _JET_RE.match(factor)
            if match:
                order, field, level, exponent = match.groups()
                var = JetVar(int(level), int(order), field)
                mono = mono_mul(mono, ((var, int(exponent or 1)),))
            else:
                value = value * coeff.parse(factor)
        _accumulate(acc, mono, value)
    return DiffPoly(acc)
