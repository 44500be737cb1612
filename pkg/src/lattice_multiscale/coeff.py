"""
Exact Coefficient Field Q(h)

Rational functions of the lattice spacing h with rational coefficients,
built on sympy's sparse fraction field. Every coefficient of every series,
flow, forcing term and linear system in the package lives here.

Canonical text form uses integer coefficients and ``h^k`` powers, e.g.
``(-h^2+3)/24``; ``parse`` reads the same grammar back.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import List, Sequence, Tuple, Union

from sympy import QQ, Symbol
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.fields import FracElement, field
from sympy.polys.rings import PolyElement

from .errors import DivisionByZero, ParseError, PoleAtPoint, ZeroDenominator

logger = logging.getLogger(__name__)

# The field Q(h) and its generator
QH, H = field("h", QQ)
HRING = QH.ring
HGEN = HRING.gens[0]

RatFunc = FracElement
HPoly = PolyElement
Rational = Fraction
Scalar = Union[int, Fraction, FracElement]

ZERO = QH.zero
ONE = QH.one

_H_SYMBOL = Symbol("h")

# Digits, h, arithmetic operators, parentheses and whitespace; nothing else reaches parse_expr
_COEFF_TEXT = re.compile(r"[0-9h+\-*/^()\s]+")
_TRANSFORMS = standard_transformations + (convert_xor,)


def rational(value: Union[int, Fraction, str], den: int = 1) -> RatFunc:
    """
    Embed a rational number into Q(h).

    Args:
        value: Integer, Fraction or fraction string such as "-3/4"
        den: Optional extra denominator

    Returns:
        Constant rational function
    """
    q = Fraction(value) / den
    return QH(QQ(q.numerator, q.denominator))


def as_ratfunc(value: Scalar) -> RatFunc:
    """Coerce an int, Fraction or RatFunc into Q(h)."""
    if isinstance(value, FracElement):
        return value
    return rational(value)


def hpoly(coefficients: Sequence[Union[int, Fraction]]) -> HPoly:
    """
    Build a polynomial in h from its coefficient sequence.

    Args:
        coefficients: Coefficients indexed by the power of h

    Returns:
        Polynomial in Q[h]
    """
    poly = HRING.zero
    for power, value in enumerate(coefficients):
        q = Fraction(value)
        if q:
            poly += HRING(QQ(q.numerator, q.denominator)) * HGEN**power
    return poly


def normalize(num: HPoly, den: HPoly) -> RatFunc:
    """
    Canonical quotient num/den.

    The gcd is cancelled and the denominator made integer-primitive with
    positive leading coefficient, so equal quotients share one representation.

    Raises:
        ZeroDenominator: If den is the zero polynomial
    """
    if not den:
        raise ZeroDenominator(f"Zero denominator for numerator {num}")
    return QH(num) / QH(den)


def div(a: RatFunc, b: RatFunc) -> RatFunc:
    """Exact division in Q(h)."""
    if not b:
        raise DivisionByZero(f"Division of {render(a)} by zero")
    return a / b


def to_fraction(q) -> Fraction:
    """Convert a ground-domain rational (QQ element) to a Fraction."""
    return Fraction(int(q.numerator), int(q.denominator))


def _eval_poly(poly: HPoly, h0: Fraction) -> Fraction:
    return sum((to_fraction(c) * h0 ** monom[0] for monom, c in poly.terms()), Fraction(0))


def eval_at(f: RatFunc, h0: Union[int, Fraction]) -> Fraction:
    """
    Evaluate a rational function at a rational point.

    Args:
        f: Rational function
        h0: Value substituted for h

    Returns:
        Exact rational value

    Raises:
        PoleAtPoint: If the denominator vanishes at h0

    Example:
        >>> eval_at(parse("(3-h^2)/24"), 1)
        Fraction(1, 12)
    """
    h0 = Fraction(h0)
    den = _eval_poly(f.denom, h0)
    if den == 0:
        raise PoleAtPoint(f"{render(f)} has a pole at h = {h0}")
    return _eval_poly(f.numer, h0) / den


def is_constant(f: RatFunc) -> bool:
    """True when f does not depend on h."""
    return f.numer.is_ground and f.denom.is_ground


def total_degree(f: RatFunc) -> int:
    """Degree of numerator plus degree of denominator (pivot cost)."""
    if not f:
        return 0
    return int(f.numer.degree()) + int(f.denom.degree())


def _integer_form(f: RatFunc) -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    num = [(monom[0], to_fraction(c)) for monom, c in f.numer.terms()]
    den = [(monom[0], to_fraction(c)) for monom, c in f.denom.terms()]
    scale = lcm(*(c.denominator for _, c in num + den))
    num_i = [(k, int(c * scale)) for k, c in num]
    den_i = [(k, int(c * scale)) for k, c in den]
    content = gcd(*(abs(c) for _, c in num_i + den_i))
    num_i = sorted(((k, c // content) for k, c in num_i), reverse=True)
    den_i = sorted(((k, c // content) for k, c in den_i), reverse=True)
    if den_i[0][1] < 0:
        num_i = [(k, -c) for k, c in num_i]
        den_i = [(k, -c) for k, c in den_i]
    return num_i, den_i


def _render_poly(terms: List[Tuple[int, int]]) -> str:
    out = ""
    for power, c in terms:
        mag = abs(c)
        if power == 0:
            body = str(mag)
        else:
            monomial = "h" if power == 1 else f"h^{power}"
            body = monomial if mag == 1 else f"{mag}*{monomial}"
        if not out:
            out = f"-{body}" if c < 0 else body
        else:
            out += f"-{body}" if c < 0 else f"+{body}"
    return out


def render(f: RatFunc) -> str:
    """
    Canonical text rendering with integer coefficients.

    Example:
        >>> render(parse("(3-h^2)/24"))
        '(-h^2+3)/24'
    """
    if not f:
        return "0"
    num, den = _integer_form(f)
    num_s = _render_poly(num)
    if den == [(0, 1)]:
        return num_s
    den_s = _render_poly(den)
    if len(num) > 1:
        num_s = f"({num_s})"
    if len(den) > 1 or "*" in den_s:
        den_s = f"({den_s})"
    return f"{num_s}/{den_s}"


def parse(text: str) -> RatFunc:
    """
    Parse a rational function of h.

    Accepts the canonical rendering and any equivalent arithmetic expression
    in h using +, -, *, / and ^ (or **).

    Raises:
        ParseError: If the text is not a rational function of h
    """
    if not _COEFF_TEXT.fullmatch(text):
        raise ParseError(f"Coefficient {text!r} may only use digits, h, + - * / ^ and parentheses")
    try:
        expr = parse_expr(text, local_dict={"h": _H_SYMBOL}, transformations=_TRANSFORMS)
    except Exception as e:
        raise ParseError(f"Cannot parse coefficient {text!r}: {e}") from e

    extra = getattr(expr, "free_symbols", set()) - {_H_SYMBOL}
    if extra:
        names = sorted(map(str, extra))
        raise ParseError(f"Coefficient {text!r} uses symbols other than h: {names}")
    try:
        return QH.from_expr(expr)
    except Exception as e:
        raise ParseError(f"Coefficient {text!r} is not a rational function of h") from e


@dataclass(frozen=True)
class SignParams:
    """
    Model sign parameters.

    sigma is the sign of the on-site nonlinearity, c_sign the branch of the
    linear wave speed. zeta_equals_h records whether the slow-space scale is
    h itself (DNLS) or the rescaled lattice length used for Ablowitz-Ladik.
    """

    sigma: int = 1
    c_sign: int = 1
    zeta_equals_h: bool = True

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError(f"sigma must be +1 or -1, got {self.sigma}")
        if self.c_sign not in (1, -1):
            raise ValueError(f"c_sign must be +1 or -1, got {self.c_sign}")

    @property
    def c(self) -> RatFunc:
        """Wave speed as an element of Q(h)."""
        return rational(self.c_sign)
