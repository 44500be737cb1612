"""
Tests for the exact coefficient field Q(h): arithmetic, canonical text,
parsing and evaluation at rational points.
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from lattice_multiscale.coeff import (
    H,
    ONE,
    ZERO,
    SignParams,
    div,
    eval_at,
    hpoly,
    is_constant,
    normalize,
    parse,
    rational,
    render,
)
from lattice_multiscale.errors import (
    DivisionByZero,
    EngineError,
    ParseError,
    PoleAtPoint,
    ZeroDenominator,
)


class TestArithmetic:
    """Field operations and canonical form."""

    def test_rational_embedding(self):
        """Constants embed into Q(h) and compare by value."""
        assert rational(-3, 4) == rational(Fraction(-3, 4))
        assert rational("6/8") == rational(3, 4)
        assert is_constant(rational(5))

    def test_cancellation(self):
        """Common factors cancel, so equal quotients are equal objects."""
        f = (H**2 - 1) / (H - 1)
        assert f == H + 1
        assert hash(f) == hash(H + 1)

    def test_normalize(self):
        """normalize builds the canonical quotient of two polynomials."""
        num = hpoly([-1, 0, 1])
        den = hpoly([2, 2])
        assert normalize(num, den) == (H - 1) / 2

    def test_zero_denominator(self):
        """A zero denominator is rejected."""
        with pytest.raises(ZeroDenominator):
            normalize(hpoly([1]), hpoly([]))

    def test_division_by_zero(self):
        """Division by the zero element raises an engine error that is also a ZeroDivisionError."""
        with pytest.raises(DivisionByZero):
            div(ONE, ZERO)
        with pytest.raises(ZeroDivisionError):
            div(H, ZERO)

    def test_not_constant(self):
        """h itself is not a constant."""
        assert not is_constant(H)


class TestRendering:
    """Canonical text with integer coefficients."""

    def test_dispersion_coefficient(self):
        """The potential KdV coefficient renders with the leading power first."""
        assert render((3 - H**2) / 24) == "(-h^2+3)/24"

    def test_monomial_over_integer(self):
        """A single monomial is not parenthesized."""
        assert render(H / 2) == "h/2"

    def test_polynomial_denominator(self):
        """Denominators with several terms are parenthesized."""
        assert render(1 / (H - 1)) == "1/(h-1)"

    def test_zero_and_integers(self):
        """Zero and integers render plainly."""
        assert render(ZERO) == "0"
        assert render(rational(-7)) == "-7"

    def test_parse_render_roundtrip(self):
        """Rendering then parsing gives the same element."""
        for f in [(3 - H**2) / 24, -(5 * H**2 - 7) / 64, H / (1 - H**2), rational(-3, 4)]:
            assert parse(render(f)) == f


class TestParsing:
    """Reading coefficients from text."""

    def test_caret_and_double_star(self):
        """Both ^ and ** are accepted for powers."""
        assert parse("h^2") == parse("h**2") == H**2

    def test_equivalent_expressions(self):
        """Any arithmetic expression in h is normalized."""
        assert parse("(3-h^2)/24") == parse("1/8 - h*h/24")

    def test_foreign_symbol(self):
        """Symbols other than h are rejected."""
        with pytest.raises(ParseError):
            parse("x+1")

    def test_python_code_rejected(self, tmp_path):
        """Text outside the coefficient grammar is refused before evaluation."""
        marker = tmp_path / "written"
        text = f"__import__('pathlib').Path({str(marker)!r}).write_text('x') and h"
        with pytest.raises(ParseError):
            parse(text)
        assert not marker.exists()

    @pytest.mark.parametrize("text", ["h.real", "lambda: h", "h; 1", "1e3", "[h]", "h[0]"])
    def test_non_grammar_characters(self, text):
        """Attribute access, lambdas, statements and literals are not coefficients."""
        with pytest.raises(ParseError):
            parse(text)

    def test_parse_error_is_value_error(self):
        """ParseError is both an EngineError and a ValueError."""
        with pytest.raises(ValueError):
            parse("(h+")
        with pytest.raises(EngineError):
            parse("(h+")


class TestEvaluation:
    """Exact evaluation at rational h."""

    def test_eval_at_one(self):
        """a(1) = (3 - 1)/24 = 1/12."""
        assert eval_at(parse("(3-h^2)/24"), 1) == Fraction(1, 12)

    def test_eval_at_zero(self):
        """The small-spacing limit of the dispersion coefficient is 1/8."""
        assert eval_at(parse("(3-h^2)/24"), 0) == Fraction(1, 8)

    def test_eval_at_fraction(self):
        """Rational points evaluate exactly."""
        assert eval_at(H / (1 - H**2), Fraction(1, 2)) == Fraction(2, 3)

    def test_pole(self):
        """Evaluating at a root of the denominator raises PoleAtPoint."""
        with pytest.raises(PoleAtPoint):
            eval_at(1 / (H - 1), 1)


class TestSignParams:
    """Validation of model sign parameters."""

    def test_defaults(self):
        """sigma = c_sign = +1 by default, with c embedded in Q(h)."""
        params = SignParams()
        assert params.sigma == 1
        assert params.c == ONE

    def test_invalid_sign(self):
        """Only +1 and -1 are accepted."""
        with pytest.raises(ValueError):
            SignParams(sigma=0)
        with pytest.raises(ValueError):
            SignParams(c_sign=2)
