"""
Tests for truncated epsilon series, analytic compositions and the lattice
shift and time expansions.
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from lattice_multiscale.coeff import rational
from lattice_multiscale.errors import NonSmallArgument, TruncationMismatch
from lattice_multiscale.series import (
    COS,
    NU,
    PHI,
    SIN,
    SQRT1P,
    EpsSeries,
    ExtPoly,
    ExtVar,
    binomial_coefficient,
    compose,
    shift_expand,
    substitute_field,
    time_expand,
)

X = ExtPoly.field(NU, 1)


class TestEpsSeries:
    """Arithmetic of truncated series."""

    def test_truncation(self):
        """Products drop powers above the truncation order."""
        s = EpsSeries.monomial(2, X, order=5)
        assert (s * s).coefficient(4) == X * X
        assert (s * s * s).is_zero()

    def test_constructor_drops_high_powers(self):
        """Coefficients beyond the order are discarded."""
        s = EpsSeries(3, {1: X, 4: X})
        assert s.powers() == [1]

    def test_mismatch(self):
        """Series with different truncation orders do not combine."""
        with pytest.raises(TruncationMismatch):
            EpsSeries.monomial(1, X, order=5) + EpsSeries.monomial(1, X, order=7)

    def test_constants(self):
        """Scalars coerce to constant series."""
        s = EpsSeries.monomial(2, X, order=4) + 1
        assert s.coefficient(0) == ExtPoly.constant(1)
        assert (s - 1).min_power() == 2


class TestCompose:
    """Taylor composition."""

    def test_sqrt(self):
        """sqrt(1 + eps^2 x) = 1 + x/2 eps^2 - x^2/8 eps^4 + O(eps^6)."""
        s = EpsSeries.monomial(2, X, order=5)
        result = compose(SQRT1P, s)
        assert result.coefficient(0) == ExtPoly.constant(1)
        assert result.coefficient(2) == X.scale(rational(1, 2))
        assert result.coefficient(4) == (X * X).scale(rational(-1, 8))
        assert result.powers() == [0, 2, 4]

    def test_sin_is_odd(self):
        """sin(eps x) has only odd powers."""
        result = compose(SIN, EpsSeries.monomial(1, X, order=6))
        assert result.powers() == [1, 3, 5]
        assert result.coefficient(3) == (X**3).scale(rational(-1, 6))

    def test_cos_of_zero(self):
        """cos(0) = 1."""
        assert compose(COS, EpsSeries(order=4)) == EpsSeries.constant(1, 4)

    def test_pythagorean_identity(self):
        """sin^2 + cos^2 = 1 through eps^9."""
        s = EpsSeries.monomial(1, X, order=9) + EpsSeries.monomial(2, ExtPoly.field(PHI, 1), 9)
        sin, cos = compose(SIN, s), compose(COS, s)
        assert sin * sin + cos * cos == EpsSeries.constant(1, 9)

    def test_non_small(self):
        """An argument with an eps^0 term is rejected."""
        with pytest.raises(NonSmallArgument):
            compose(SIN, EpsSeries.constant(1, 3))

    def test_binomial(self):
        """C(1/2, 2) = -1/8 and C(-1/2, 1) = -1/2."""
        assert binomial_coefficient(Fraction(1, 2), 2) == Fraction(-1, 8)
        assert binomial_coefficient(Fraction(-1, 2), 1) == Fraction(-1, 2)


class TestExpansions:
    """Shift and time expansions of the lattice fields."""

    def test_phi_shift(self):
        """phi_{n+1} carries exp(eps D) on each level."""
        s = shift_expand(PHI, 1, 3)
        assert s.coefficient(1) == ExtPoly.field(PHI, 1)
        assert s.coefficient(2) == ExtPoly.field(PHI, 1, 1)
        expected = ExtPoly.field(PHI, 1, 2, (), rational(1, 2)) + ExtPoly.field(PHI, 2)
        assert s.coefficient(3) == expected

    def test_backward_shift_signs(self):
        """phi_{n-1} alternates signs in the kappa-derivatives."""
        s = shift_expand(PHI, -1, 3)
        assert s.coefficient(2) == ExtPoly.field(PHI, 1, 1, (), -1)

    def test_nu_unshifted(self):
        """nu_n = 1 + eps^2 nu^(1) + eps^4 nu^(2)."""
        s = shift_expand(NU, 0, 4)
        assert s.powers() == [0, 2, 4]
        assert s.coefficient(4) == ExtPoly.field(NU, 2)

    def test_phase_difference(self):
        """beta+ starts at eps^2 with D phi^(1)."""
        beta = shift_expand(PHI, 1, 4) - shift_expand(PHI, 0, 4)
        assert beta.min_power() == 2
        assert beta.coefficient(2) == ExtPoly.field(PHI, 1, 1)

    def test_invalid_direction(self):
        """Only the neighbours and the site itself can be expanded."""
        with pytest.raises(ValueError):
            shift_expand(PHI, 2, 3)

    def test_time_expansion(self):
        """d/dt phi collects d/dt_m phi^(i) at eps^(2m+2i-2)."""
        s = time_expand(PHI, 5, sigma=1)
        assert s.coefficient(0) == ExtPoly.constant(-1)
        assert s.coefficient(2) == ExtPoly.field(PHI, 1, 0, ((1, 1),))
        expected = ExtPoly.field(PHI, 2, 0, ((1, 1),)) + ExtPoly.field(PHI, 1, 0, ((2, 1),))
        assert s.coefficient(4) == expected

    def test_time_expansion_sigma(self):
        """The phase background follows the sign of the nonlinearity."""
        assert time_expand(PHI, 3, sigma=-1).coefficient(0) == ExtPoly.constant(1)


class TestExtPoly:
    """External variables and substitution."""

    def test_derivatives_commute(self):
        """kappa- and time-derivatives commute on variables."""
        p = ExtPoly.field(PHI, 1) * ExtPoly.field(NU, 1)
        assert p.derive_kappa().derive_time(2) == p.derive_time(2).derive_kappa()

    def test_with_time(self):
        """with_time accumulates orders per slow time."""
        v = ExtVar(PHI, 1).with_time(1).with_time(1).with_time(3)
        assert v.times == ((1, 2), (3, 1))
        assert v.time_order(1) == 2

    def test_substitute_field(self):
        """Substitution carries kappa-derivatives through the value."""
        p = ExtPoly.field(NU, 1, 2)
        value = ExtPoly.field(PHI, 1, 0, ((1, 1),), -1)
        result = substitute_field(p, NU, 1, value)
        assert result == value.derive_kappa(2)
