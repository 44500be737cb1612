"""
Tests for exact Gauss-Jordan elimination over Q(h).
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from lattice_multiscale.coeff import H, ONE, ZERO, rational
from lattice_multiscale.errors import PoleAtPoint
from lattice_multiscale.linsolve import (
    LinSystem,
    independent_constraints,
    normalize_form,
    rank,
    solve,
    specialized_rank,
    verify,
)


def _system(rhs):
    return LinSystem(matrix=((ONE, H), (H, H**2)), rhs=rhs)


class TestSolve:
    """Rank, particular solution, null space and constraints."""

    def test_consistent(self):
        """A rank-one system with compatible right-hand side."""
        system = _system(((ONE,), (H,)))
        solution = solve(system)
        assert solution.rank == 1
        assert solution.consistent
        assert solution.particular_column() == (ONE, ZERO)
        assert solution.null_space == ((-H, ONE),)
        assert verify(system, solution)

    def test_inconsistent(self):
        """An incompatible right-hand side yields a normalized constraint."""
        solution = solve(_system(((ONE,), (ONE,))))
        assert not solution.consistent
        assert len(solution.constraints) == 1
        assert solution.constraints[0].value() == H - 1

    def test_verify_rejects_inconsistent(self):
        """verify is False when constraints remain."""
        system = _system(((ONE,), (ONE,)))
        assert not verify(system, solve(system))

    def test_several_rhs_columns(self):
        """Parametric right-hand sides give linear forms in the parameters."""
        system = LinSystem(
            matrix=((ONE,), (ONE,)),
            rhs=((ONE, ZERO), (ZERO, ONE)),
            rhs_labels=("p", "q"),
        )
        solution = solve(system)
        assert solution.constraints[0].form == (ONE, -ONE)
        assert solution.constraints[0].render(("p", "q")) == "(1)*p+(-1)*q"
        assert independent_constraints(solution) == 1

    def test_full_rank(self):
        """An invertible system over Q(h) has a unique solution."""
        system = LinSystem(matrix=((ONE, H), (ZERO, 1 - H)), rhs=((ONE,), (ONE,)))
        solution = solve(system)
        assert solution.rank == 2
        assert solution.null_space == ()
        assert verify(system, solution)
        assert solution.particular_column()[1] == 1 / (1 - H)

    def test_homogeneous(self):
        """Without rhs the system is homogeneous and always consistent."""
        solution = solve(LinSystem(matrix=((ONE, ONE),)))
        assert solution.consistent
        assert len(solution.null_space) == 1


class TestRank:
    """Generic and specialized ranks."""

    def test_generic_rank(self):
        """Proportional rows have rank one."""
        assert rank(_system(((ONE,), (H,)))) == 1

    def test_rank_drop(self):
        """At h = 1 the matrix [[1, h], [1, 1]] loses rank."""
        system = LinSystem(matrix=((ONE, H), (ONE, ONE)))
        assert rank(system) == 2
        assert specialized_rank(system, Fraction(2)) == 2
        assert specialized_rank(system, Fraction(1)) == 1

    def test_specialized_pole(self):
        """Specializing at a pole raises PoleAtPoint."""
        system = LinSystem(matrix=((1 / (H - 1),),))
        with pytest.raises(PoleAtPoint):
            specialized_rank(system, Fraction(1))


class TestValidation:
    """Shape validation of LinSystem."""

    def test_ragged_rows(self):
        """Rows of different length are rejected."""
        with pytest.raises(ValueError):
            LinSystem(matrix=((ONE, ONE), (ONE,)))

    def test_rhs_rows(self):
        """rhs must have one row per equation."""
        with pytest.raises(ValueError):
            LinSystem(matrix=((ONE,), (ONE,)), rhs=((ONE,),))


class TestNormalizeForm:
    """Content removal of linear forms."""

    def test_clears_denominators(self):
        """Denominators and rational content are removed."""
        form = normalize_form((rational(1, 2), H / 4))
        assert form == (rational(2), H)

    def test_sign(self):
        """The first nonzero entry gets a positive leading coefficient."""
        assert normalize_form((ZERO, -H, ONE)) == (ZERO, H, -ONE)
