"""
Tests for graded monomial spaces P_n^(r) and exact coordinates.
"""

import sys
from pathlib import Path

import pytest

# Add src to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from lattice_multiscale.coeff import H, parse as parse_coeff
from lattice_multiscale.diffalg import jet
from lattice_multiscale.errors import NotInSpace
from lattice_multiscale.graded import (
    CoordVector,
    basis,
    coords,
    derivative_system,
    dim,
    from_coords,
    jets_of_degree,
    partitions,
)
from lattice_multiscale.kdv import k2
from lattice_multiscale.linsolve import solve


class TestPartitions:
    """Partitions into parts >= 2."""

    def test_six(self):
        """Four partitions of 6 into parts >= 2."""
        assert list(partitions(6)) == [(6,), (4, 2), (3, 3), (2, 2, 2)]

    def test_eight(self):
        """Seven partitions of 8 into parts >= 2."""
        assert len(list(partitions(8))) == 7

    def test_odd_small(self):
        """3 has a single partition."""
        assert list(partitions(3)) == [(3,)]


class TestDimensions:
    """Dimensions of the graded spaces."""

    def test_first_level(self):
        """P_6^(1) has dimension 4, three of them nonlinear."""
        assert dim(6, 1) == 4
        assert dim(6, 1, nonlinear=True) == 3

    def test_degree_three(self):
        """P_3^(1) is spanned by D^2 phi."""
        assert dim(3, 1) == 1
        assert basis(3, 1).labels() == ("D2[phi,1]",)

    def test_degree_eight(self):
        """P_8^(1) has seven monomials, one of them linear."""
        assert dim(8, 1) == 7
        assert dim(8, 1, nonlinear=True) == 6

    def test_second_level(self):
        """Two levels: P_9^(2) has 16 monomials, 14 of them nonlinear."""
        assert dim(9, 2) == 16
        assert dim(9, 2, nonlinear=True) == 14

    def test_second_level_eleven(self):
        """P_11^(2) has 33 monomials, 31 of them nonlinear."""
        assert dim(11, 2) == 33
        assert dim(11, 2, nonlinear=True) == 31

    def test_first_level_is_subspace(self):
        """Every monomial of P_n^(1) lies in P_n^(2)."""
        small, large = basis(9, 1), basis(9, 2)
        assert all(m in large for m in small)

    def test_invalid(self):
        """n < 2 or r < 1 is rejected."""
        with pytest.raises(ValueError):
            basis(1, 1)
        with pytest.raises(ValueError):
            basis(4, 0)


class TestJetsOfDegree:
    """Jets of a given degree."""

    def test_degree_four(self):
        """Degree 4 holds D^3 phi^(1) and D phi^(2)."""
        jets = jets_of_degree(4, 2)
        assert [(v.level, v.order) for v in jets] == [(1, 3), (2, 1)]

    def test_degree_three_level_two(self):
        """D^0 phi^(2) is not a jet of the algebra."""
        assert [(v.level, v.order) for v in jets_of_degree(3, 2)] == [(1, 2)]


class TestCoordinates:
    """Coordinates in a graded basis."""

    def test_roundtrip(self):
        """from_coords inverts coords."""
        p = k2(parse_coeff("(3-h^2)/24"))
        v = coords(p, basis(4, 1))
        assert v.nonzero_count == 2
        assert from_coords(v) == p

    def test_wrong_degree(self):
        """A monomial of another degree is not in the space."""
        with pytest.raises(NotInSpace):
            coords(jet(1, 3), basis(6, 1))

    def test_wrong_level(self):
        """A level-2 monomial is not in a level-1 space."""
        with pytest.raises(NotInSpace):
            coords(jet(2, 3) * jet(1, 1), basis(8, 1))

    def test_linear_not_in_nonlinear_part(self):
        """The linear monomial is outside the nonlinear part."""
        with pytest.raises(NotInSpace):
            coords(jet(1, 5), basis(6, 1, nonlinear=True))

    def test_derivative_system_solves_antiderivative(self):
        """D q = p is solvable for an exact p and returns q."""
        q = (jet(1, 1) ** 2).scale(H) + jet(1, 3)
        p = q.derive_xi()
        rhs = coords(p, basis(5, 1)).entries
        solution = solve(derivative_system(4, 1, rhs))
        assert solution.consistent
        recovered = from_coords(CoordVector(basis(4, 1), solution.particular_column()))
        assert recovered == q
