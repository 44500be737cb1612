"""
Tests for the differential polynomial algebra: jets, total derivative,
exact integration, Frechet derivatives and evolutionary derivations.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from lattice_multiscale.coeff import H, parse as parse_coeff, rational
from lattice_multiscale.diffalg import (
    DiffPoly,
    JetVar,
    LinDiffOp,
    apply_op,
    evolutionary_derive,
    frechet,
    integrate_xi,
    jet,
    parse,
    placeholder,
)
from lattice_multiscale.errors import MissingFlow, NotExact, ParseError
from lattice_multiscale.graded import basis
from lattice_multiscale.kdv import k2

A = parse_coeff("(3-h^2)/24")


def _random_homogeneous(rng):
    n = int(rng.integers(2, 11))
    r = int(rng.integers(1, 3))
    p = DiffPoly()
    for q in basis(n, r).polys():
        c = rational(int(rng.integers(-6, 7)), int(rng.integers(1, 7)))
        if rng.integers(0, 2):
            c = c + H * rational(int(rng.integers(-6, 7)), int(rng.integers(1, 7)))
        p = p + q.scale(c)
    return p


class TestJets:
    """Jet variables and grading."""

    def test_degree(self):
        """deg(D^l phi^(j)) = l + 2j - 1."""
        assert JetVar(1, 1).degree == 2
        assert JetVar(2, 3).degree == 6

    def test_placeholder_degree(self):
        """d/dt_m phi^(j) has the degree of phi^(j) plus 2m - 1."""
        assert placeholder(2, 1).degree == 4
        assert placeholder(3, 1).degree == 6
        assert placeholder(2, 1).is_placeholder
        assert placeholder(2, 1).slow_time == 2

    def test_homogeneous_degree(self):
        """K_2 is homogeneous of degree 4."""
        assert k2(A).degree() == 4
        assert k2(A).is_homogeneous()

    def test_mixed_degree(self):
        """degree() refuses an inhomogeneous polynomial."""
        with pytest.raises(ValueError):
            (jet(1, 1) + jet(1, 2)).degree()

    def test_linear_and_nonlinear_parts(self):
        """linear_part and nonlinear_part split K_2."""
        p = k2(A)
        assert p.linear_part() == jet(1, 3).scale(A)
        assert p.nonlinear_part() == (jet(1, 1) ** 2).scale(rational(-3, 4))


class TestDerivative:
    """Total xi-derivative."""

    def test_leibniz(self):
        """D (D phi)^2 = 2 D phi D^2 phi."""
        assert (jet(1, 1) ** 2).derive_xi() == (jet(1, 1) * jet(1, 2)).scale(2)

    def test_raises_degree(self):
        """D raises the grading degree by one."""
        assert k2(A).derive_xi().degree() == 5

    def test_repeated(self):
        """derive_xi(times) composes."""
        p = jet(1, 1) * jet(2, 1)
        assert p.derive_xi(2) == p.derive_xi().derive_xi()


class TestIntegration:
    """Exact xi-antiderivatives."""

    def test_integrate_exact(self):
        """Integration inverts the total derivative."""
        q = k2(A)
        assert integrate_xi(q.derive_xi()) == q

    def test_integrate_mixed_levels(self):
        """Polynomials in several levels integrate too."""
        q = jet(1, 1) * jet(2, 2) + (jet(1, 2) ** 2).scale(H)
        assert integrate_xi(q.derive_xi()) == q

    def test_random_homogeneous_roundtrip(self):
        """integrate_xi inverts derive_xi on seeded random polynomials of degree <= 10."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            p = _random_homogeneous(rng)
            assert integrate_xi(p.derive_xi()) == p

    def test_not_exact(self):
        """D phi D^3 phi is not a total derivative."""
        with pytest.raises(NotExact):
            integrate_xi(jet(1, 1) * jet(1, 3))

    def test_degree_two_not_exact(self):
        """Degree-2 polynomials have no preimage in the algebra."""
        with pytest.raises(NotExact):
            integrate_xi(jet(1, 1))

    def test_zero(self):
        """The zero polynomial integrates to zero."""
        assert integrate_xi(DiffPoly()) == DiffPoly()


class TestFrechet:
    """Linearization along a field level."""

    def test_k2(self):
        """frechet(K_2) = a D^3 + 2 gamma D phi D."""
        op = frechet(k2(A), 1)
        expected = LinDiffOp({3: DiffPoly.constant(A), 1: jet(1, 1).scale(rational(-3, 2))})
        assert op == expected

    def test_apply(self):
        """K_2' applied to phi^(2) is linear in the level-2 jets."""
        applied = frechet(k2(A), 1).apply(jet(2, 0))
        assert applied == jet(2, 3).scale(A) + (jet(1, 1) * jet(2, 1)).scale(rational(-3, 2))

    def test_identity_and_zero(self):
        """The identity operator returns its argument and the zero operator returns 0."""
        p = jet(1, 2) * jet(1, 1) + jet(2, 0).scale(H)
        assert apply_op(LinDiffOp.identity(), p) == p
        assert apply_op(LinDiffOp(), p).is_zero()

    def test_other_level(self):
        """Linearizing along a level the polynomial does not contain gives zero."""
        assert frechet(k2(A), 2).is_zero()

    def test_lowered(self):
        """lowered() shifts every order down by one."""
        op = frechet(k2(A), 1).lowered()
        assert op.orders() == [0, 2]


class TestEvolutionaryDerive:
    """Evolutionary derivations and field substitution."""

    def test_single_jet(self):
        """d/dt D phi = D K when d/dt phi = K."""
        flow = k2(A)
        assert evolutionary_derive(jet(1, 1), {1: flow}) == flow.derive_xi()

    def test_leibniz(self):
        """The derivation obeys the product rule."""
        flow = k2(A)
        p = jet(1, 1) * jet(1, 2)
        expected = flow.derive_xi() * jet(1, 2) + jet(1, 1) * flow.derive_xi(2)
        assert evolutionary_derive(p, {1: flow}) == expected

    def test_commutes_with_derivative(self):
        """Prolongation: the evolutionary derivation commutes with D."""
        flows = {1: k2(A)}
        p = jet(1, 1) * jet(1, 3) + jet(1, 2) ** 2
        left = evolutionary_derive(p.derive_xi(), flows)
        assert left == evolutionary_derive(p, flows).derive_xi()

    def test_commutes_with_derivative_two_levels(self):
        """The identity holds with a flow on the second level too."""
        flows = {1: k2(A), 2: frechet(k2(A), 1).apply(jet(2, 0)) + jet(1, 1) ** 3}
        p = jet(1, 1) * jet(2, 2) + (jet(2, 1) ** 2).scale(H)
        left = evolutionary_derive(p.derive_xi(), flows)
        assert left == evolutionary_derive(p, flows).derive_xi()

    def test_missing_flow(self):
        """A level without a flow raises MissingFlow naming that level."""
        with pytest.raises(MissingFlow) as info:
            evolutionary_derive(jet(2, 1), {1: k2(A)})
        assert info.value.level == 2

    def test_placeholder_has_no_flow(self):
        """Placeholders cannot be evolved."""
        with pytest.raises(MissingFlow):
            evolutionary_derive(DiffPoly.var(placeholder(2, 1, 1)), {1: k2(A)})

    def test_substitute(self):
        """substitute replaces a field and carries its jets through."""
        value = jet(1, 1) ** 2
        assert jet(1, 2).substitute({("phi", 1): value}) == value.derive_xi(2)

    def test_substitute_placeholder(self):
        """Placeholder fields are substituted like any field."""
        p = DiffPoly.var(placeholder(2, 1, 1)) * jet(1, 1)
        result = p.substitute({(placeholder(2, 1).field, 1): k2(A)})
        assert result == k2(A).derive_xi() * jet(1, 1)
        assert not result.placeholders()


class TestGrammar:
    """Text grammar of differential polynomials."""

    def test_render_k2(self):
        """K_2 renders with exact coefficients in the jet grammar."""
        assert k2(A).render() == "((-h^2+3)/24)*D3[phi,1]+(-3/4)*D1[phi,1]^2"

    def test_roundtrip(self):
        """Parsing a rendering gives back the polynomial."""
        p = k2(A) * jet(2, 1) + jet(1, 5).scale(1 / (1 - H**2))
        assert parse(p.render()) == p

    def test_parse_terms(self):
        """Signs, powers and coefficient factors are read correctly."""
        p = parse("-D1[phi,1]^2 + (h/2)*D2[phi,1]*D1[phi,2]")
        expected = -(jet(1, 1) ** 2) + (jet(1, 2) * jet(2, 1)).scale(H / 2)
        assert p == expected

    def test_parse_zero(self):
        """'0' is the zero polynomial."""
        assert parse("0").is_zero()

    def test_parse_error(self):
        """Unknown factors are rejected."""
        with pytest.raises(ParseError):
            parse("D1[phi,1]*x")
        with pytest.raises(ParseError):
            parse("")
