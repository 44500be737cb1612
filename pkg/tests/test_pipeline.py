"""
Tests for the order-by-order multiscale reduction of the lattice models.

The order-9 reductions are computed once per module.
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from lattice_multiscale.coeff import ONE, SignParams, eval_at, parse, rational, render
from lattice_multiscale.diffalg import JetVar, jet
from lattice_multiscale.errors import ImaginarySpeed, StageMissing
from lattice_multiscale.kdv import flow, k2
from lattice_multiscale.pipeline import MultiscaleReducer, reduce
from lattice_multiscale.models import madelung


@pytest.fixture(scope="module")
def dnls9():
    return reduce("dnls", 9)


@pytest.fixture(scope="module")
def al7():
    return reduce("al", 7)


class TestFirstStages:
    """eps^2 to eps^5: amplitude relation, wave speed and potential KdV."""

    def test_eps2_relation(self):
        """nu^(1) = -sigma d_t1 phi^(1)."""
        rs = reduce("dnls", 5)
        assert rs.eps2.coefficient == -ONE
        assert rs.eps2.render() == "nu^(1) = -Dt1 phi^(1)"

    def test_unit_speed(self):
        """The slow-space scale makes c^2 = 1."""
        rs = reduce("dnls", 5)
        assert rs.dispersion.c_squared == ONE
        assert rs.c == ONE

    def test_dnls_potential_kdv(self):
        """DNLS: a = c (3 - h^2)/24 with gamma = -3/4."""
        rs = reduce("dnls", 5)
        assert render(rs.a) == "(-h^2+3)/24"
        assert rs.gamma == rational(-3, 4)
        assert rs.flow(2) == k2(rs.a)

    def test_negative_branch(self):
        """c = -1 flips the sign of a."""
        rs = reduce("dnls", 5, SignParams(c_sign=-1))
        assert rs.c == -ONE
        assert rs.a == parse("-(3-h^2)/24")

    def test_al_potential_kdv(self):
        """AL: a = c (3 - 4h^2)/(24 (1 - h^2)), gamma = -(3 - 4h^2)/(4 (1 - h^2))."""
        rs = reduce("al", 5)
        assert rs.a == parse("(3-4*h^2)/(24*(1-h^2))")
        assert rs.gamma == parse("-(3-4*h^2)/(4*(1-h^2))")

    def test_first_amplitude(self):
        """In the moving frame nu^(1) = c D phi^(1)."""
        rs = reduce("dnls", 5)
        assert rs.amplitudes[1] == jet(1, 1)

    def test_eps5_stage_record(self):
        """The eps^5 record resolves d_t2 phi^(1) to K_2."""
        rs = reduce("dnls", 5)
        record = rs.stages[5]
        assert record.multipliers == {2: rs.a}
        assert record.resolved["Dt2 phi^(1)"] == rs.flow(2)

    def test_unsupported_order(self):
        """Only orders 5, 7 and 9 are supported."""
        with pytest.raises(ValueError):
            reduce("dnls", 4)
        with pytest.raises(ValueError):
            MultiscaleReducer(madelung("dnls"), SignParams(), max_order=11)

    @pytest.mark.parametrize("model", ["dnls", "al"])
    def test_defocusing_has_no_real_speed(self, model):
        """sigma = -1 gives c^2 = -1."""
        with pytest.raises(ImaginarySpeed):
            reduce(model, 5, SignParams(sigma=-1))


class TestSecondOrderForcing:
    """eps^7: K_3 and the forcing f^(t2)."""

    def test_pre_absorption(self, dnls9):
        """Coefficients of the eps^7 right-hand side before K_3 absorbs its part."""
        pre = dnls9.stages[7].pre_absorption
        assert pre.jet_coefficient((JetVar(1, 2), 2)) == parse("-(5*h^2-7)/64")
        assert pre.jet_coefficient((JetVar(1, 1), 3)) == parse("h^2/12")
        assert pre.jet_coefficient((JetVar(1, 3), 1), (JetVar(1, 1), 1)) == parse(
            "-(3*h^2+1)/16"
        )
        assert pre.jet_coefficient((JetVar(1, 5), 1)) == parse("-(h^4-30*h^2-15)/1920")

    def test_b3(self, dnls9):
        """b_3 is the D^5 phi coefficient of the eps^7 right-hand side."""
        assert dnls9.flows.b(3) == parse("-(h^4-30*h^2-15)/1920")
        assert dnls9.flow(3) == flow(3, dnls9.flows.b(3), dnls9.a)

    def test_f2_shape(self, dnls9):
        """f^(t2) lives in P_6^(1) with three nonlinear monomials."""
        f2 = dnls9.forcing_t2[1]
        assert len(f2.basis) == 4
        assert f2.nonzero_count == 3
        assert not dnls9.forcing(1).linear_part()

    def test_phi2_flow(self, dnls9):
        """d_t2 phi^(2) = K_2' phi^(2) + f^(t2)."""
        value = dnls9.phi2_flow(2)
        assert value.max_level() == 2
        assert value.nonlinear_part()

    def test_al_forcing(self, al7):
        """AL's f^(t2) has no linear part and no level-2 forcing exists at eps^7."""
        assert not al7.forcing(1).linear_part()
        assert 2 not in al7.forcing_t2


class TestThirdOrderForcing:
    """eps^9: K_4, f^(t3) and the level-2 forcing g^(t2)."""

    def test_g2_shape(self, dnls9):
        """g^(t2) lives in P_9^(2) with 14 nonzero coefficients."""
        g2 = dnls9.forcing_t2[2]
        assert len(g2.basis) == 16
        assert g2.nonzero_count == 14

    def test_f3_space(self, dnls9):
        """f^(t3) was solved from the order-7 condition and lives in P_8^(1)."""
        f3 = dnls9.forcing_t3[1]
        assert f3.basis.degree == 8
        assert f3.basis.max_level == 1

    def test_k4_linear_term(self, dnls9):
        """K_4 has linear term b_4 D^7 phi."""
        assert dnls9.flow(4).linear_part() == jet(1, 7).scale(dnls9.flows.b(4))
        assert dnls9.flows.times() == [2, 3, 4]

    def test_resolved_amplitudes(self, dnls9):
        """nu^(2) and nu^(3) carry no unresolved slow-time derivatives."""
        assert not dnls9.amplitudes[2].placeholders()
        assert not dnls9.amplitudes[3].placeholders()

    def test_stage_missing(self):
        """The level-2 forcing needs an eps^9 run."""
        rs = reduce("dnls", 7)
        with pytest.raises(StageMissing):
            rs.forcing(2)
        with pytest.raises(StageMissing):
            rs.forcing(1, time=3)

    def test_unknown_slow_time(self, dnls9):
        """Forcing terms exist for t_2 and t_3 only."""
        assert dnls9.forcing(1, 3) == dnls9.forcing_t3[1].to_poly()
        with pytest.raises(ValueError):
            dnls9.forcing(1, 4)
        with pytest.raises(ValueError):
            dnls9.phi2_flow(4)


class TestContinuumLimit:
    """Reduced flows stay finite as the lattice spacing goes to zero."""

    def test_dnls_flows_finite_at_zero(self, dnls9):
        """Every coefficient of K_2, K_3 and K_4 has a value at h = 0."""
        for m in (2, 3, 4):
            for _, c in dnls9.flow(m).items():
                eval_at(c, 0)
        assert eval_at(dnls9.a, 0) == Fraction(1, 8)

    def test_al_flows_finite_at_zero(self, al7):
        """The AL coefficients only have poles at h = 1 and h = -1."""
        for m in (2, 3):
            for _, c in al7.flow(m).items():
                eval_at(c, 0)
        assert eval_at(al7.a, 0) == Fraction(1, 8)
