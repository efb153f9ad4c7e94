"""Loop-integral pole table against the independent reduction oracle."""

import json
import pathlib
from fractions import Fraction

import pytest

from isodyn.exact import GaussRat, I
from isodyn.looptab import (
    TABLE_CASES,
    DivergentPart,
    LoopIntegral,
    UnsupportedIntegral,
    div_part,
    reduce_oracle,
)
from isodyn.tensor import (
    LORENTZ,
    TensorExpr,
    a_dot,
    a_eta,
    a_mom,
    evaluate,
    lup,
    substitute_momenta,
)

GOLDEN = pathlib.Path(__file__).parent / "data" / "looptab_golden.json"


class TestPublishedTable:
    def test_scaleless_single_denominator_vanishes(self):
        assert div_part(LoopIntegral(0, 1)).is_zero()

    def test_scalar_bubble(self):
        assert div_part(LoopIntegral(0, 2)).pole_coeff == TensorExpr.number(I)

    def test_rank1_bubble(self):
        want = TensorExpr.atoms(a_mom(2, lup("mu")), coeff=I * Fraction(-1, 2))
        assert div_part(LoopIntegral(1, 2)).pole_coeff == want

    def test_rank2_bubble(self):
        m1, m2 = lup("mu"), lup("nu")
        want = TensorExpr.atoms(a_mom(2, m1), a_mom(2, m2), coeff=I * Fraction(1, 3)) + (
            TensorExpr.atoms(a_eta(m1, m2), a_dot(LORENTZ, 2, 2), coeff=I * Fraction(-1, 12))
        )
        assert div_part(LoopIntegral(2, 2)).pole_coeff == want

    def test_rank2_triangle(self):
        want = TensorExpr.atoms(a_eta(lup("mu"), lup("nu")), coeff=I * Fraction(1, 4))
        assert div_part(LoopIntegral(2, 3)).pole_coeff == want

    def test_rank4_box(self):
        got = div_part(LoopIntegral(4, 4)).pole_coeff
        assert len(got.terms) == 3
        assert all(c == I * Fraction(1, 24) for c, _ in got.terms)

    @pytest.mark.parametrize("rank,denoms", TABLE_CASES)
    def test_table_matches_oracle(self, rank, denoms):
        integral = LoopIntegral(rank, denoms)
        assert div_part(integral).pole_coeff == reduce_oracle(integral).pole_coeff

    def test_unsupported_rank(self):
        with pytest.raises(UnsupportedIntegral):
            LoopIntegral(5, 2)
        with pytest.raises(UnsupportedIntegral):
            LoopIntegral(2, 5)


class TestOracleStructure:
    def test_convergent_cases_vanish(self):
        for rank, denoms in ((1, 3), (0, 3), (0, 4), (1, 4), (2, 4), (3, 4)):
            assert div_part(LoopIntegral(rank, denoms)).is_zero()

    def test_golden_offtable_cases(self):
        golden = json.loads(GOLDEN.read_text())
        for entry in golden:
            integral = LoopIntegral(entry["rank"], entry["denoms"])
            got = div_part(integral).pole_coeff
            assert got == TensorExpr.from_json_obj(entry["pole_coeff"]), (
                entry["rank"],
                entry["denoms"],
            )
            assert got == reduce_oracle(integral).pole_coeff

    @pytest.mark.parametrize("rank,denoms", [(1, 2), (2, 2), (3, 3), (3, 2), (4, 3)])
    def test_scaling_homogeneity(self, rank, denoms):
        """k -> 2k rescales the pole by 2**(rank - 2*denoms + 4)."""
        expr = div_part(LoopIntegral(rank, denoms)).pole_coeff
        legs = list(range(2, denoms + 1))
        scaled = substitute_momenta(
            expr, LORENTZ, {leg: [(Fraction(2), leg)] for leg in legs}
        )
        power = rank - 2 * denoms + 4
        assert scaled == Fraction(2**power) * expr

    def test_tensor_rank_closure(self):
        expr = div_part(LoopIntegral(3, 3)).pole_coeff
        for _, atoms in expr.terms:
            slots = sum(len(at.idx) for at in atoms)
            assert slots == 3

    def test_numeric_agreement_rank3_bubble(self):
        """Componentwise table/oracle agreement on a random kinematic point."""
        table = div_part(LoopIntegral(3, 2)).pole_coeff
        oracle = reduce_oracle(LoopIntegral(3, 2)).pole_coeff
        k = {2: [Fraction(3), Fraction(1), Fraction(-2), Fraction(5)]}
        for comp in ((0, 1, 2), (1, 1, 3), (0, 0, 0)):
            free = {
                (LORENTZ, "mu"): comp[0],
                (LORENTZ, "nu"): comp[1],
                (LORENTZ, "rho"): comp[2],
            }
            a = evaluate(table, dim_inner=2, momenta=k, free_values=free)
            b = evaluate(oracle, dim_inner=2, momenta=k, free_values=free)
            assert a == b
