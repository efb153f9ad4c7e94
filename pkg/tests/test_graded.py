"""Graded normalization, derivatives and substitution."""

import pytest

from isodyn.exact import GaussRat
from isodyn.graded import (
    GAtom,
    GradedExpr,
    expr_ghost,
    expr_parity,
    g_scal,
    graded_normalize,
    ideriv,
    sderiv,
    substitute_species,
    term_ghost,
    term_parity,
)
from isodyn.tensor import StructureError, ilo, iup, llo, lup


def atoms(*ats, coeff=1):
    return GradedExpr.atoms(*ats, coeff=coeff)


def theta():
    return GAtom("theta")


def omega(ix):
    return GAtom("omega", idx=(ix,))


class TestAnticommutation:
    def test_theta_omega_anticommute(self):
        e = atoms(theta(), omega(iup("S"))) + atoms(omega(iup("S")), theta())
        assert e.is_zero()

    def test_theta_squared_vanishes(self):
        assert atoms(theta(), theta()).is_zero()

    def test_even_atoms_commute(self):
        a = GAtom("A", idx=(llo("mu"), iup("M")))
        h = GAtom("h", idx=(ilo("R"),))
        assert atoms(a, h) == atoms(h, a)

    def test_dummy_antisymmetry_cancellation(self):
        # omega^K omega^L (sym in K,L via commuting nabla pair) = 0
        k, l = iup("K"), iup("L")
        psi = GAtom("psi", ider=(ilo("K"), ilo("L")))
        assert atoms(omega(k), omega(l), psi).is_zero()

    def test_operator_atoms_do_not_commute(self):
        b = GAtom("B", idx=(llo("mu"),))
        c = GAtom("C")
        assert atoms(b, c) != atoms(c, b)


class TestDerivatives:
    def test_leibniz_rule(self):
        k = iup("K")
        e = atoms(omega(k), GAtom("omega", idx=(iup("M"),), ider=(ilo("K"),)))
        got = sderiv(e, llo("mu"))
        want = atoms(
            GAtom("omega", idx=(k,), sder=(llo("mu"),)),
            GAtom("omega", idx=(iup("M"),), ider=(ilo("K"),)),
        ) + atoms(
            omega(k),
            GAtom("omega", idx=(iup("M"),), sder=(llo("mu"),), ider=(ilo("K"),)),
        )
        assert got == want

    def test_inner_derivatives_commute(self):
        e = atoms(GAtom("psi"))
        d1 = ideriv(ideriv(e, ilo("K")), ilo("L"))
        d2 = ideriv(ideriv(e, ilo("L")), ilo("K"))
        assert d1 == d2

    def test_constant_has_no_derivative(self):
        assert sderiv(atoms(theta()), llo("mu")).is_zero()


class TestGrading:
    def test_parity_and_ghost_bookkeeping(self):
        t = (theta(), omega(iup("S")), GAtom("omega_star", idx=(ilo("R"),)))
        assert term_parity(t) == 1
        assert term_ghost(t) == -1

    def test_normalize_preserves_grading(self):
        e = atoms(omega(iup("S")), theta(), GAtom("h", idx=(ilo("R"),)), coeff=3)
        n = graded_normalize(e)
        assert expr_parity(n) == 0
        assert expr_ghost(n) == 0


class TestSubstitution:
    def test_operator_binding(self):
        # B_mu -> -2 Aop_mu inside d^nu B_nu
        b = GAtom("B", idx=(llo("nu"),), sder=(lup("nu"),))
        e = atoms(b, GAtom("C"))
        slot = llo("s0")
        binding = {"B": ((slot,), GradedExpr.atoms(GAtom("Aop", idx=(slot,)), coeff=-2))}
        got = substitute_species(e, binding)
        want = atoms(
            GAtom("Aop", idx=(llo("nu"),), sder=(lup("nu"),)), GAtom("C"), coeff=-2
        )
        assert got == want

    def test_derivatives_distribute_over_binding(self):
        b = GAtom("B", idx=(llo("mu"),), sder=(lup("mu"),))
        e = atoms(b)
        slot = llo("s0")
        repl = GradedExpr.atoms(GAtom("Aop", idx=(slot,))) * GradedExpr.atoms(GAtom("E"))
        got = substitute_species(e, {"B": ((slot,), repl)})
        want = atoms(GAtom("Aop", idx=(llo("mu"),), sder=(lup("mu"),)), GAtom("E")) + atoms(
            GAtom("Aop", idx=(llo("mu"),)), GAtom("E", sder=(lup("mu"),))
        )
        assert got == want

    def test_parity_violating_binding_rejected(self):
        slot = ilo("s0")
        with pytest.raises(StructureError, match="parity"):
            substitute_species(
                atoms(GAtom("h", idx=(ilo("R"),))),
                {"h": ((slot,), GradedExpr.atoms(GAtom("omega", idx=(slot.flipped(),))))},
            )


class TestSerialization:
    def test_json_round_trip(self):
        e = atoms(g_scal("Omega4"), g_scal("eps", -1), GAtom("B", idx=(llo("mu"),)),
                  GAtom("B", idx=(lup("mu"),)), coeff=GaussRat(0, 1))
        assert GradedExpr.from_json(e.to_json()) == e

    def test_latex_nonempty(self):
        e = atoms(GAtom("omega", idx=(iup("K"),), sder=(llo("mu"),)))
        assert r"\partial" in e.to_latex()
