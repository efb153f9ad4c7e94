"""Canonicalization, contraction and evaluation of the tensor algebra."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isodyn.exact import GaussRat
from isodyn.tensor import (
    INNER,
    LORENTZ,
    Atom,
    StructureError,
    TensorExpr,
    a_delta,
    a_dot,
    a_dpoly,
    a_eta,
    a_fop,
    a_imom,
    a_invprop,
    a_mom,
    a_scal,
    canonicalize,
    contract,
    evaluate,
    ilo,
    iup,
    llo,
    lup,
    permute_legs,
    rename_free,
    substitute_dim,
    substitute_momenta,
    substitute_scalars,
)


def T(*atoms, coeff=1):
    return TensorExpr.atoms(*atoms, coeff=coeff)


class TestCanonicalize:
    def test_lorentz_trace_is_four(self):
        e = T(a_eta(lup("mu"), lup("nu")), a_eta(llo("mu"), llo("nu")))
        assert e == TensorExpr.number(4)

    def test_inner_trace_is_dimension(self):
        e = T(a_delta(iup("M"), iup("N")), a_delta(ilo("M"), ilo("N")))
        assert e == T(a_dpoly(0))

    def test_contraction_identity_vanishes(self):
        kk = T(a_mom(1, lup("mu")), a_mom(1, lup("nu")), a_eta(llo("mu"), llo("nu")))
        assert kk - T(a_dot(LORENTZ, 1, 1)) == TensorExpr.zero()

    def test_idempotent(self):
        e = T(a_eta(lup("mu"), lup("nu")), a_mom(2, llo("nu")))
        assert canonicalize(e) == e

    def test_congruence(self):
        a = T(a_mom(1, lup("mu")), a_mom(2, llo("mu")))
        b = T(a_dot(LORENTZ, 1, 2), coeff=3)
        assert canonicalize(a + b) == canonicalize(canonicalize(a) + canonicalize(b))

    def test_dummy_relabeling_invariance(self):
        e1 = T(a_imom(1, iup("K")), a_imom(2, ilo("K")))
        e2 = T(a_imom(1, iup("Q")), a_imom(2, ilo("Q")))
        assert e1 == e2

    def test_metric_lowers_index(self):
        e = T(a_mom(1, lup("mu")), a_eta(llo("mu"), llo("nu")))
        assert e == T(a_mom(1, llo("nu")))

    def test_three_occurrences_rejected(self):
        with pytest.raises(StructureError, match="appears 3 times"):
            T(a_mom(1, lup("mu")), a_mom(2, llo("mu")), a_mom(3, llo("mu")))

    def test_same_variance_pair_rejected(self):
        with pytest.raises(StructureError, match="one upper with one lower"):
            T(a_mom(1, lup("mu")), a_mom(2, lup("mu")))

    def test_antisymmetric_self_trace_vanishes(self):
        e = T(a_fop("F", lup("mu"), lup("nu")), a_eta(llo("mu"), llo("nu")))
        assert e.is_zero()

    def test_antisymmetric_slot_order(self):
        plus = T(a_fop("F", lup("mu"), lup("nu")))
        minus = T(a_fop("F", lup("nu"), lup("mu")))
        assert plus + minus == TensorExpr.zero()

    def test_scalar_exponent_merge(self):
        e = T(a_scal("Lambda", 2), a_scal("Lambda", -2))
        assert e == TensorExpr.number(1)

    def test_inhomogeneous_free_indices_rejected(self):
        with pytest.raises(StructureError, match="inhomogeneous"):
            T(a_mom(1, lup("mu"))) + TensorExpr.number(1)


class TestContract:
    def test_metric_contraction(self):
        e = T(a_mom(1, lup("mu")), a_eta(llo("nu"), llo("rho")))
        got = contract(e, lup("mu"), llo("nu"))
        assert got == T(a_mom(1, llo("rho")))

    def test_inner_contraction(self):
        e = T(a_imom(1, iup("M")), a_delta(ilo("M"), ilo("N")))
        # M is already contracted; contracting the free N against a fresh
        # companion checks the error path below instead.
        assert e == T(a_imom(1, ilo("N")))

    def test_space_mismatch(self):
        e = T(a_mom(1, lup("mu")), a_imom(1, ilo("M")))
        with pytest.raises(StructureError, match="space mismatch"):
            contract(e, lup("mu"), ilo("M"))

    def test_label_not_free(self):
        e = T(a_mom(1, lup("mu")))
        with pytest.raises(StructureError, match="not free"):
            contract(e, lup("mu"), llo("nu"))


class TestSubstitute:
    def test_scalar_substitution(self):
        e = T(a_scal("xi"), a_mom(1, llo("mu"))) - T(a_mom(1, llo("mu")))
        assert substitute_scalars(e, {"xi": 1}).is_zero()

    def test_momentum_elimination(self):
        # k3 -> -k1 - k2 turns k3.k3 into k1.k1 + 2 k1.k2 + k2.k2
        e = T(a_dot(LORENTZ, 3, 3))
        got = substitute_momenta(e, LORENTZ, {3: [(Fraction(-1), 1), (Fraction(-1), 2)]})
        want = (
            T(a_dot(LORENTZ, 1, 1))
            + T(a_dot(LORENTZ, 1, 2), coeff=2)
            + T(a_dot(LORENTZ, 2, 2))
        )
        assert got == want

    def test_substitute_dim(self):
        e = T(a_dpoly(0), a_dpoly(2), a_scal("Lambda", 2, 1))
        got = substitute_dim(e, 3)
        assert got == T(a_scal("Lambda", 5), coeff=15)

    def test_permute_legs(self):
        e = T(a_mom(1, llo("mu")), a_imom(2, iup("M")))
        got = permute_legs(
            e, {1: 2, 2: 1}, {(LORENTZ, "mu"): "nu", (INNER, "M"): "N"}
        )
        assert got == T(a_mom(2, llo("nu")), a_imom(1, iup("N")))


class TestEvaluate:
    def test_dot_value(self):
        e = T(a_dot(LORENTZ, 1, 1))
        k = [Fraction(2), Fraction(1), Fraction(0), Fraction(0)]
        # signature (-,+,+,+): k.k = -4 + 1 = -3
        assert evaluate(e, dim_inner=2, momenta={1: k}) == GaussRat(-3)

    def test_metric_contraction_value(self):
        e = T(a_eta(lup("mu"), lup("nu")), a_eta(llo("mu"), llo("nu")))
        assert evaluate(e, dim_inner=2) == GaussRat(4)

    def test_free_index_component(self):
        e = T(a_mom(1, llo("mu")))
        k = [Fraction(5), Fraction(1), Fraction(2), Fraction(3)]
        got = evaluate(e, dim_inner=2, momenta={1: k}, free_values={(LORENTZ, "mu"): 0})
        assert got == GaussRat(-5)


# -- randomized cross-check: canonical form preserves the value -------------

_LABELS = ["mu", "nu", "rho", "sigma"]
_ILABELS = ["M", "N", "R", "S"]


@st.composite
def random_term(draw):
    atoms = []
    n_pairs = draw(st.integers(0, 2))
    pool = []
    for i in range(n_pairs):
        space = draw(st.sampled_from([LORENTZ, INNER]))
        name = f"d{i}"
        pool.append((Idx_pair := (space, name)))
        if space == LORENTZ:
            atoms.append(a_mom(draw(st.integers(1, 3)), lup(name)))
            other = draw(st.sampled_from(["mom", "eta_free"]))
            if other == "mom":
                atoms.append(a_mom(draw(st.integers(1, 3)), llo(name)))
            else:
                atoms.append(a_eta(llo(name), llo(draw(st.sampled_from(_LABELS)))))
        else:
            atoms.append(a_imom(draw(st.integers(1, 3)), iup(name)))
            atoms.append(a_imom(draw(st.integers(1, 3)), ilo(name)))
    n_free = draw(st.integers(0, 2))
    for j in range(n_free):
        atoms.append(a_mom(draw(st.integers(1, 3)), llo(f"f{j}")))
    coeff = GaussRat(Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4))))
    return coeff, tuple(atoms)


@given(st.lists(random_term(), min_size=1, max_size=3), st.integers(2, 3), st.data())
@settings(max_examples=60, deadline=None)
def test_numeric_crosscheck_random(terms, dim, data):
    try:
        expr = TensorExpr(terms)
    except StructureError:
        return
    raw = TensorExpr(terms, _canonical=True)  # uncanonicalized view of same terms
    momenta = {
        leg: [Fraction(data.draw(st.integers(-3, 3))) for _ in range(4)] for leg in (1, 2, 3)
    }
    imomenta = {
        leg: [Fraction(data.draw(st.integers(-3, 3))) for _ in range(dim)] for leg in (1, 2, 3)
    }
    frees = set()
    for _, atoms in terms:
        occ = {}
        for at in atoms:
            for ix in at.idx:
                occ.setdefault((ix.space, ix.name), []).append(ix)
        frees |= {k for k, v in occ.items() if len(v) == 1}
    free_values = {
        (sp, nm): data.draw(st.integers(0, 3 if sp == LORENTZ else dim - 1))
        for sp, nm in frees
    }
    kw = dict(
        dim_inner=dim, momenta=momenta, imomenta=imomenta, free_values=free_values
    )
    assert evaluate(expr, **kw) == evaluate(raw, **kw)


class TestSerialization:
    def test_json_round_trip(self):
        e = (
            T(a_eta(llo("mu"), llo("nu")), a_invprop(1), coeff=Fraction(1, 2))
            + T(a_mom(1, llo("mu")), a_mom(1, llo("nu")), a_dot(LORENTZ, 1, 1, -1),
                a_invprop(1), coeff=GaussRat(0, 1))
        )
        assert TensorExpr.from_json(e.to_json()) == e

    def test_json_deterministic(self):
        e1 = T(a_mom(1, llo("mu")), a_mom(2, llo("nu")))
        e2 = T(a_mom(2, llo("nu")), a_mom(1, llo("mu")))
        assert e1.to_json() == e2.to_json()

    def test_latex_deterministic_and_stable(self):
        e = T(a_eta(llo("mu"), llo("nu")), a_invprop(1)) - T(
            a_mom(1, llo("mu")), a_mom(1, llo("nu")), a_dot(LORENTZ, 1, 1, -1), a_invprop(1)
        )
        first = e.to_latex()
        again = TensorExpr.from_json(e.to_json()).to_latex()
        assert first == again
        assert r"\eta" in first and r"\varepsilon" in first
