"""Ball moments, the angular normalization and inner operator traces."""

import itertools
from fractions import Fraction

import pytest

from isodyn.exact import GaussRat
from isodyn.innerspace import (
    InnerOperator,
    UnsupportedMoment,
    moment,
    moment_component,
    moment_scalar,
    omega_d_exact,
    omega_d_float,
    quadrature_moment_component,
    scaling_check,
    trace_quadratic,
)
from isodyn.tensor import TensorExpr, a_delta, a_dpoly, a_fdot, a_scal, iup


class TestMoments:
    def test_degree_zero(self):
        m = moment(0)
        want = TensorExpr.atoms(a_scal("OmegaD"), a_scal("Lambda", 0, 1), a_dpoly(0, -1))
        assert m.expr == want

    def test_odd_degree_vanishes_with_note(self):
        m = moment(1)
        assert m.expr.is_zero()
        assert "parity" in m.note

    def test_degree_two_structure(self):
        m = moment(2)
        want = TensorExpr.atoms(
            a_delta(iup("I1"), iup("I2")),
            a_scal("OmegaD"),
            a_scal("Lambda", 2, 1),
            a_dpoly(0, -1),
            a_dpoly(2, -1),
        )
        assert m.expr == want

    def test_degree_four_has_three_matchings(self):
        m = moment(4)
        assert len(m.expr.terms) == 3

    def test_degree_above_four_unsupported(self):
        with pytest.raises(UnsupportedMoment):
            moment(6)

    @pytest.mark.parametrize("n,rho", [(0, Fraction(7, 3)), (2, 2), (4, 3)])
    def test_scaling_law(self, n, rho):
        assert scaling_check(n, rho)


class TestOmegaD:
    def test_omega4_is_one_over_eight_pi_squared(self):
        coeff, pi_pow = omega_d_exact(4)
        assert (coeff, pi_pow) == (Fraction(1, 8), Fraction(-2))

    def test_known_surfaces(self):
        # Omega_D * (2 pi)^D = surface of S^(D-1): 2pi, 4pi, 2pi^2
        import math

        for d, surface in ((2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi**2)):
            assert abs(omega_d_float(d) * (2 * math.pi) ** d - surface) < 1e-12


class TestQuadratureAgreement:
    @pytest.mark.parametrize("d", [2, 3, 4])
    @pytest.mark.parametrize("cutoff", [1.0, 2.0])
    def test_moment0(self, d, cutoff):
        sym = moment_component(0, (), d, cutoff)
        quad = quadrature_moment_component(0, (), d, cutoff)
        assert abs(sym - quad) <= 1e-9 * abs(sym)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_moment2_components(self, d):
        for comp in itertools.product(range(d), repeat=2):
            sym = moment_component(2, comp, d, 2.0)
            quad = quadrature_moment_component(2, comp, d, 2.0)
            scale = moment_component(2, (0, 0), d, 2.0)
            assert abs(sym - quad) <= 1e-9 * scale

    def test_moment4_spotcheck(self):
        d = 3
        for comp in ((0, 0, 1, 1), (0, 0, 0, 0), (0, 1, 2, 0)):
            sym = moment_component(4, comp, d, 1.5)
            quad = quadrature_moment_component(4, comp, d, 1.5)
            scale = moment_component(4, (0, 0, 0, 0), d, 1.5)
            assert abs(sym - quad) <= 1e-9 * scale


class TestTraceQuadratic:
    def test_vector_trace_structure(self):
        op = InnerOperator.field("F")
        got = trace_quadratic(op, op)
        want = GaussRat(-1) * TensorExpr.atoms(a_dpoly(0)) * moment_scalar(2) * (
            TensorExpr.atoms(a_fdot("F", "F"))
        )
        assert got == want

    def test_scalar_trace_drops_bundle_factor(self):
        op = InnerOperator.field("F", rep="scalar")
        got = trace_quadratic(op, op)
        want = GaussRat(-1) * moment_scalar(2) * TensorExpr.atoms(a_fdot("F", "F"))
        assert got == want

    def test_zero_field(self):
        zero = InnerOperator((), "vector")
        assert trace_quadratic(zero, InnerOperator.field("F")).is_zero()

    def test_bilinearity(self):
        a = InnerOperator.field("a")
        b = InnerOperator.field("b")
        c = InnerOperator.field("c")
        lhs = trace_quadratic(a, b + c)
        rhs = trace_quadratic(a, b) + trace_quadratic(a, c)
        assert lhs == rhs

    def test_mixed_representation_rejected(self):
        from isodyn.tensor import StructureError

        with pytest.raises(StructureError):
            trace_quadratic(InnerOperator.field("a"), InnerOperator.field("b", rep="scalar"))


class TestEndomorphism:
    """grad.(O_a f) = 0 for divergence-free a and f (polynomial check)."""

    @staticmethod
    def _apply_operator(a, f, d):
        # (O_a f)^M = a^K grad_K f^M - (grad_N a^M) f^N with polynomial
        # components encoded as {exponent tuple: Fraction}
        def pderiv(poly, k):
            out = {}
            for expo, c in poly.items():
                if expo[k] == 0:
                    continue
                new = list(expo)
                new[k] -= 1
                out[tuple(new)] = out.get(tuple(new), Fraction(0)) + c * expo[k]
            return out

        def pmul(p1, p2):
            out = {}
            for e1, c1 in p1.items():
                for e2, c2 in p2.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    out[e] = out.get(e, Fraction(0)) + c1 * c2
            return out

        def padd(p1, p2):
            out = dict(p1)
            for e, c in p2.items():
                out[e] = out.get(e, Fraction(0)) + c
            return {e: c for e, c in out.items() if c}

        result = []
        for m in range(d):
            acc = {}
            for k in range(d):
                acc = padd(acc, pmul(a[k], pderiv(f[m], k)))
                acc = padd(acc, {e: -c for e, c in pmul(pderiv(a[m], k), f[k]).items()})
            result.append(acc)
        return result, pderiv, padd

    def test_divergence_free_preserved_d3(self):
        d = 3
        zero3 = (0, 0, 0)

        def e(*expo):
            return tuple(expo)

        # each component independent of its own coordinate => div a = 0
        a = [
            {e(0, 2, 0): Fraction(1), e(0, 0, 1): Fraction(3)},   # y^2 + 3z
            {e(1, 0, 1): Fraction(2)},                            # 2 x z
            {e(1, 1, 0): Fraction(-1)},                           # -x y
        ]
        # f degree 3 with div f = 2xz + z^2 + d f3/dz = 0
        f = [
            {e(2, 0, 1): Fraction(1)},                            # x^2 z
            {e(0, 1, 2): Fraction(1)},                            # y z^2
            {e(1, 0, 2): Fraction(-1), e(0, 0, 3): Fraction(-1, 3)},
        ]

        result, pderiv, padd = self._apply_operator(a, f, d)
        div = {}
        for m in range(d):
            div = padd(div, pderiv(result[m], m))
        assert div == {}

        # sanity: inputs really are divergence-free
        for field in (a, f):
            dv = {}
            for m in range(d):
                dv = padd(dv, pderiv(field[m], m))
            assert dv == {}
