"""Cutoff-regularized integrals over the auxiliary Euclidean space.

Moment tensors of the sharp ball |P| <= Lambda under the measure
d^D P / (2 pi)^D, the angular normalization Omega_D (fixed so that
Omega_4 = 1/(8 pi^2)), the moment-level scaling law, and traces of
first-order inner-derivative operators over the cutoff momentum ball.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import GaussRat
from .tensor import (
    Idx,
    StructureError,
    TensorExpr,
    a_delta,
    a_dpoly,
    a_fdot,
    a_scal,
    iup,
)

MAX_DEGREE = 4


class UnsupportedMoment(ValueError):
    """Moment degree outside the supported range."""


@dataclass(frozen=True)
class InnerMoment:
    degree: int
    labels: tuple
    expr: TensorExpr
    note: str = ""


def _matchings(items: tuple) -> list[list[tuple]]:
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    out = []
    for k, second in enumerate(rest):
        for sub in _matchings(rest[:k] + rest[k + 1 :]):
            out.append([(first, second)] + sub)
    return out


def moment_scalar(n: int) -> TensorExpr:
    """Radial/normalization factor Omega_D Lambda^(D+n) / (D (D+2) ... (D+n))."""
    atoms = [a_scal("OmegaD"), a_scal("Lambda", n, 1)]
    for j in range(0, n + 2, 2):
        atoms.append(a_dpoly(j, -1))
    return TensorExpr.atoms(*atoms)


def moment(n: int, labels: tuple = ()) -> InnerMoment:
    """Ball moment of degree n: Int_{|P|<=Lambda} d^D P/(2 pi)^D P^{I_1}...P^{I_n}."""
    if n < 0:
        raise UnsupportedMoment("degree must be non-negative")
    if not labels:
        labels = tuple(iup(f"I{j+1}") for j in range(n))
    if len(labels) != n:
        raise UnsupportedMoment("need one inner label per momentum factor")
    if n % 2 == 1:
        return InnerMoment(n, labels, TensorExpr.zero(), note="odd moment vanishes by parity")
    if n > MAX_DEGREE:
        raise UnsupportedMoment(f"moments above degree {MAX_DEGREE} are not needed and not supported")
    scalar = moment_scalar(n)
    if n == 0:
        return InnerMoment(0, (), scalar)
    sym = TensorExpr.zero()
    for matching in _matchings(labels):
        prod = TensorExpr.number(1)
        for x, y in matching:
            prod = prod * TensorExpr.atoms(a_delta(x, y))
        sym = sym + prod
    return InnerMoment(n, labels, sym * scalar)


def _scale_cutoff(e: TensorExpr) -> TensorExpr:
    """Lambda -> rho * Lambda, with rho kept formal."""
    out = []
    for coeff, atoms in e.terms:
        new_atoms = []
        for at in atoms:
            new_atoms.append(at)
            if at.kind == "scal" and at.data[0] == "Lambda":
                new_atoms.append(a_scal("rho", at.exp, at.dexp))
        out.append((coeff, tuple(new_atoms)))
    return TensorExpr(out)


def scaling_check(n: int, rho=None) -> bool:
    """Moment-level scaling law: the degree-n moment at rho*Lambda equals
    rho^(D+n) times the moment at Lambda.

    Checked symbolically; a rational rho may be supplied to pin the formal
    symbol to a number, which must not change the verdict.
    """
    m = moment(n)
    scaled = _scale_cutoff(m.expr)
    expected = TensorExpr.atoms(a_scal("rho", n, 1)) * m.expr
    if scaled != expected:
        return False
    if rho is not None:
        from .tensor import substitute_dim, substitute_scalars

        for d in (2, 3, 4, 5):
            lhs = substitute_scalars(substitute_dim(scaled, d), {"rho": Fraction(rho)})
            rhs = substitute_scalars(substitute_dim(expected, d), {"rho": Fraction(rho)})
            if lhs != rhs:
                return False
    return True


# ---------------------------------------------------------------------------
# Omega_D


def omega_d_exact(d: int) -> tuple[Fraction, Fraction]:
    """Omega_D = (surface of S^(D-1)) / (2 pi)^D as (rational, power of pi).

    Surface(S^(D-1)) = 2 pi^(D/2) / Gamma(D/2); the Gamma value is rational
    for even D and rational times sqrt(pi) for odd D, so the result is an
    exact rational times an (half-)integer power of pi.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    if d % 2 == 0:
        gamma_rat = Fraction(math.factorial(d // 2 - 1))
        pi_pow = Fraction(d, 2) - d
        return Fraction(2) / (gamma_rat * 2**d), pi_pow
    # Gamma(d/2) = (d-2)!! sqrt(pi) / 2^((d-1)/2)
    dfact = 1
    for k in range(d - 2, 0, -2):
        dfact *= k
    gamma_rat = Fraction(dfact, 2 ** ((d - 1) // 2))
    pi_pow = Fraction(d, 2) - Fraction(1, 2) - d
    return Fraction(2) / (gamma_rat * 2**d), pi_pow


def omega_d_float(d: int) -> float:
    coeff, pi_pow = omega_d_exact(d)
    return float(coeff) * math.pi ** float(pi_pow)


def moment_component(n: int, component: tuple[int, ...], d: int, cutoff: float) -> float:
    """Numeric value of one component of the degree-n moment tensor."""
    if n % 2 == 1:
        return 0.0
    m = moment(n)
    if n == 0:
        rational = GaussRat(1)
    else:
        from .tensor import evaluate, substitute_dim

        sym_only = TensorExpr(
            [
                (c, tuple(at for at in atoms if at.kind == "deltaD"))
                for c, atoms in m.expr.terms
            ]
        )
        free = {("inner", lab.name): component[j] for j, lab in enumerate(m.labels)}
        rational = evaluate(sym_only, dim_inner=d, free_values=free)
    denom = 1
    for shift in range(0, n + 2, 2):
        denom *= d + shift
    return float(rational.re) * omega_d_float(d) * cutoff ** (d + n) / denom


# ---------------------------------------------------------------------------
# deterministic quadrature oracle (product rules, not Monte Carlo)


def _circle_rule(npts: int = 64):
    theta = np.arange(npts) * (2 * np.pi / npts)
    w = np.full(npts, 2 * np.pi / npts)
    return theta, w


def _sphere_monomial(d: int, powers: tuple[int, ...]) -> float:
    """Integral of prod sigma_i^powers over the unit sphere S^(d-1)."""
    if d == 2:
        theta, w = _circle_rule()
        vals = np.cos(theta) ** powers[0] * np.sin(theta) ** powers[1]
        return float(np.sum(w * vals))
    if d == 3:
        u, wu = np.polynomial.legendre.leggauss(40)
        theta, wt = _circle_rule()
        total = 0.0
        for ui, wui in zip(u, wu):
            si = math.sqrt(max(0.0, 1.0 - ui * ui))
            ring = (si * np.cos(theta)) ** powers[0] * (si * np.sin(theta)) ** powers[1]
            total += wui * (ui ** powers[2]) * float(np.sum(wt * ring))
        return total
    if d == 4:
        # Gauss-Chebyshev (2nd kind) absorbs the sin^2 weight exactly
        npts = 40
        k = np.arange(1, npts + 1)
        u1 = np.cos(k * np.pi / (npts + 1))
        w1 = (np.pi / (npts + 1)) * np.sin(k * np.pi / (npts + 1)) ** 2
        u2, w2 = np.polynomial.legendre.leggauss(40)
        theta, wt = _circle_rule()
        total = 0.0
        for a1, wa1 in zip(u1, w1):
            s1 = math.sqrt(max(0.0, 1.0 - a1 * a1))
            for a2, wa2 in zip(u2, w2):
                s2 = math.sqrt(max(0.0, 1.0 - a2 * a2))
                ring = (s1 * s2 * np.cos(theta)) ** powers[0] * (
                    s1 * s2 * np.sin(theta)
                ) ** powers[1]
                total += wa1 * wa2 * (s1 * a2) ** powers[2] * a1 ** powers[3] * float(
                    np.sum(wt * ring)
                )
        return total
    raise ValueError("quadrature oracle supports D in {2, 3, 4}")


def quadrature_moment_component(
    n: int, component: tuple[int, ...], d: int, cutoff: float
) -> float:
    """Independent product-rule quadrature of one moment component."""
    powers = [0] * d
    for ix in component:
        powers[ix] += 1
    r, wr = np.polynomial.legendre.leggauss(32)
    r = 0.5 * cutoff * (r + 1.0)
    wr = 0.5 * cutoff * wr
    radial = float(np.sum(wr * r ** (d - 1 + n)))
    return radial * _sphere_monomial(d, tuple(powers)) / (2 * np.pi) ** d


# ---------------------------------------------------------------------------
# first-order inner-derivative operators and their quadratic traces


@dataclass(frozen=True)
class InnerOperator:
    """a^K grad_K delta^M_N - grad_N a^M (vector) or a^K grad_K (scalar).

    The coefficient is a formal linear combination of named
    divergence-free fields.
    """

    coeff: tuple[tuple[Fraction, str], ...]
    rep: str = "vector"

    def __post_init__(self):
        if self.rep not in ("vector", "scalar"):
            raise StructureError(f"unknown representation {self.rep!r}")

    @staticmethod
    def field(name: str, rep: str = "vector") -> "InnerOperator":
        return InnerOperator(((Fraction(1), name),), rep)

    def scaled(self, q: Fraction) -> "InnerOperator":
        return InnerOperator(tuple((c * q, n) for c, n in self.coeff), self.rep)

    def __add__(self, other: "InnerOperator") -> "InnerOperator":
        if other.rep != self.rep:
            raise StructureError("cannot add operators of different representation")
        return InnerOperator(self.coeff + other.coeff, self.rep)


def trace_quadratic(op_a: InnerOperator, op_b: InnerOperator) -> TensorExpr:
    """Cutoff trace Tr_{X,Lambda} (O_a O_b) expanded via ball moments.

    Acting on plane waves, the composition splits into four patterns:

    * principal:  a^K b^L grad_K grad_L (x bundle delta)  -> the even
      moment gives -(a.b) times the degree-2 scalar; the mixed
      a (grad b) grad term is odd in P and integrates to zero;
    * -a^K grad_K (grad_N b^M): proportional to grad(div b) = 0;
    * -(grad a) b grad: odd in P, zero;
    * (grad_N a^M)(grad_M b^N): integrates by parts onto a grad(div b)
      shape, zero for divergence-free coefficients.

    Only the principal pattern survives; the vector representation adds
    the bundle trace delta^M_M = D.
    """
    if op_a.rep != op_b.rep:
        raise StructureError("trace needs both operators in the same representation")
    m2 = moment_scalar(2)  # coefficient of delta^{KL} in the degree-2 moment
    bundle = TensorExpr.atoms(a_dpoly(0)) if op_a.rep == "vector" else TensorExpr.number(1)
    principal = GaussRat(-1) * bundle * m2  # (i P_K)(i P_L) delta^{KL}
    out = TensorExpr.zero()
    for ca, fa in op_a.coeff:
        for cb, fb in op_b.coeff:
            out = out + (GaussRat(ca) * GaussRat(cb)) * principal * TensorExpr.atoms(
                a_fdot(fa, fb)
            )
    return out
