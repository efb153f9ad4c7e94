"""Divergent parts of one-loop spacetime integrals.

``div_part`` serves the published table of pole parts for integrals

    (2*pi)^-4 * Int d^4p  p^{mu_1} ... p^{mu_r} / prod_j (p + q_j)^2

with offsets q_1 = 0, q_2 = k_2, q_3 = k_2 + k_3, q_4 = k_2 + k_3 + k_4,
falling back to an independent reduction for cases outside the table.

The oracle derives each pole from first principles: Feynman
parametrization, a shift of the loop momentum, symmetric tensor
reduction (odd moments vanish, even moments reduce to metric
symmetrizations), and the single master formula for the pole of
Int d^dp (p^2)^a / (p^2 + Delta)^n.  Only the pole survives; everything
is exact rational arithmetic, with simplex moments integrated via
prod(a_i!) / (n - 1 + sum a_i)!.

Results are coefficients of the formal unit Omega_4 / eps, i.e. of
1/(8 pi^2) per inverse power of the deviation from four dimensions, with
the Wick-rotation factor i kept explicit so table entries match the
Minkowski convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import GaussRat, I
from .tensor import LORENTZ, Idx, TensorExpr, a_dot, a_eta, a_mom, lup

_DEFAULT_LABELS = ("mu", "nu", "rho", "sigma")

MAX_RANK = 4
MAX_DENOMS = 4


class UnsupportedIntegral(ValueError):
    """Rank or denominator count outside the supported range."""


@dataclass(frozen=True)
class LoopIntegral:
    rank: int
    denoms: int
    labels: tuple = ()

    def __post_init__(self):
        if self.rank < 0 or self.denoms < 1:
            raise UnsupportedIntegral("rank must be >= 0 and denominators >= 1")
        if self.rank > MAX_RANK or self.denoms > MAX_DENOMS:
            raise UnsupportedIntegral(
                f"rank {self.rank} / {self.denoms} denominators outside the supported table"
            )
        if not self.labels:
            object.__setattr__(
                self, "labels", tuple(lup(_DEFAULT_LABELS[i]) for i in range(self.rank))
            )
        if len(self.labels) != self.rank:
            raise UnsupportedIntegral("need one lorentz label per numerator factor")
        for ix in self.labels:
            if ix.space != LORENTZ or not ix.up:
                raise UnsupportedIntegral("numerator labels must be upper lorentz")


@dataclass(frozen=True)
class DivergentPart:
    """pole_coeff multiplies the formal symbol Omega_4 / eps."""

    pole_coeff: TensorExpr

    def is_zero(self) -> bool:
        return self.pole_coeff.is_zero()


def _offsets(n: int) -> list[list[int]]:
    """q_j as lists of external leg ids (q_1 empty, q_2 = [2], ...)."""
    return [[l for l in range(2, j + 1)] for j in range(1, n + 1)]


def momentum_sum(legs, label: Idx) -> TensorExpr:
    out = TensorExpr.zero()
    for leg in legs:
        out = out + TensorExpr.atoms(a_mom(leg, label))
    return out


# -- the published table ----------------------------------------------------


def _table_entry(rank: int, n: int, labels: tuple) -> TensorExpr | None:
    E = TensorExpr.atoms
    half = Fraction(1, 2)
    if (rank, n) == (0, 1):
        return TensorExpr.zero()
    if (rank, n) == (0, 2):
        return TensorExpr.number(I)
    if (rank, n) == (1, 2):
        return E(a_mom(2, labels[0]), coeff=I * (-half))
    if (rank, n) == (2, 2):
        m1, m2 = labels
        return E(a_mom(2, m1), a_mom(2, m2), coeff=I * Fraction(1, 3)) + E(
            a_eta(m1, m2), a_dot(LORENTZ, 2, 2), coeff=I * Fraction(-1, 12)
        )
    if (rank, n) == (2, 3):
        return E(a_eta(labels[0], labels[1]), coeff=I * Fraction(1, 4))
    if (rank, n) == (3, 3):
        m1, m2, m3 = labels
        out = TensorExpr.zero()
        for (a, b), c in (((m1, m2), m3), ((m2, m3), m1), ((m3, m1), m2)):
            out = out + E(a_eta(a, b), a_mom(2, c), coeff=I * Fraction(-1, 6)) + E(
                a_eta(a, b), a_mom(3, c), coeff=I * Fraction(-1, 12)
            )
        return out
    if (rank, n) == (4, 4):
        m1, m2, m3, m4 = labels
        out = TensorExpr.zero()
        for (a, b), (c, d) in (((m1, m2), (m3, m4)), ((m1, m3), (m2, m4)), ((m1, m4), (m2, m3))):
            out = out + E(a_eta(a, b), a_eta(c, d), coeff=I * Fraction(1, 24))
        return out
    return None


TABLE_CASES = ((0, 1), (0, 2), (1, 2), (2, 2), (2, 3), (3, 3), (4, 4))


def div_part(integral: LoopIntegral) -> DivergentPart:
    """Pole part from the table, delegating off-table cases to the oracle."""
    if integral.rank - 2 * integral.denoms + 4 < 0:
        return DivergentPart(TensorExpr.zero())
    entry = _table_entry(integral.rank, integral.denoms, integral.labels)
    if entry is not None:
        return DivergentPart(entry)
    return reduce_oracle(integral)


# -- independent reduction ---------------------------------------------------


def _simplex_moment(exponents: tuple[int, ...]) -> Fraction:
    """Integral of prod x_i^{a_i} over the standard simplex sum(x) = 1."""
    n = len(exponents)
    num = 1
    for a in exponents:
        num *= math.factorial(a)
    return Fraction(num, math.factorial(n - 1 + sum(exponents)))


class _XPoly:
    """Polynomial in the Feynman parameters with TensorExpr coefficients."""

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms: dict[tuple, TensorExpr] = terms or {}

    @staticmethod
    def const(n: int, value: TensorExpr) -> "_XPoly":
        return _XPoly(n, {tuple([0] * n): value})

    @staticmethod
    def xvar(n: int, i: int, value: TensorExpr) -> "_XPoly":
        expo = [0] * n
        expo[i] = 1
        return _XPoly(n, {tuple(expo): value})

    def __add__(self, other: "_XPoly") -> "_XPoly":
        out = dict(self.terms)
        for e, v in other.terms.items():
            out[e] = out[e] + v if e in out else v
        return _XPoly(self.n, {e: v for e, v in out.items() if not v.is_zero()})

    def __mul__(self, other: "_XPoly") -> "_XPoly":
        out: dict[tuple, TensorExpr] = {}
        for e1, v1 in self.terms.items():
            for e2, v2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = v1 * v2
                out[e] = out[e] + prod if e in out else prod
        return _XPoly(self.n, {e: v for e, v in out.items() if not v.is_zero()})

    def scaled(self, q) -> "_XPoly":
        return _XPoly(self.n, {e: q * v for e, v in self.terms.items()})

    def integrate_simplex(self) -> TensorExpr:
        out = TensorExpr.zero()
        for e, v in self.terms.items():
            out = out + _simplex_moment(e) * v
        return out


def _pairings(indices: tuple) -> list[list[tuple]]:
    if not indices:
        return [[]]
    first, rest = indices[0], indices[1:]
    out = []
    for k, second in enumerate(rest):
        for sub in _pairings(rest[:k] + rest[k + 1 :]):
            out.append([(first, second)] + sub)
    return out


def reduce_oracle(integral: LoopIntegral) -> DivergentPart:
    """Re-derive the pole by parametrization, shift and moment reduction."""
    r, n, labels = integral.rank, integral.denoms, integral.labels
    qs = _offsets(n)

    # Q^mu(x) = sum_i x_i q_i^mu  and  Delta(x) = sum_i x_i q_i^2 - Q^2
    def qvec(label: Idx) -> _XPoly:
        out = _XPoly(n)
        for i, legs in enumerate(qs):
            if legs:
                out = out + _XPoly.xvar(n, i, momentum_sum(legs, label))
        return out

    c1, c2 = Idx("_o1", LORENTZ, True), Idx("_o1", LORENTZ, False)
    delta = _XPoly(n)
    for i, legs in enumerate(qs):
        if legs:
            delta = delta + _XPoly.xvar(
            n, i, momentum_sum(legs, c1) * momentum_sum(legs, c2)
        )
    delta = delta + (qvec(c1) * qvec(c2)).scaled(GaussRat(-1))

    total = TensorExpr.zero()
    positions = tuple(range(r))
    for a2 in range(0, r + 1, 2):
        a = a2 // 2
        m = a + 2 - n
        if m < 0:
            continue
        pref = I * GaussRat(Fraction((-1) ** (m + (r - a2)), 2**a * math.factorial(m)))
        for subset in itertools.combinations(positions, a2):
            sym = TensorExpr.zero()
            for pairing in _pairings(tuple(labels[i] for i in subset)):
                prod = TensorExpr.number(1)
                for x, y in pairing:
                    prod = prod * TensorExpr.atoms(a_eta(x, y))
                sym = sym + prod
            if a2 == 0:
                sym = TensorExpr.number(1)
            poly = _XPoly.const(n, TensorExpr.number(1))
            for i in positions:
                if i not in subset:
                    poly = poly * qvec(labels[i])
            for _ in range(m):
                poly = poly * delta
            total = total + pref * (sym * poly.integrate_simplex())
    return DivergentPart(total)
