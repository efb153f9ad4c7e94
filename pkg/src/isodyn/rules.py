"""Momentum-space propagators and vertex factors.

All momenta are incoming; every vertex is returned together with its
spacetime and inner momentum-conservation constraints rather than with
the constraints substituted, so that power counting and amplitude
assembly can work with the unconstrained form.

Gauge legs carry a lower lorentz label and an upper inner label; ghost
legs carry only an inner label.  The propagator denominator 1/(k^2-i*eps)
is an inert atomic factor: the infinitesimal imaginary part is never
manipulated algebraically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exact import GaussRat
from .tensor import (
    INNER,
    LORENTZ,
    Idx,
    StructureError,
    TensorExpr,
    a_delta,
    a_dot,
    a_eta,
    a_imom,
    a_invprop,
    a_mom,
    a_scal,
    ilo,
    iup,
    llo,
    lup,
    permute_legs,
    substitute_momenta,
    substitute_scalars,
)

GAUGE = "gauge"
GHOST_IN = "ghost_in"
GHOST_OUT = "ghost_out"


@dataclass(frozen=True)
class Leg:
    id: int
    kind: str
    lorentz: Idx | None
    inner: Idx

    def __post_init__(self):
        if self.kind == GAUGE:
            if self.lorentz is None or self.lorentz.space != LORENTZ or self.lorentz.up:
                raise StructureError("gauge legs carry a lower lorentz label")
        elif self.kind in (GHOST_IN, GHOST_OUT):
            if self.lorentz is not None:
                raise StructureError("ghost legs carry no lorentz label")
        else:
            raise StructureError(f"unknown leg kind {self.kind!r}")
        if self.inner.space != INNER or not self.inner.up:
            raise StructureError("legs carry an upper inner label")


def gauge_leg(i: int, lorentz: str, inner: str) -> Leg:
    return Leg(i, GAUGE, llo(lorentz), iup(inner))


def ghost_leg(i: int, kind: str, inner: str) -> Leg:
    return Leg(i, kind, None, iup(inner))


@dataclass(frozen=True)
class RuleResult:
    expr: TensorExpr
    constraints: tuple  # ((space, leg ids summing to zero), ...)

    def constraint_json(self) -> dict:
        return {space: list(legs) for space, legs in self.constraints}


def _conservation(leg_ids) -> tuple:
    return ((LORENTZ, tuple(leg_ids)), (INNER, tuple(leg_ids)))


def default_gauge_legs(n: int) -> tuple[Leg, ...]:
    names = ("mu", "nu", "lam", "sig")
    inner = ("M", "N", "L", "S")
    return tuple(gauge_leg(i + 1, names[i], inner[i]) for i in range(n))


# ---------------------------------------------------------------------------
# propagators


def gauge_propagator(
    xi: Fraction | None = None,
    leg: int = 1,
    lorentz: tuple[str, str] = ("mu", "nu"),
    inner: tuple[str, str] = ("M", "N"),
) -> TensorExpr:
    """(eta_{mu nu} - (1 - xi) k_mu k_nu / k^2) delta^{MN} / (k^2 - i eps).

    ``xi`` is kept formal when None.
    """
    mu, nu = llo(lorentz[0]), llo(lorentz[1])
    dM, dN = iup(inner[0]), iup(inner[1])
    expr = (
        TensorExpr.atoms(a_eta(mu, nu), a_delta(dM, dN), a_invprop(leg))
        + TensorExpr.atoms(
            a_mom(leg, mu),
            a_mom(leg, nu),
            a_dot(LORENTZ, leg, leg, -1),
            a_delta(dM, dN),
            a_invprop(leg),
            coeff=-1,
        )
        + TensorExpr.atoms(
            a_scal("xi"),
            a_mom(leg, mu),
            a_mom(leg, nu),
            a_dot(LORENTZ, leg, leg, -1),
            a_delta(dM, dN),
            a_invprop(leg),
        )
    )
    if xi is not None:
        expr = substitute_scalars(expr, {"xi": Fraction(xi)})
    return expr


def ghost_propagator(leg: int = 1, labels: tuple[str, str] = ("R", "S")) -> TensorExpr:
    """delta^R_S / (k^2 - i eps); independent of the gauge parameter."""
    return TensorExpr.atoms(a_delta(iup(labels[0]), ilo(labels[1])), a_invprop(leg))


# ---------------------------------------------------------------------------
# vertices


def _require_kinds(legs, kinds) -> None:
    got = tuple(leg.kind for leg in legs)
    if got != tuple(kinds):
        raise StructureError(f"vertex wants leg kinds {kinds}, got {got}")


def vertex3(legs: tuple[Leg, Leg, Leg] | None = None) -> RuleResult:
    """Tri-linear gauge self-coupling vertex for incoming legs 1, 2, 3."""
    if legs is None:
        legs = default_gauge_legs(3)
    _require_kinds(legs, (GAUGE, GAUGE, GAUGE))
    l1, l2, l3 = legs
    lam2 = a_scal("Lambda", 2)

    def antisym_block(kmom: Leg, a: Idx, b: Idx, c: Idx) -> TensorExpr:
        # k_a eta_{bc} - k_b eta_{ca} with k the spacetime momentum of kmom
        return TensorExpr.atoms(a_mom(kmom.id, a), a_eta(b, c)) - TensorExpr.atoms(
            a_mom(kmom.id, b), a_eta(c, a)
        )

    term1 = TensorExpr.atoms(a_imom(l1.id, l3.inner), a_delta(l1.inner, l2.inner)) * (
        antisym_block(l2, l3.lorentz, l1.lorentz, l2.lorentz)
    )
    term2 = TensorExpr.atoms(a_imom(l2.id, l1.inner), a_delta(l2.inner, l3.inner)) * (
        antisym_block(l3, l1.lorentz, l2.lorentz, l3.lorentz)
    )
    term3 = TensorExpr.atoms(a_imom(l3.id, l2.inner), a_delta(l3.inner, l1.inner)) * (
        antisym_block(l1, l2.lorentz, l3.lorentz, l1.lorentz)
    )
    expr = GaussRat(-2) * TensorExpr.atoms(lam2) * (term1 + term2 + term3)
    return RuleResult(expr, _conservation([l.id for l in legs]))


def vertex4(legs: tuple[Leg, Leg, Leg, Leg] | None = None) -> RuleResult:
    """Quadri-linear gauge self-coupling vertex for incoming legs 1..4."""
    if legs is None:
        legs = default_gauge_legs(4)
    _require_kinds(legs, (GAUGE,) * 4)
    l1, l2, l3, l4 = legs
    mu, nu, rho, sig = (l.lorentz for l in legs)
    M, N, R, S = (l.inner for l in legs)

    def kk(la: Leg, ixa: Idx, lb: Leg, ixb: Idx, da: Idx, db: Idx, sign: int) -> TensorExpr:
        return TensorExpr.atoms(
            a_imom(la.id, ixa), a_imom(lb.id, ixb), a_delta(da, db), coeff=sign
        )

    def etaeta(a, b, c, d, e, f, g, h) -> TensorExpr:
        return TensorExpr.atoms(a_eta(a, b), a_eta(c, d)) - TensorExpr.atoms(
            a_eta(e, f), a_eta(g, h)
        )

    block1 = (
        kk(l1, R, l2, S, M, N, 1)
        + kk(l2, S, l3, M, N, R, -1)
        + kk(l3, M, l4, N, R, S, 1)
        + kk(l1, R, l4, N, M, S, -1)
    ) * etaeta(mu, nu, rho, sig, mu, sig, nu, rho)
    block2 = (
        kk(l1, S, l2, R, M, N, 1)
        + kk(l1, S, l3, N, M, R, -1)
        + kk(l3, N, l4, M, R, S, 1)
        + kk(l2, R, l4, M, N, S, -1)
    ) * etaeta(mu, nu, rho, sig, mu, rho, nu, sig)
    block3 = (
        kk(l1, N, l3, S, M, R, 1)
        + kk(l1, N, l4, R, M, S, -1)
        + kk(l2, M, l4, R, N, S, 1)
        + kk(l2, M, l3, S, N, R, -1)
    ) * etaeta(mu, rho, nu, sig, mu, sig, nu, rho)

    expr = GaussRat(-1) * TensorExpr.atoms(a_scal("Lambda", 2)) * (block1 + block2 + block3)
    return RuleResult(expr, _conservation([l.id for l in legs]))


def vertex_ghost(legs: tuple[Leg, Leg, Leg] | None = None) -> RuleResult:
    """Antighost-ghost-gauge vertex: legs (outgoing ghost, incoming ghost, gauge)."""
    if legs is None:
        legs = (
            ghost_leg(1, GHOST_OUT, "R"),
            ghost_leg(2, GHOST_IN, "S"),
            gauge_leg(3, "mu", "M"),
        )
    _require_kinds(legs, (GHOST_OUT, GHOST_IN, GAUGE))
    lo_, li, lg = legs
    expr = GaussRat(-1) * TensorExpr.atoms(a_scal("Lambda", 2)) * (
        TensorExpr.atoms(a_imom(li.id, lg.inner), a_delta(lo_.inner, li.inner), a_mom(lo_.id, lg.lorentz))
        - TensorExpr.atoms(a_imom(lg.id, li.inner), a_delta(lg.inner, lo_.inner), a_mom(lo_.id, lg.lorentz))
    )
    return RuleResult(expr, _conservation([l.id for l in legs]))


# ---------------------------------------------------------------------------
# constraint handling and the permutation oracle


def eliminate_last_leg(expr: TensorExpr, leg_ids) -> TensorExpr:
    """Substitute k_last = -sum(others), K_last likewise."""
    leg_ids = list(leg_ids)
    last = leg_ids[-1]
    repl = [(Fraction(-1), leg) for leg in leg_ids[:-1]]
    out = substitute_momenta(expr, LORENTZ, {last: repl})
    return substitute_momenta(out, INNER, {last: repl})


def permuted_vertex(result: RuleResult, legs, perm: dict[int, int]) -> TensorExpr:
    """Simultaneous permutation of momenta, inner momenta and index pairs."""
    label_map = {}
    by_id = {leg.id: leg for leg in legs}
    for leg in legs:
        target = by_id[perm[leg.id]]
        if leg.lorentz is not None:
            label_map[(LORENTZ, leg.lorentz.name)] = target.lorentz.name
        label_map[(INNER, leg.inner.name)] = target.inner.name
    return permute_legs(result.expr, perm, label_map)


def bose_symmetric(result: RuleResult, legs, perm: dict[int, int]) -> bool:
    """Invariance under a leg permutation on the conservation surface."""
    ids = [leg.id for leg in legs]
    base = eliminate_last_leg(result.expr, ids)
    swapped = eliminate_last_leg(permuted_vertex(result, legs, perm), ids)
    return base == swapped


def vanishes_at_zero_inner_momenta(result: RuleResult, legs) -> bool:
    zero = {leg.id: [] for leg in legs}
    return substitute_momenta(result.expr, INNER, zero).is_zero()
