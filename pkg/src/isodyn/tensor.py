"""Commutative indexed-tensor algebra with exact coefficients.

Terms are multisets of atoms (metrics, momenta, dot products, formal
scalars) with free/dummy index bookkeeping over two index spaces:

* ``lorentz`` -- spacetime, range 4, metric diag(-1, 1, 1, 1);
* ``inner``   -- the auxiliary Euclidean space, symbolic range D,
  metric the identity.

Expressions are immutable and always held in a unique canonical form:
metrics contracted away, paired momenta folded into dot products, dummy
labels serially renamed, atoms deterministically ordered.  Coefficients
are exact Gaussian rationals; no floats ever enter this module.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .exact import GaussRat, RatLike

LORENTZ = "lorentz"
INNER = "inner"

#: Minkowski metric, signature (-, +, +, +).
ETA_DIAG = (Fraction(-1), Fraction(1), Fraction(1), Fraction(1))

_DUMMY_PREFIX = {"lorentz": "_l", "inner": "_i"}


class StructureError(ValueError):
    """Malformed index structure (bad pairing, unknown label, ...)."""


@dataclass(frozen=True)
class Idx:
    """An index label: name, space and variance."""

    name: str
    space: str
    up: bool

    def __post_init__(self):
        if self.space not in (LORENTZ, INNER):
            raise StructureError(f"unknown index space {self.space!r}")

    def flipped(self) -> "Idx":
        return Idx(self.name, self.space, not self.up)

    def to_json(self) -> list:
        return [self.name, self.space, self.up]

    @staticmethod
    def from_json(obj) -> "Idx":
        return Idx(obj[0], obj[1], bool(obj[2]))


def lup(name: str) -> Idx:
    return Idx(name, LORENTZ, True)


def llo(name: str) -> Idx:
    return Idx(name, LORENTZ, False)


def iup(name: str) -> Idx:
    return Idx(name, INNER, True)


def ilo(name: str) -> Idx:
    return Idx(name, INNER, False)


# Atom kinds.  ``exp`` is a plain integer power for the scalar-like
# kinds; ``dexp`` adds ``dexp * D`` to the exponent (scal only, e.g.
# Lambda**(D+2) is exp=2, dexp=1).
_KINDS = ("scal", "dpoly", "dot", "invprop", "fdot", "eta", "deltaD", "mom", "imom", "fop")
_KIND_RANK = {k: r for r, k in enumerate(_KINDS)}
_SCALARLIKE = ("scal", "dpoly", "dot", "invprop", "fdot")
_SYMMETRIC_PAIR = ("eta", "deltaD")


@dataclass(frozen=True)
class Atom:
    kind: str
    data: tuple = ()
    idx: tuple = ()
    exp: int = 1
    dexp: int = 0

    def serial(self) -> tuple:
        return (
            self.kind,
            self.data,
            self.exp,
            self.dexp,
            tuple((ix.name, ix.space, ix.up) for ix in self.idx),
        )

    def to_json(self) -> dict:
        out = {"kind": self.kind, "data": list(self.data)}
        if self.idx:
            out["idx"] = [ix.to_json() for ix in self.idx]
        if self.exp != 1:
            out["exp"] = self.exp
        if self.dexp:
            out["dexp"] = self.dexp
        return out

    @staticmethod
    def from_json(obj) -> "Atom":
        return Atom(
            obj["kind"],
            tuple(obj.get("data", [])),
            tuple(Idx.from_json(i) for i in obj.get("idx", [])),
            int(obj.get("exp", 1)),
            int(obj.get("dexp", 0)),
        )


_RESERVED = ("_l", "_i", "_m", "_c")


def _check_label(ix: Idx) -> None:
    if any(
        ix.name.startswith(p) and ix.name[len(p) :].isdigit() for p in _RESERVED
    ):
        raise StructureError(f"label {ix.name!r} collides with a generated dummy name")


def a_eta(a: Idx, b: Idx) -> Atom:
    if a.space != LORENTZ or b.space != LORENTZ:
        raise StructureError("eta carries two lorentz labels")
    return Atom("eta", idx=(a, b))


def a_delta(a: Idx, b: Idx) -> Atom:
    if a.space != INNER or b.space != INNER:
        raise StructureError("inner delta carries two inner labels")
    return Atom("deltaD", idx=(a, b))


def a_mom(leg: int, ix: Idx) -> Atom:
    if ix.space != LORENTZ:
        raise StructureError("momentum carries a lorentz label")
    return Atom("mom", data=(leg,), idx=(ix,))


def a_imom(leg: int, ix: Idx) -> Atom:
    if ix.space != INNER:
        raise StructureError("inner momentum carries an inner label")
    return Atom("imom", data=(leg,), idx=(ix,))


def a_dot(space: str, l1: int, l2: int, exp: int = 1) -> Atom:
    return Atom("dot", data=(space, min(l1, l2), max(l1, l2)), exp=exp)


def a_scal(name: str, exp: int = 1, dexp: int = 0) -> Atom:
    return Atom("scal", data=(name,), exp=exp, dexp=dexp)


def a_dpoly(shift: int, exp: int = 1) -> Atom:
    return Atom("dpoly", data=(shift,), exp=exp)


def a_invprop(leg: int, exp: int = 1) -> Atom:
    return Atom("invprop", data=(leg,), exp=exp)


def a_fop(name: str, a: Idx, b: Idx) -> Atom:
    if a.space != LORENTZ or b.space != LORENTZ:
        raise StructureError("field-strength atom carries two lorentz labels")
    return Atom("fop", data=(name,), idx=(a, b))


def a_fdot(n1: str, n2: str) -> Atom:
    return Atom("fdot", data=tuple(sorted((n1, n2))))


class TensorExpr:
    """A canonical linear combination of atom products."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[GaussRat, tuple[Atom, ...]]] = (), _canonical=False):
        if _canonical:
            object.__setattr__(self, "terms", tuple(terms))
            return
        object.__setattr__(self, "terms", _canon_terms(terms))

    def __setattr__(self, name, value):
        raise AttributeError("TensorExpr is immutable")

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero() -> "TensorExpr":
        return TensorExpr(())

    @staticmethod
    def number(q: RatLike) -> "TensorExpr":
        return TensorExpr([(GaussRat.coerce(q), ())])

    @staticmethod
    def atoms(*atoms: Atom, coeff: RatLike = 1) -> "TensorExpr":
        for at in atoms:
            for ix in at.idx:
                _check_label(ix)
        return TensorExpr([(GaussRat.coerce(coeff), tuple(atoms))])

    # -- ring operations ---------------------------------------------

    def __add__(self, other: "TensorExpr") -> "TensorExpr":
        return TensorExpr(list(self.terms) + list(other.terms))

    def __sub__(self, other: "TensorExpr") -> "TensorExpr":
        return self + (-other)

    def __neg__(self) -> "TensorExpr":
        return TensorExpr([(-c, a) for c, a in self.terms], _canonical=True)

    def __mul__(self, other) -> "TensorExpr":
        if isinstance(other, TensorExpr):
            prods = []
            for c1, a1 in self.terms:
                for c2, a2 in other.terms:
                    prods.append((c1 * c2, _merge_disjoint(a1, a2)))
            return TensorExpr(prods)
        return TensorExpr([(GaussRat.coerce(other) * c, a) for c, a in self.terms])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple((c, tuple(a.serial() for a in ats)) for c, ats in self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    # -- structure ---------------------------------------------------

    def free_indices(self) -> frozenset[tuple[str, str, bool]]:
        if not self.terms:
            return frozenset()
        return _free_of(self.terms[0][1])

    def serial(self) -> tuple:
        return tuple((str(c), tuple(a.serial() for a in ats)) for c, ats in self.terms)

    def __repr__(self) -> str:
        return f"TensorExpr({len(self.terms)} terms)"

    # -- serialization -----------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {"coeff": c.to_json(), "atoms": [a.to_json() for a in ats]}
                for c, ats in self.terms
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json_obj(obj) -> "TensorExpr":
        return TensorExpr(
            [
                (GaussRat.from_json(t["coeff"]), tuple(Atom.from_json(a) for a in t["atoms"]))
                for t in obj["terms"]
            ]
        )

    @staticmethod
    def from_json(s: str) -> "TensorExpr":
        return TensorExpr.from_json_obj(json.loads(s))

    def to_latex(self) -> str:
        return latex(self)


def canonicalize(e: TensorExpr) -> TensorExpr:
    """Return the unique canonical form of ``e`` (idempotent)."""
    return TensorExpr(e.terms)


# ---------------------------------------------------------------------------
# canonicalization machinery


def _merge_disjoint(a1: tuple, a2: tuple) -> tuple:
    """Concatenate atom tuples, renaming dummies of a2 that clash with a1."""
    free1 = {}
    for at in a1:
        for ix in at.idx:
            free1.setdefault((ix.space, ix.name), 0)
            free1[(ix.space, ix.name)] += 1
    counts2 = {}
    for at in a2:
        for ix in at.idx:
            counts2.setdefault((ix.space, ix.name), 0)
            counts2[(ix.space, ix.name)] += 1
    # a dummy of a2 (appearing twice there) that also appears in a1 must be
    # renamed before concatenation; shared single labels are contractions
    # introduced deliberately by the caller.
    rename = {}
    used = set(free1) | set(counts2)
    serial = 0
    for key, n in counts2.items():
        if n == 2 and key in free1:
            space = key[0]
            while True:
                cand = (space, f"_m{serial}")
                serial += 1
                if cand not in used:
                    used.add(cand)
                    rename[key] = cand[1]
                    break
    if not rename:
        return a1 + a2
    out = []
    for at in a2:
        new_idx = tuple(
            Idx(rename.get((ix.space, ix.name), ix.name), ix.space, ix.up) for ix in at.idx
        )
        out.append(Atom(at.kind, at.data, new_idx, at.exp, at.dexp))
    return a1 + tuple(out)


def _free_of(atoms: Sequence[Atom]) -> frozenset:
    occ = {}
    for at in atoms:
        for ix in at.idx:
            occ.setdefault((ix.space, ix.name), []).append(ix.up)
    return frozenset((sp, nm, ups[0]) for (sp, nm), ups in occ.items() if len(ups) == 1)


def _occurrences(atoms: Sequence[Atom]) -> dict:
    occ = {}
    for ai, at in enumerate(atoms):
        for si, ix in enumerate(at.idx):
            occ.setdefault((ix.space, ix.name), []).append((ai, si))
    return occ


def _validate(atoms: Sequence[Atom]) -> dict:
    occ = _occurrences(atoms)
    for (sp, nm), lst in occ.items():
        if len(lst) > 2:
            raise StructureError(f"label {nm!r} ({sp}) appears {len(lst)} times in one term")
        if len(lst) == 2:
            u1 = atoms[lst[0][0]].idx[lst[0][1]].up
            u2 = atoms[lst[1][0]].idx[lst[1][1]].up
            if u1 == u2:
                raise StructureError(
                    f"label {nm!r} ({sp}): contraction must pair one upper with one lower"
                )
    return occ


def _trace_value(kind: str) -> tuple[GaussRat | None, Atom | None]:
    # eta^mu_mu = 4; inner delta trace = D
    if kind == "eta":
        return GaussRat(4), None
    return None, Atom("dpoly", data=(0,))


def _rewrite_pass(coeff: GaussRat, atoms: list) -> tuple[GaussRat, bool, bool]:
    """One metric-absorption / momentum-pairing pass.

    Returns (coeff, changed, is_zero); mutates ``atoms``.
    """
    occ = _validate(atoms)
    for ai, at in enumerate(atoms):
        if at.kind in _SYMMETRIC_PAIR or at.kind == "fop":
            k0 = (at.idx[0].space, at.idx[0].name)
            k1 = (at.idx[1].space, at.idx[1].name)
            if k0 == k1:
                if at.kind == "fop":
                    return coeff, True, True  # antisymmetric self-trace
                val, extra = _trace_value(at.kind)
                del atoms[ai]
                if val is not None:
                    coeff = coeff * val
                if extra is not None:
                    atoms.append(extra)
                return coeff, True, False
            if at.kind == "fop":
                continue
            for slot, other_slot in ((0, 1), (1, 0)):
                key = (at.idx[slot].space, at.idx[slot].name)
                if len(occ[key]) == 2:
                    partner = [p for p in occ[key] if p[0] != ai][0]
                    pi, ps = partner
                    pat = atoms[pi]
                    keep = at.idx[other_slot]
                    new_idx = list(pat.idx)
                    new_idx[ps] = Idx(keep.name, keep.space, keep.up)
                    atoms[pi] = Atom(pat.kind, pat.data, tuple(new_idx), pat.exp, pat.dexp)
                    del atoms[ai]
                    return coeff, True, False
    for (sp, nm), lst in occ.items():
        if len(lst) != 2:
            continue
        (a1, _), (a2, _) = lst
        if a1 == a2:
            continue
        k1, k2 = atoms[a1].kind, atoms[a2].kind
        if k1 in ("mom", "imom") and k2 == k1:
            leg1 = atoms[a1].data[0]
            leg2 = atoms[a2].data[0]
            space = LORENTZ if k1 == "mom" else INNER
            for i in sorted((a1, a2), reverse=True):
                del atoms[i]
            atoms.append(a_dot(space, leg1, leg2))
            return coeff, True, False
    return coeff, False, False


def _merge_scalarlike(atoms: list) -> list:
    merged: dict[tuple, list] = {}
    out = []
    for at in atoms:
        if at.kind in _SCALARLIKE:
            key = (at.kind, at.data)
            if key in merged:
                merged[key][0] += at.exp
                merged[key][1] += at.dexp
            else:
                merged[key] = [at.exp, at.dexp]
        else:
            out.append(at)
    for (kind, data), (exp, dexp) in merged.items():
        if exp == 0 and dexp == 0:
            continue
        out.append(Atom(kind, data, (), exp, dexp))
    return out


def _slot_sig(ix: Idx, dummies: set) -> tuple:
    if (ix.space, ix.name) in dummies:
        return (ix.space, ix.up, 0, "")
    return (ix.space, ix.up, 1, ix.name)


def _base_key(at: Atom, dummies: set) -> tuple:
    return (
        _KIND_RANK[at.kind],
        at.data,
        at.exp,
        at.dexp,
        tuple(_slot_sig(ix, dummies) for ix in at.idx),
    )


_ORBIT_CAP = 40320


def _canon_label_order(coeff: GaussRat, atoms: list) -> tuple[GaussRat, tuple] | None:
    """Pick the canonical atom order and dummy naming for one term.

    Searches the finite orbit generated by permutations of atoms with
    identical label-independent keys and by slot swaps of (anti)symmetric
    atoms touching a dummy.  Detects terms that cancel against their own
    relabeling (antisymmetry) and returns None for those.
    """
    occ = _occurrences(atoms)
    dummies = {key for key, lst in occ.items() if len(lst) == 2}

    # pre-normalize slot order of symmetric atoms over free slots only
    normed = []
    base_sign = 1
    for at in atoms:
        if at.kind in _SYMMETRIC_PAIR or at.kind == "fop":
            d0 = (at.idx[0].space, at.idx[0].name) in dummies
            d1 = (at.idx[1].space, at.idx[1].name) in dummies
            if not d0 and not d1:
                s0 = (not at.idx[0].up, at.idx[0].name)
                s1 = (not at.idx[1].up, at.idx[1].name)
                if s1 < s0:
                    if at.kind == "fop":
                        base_sign = -base_sign
                    at = Atom(at.kind, at.data, (at.idx[1], at.idx[0]), at.exp, at.dexp)
        normed.append(at)
    atoms = sorted(normed, key=lambda a: _base_key(a, dummies))

    groups = []
    for _, grp in itertools.groupby(range(len(atoms)), key=lambda i: _base_key(atoms[i], dummies)):
        grp = list(grp)
        if len(grp) > 1 and any(
            (ix.space, ix.name) in dummies for i in grp for ix in atoms[i].idx
        ):
            groups.append(grp)
    swap_sites = [
        i
        for i, at in enumerate(atoms)
        if (at.kind in _SYMMETRIC_PAIR or at.kind == "fop")
        and any((ix.space, ix.name) in dummies for ix in at.idx)
    ]

    n_orbit = 1
    for grp in groups:
        for m in range(2, len(grp) + 1):
            n_orbit *= m
    n_orbit *= 2 ** len(swap_sites)
    if n_orbit > _ORBIT_CAP:
        raise StructureError("term too entangled to canonicalize (orbit cap exceeded)")

    best = None
    seen: dict[tuple, int] = {}
    perms_per_group = [list(itertools.permutations(grp)) for grp in groups]
    for perm_choice in itertools.product(*perms_per_group) if groups else [()]:
        order = list(range(len(atoms)))
        for grp, perm in zip(groups, perm_choice):
            for pos, src in zip(grp, perm):
                order[pos] = src
        for swaps in itertools.product((False, True), repeat=len(swap_sites)):
            sign = base_sign
            laid = []
            for pos in order:
                at = atoms[pos]
                if pos in swap_sites and swaps[swap_sites.index(pos)]:
                    if at.kind == "fop":
                        sign = -sign
                    at = Atom(at.kind, at.data, (at.idx[1], at.idx[0]), at.exp, at.dexp)
                laid.append(at)
            renamed = _serial_rename(laid, dummies)
            key = tuple(a.serial() for a in renamed)
            prev = seen.get(key)
            if prev is not None and prev != sign:
                return None
            seen[key] = sign
            if best is None or key < best[0]:
                best = (key, sign, renamed)
    key, sign, renamed = best
    return coeff * sign, tuple(renamed)


def _serial_rename(atoms: list, dummies: set) -> list:
    counters = {LORENTZ: 0, INNER: 0}
    mapping = {}
    out = []
    for at in atoms:
        new_idx = []
        for ix in at.idx:
            key = (ix.space, ix.name)
            if key in dummies:
                if key not in mapping:
                    mapping[key] = f"{_DUMMY_PREFIX[ix.space]}{counters[ix.space]}"
                    counters[ix.space] += 1
                new_idx.append(Idx(mapping[key], ix.space, ix.up))
            else:
                new_idx.append(ix)
        out.append(Atom(at.kind, at.data, tuple(new_idx), at.exp, at.dexp))
    return out


def _canon_terms(terms) -> tuple:
    bucket: dict[tuple, list] = {}
    free_sets = set()
    for coeff, atoms in terms:
        coeff = GaussRat.coerce(coeff)
        if coeff.is_zero():
            continue
        atoms = list(atoms)
        while True:
            coeff, changed, zero = _rewrite_pass(coeff, atoms)
            if zero:
                atoms = None
                break
            if not changed:
                break
        if atoms is None:
            continue
        atoms = _merge_scalarlike(atoms)
        res = _canon_label_order(coeff, atoms)
        if res is None:
            continue
        coeff, atoms = res
        key = tuple(a.serial() for a in atoms)
        if key in bucket:
            bucket[key][0] = bucket[key][0] + coeff
        else:
            bucket[key] = [coeff, atoms]
    out = []
    for key in sorted(bucket):
        coeff, atoms = bucket[key]
        if coeff.is_zero():
            continue
        free_sets.add(_free_of(atoms))
        out.append((coeff, atoms))
    if len(free_sets) > 1:
        raise StructureError(f"inhomogeneous free indices across terms: {sorted(map(sorted, free_sets))}")
    return tuple(out)


# ---------------------------------------------------------------------------
# operations


def contract(e: TensorExpr, upper: Idx, lower: Idx) -> TensorExpr:
    """Contract the free label ``upper`` with the free label ``lower``."""
    if upper.space != lower.space:
        raise StructureError(f"space mismatch: {upper.space} vs {lower.space}")
    if not upper.up or lower.up:
        raise StructureError("contract() wants one upper and one lower label")
    free = e.free_indices()
    for ix in (upper, lower):
        if (ix.space, ix.name, ix.up) not in free:
            raise StructureError(f"label {ix.name!r} not free in expression")
    fresh = "_c0"
    out = []
    for coeff, atoms in e.terms:
        new_atoms = []
        for at in atoms:
            new_idx = tuple(
                Idx(fresh, ix.space, ix.up)
                if (ix.space, ix.name) in {(upper.space, upper.name), (lower.space, lower.name)}
                else ix
                for ix in at.idx
            )
            new_atoms.append(Atom(at.kind, at.data, new_idx, at.exp, at.dexp))
        out.append((coeff, tuple(new_atoms)))
    return TensorExpr(out)


def rename_free(e: TensorExpr, mapping: Mapping[tuple[str, str], str]) -> TensorExpr:
    """Rename free labels; keys are (space, old_name), values new names."""
    out = []
    for coeff, atoms in e.terms:
        new_atoms = []
        for at in atoms:
            new_idx = tuple(
                Idx(mapping.get((ix.space, ix.name), ix.name), ix.space, ix.up) for ix in at.idx
            )
            new_atoms.append(Atom(at.kind, at.data, new_idx, at.exp, at.dexp))
        out.append((coeff, tuple(new_atoms)))
    return TensorExpr(out)


def substitute_scalars(e: TensorExpr, values: Mapping[str, RatLike]) -> TensorExpr:
    """Substitute exact numbers for formal scalar symbols."""
    out = []
    for coeff, atoms in e.terms:
        c = coeff
        kept = []
        ok = True
        for at in atoms:
            if at.kind == "scal" and at.data[0] in values:
                if at.dexp != 0:
                    raise StructureError(
                        f"scalar {at.data[0]} carries a symbolic D exponent; "
                        "fix the dimension first"
                    )
                v = GaussRat.coerce(values[at.data[0]])
                if at.exp < 0:
                    if v.is_zero():
                        raise ZeroDivisionError(f"substituting 0 for {at.data[0]}**{at.exp}")
                    for _ in range(-at.exp):
                        c = c / v
                else:
                    if v.is_zero() and at.exp > 0:
                        ok = False
                        break
                    for _ in range(at.exp):
                        c = c * v
            else:
                kept.append(at)
        if ok:
            out.append((c, tuple(kept)))
    return TensorExpr(out)


def substitute_dim(e: TensorExpr, d: int) -> TensorExpr:
    """Specialize the symbolic inner dimension to the integer ``d``."""
    out = []
    for coeff, atoms in e.terms:
        c = coeff
        kept = []
        for at in atoms:
            if at.kind == "dpoly":
                val = Fraction(d + at.data[0])
                if val == 0:
                    if at.exp < 0:
                        raise ZeroDivisionError(f"(D{at.data[0]:+d}) vanishes at D={d}")
                    c = GaussRat(0)
                    continue
                c = c * GaussRat(val**at.exp if at.exp >= 0 else Fraction(1) / val ** (-at.exp))
            elif at.kind == "scal" and at.dexp != 0:
                kept.append(Atom("scal", at.data, (), at.exp + at.dexp * d, 0))
            else:
                kept.append(at)
        out.append((c, tuple(kept)))
    return TensorExpr(out)


def substitute_momenta(
    e: TensorExpr, space: str, mapping: Mapping[int, Sequence[tuple[RatLike, int]]]
) -> TensorExpr:
    """Replace momenta of the given space by linear combinations of legs.

    ``mapping[leg] = [(coeff, other_leg), ...]``.  Dot products expand
    bilinearly.  Propagator denominators of a mapped leg are refused.
    """
    kinds = ("mom",) if space == LORENTZ else ("imom",)
    out = []
    for coeff, atoms in e.terms:
        expansion = [(coeff, [])]
        for at in atoms:
            if at.kind in kinds and at.data[0] in mapping:
                branches = mapping[at.data[0]]
                expansion = [
                    (c * GaussRat.coerce(q), ats + [Atom(at.kind, (leg,), at.idx)])
                    for c, ats in expansion
                    for q, leg in branches
                ]
            elif at.kind == "dot" and at.data[0] == space and (
                at.data[1] in mapping or at.data[2] in mapping
            ):
                if at.exp != 1:
                    raise StructureError("cannot expand a powered dot product")
                left = mapping.get(at.data[1], [(Fraction(1), at.data[1])])
                right = mapping.get(at.data[2], [(Fraction(1), at.data[2])])
                expansion = [
                    (
                        c * GaussRat.coerce(q1) * GaussRat.coerce(q2),
                        ats + [a_dot(space, l1, l2)],
                    )
                    for c, ats in expansion
                    for q1, l1 in left
                    for q2, l2 in right
                ]
            elif at.kind == "invprop" and space == LORENTZ and at.data[0] in mapping:
                raise StructureError("cannot substitute momenta under a propagator denominator")
            else:
                expansion = [(c, ats + [at]) for c, ats in expansion]
        out.extend((c, tuple(ats)) for c, ats in expansion)
    return TensorExpr(out)


def permute_legs(
    e: TensorExpr, leg_map: Mapping[int, int], label_map: Mapping[tuple[str, str], str] = ()
) -> TensorExpr:
    """Apply a simultaneous permutation of leg ids and free index labels."""
    renamed = rename_free(e, dict(label_map)) if label_map else e
    out = []
    for coeff, atoms in renamed.terms:
        new_atoms = []
        for at in atoms:
            if at.kind in ("mom", "imom", "invprop"):
                new_atoms.append(
                    Atom(at.kind, (leg_map.get(at.data[0], at.data[0]),), at.idx, at.exp, at.dexp)
                )
            elif at.kind == "dot":
                l1 = leg_map.get(at.data[1], at.data[1])
                l2 = leg_map.get(at.data[2], at.data[2])
                new_atoms.append(a_dot(at.data[0], l1, l2, at.exp))
            else:
                new_atoms.append(at)
        out.append((coeff, tuple(new_atoms)))
    return TensorExpr(out)


# ---------------------------------------------------------------------------
# exact componentwise evaluation


def evaluate(
    e: TensorExpr,
    *,
    dim_inner: int,
    momenta: Mapping[int, Sequence[Fraction]] = (),
    imomenta: Mapping[int, Sequence[Fraction]] = (),
    scalars: Mapping[str, Fraction] = (),
    free_values: Mapping[tuple[str, str], int] = (),
    ieps: Fraction = Fraction(0),
) -> GaussRat:
    """Evaluate componentwise with exact rational arithmetic.

    ``momenta``/``imomenta`` give upper-index components; ``free_values``
    assigns component values to free labels keyed by (space, name).
    """
    momenta = dict(momenta)
    imomenta = dict(imomenta)
    scalars = dict(scalars)
    free_values = dict(free_values)
    total = GaussRat(0)
    for coeff, atoms in e.terms:
        occ = _occurrences(atoms)
        dummies = sorted(key for key, lst in occ.items() if len(lst) == 2)
        ranges = [range(4) if sp == LORENTZ else range(dim_inner) for sp, _ in dummies]
        for assign in itertools.product(*ranges):
            env = dict(free_values)
            env.update({d: v for d, v in zip(dummies, assign)})
            val = GaussRat(1)
            try:
                for at in atoms:
                    val = val * _eval_atom(at, env, dim_inner, momenta, imomenta, scalars, ieps)
            except _EvalZeroTerm:
                val = GaussRat(0)
            total = total + coeff * val
    return total


class _EvalZeroTerm(Exception):
    pass


def _metric_component(space: str, i: int, j: int, up1: bool, up2: bool) -> Fraction:
    if up1 != up2:
        return Fraction(1) if i == j else Fraction(0)
    if i != j:
        return Fraction(0)
    return ETA_DIAG[i] if space == LORENTZ else Fraction(1)


def _vec_component(space: str, comps: Sequence[Fraction], ix_val: int, up: bool) -> Fraction:
    c = Fraction(comps[ix_val])
    if not up and space == LORENTZ:
        c = ETA_DIAG[ix_val] * c
    return c


def _eval_atom(at, env, dim_inner, momenta, imomenta, scalars, ieps) -> GaussRat:
    def slot(i):
        ix = at.idx[i]
        return env[(ix.space, ix.name)]

    if at.kind == "eta":
        return GaussRat(_metric_component(LORENTZ, slot(0), slot(1), at.idx[0].up, at.idx[1].up))
    if at.kind == "deltaD":
        return GaussRat(_metric_component(INNER, slot(0), slot(1), at.idx[0].up, at.idx[1].up))
    if at.kind == "mom":
        return GaussRat(_vec_component(LORENTZ, momenta[at.data[0]], slot(0), at.idx[0].up))
    if at.kind == "imom":
        return GaussRat(_vec_component(INNER, imomenta[at.data[0]], slot(0), at.idx[0].up))
    if at.kind == "dot":
        space, l1, l2 = at.data
        if space == LORENTZ:
            v = sum(
                (ETA_DIAG[m] * momenta[l1][m] * momenta[l2][m] for m in range(4)), Fraction(0)
            )
        else:
            v = sum(
                (Fraction(imomenta[l1][m]) * imomenta[l2][m] for m in range(dim_inner)),
                Fraction(0),
            )
        return _ipow(GaussRat(v), at.exp)
    if at.kind == "scal":
        base = GaussRat.coerce(scalars[at.data[0]])
        return _ipow(base, at.exp + at.dexp * dim_inner)
    if at.kind == "dpoly":
        return _ipow(GaussRat(Fraction(dim_inner + at.data[0])), at.exp)
    if at.kind == "invprop":
        leg = at.data[0]
        ksq = sum((ETA_DIAG[m] * momenta[leg][m] * momenta[leg][m] for m in range(4)), Fraction(0))
        return _ipow(GaussRat(ksq) - GaussRat(0, 1) * GaussRat(ieps), -at.exp)
    raise NotImplementedError(f"no numeric rule for atom kind {at.kind!r}")


def _ipow(base: GaussRat, n: int) -> GaussRat:
    if n == 0:
        return GaussRat(1)
    if base.is_zero():
        if n < 0:
            raise ZeroDivisionError("zero base with negative exponent")
        raise _EvalZeroTerm
    out = GaussRat(1)
    for _ in range(abs(n)):
        out = out * base
    return out if n > 0 else GaussRat(1) / out


# ---------------------------------------------------------------------------
# LaTeX emission (presentation only; JSON is the machine format)

_GREEK = {
    "mu": r"\mu", "nu": r"\nu", "rho": r"\rho", "sigma": r"\sigma", "lam": r"\lambda",
    "alpha": r"\alpha", "beta": r"\beta", "tau": r"\tau", "kappa": r"\kappa",
}
_SCAL_TEX = {
    "Lambda": r"\Lambda", "xi": r"\xi", "eps": r"\varepsilon", "Omega4": r"\Omega_{4}",
    "OmegaD": r"\Omega_{D}", "g": "g", "m": "m", "rho": r"\varrho", "pi": r"\pi",
}


def _tex_idx(ix: Idx) -> str:
    if ix.name.startswith("_l"):
        return rf"\alpha_{{{ix.name[2:]}}}"
    if ix.name.startswith("_i"):
        return rf"I_{{{ix.name[2:]}}}"
    return _GREEK.get(ix.name, ix.name)


def _tex_pair(a: Idx, b: Idx, head: str) -> str:
    def wrap(ix):
        return f"^{{{_tex_idx(ix)}}}" if ix.up else f"_{{{_tex_idx(ix)}}}"

    if a.up == b.up:
        mark = "^" if a.up else "_"
        return f"{head}{mark}{{{_tex_idx(a)}{_tex_idx(b)}}}"
    return f"{head}{wrap(a)}{{}}{wrap(b)}"


def _tex_power(base: str, exp: int, dexp: int) -> tuple[str, int]:
    """Return (tex with positive exponent, sign of exponent placement)."""
    if dexp == 0:
        mag = abs(exp)
        tex = base if mag == 1 else f"{base}^{{{mag}}}"
        return tex, (1 if exp >= 0 else -1)
    parts = []
    e, de = exp, dexp
    sign = 1
    if de < 0 or (de == 0 and e < 0):
        e, de, sign = -e, -de, -1
    dpart = "D" if de == 1 else f"{de}D"
    if e == 0:
        expo = dpart
    else:
        expo = f"{dpart}{e:+d}"
    parts.append(f"{base}^{{{expo}}}")
    return "".join(parts), sign


def _tex_atom(at: Atom) -> tuple[str, int]:
    if at.kind == "eta":
        return _tex_pair(at.idx[0], at.idx[1], r"\eta"), 1
    if at.kind == "deltaD":
        return _tex_pair(at.idx[0], at.idx[1], r"\delta"), 1
    if at.kind == "mom":
        ix = at.idx[0]
        s = f"^{{{_tex_idx(ix)}}}" if ix.up else f"_{{{_tex_idx(ix)}}}"
        return f"{{k_{{{at.data[0]}}}}}{s}", 1
    if at.kind == "imom":
        ix = at.idx[0]
        s = f"^{{{_tex_idx(ix)}}}" if ix.up else f"_{{{_tex_idx(ix)}}}"
        return f"{{K_{{{at.data[0]}}}}}{s}", 1
    if at.kind == "dot":
        space, l1, l2 = at.data
        h = "k" if space == LORENTZ else "K"
        if l1 == l2:
            base = f"{h}_{{{l1}}}^{{2}}"
            mag = abs(at.exp)
            tex = base if mag == 1 else f"({base})^{{{mag}}}"
            return tex, (1 if at.exp >= 0 else -1)
        base = rf"({h}_{{{l1}}}\!\cdot\!{h}_{{{l2}}})"
        return _tex_power(base, at.exp, 0)
    if at.kind == "scal":
        return _tex_power(_SCAL_TEX.get(at.data[0], at.data[0]), at.exp, at.dexp)
    if at.kind == "dpoly":
        base = "D" if at.data[0] == 0 else f"(D{at.data[0]:+d})"
        return _tex_power(base, at.exp, 0)
    if at.kind == "invprop":
        base = rf"(k_{{{at.data[0]}}}^{{2}}-i\varepsilon)"
        tex, _ = _tex_power(base, at.exp, 0)
        return tex, -1
    if at.kind == "fop":
        return _tex_pair(at.idx[0], at.idx[1], rf"\mathcal{{F}}[{at.data[0]}]"), 1
    if at.kind == "fdot":
        return rf"({at.data[0]}\!\cdot\!{at.data[1]})", 1
    raise NotImplementedError(at.kind)


def _tex_coeff(c: GaussRat) -> str:
    def frac(q: Fraction) -> str:
        if q.denominator == 1:
            return str(q.numerator)
        return rf"\tfrac{{{q.numerator}}}{{{q.denominator}}}"

    if c.im == 0:
        return frac(c.re)
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return frac(c.im) + r"\,i"
    return rf"({frac(c.re)}{'+' if c.im > 0 else '-'}{frac(abs(c.im))}i)"


def latex(e: TensorExpr) -> str:
    if not e.terms:
        return "0"
    parts = []
    for n, (coeff, atoms) in enumerate(e.terms):
        num, den = [], []
        for at in atoms:
            tex, sgn = _tex_atom(at)
            (num if sgn > 0 else den).append(tex)
        sep = "\\,"
        body = sep.join(num) if num else "1"
        if den:
            den_body = sep.join(den)
            body = rf"\frac{{{body}}}{{{den_body}}}"
        ctex = _tex_coeff(coeff)
        if ctex == "1" and atoms:
            term = body if body != "1" else "1"
        elif ctex == "-1" and atoms:
            term = "-" + body
        else:
            term = ctex if not atoms else rf"{ctex}\,{body}"
        if n > 0 and not term.startswith("-"):
            parts.append("+")
        parts.append(term)
    return " ".join(parts)
