"""Graded algebra of field and operator atoms.

Two families of atoms share one expression type:

* *field* atoms (gauge field, ghosts, auxiliary field, matter, the odd
  constant parameter) form a supercommutative algebra -- adjacent atoms
  may be reordered at the cost of a sign when both are odd;
* *operator* atoms (the fluctuation-operator coefficients and the
  field-strength / gauge-field operators) are free noncommuting symbols
  and act as walls that field atoms never cross.

Atoms carry index slots plus multisets of spacetime and inner
derivatives; derivatives commute among themselves (flat spaces,
Cartesian coordinates).  Normalization orders movable atoms with the
correct signs, renames dummy labels serially and detects terms that
cancel against their own relabeling.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .exact import GaussRat, RatLike
from .tensor import INNER, LORENTZ, Idx, StructureError

_DUMMY_PREFIX = {LORENTZ: "_l", INNER: "_i"}


@dataclass(frozen=True)
class SpeciesInfo:
    parity: int  # 0 even, 1 odd
    ghost: int
    movable: bool
    slots: tuple  # index spaces, in slot order
    antisym: bool = False


SPECIES: dict[str, SpeciesInfo] = {
    # supercommutative field atoms
    "A": SpeciesInfo(0, 0, True, (LORENTZ, INNER)),
    "omega": SpeciesInfo(1, 1, True, (INNER,)),
    "omega_star": SpeciesInfo(1, -1, True, (INNER,)),
    "h": SpeciesInfo(0, 0, True, (INNER,)),
    "psi": SpeciesInfo(0, 0, True, ()),
    "theta": SpeciesInfo(1, -1, True, ()),
    # noncommuting operator atoms
    "B": SpeciesInfo(0, 0, False, (LORENTZ,)),
    "C": SpeciesInfo(0, 0, False, ()),
    "E": SpeciesInfo(0, 0, False, ()),
    "Aop": SpeciesInfo(0, 0, False, (LORENTZ,)),
    "Fop": SpeciesInfo(0, 0, False, (LORENTZ, LORENTZ), antisym=True),
    "Mop": SpeciesInfo(0, 0, False, (INNER, INNER)),
    "Nop": SpeciesInfo(0, 0, False, (INNER,)),
}

_TRANSIENT = ("eta", "deltaD", "scal")
_RANK = {name: i + 10 for i, name in enumerate(SPECIES)}
_RANK.update({"scal": 0, "eta": 5, "deltaD": 6})


@dataclass(frozen=True)
class GAtom:
    species: str
    idx: tuple = ()
    sder: tuple = ()  # spacetime derivative labels, commuting multiset
    ider: tuple = ()  # inner derivative labels, commuting multiset
    data: tuple = ()  # ("name", exp) for scal

    def __post_init__(self):
        if self.species in SPECIES:
            spec = SPECIES[self.species]
            if len(self.idx) != len(spec.slots):
                raise StructureError(
                    f"{self.species} expects {len(spec.slots)} index slots, got {len(self.idx)}"
                )
            for ix, space in zip(self.idx, spec.slots):
                if ix.space != space:
                    raise StructureError(f"{self.species}: slot space mismatch for {ix.name!r}")
        elif self.species not in _TRANSIENT:
            raise StructureError(f"unknown atom species {self.species!r}")
        for ix in self.sder:
            if ix.space != LORENTZ:
                raise StructureError("spacetime derivative label must be lorentz")
        for ix in self.ider:
            if ix.space != INNER:
                raise StructureError("inner derivative label must be inner")

    def parity(self) -> int:
        return SPECIES[self.species].parity if self.species in SPECIES else 0

    def slots(self) -> tuple:
        return self.idx + self.sder + self.ider

    def with_slots(self, slots: Sequence[Idx]) -> "GAtom":
        ni, ns = len(self.idx), len(self.sder)
        return GAtom(
            self.species,
            tuple(slots[:ni]),
            tuple(slots[ni : ni + ns]),
            tuple(slots[ni + ns :]),
            self.data,
        )

    def serial(self) -> tuple:
        return (
            self.species,
            self.data,
            tuple((ix.name, ix.space, ix.up) for ix in self.idx),
            tuple((ix.name, ix.space, ix.up) for ix in self.sder),
            tuple((ix.name, ix.space, ix.up) for ix in self.ider),
        )

    def to_json(self) -> dict:
        out = {"species": self.species}
        for key, val in (("idx", self.idx), ("sder", self.sder), ("ider", self.ider)):
            if val:
                out[key] = [ix.to_json() for ix in val]
        if self.data:
            out["data"] = list(self.data)
        return out

    @staticmethod
    def from_json(obj) -> "GAtom":
        return GAtom(
            obj["species"],
            tuple(Idx.from_json(i) for i in obj.get("idx", [])),
            tuple(Idx.from_json(i) for i in obj.get("sder", [])),
            tuple(Idx.from_json(i) for i in obj.get("ider", [])),
            tuple(obj.get("data", [])),
        )


def g_scal(name: str, exp: int = 1) -> GAtom:
    return GAtom("scal", data=(name, exp))


def g_eta(a: Idx, b: Idx) -> GAtom:
    return GAtom("eta", idx=(a, b))


class GradedExpr:
    """Canonical linear combination of ordered atom products."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[GaussRat, tuple[GAtom, ...]]] = (), _canonical=False):
        if _canonical:
            object.__setattr__(self, "terms", tuple(terms))
            return
        object.__setattr__(self, "terms", _canon_gterms(terms))

    def __setattr__(self, name, value):
        raise AttributeError("GradedExpr is immutable")

    @staticmethod
    def zero() -> "GradedExpr":
        return GradedExpr(())

    @staticmethod
    def number(q: RatLike) -> "GradedExpr":
        return GradedExpr([(GaussRat.coerce(q), ())])

    @staticmethod
    def atoms(*atoms: GAtom, coeff: RatLike = 1) -> "GradedExpr":
        return GradedExpr([(GaussRat.coerce(coeff), tuple(atoms))])

    def __add__(self, other: "GradedExpr") -> "GradedExpr":
        return GradedExpr(list(self.terms) + list(other.terms))

    def __sub__(self, other: "GradedExpr") -> "GradedExpr":
        return self + (-other)

    def __neg__(self) -> "GradedExpr":
        return GradedExpr([(-c, a) for c, a in self.terms], _canonical=True)

    def __mul__(self, other) -> "GradedExpr":
        if isinstance(other, GradedExpr):
            prods = []
            for c1, a1 in self.terms:
                for c2, a2 in other.terms:
                    prods.append((c1 * c2, _concat_fresh(a1, a2)))
            return GradedExpr(prods)
        return GradedExpr([(GaussRat.coerce(other) * c, a) for c, a in self.terms])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple((c, tuple(a.serial() for a in ats)) for c, ats in self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        return f"GradedExpr({len(self.terms)} terms)"

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
    def from_json_obj(obj) -> "GradedExpr":
        return GradedExpr(
            [
                (GaussRat.from_json(t["coeff"]), tuple(GAtom.from_json(a) for a in t["atoms"]))
                for t in obj["terms"]
            ]
        )

    @staticmethod
    def from_json(s: str) -> "GradedExpr":
        return GradedExpr.from_json_obj(json.loads(s))

    def to_latex(self) -> str:
        return g_latex(self)


def graded_normalize(e: GradedExpr) -> GradedExpr:
    """Return the canonical form (idempotent by construction)."""
    return GradedExpr(e.terms)


def term_parity(atoms: Sequence[GAtom]) -> int:
    return sum(a.parity() for a in atoms) % 2


def term_ghost(atoms: Sequence[GAtom]) -> int:
    return sum(SPECIES[a.species].ghost for a in atoms if a.species in SPECIES)


def expr_parity(e: GradedExpr) -> int | None:
    """Uniform Grassmann parity of the expression, or None if mixed/empty."""
    parities = {term_parity(a) for _, a in e.terms}
    return parities.pop() if len(parities) == 1 else None


def expr_ghost(e: GradedExpr) -> int | None:
    ghosts = {term_ghost(a) for _, a in e.terms}
    return ghosts.pop() if len(ghosts) == 1 else None


# ---------------------------------------------------------------------------
# canonicalization


def _occurrences(atoms: Sequence[GAtom]) -> dict:
    occ = {}
    for ai, at in enumerate(atoms):
        for si, ix in enumerate(at.slots()):
            occ.setdefault((ix.space, ix.name), []).append((ai, si, ix.up))
    return occ


def _validate_g(atoms: Sequence[GAtom]) -> dict:
    occ = _occurrences(atoms)
    for (sp, nm), lst in occ.items():
        if len(lst) > 2:
            raise StructureError(f"label {nm!r} ({sp}) appears {len(lst)} times in one term")
        if len(lst) == 2 and lst[0][2] == lst[1][2]:
            raise StructureError(f"label {nm!r} ({sp}): contraction must pair upper with lower")
    return occ


def _absorb_metrics(coeff: GaussRat, atoms: list) -> tuple[GaussRat, list | None]:
    while True:
        occ = _validate_g(atoms)
        changed = False
        for ai, at in enumerate(atoms):
            if at.species not in ("eta", "deltaD"):
                continue
            k0 = (at.idx[0].space, at.idx[0].name)
            k1 = (at.idx[1].space, at.idx[1].name)
            if k0 == k1:
                del atoms[ai]
                if at.species == "eta":
                    coeff = coeff * 4
                else:
                    atoms.append(g_scal("D"))
                changed = True
                break
            for slot, other in ((0, 1), (1, 0)):
                key = (at.idx[slot].space, at.idx[slot].name)
                partners = [p for p in occ[key] if p[0] != ai]
                if partners:
                    pi, ps, _ = partners[0]
                    pat = atoms[pi]
                    slots = list(pat.slots())
                    keep = at.idx[other]
                    slots[ps] = Idx(keep.name, keep.space, keep.up)
                    atoms[pi] = pat.with_slots(slots)
                    del atoms[ai]
                    changed = True
                    break
            if changed:
                break
        if not changed:
            return coeff, atoms


def _base_gkey(at: GAtom, dummies: set) -> tuple:
    def sig(ix):
        if (ix.space, ix.name) in dummies:
            return (ix.space, ix.up, 0, "")
        return (ix.space, ix.up, 1, ix.name)

    return (
        _RANK[at.species],
        at.data,
        len(at.sder),
        len(at.ider),
        tuple(sig(ix) for ix in at.idx),
        tuple(sorted(sig(ix) for ix in at.sder)),
        tuple(sorted(sig(ix) for ix in at.ider)),
    )


def _sort_movable(atoms: list, dummies: set) -> tuple[list, int]:
    """Sort movable atoms inside each wall-delimited segment, with signs."""
    sign = 1
    out = []
    seg = []

    def flush():
        nonlocal sign
        arr = seg[:]
        for i in range(1, len(arr)):
            j = i
            while j > 0 and _base_gkey(arr[j], dummies) < _base_gkey(arr[j - 1], dummies):
                if arr[j].parity() and arr[j - 1].parity():
                    sign = -sign
                arr[j - 1], arr[j] = arr[j], arr[j - 1]
                j -= 1
        out.extend(arr)
        seg.clear()

    for at in atoms:
        movable = at.species in _TRANSIENT or SPECIES[at.species].movable
        if movable:
            seg.append(at)
        else:
            flush()
            out.append(at)
    flush()
    return out, sign


def _odd_square_vanishes(atoms: list) -> bool:
    prev = None
    prev_movable = False
    for at in atoms:
        movable = at.species in _TRANSIENT or SPECIES[at.species].movable
        if (
            prev is not None
            and movable
            and prev_movable
            and at.parity()
            and at.serial() == prev.serial()
        ):
            return True
        prev, prev_movable = at, movable
    return False


_ORBIT_CAP = 40320


def _orbit_canon(coeff: GaussRat, atoms: list) -> tuple[GaussRat, tuple] | None:
    occ = _occurrences(atoms)
    dummies = {k for k, lst in occ.items() if len(lst) == 2}

    atoms, sort_sign = _sort_movable(atoms, dummies)
    if _odd_square_vanishes(atoms):
        return None
    coeff = coeff * sort_sign

    # movable tie groups (contiguous, same segment, same key, touching dummies)
    groups = []
    i = 0
    while i < len(atoms):
        at = atoms[i]
        movable = at.species in _TRANSIENT or SPECIES[at.species].movable
        if not movable:
            i += 1
            continue
        j = i
        key = _base_gkey(at, dummies)
        while (
            j + 1 < len(atoms)
            and (atoms[j + 1].species in _TRANSIENT or SPECIES[atoms[j + 1].species].movable)
            and _base_gkey(atoms[j + 1], dummies) == key
        ):
            j += 1
        if j > i and any(
            (ix.space, ix.name) in dummies for k in range(i, j + 1) for ix in atoms[k].slots()
        ):
            groups.append(list(range(i, j + 1)))
        i = j + 1

    swap_sites = [
        i
        for i, at in enumerate(atoms)
        if at.species in ("eta", "deltaD", "Fop", "Mop")
        and any((ix.space, ix.name) in dummies for ix in at.idx)
    ]
    der_sites = []
    for i, at in enumerate(atoms):
        if len(at.sder) > 1:
            der_sites.append((i, "sder", len(at.sder)))
        if len(at.ider) > 1:
            der_sites.append((i, "ider", len(at.ider)))

    n_orbit = 2 ** len(swap_sites)
    for grp in groups:
        for m in range(2, len(grp) + 1):
            n_orbit *= m
    for _, _, n in der_sites:
        for m in range(2, n + 1):
            n_orbit *= m
    if n_orbit > _ORBIT_CAP:
        raise StructureError("term too entangled to canonicalize (orbit cap exceeded)")

    odd_group = [all(atoms[k].parity() for k in grp) for grp in groups]

    best = None
    seen: dict[tuple, int] = {}
    perm_sets = [list(itertools.permutations(range(len(grp)))) for grp in groups]
    der_perm_sets = [list(itertools.permutations(range(n))) for _, _, n in der_sites]

    for perm_choice in itertools.product(*perm_sets) if perm_sets else [()]:
        sign0 = 1
        order = list(range(len(atoms)))
        for grp, perm, is_odd in zip(groups, perm_choice, odd_group):
            for pos, src in zip(grp, perm):
                order[pos] = grp[src]
            if is_odd:
                sign0 *= _perm_parity(perm)
        for swaps in itertools.product((False, True), repeat=len(swap_sites)):
            for der_choice in itertools.product(*der_perm_sets) if der_perm_sets else [()]:
                sign = sign0
                laid = []
                for pos in order:
                    at = atoms[pos]
                    if pos in swap_sites and swaps[swap_sites.index(pos)]:
                        if at.species == "Fop":
                            sign = -sign
                        at = GAtom(
                            at.species, (at.idx[1], at.idx[0]), at.sder, at.ider, at.data
                        )
                    for k, (site, which, _) in enumerate(der_sites):
                        if site == pos:
                            perm = der_choice[k]
                            if which == "sder":
                                at = GAtom(
                                    at.species,
                                    at.idx,
                                    tuple(at.sder[p] for p in perm),
                                    at.ider,
                                    at.data,
                                )
                            else:
                                at = GAtom(
                                    at.species,
                                    at.idx,
                                    at.sder,
                                    tuple(at.ider[p] for p in perm),
                                    at.data,
                                )
                    laid.append(at)
                renamed = _serial_grename(laid, dummies)
                key = tuple(a.serial() for a in renamed)
                prev = seen.get(key)
                if prev is not None and prev != sign:
                    return None
                seen[key] = sign
                if best is None or key < best[0]:
                    best = (key, sign, renamed)
    key, sign, renamed = best
    return coeff * sign, tuple(renamed)


def _perm_parity(perm) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def _serial_grename(atoms: list, dummies: set) -> list:
    counters = {LORENTZ: 0, INNER: 0}
    mapping = {}
    out = []
    for at in atoms:
        slots = []
        for ix in at.slots():
            key = (ix.space, ix.name)
            if key in dummies:
                if key not in mapping:
                    mapping[key] = f"{_DUMMY_PREFIX[ix.space]}{counters[ix.space]}"
                    counters[ix.space] += 1
                slots.append(Idx(mapping[key], ix.space, ix.up))
            else:
                slots.append(ix)
        out.append(at.with_slots(slots))
    return out


def _merge_gscal(atoms: list) -> list:
    merged: dict[str, int] = {}
    out = []
    for at in atoms:
        if at.species == "scal":
            merged[at.data[0]] = merged.get(at.data[0], 0) + at.data[1]
        else:
            out.append(at)
    prefix = [g_scal(name, exp) for name, exp in sorted(merged.items()) if exp != 0]
    return prefix + out


def _canon_gterms(terms) -> tuple:
    bucket: dict[tuple, list] = {}
    for coeff, atoms in terms:
        coeff = GaussRat.coerce(coeff)
        if coeff.is_zero():
            continue
        coeff, atoms = _absorb_metrics(coeff, list(atoms))
        atoms = _merge_gscal(atoms)
        res = _orbit_canon(coeff, atoms)
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
        if not coeff.is_zero():
            out.append((coeff, atoms))
    return tuple(out)


def _concat_fresh(a1: tuple, a2: tuple) -> tuple:
    """Concatenate atom tuples, renaming a2 dummies that clash with a1 labels."""
    labels1 = {(ix.space, ix.name) for at in a1 for ix in at.slots()}
    counts2: dict[tuple, int] = {}
    for at in a2:
        for ix in at.slots():
            counts2[(ix.space, ix.name)] = counts2.get((ix.space, ix.name), 0) + 1
    rename = {}
    used = labels1 | set(counts2)
    serial = 0
    for key, n in counts2.items():
        if n == 2 and key in labels1:
            while True:
                cand = (key[0], f"_m{serial}")
                serial += 1
                if cand not in used:
                    used.add(cand)
                    rename[key] = cand[1]
                    break
    if not rename:
        return a1 + a2
    out = []
    for at in a2:
        slots = [
            Idx(rename.get((ix.space, ix.name), ix.name), ix.space, ix.up) for ix in at.slots()
        ]
        out.append(at.with_slots(slots))
    return a1 + tuple(out)


# ---------------------------------------------------------------------------
# derivatives and substitution


def _differentiable(at: GAtom) -> bool:
    return at.species in SPECIES and at.species != "theta"


def sderiv(e: GradedExpr, label: Idx) -> GradedExpr:
    """Spacetime derivative, expanded by the product rule."""
    if label.space != LORENTZ:
        raise StructureError("sderiv needs a lorentz label")
    out = []
    for coeff, atoms in e.terms:
        for j, at in enumerate(atoms):
            if not _differentiable(at):
                continue
            new = GAtom(at.species, at.idx, at.sder + (label,), at.ider, at.data)
            out.append((coeff, atoms[:j] + (new,) + atoms[j + 1 :]))
    return GradedExpr(out)


def ideriv(e: GradedExpr, label: Idx) -> GradedExpr:
    """Inner-space derivative, expanded by the product rule."""
    if label.space != INNER:
        raise StructureError("ideriv needs an inner label")
    out = []
    for coeff, atoms in e.terms:
        for j, at in enumerate(atoms):
            if not _differentiable(at):
                continue
            new = GAtom(at.species, at.idx, at.sder, at.ider + (label,), at.data)
            out.append((coeff, atoms[:j] + (new,) + atoms[j + 1 :]))
    return GradedExpr(out)


def substitute_species(
    e: GradedExpr, bindings: Mapping[str, tuple[tuple[Idx, ...], GradedExpr]]
) -> GradedExpr:
    """Replace atom species by expressions.

    ``bindings[species] = (slot_labels, replacement)`` where the slot
    labels are the free placeholder labels of the replacement, in the
    species' slot order.  The replacement must carry the same Grassmann
    parity and ghost number as the species it replaces; derivative
    decorations distribute over the replacement by the product rule.
    """
    for name, (slots, repl) in bindings.items():
        spec = SPECIES[name]
        if expr_parity(repl) not in (None, spec.parity):
            raise StructureError(f"parity-violating binding for {name}")
        if expr_ghost(repl) not in (None, spec.ghost):
            raise StructureError(f"ghost-number-violating binding for {name}")

    out = []
    for coeff, atoms in e.terms:
        pieces = [GradedExpr.atoms(coeff=coeff)]
        for at in atoms:
            if at.species in bindings:
                slots, repl = bindings[at.species]
                piece = _instantiate(at, slots, repl)
            else:
                piece = GradedExpr.atoms(at)
            pieces.append(piece)
        prod = pieces[0]
        for p in pieces[1:]:
            prod = prod * p
        out.extend(prod.terms)
    return GradedExpr(out)


def _instantiate(at: GAtom, slot_labels: tuple, repl: GradedExpr) -> GradedExpr:
    if len(slot_labels) != len(at.idx):
        raise StructureError(f"binding for {at.species} has wrong slot count")
    # placeholder occurrences with the declared variance become the actual
    # label as-is; flipped occurrences become the actual label flipped
    mapping = {
        (p.space, p.name): (p.up, actual) for p, actual in zip(slot_labels, at.idx)
    }
    renamed = []
    for coeff, atoms in repl.terms:
        new_atoms = []
        for a in atoms:
            slots = []
            for ix in a.slots():
                hit = mapping.get((ix.space, ix.name))
                if hit is None:
                    slots.append(ix)
                else:
                    declared_up, actual = hit
                    slots.append(actual if ix.up == declared_up else actual.flipped())
            new_atoms.append(a.with_slots(slots))
        renamed.append((coeff, tuple(new_atoms)))
    expr = GradedExpr(renamed)
    for lab in at.sder:
        expr = sderiv(expr, lab)
    for lab in at.ider:
        expr = ideriv(expr, lab)
    return expr


# ---------------------------------------------------------------------------
# LaTeX

_G_TEX = {
    "A": "A", "omega": r"\omega", "omega_star": r"\omega^{*}", "h": "h", "psi": r"\psi",
    "theta": r"\theta", "B": r"\mathcal{B}", "C": r"\mathcal{C}", "E": r"\mathcal{E}",
    "Aop": r"\mathcal{A}", "Fop": r"\mathcal{F}", "Mop": r"\mathcal{M}", "Nop": r"\mathcal{N}",
}


def _g_tex_idx(ix: Idx) -> str:
    from .tensor import _tex_idx

    return _tex_idx(ix)


def _g_tex_atom(at: GAtom) -> str:
    if at.species == "scal":
        from .tensor import _SCAL_TEX

        name, exp = at.data
        base = _SCAL_TEX.get(name, name)
        return base if exp == 1 else f"{base}^{{{exp}}}"
    if at.species in ("eta", "deltaD"):
        from .tensor import _tex_pair

        return _tex_pair(at.idx[0], at.idx[1], r"\eta" if at.species == "eta" else r"\delta")
    head = _G_TEX[at.species]
    body = head
    for ix in at.idx:
        body += f"^{{{_g_tex_idx(ix)}}}" if ix.up else f"_{{{_g_tex_idx(ix)}}}"
    for ix in at.sder:
        dpre = rf"\partial^{{{_g_tex_idx(ix)}}}" if ix.up else rf"\partial_{{{_g_tex_idx(ix)}}}"
        body = dpre + " " + body
    for ix in at.ider:
        dpre = rf"\nabla^{{{_g_tex_idx(ix)}}}" if ix.up else rf"\nabla_{{{_g_tex_idx(ix)}}}"
        body = dpre + " " + body
    if at.sder or at.ider:
        return rf"({body})"
    return body


def g_latex(e: GradedExpr) -> str:
    from .tensor import _tex_coeff

    if not e.terms:
        return "0"
    parts = []
    for n, (coeff, atoms) in enumerate(e.terms):
        body = r"\,".join(_g_tex_atom(a) for a in atoms) if atoms else "1"
        ctex = _tex_coeff(coeff)
        if ctex == "1" and atoms:
            term = body
        elif ctex == "-1" and atoms:
            term = "-" + body
        else:
            term = ctex if not atoms else rf"{ctex}\,{body}"
        if n > 0 and not term.startswith("-"):
            parts.append("+")
        parts.append(term)
    return " ".join(parts)
