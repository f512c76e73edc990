"""Presheaves of finite sets, finite groups and f.g. abelian groups.

A presheaf is contravariant: a morphism ``f: A -> B`` gives a restriction
``F(B) -> F(A)``.  Restrictions are stored for every morphism, composites
included, so functoriality can be checked exhaustively.

The plus construction evaluates the colimit over covering sieves at the
minimum covering sieve.  On a finite site every pair of covering sieves
meets in a covering sieve, so the intersection of all of them is the
terminal stage of the (reverse-inclusion) diagram.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, Sequence

from .exactalg import (AbHom, BlockGroup, block_diagonal, FGAbelianGroup, IntegerMatrix, Subquotient, _lattice_preimage,
                       reduce_matrix)
from .fincat import FiniteCategory
from .groups import FiniteGroup, cyclic, parse_group
from .report import ValidationReport
from .site import Sieve, Site


# ---------------------------------------------------------------------------
# Presheaf types


class SetPresheaf:
    kind = "set"

    def __init__(self, category: FiniteCategory, values: Mapping[str, Sequence[Hashable]],
                 restrictions: Mapping[str, Mapping[Hashable, Hashable]], name: str = ""):
        self.category = category
        self.values = {x: list(values[x]) for x in category.objects}
        self.restrictions: dict[str, dict[Hashable, Hashable]] = {}
        for f in category.morphisms:
            if f in restrictions:
                self.restrictions[f] = dict(restrictions[f])
            elif category.is_identity(f):
                self.restrictions[f] = {a: a for a in self.values[category.src[f]]}
            else:
                raise ValueError(f"missing restriction along {f}")
        self.name = name

    def value(self, x: str) -> list[Hashable]:
        return self.values[x]

    def size(self, x: str) -> int:
        return len(self.values[x])

    def restrict(self, f: str, a: Hashable) -> Hashable:
        return self.restrictions[f][a]

    def check(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"set presheaf {self.name}".strip())
        for f in c.morphisms:
            r = self.restrictions[f]
            src_vals, tgt_vals = set(self.values[c.tgt[f]]), set(self.values[c.src[f]])
            if set(r) != src_vals or not set(r.values()) <= tgt_vals:
                rep.fail(f"restriction along {f} is not a function F({c.tgt[f]}) -> F({c.src[f]})")
        if not rep.ok:
            return rep
        for x in c.objects:
            if any(self.restrictions[c.identities[x]][a] != a for a in self.values[x]):
                rep.fail(f"restriction along id_{x} is not the identity")
        for (g, f), h in c.table.items():
            rg, rf, rh = self.restrictions[g], self.restrictions[f], self.restrictions[h]
            if any(rf[rg[a]] != rh[a] for a in self.values[c.tgt[g]]):
                rep.fail(f"functoriality fails at ({g},{f})")
        return rep


class GroupPresheaf:
    kind = "group"

    def __init__(self, category: FiniteCategory, values: Mapping[str, FiniteGroup],
                 restrictions: Mapping[str, Sequence[int]], name: str = ""):
        self.category = category
        self.values = {x: values[x] for x in category.objects}
        self.restrictions: dict[str, list[int]] = {}
        for f in category.morphisms:
            if f in restrictions:
                self.restrictions[f] = list(restrictions[f])
            elif category.is_identity(f):
                self.restrictions[f] = list(range(self.values[category.src[f]].n))
            else:
                raise ValueError(f"missing restriction along {f}")
        self.name = name

    def value(self, x: str) -> list[int]:
        return list(range(self.values[x].n))

    def group(self, x: str) -> FiniteGroup:
        return self.values[x]

    def size(self, x: str) -> int:
        return self.values[x].n

    def restrict(self, f: str, a: int) -> int:
        return self.restrictions[f][a]

    def check(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"group presheaf {self.name}".strip())
        for x, g in self.values.items():
            for msg in g.check():
                rep.fail(f"value at {x}: {msg}")
        for f in c.morphisms:
            r = self.restrictions[f]
            G, H = self.values[c.tgt[f]], self.values[c.src[f]]
            if len(r) != G.n or any(not 0 <= v < H.n for v in r):
                rep.fail(f"restriction along {f} has wrong shape")
                continue
            if any(r[G.mul(a, b)] != H.mul(r[a], r[b]) for a in range(G.n) for b in range(G.n)):
                rep.fail(f"restriction along {f} is not a homomorphism")
        if not rep.ok:
            return rep
        for (g, f), h in c.table.items():
            rg, rf, rh = self.restrictions[g], self.restrictions[f], self.restrictions[h]
            if any(rf[rg[a]] != rh[a] for a in range(self.values[c.tgt[g]].n)):
                rep.fail(f"functoriality fails at ({g},{f})")
        return rep

    def underlying_set_presheaf(self) -> SetPresheaf:
        return SetPresheaf(self.category, {x: self.value(x) for x in self.category.objects},
                           {f: dict(enumerate(r)) for f, r in self.restrictions.items()}, self.name)


class AbPresheaf:
    kind = "ab"

    def __init__(self, category: FiniteCategory, values: Mapping[str, FGAbelianGroup],
                 restrictions: Mapping[str, IntegerMatrix], name: str = ""):
        self.category = category
        self.values = {x: values[x] for x in category.objects}
        self.restrictions: dict[str, IntegerMatrix] = {}
        for f in category.morphisms:
            tgt = self.values[category.src[f]]
            if f in restrictions:
                self.restrictions[f] = reduce_matrix(tgt, restrictions[f])
            elif category.is_identity(f):
                self.restrictions[f] = IntegerMatrix.identity(tgt.ngens)
            else:
                raise ValueError(f"missing restriction along {f}")
        self.name = name

    def value(self, x: str) -> FGAbelianGroup:
        return self.values[x]

    def hom(self, f: str) -> AbHom:
        c = self.category
        return AbHom(self.values[c.tgt[f]], self.values[c.src[f]], self.restrictions[f])

    def restrict(self, f: str, vec: Sequence[int]) -> tuple[int, ...]:
        return self.values[self.category.src[f]].reduce(self.restrictions[f].apply(vec))

    def check(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"abelian presheaf {self.name}".strip())
        for f in c.morphisms:
            try:
                self.hom(f)
            except ValueError:
                rep.fail(f"restriction along {f} is not a homomorphism")
        if not rep.ok:
            return rep
        for (g, f), h in c.table.items():
            lhs = reduce_matrix(self.values[c.src[f]], self.restrictions[f] @ self.restrictions[g])
            if lhs != self.restrictions[h]:
                rep.fail(f"functoriality fails at ({g},{f})")
        return rep


Presheaf = SetPresheaf | GroupPresheaf | AbPresheaf


@dataclass
class PresheafMap:
    """Natural transformation; components are dicts (sets), lists (groups) or matrices."""

    source: Any
    target: Any
    components: dict[str, Any]

    def component_is_iso(self, x: str) -> bool:
        comp = self.components[x]
        if self.source.kind == "ab":
            return AbHom(self.source.value(x), self.target.value(x), comp).is_isomorphism()
        vals = [comp[a] for a in self.source.value(x)]
        return len(set(vals)) == len(vals) == self.target.size(x)

    def is_isomorphism(self) -> bool:
        return all(self.component_is_iso(x) for x in self.source.category.objects)

    def failing_objects(self) -> list[str]:
        return [x for x in self.source.category.objects if not self.component_is_iso(x)]

    def is_natural(self) -> bool:
        c = self.source.category
        for f in c.morphisms:
            a, b = c.src[f], c.tgt[f]
            if self.source.kind == "ab":
                lhs = self.components[a] @ self.source.restrictions[f]
                rhs = self.target.restrictions[f] @ self.components[b]
                if reduce_matrix(self.target.value(a), lhs - rhs) != IntegerMatrix.zeros(lhs.nrows, lhs.ncols):
                    return False
            else:
                for e in self.source.value(b):
                    if self.components[a][self.source.restrict(f, e)] != self.target.restrict(f, self.components[b][e]):
                        return False
        return True

    def compose(self, first: "PresheafMap") -> "PresheafMap":
        """``self ∘ first``."""
        comps = {}
        for x in first.components:
            if self.source.kind == "ab":
                comps[x] = reduce_matrix(self.target.value(x), self.components[x] @ first.components[x])
            else:
                comps[x] = {a: self.components[x][b] for a, b in
                            ((a, first.components[x][a]) for a in first.source.value(x))}
        return PresheafMap(first.source, self.target, comps)


# ---------------------------------------------------------------------------
# Sections over a sieve


@dataclass
class SetSections:
    arrows: tuple[str, ...]
    families: list[tuple]
    index: dict[tuple, int]
    group: FiniteGroup | None = None

    def __len__(self) -> int:
        return len(self.families)


@dataclass
class AbSections:
    arrows: tuple[str, ...]
    ambient: BlockGroup
    sub: Subquotient

    @property
    def group(self) -> FGAbelianGroup:
        return self.sub.group


def _family_constraints(c: FiniteCategory, arrows: Sequence[str]):
    aset = set(arrows)
    down: dict[str, list[tuple[str, str]]] = {k: [] for k in arrows}
    for k in arrows:
        for h in c.into(c.src[k]):
            if c.is_identity(h):
                continue
            kh = c.table[(k, h)]
            if kh not in aset:
                raise ValueError(f"{sorted(arrows)} is not closed under precomposition")
            down[k].append((h, kh))
    above = {k: 0 for k in arrows}
    for k in arrows:
        for _, kh in down[k]:
            if kh != k:
                above[kh] += 1
    order = sorted(arrows, key=lambda k: (above[k], k))
    return down, order


def _enumerate_families(F, arrows: Sequence[str], limit: int | None = None) -> list[tuple]:
    c = F.category
    down, order = _family_constraints(c, arrows)
    pos = {k: i for i, k in enumerate(arrows)}
    up: dict[str, list[tuple[str, str]]] = {k: [] for k in arrows}
    for k in arrows:
        for h, kh in down[k]:
            up[kh].append((k, h))
    assign: dict[str, Hashable] = {}
    out: list[tuple] = []

    def consistent(k: str, v: Hashable) -> bool:
        for h, kh in down[k]:
            if kh in assign or kh == k:
                target = v if kh == k else assign[kh]
                if F.restrict(h, v) != target:
                    return False
        for g, h in up[k]:
            if g in assign and F.restrict(h, assign[g]) != v:
                return False
        return True

    def rec(i: int) -> None:
        if limit is not None and len(out) > limit:
            return
        if i == len(order):
            out.append(tuple(assign[k] for k in arrows))
            return
        k = order[i]
        forced = None
        for g, h in up[k]:
            if g in assign:
                forced = F.restrict(h, assign[g])
                break
        cands = [forced] if forced is not None else F.value(c.src[k])
        for v in cands:
            if consistent(k, v):
                assign[k] = v
                rec(i + 1)
                del assign[k]

    rec(0)
    return out


def _ab_sections(F: AbPresheaf, arrows: Sequence[str]) -> AbSections:
    c = F.category
    down, _ = _family_constraints(c, arrows)
    ambient = BlockGroup([F.value(c.src[k]) for k in arrows])
    pos = {k: i for i, k in enumerate(arrows)}
    rows_groups = []
    entries: dict[tuple[int, int], int] = {}
    row = 0
    for k in arrows:
        for h, kh in down[k]:
            tgt_grp = F.value(c.src[h])
            R = F.restrictions[h]
            # component kh minus F(h) applied to component k
            off_k = ambient.offsets[pos[k]]
            off_kh = ambient.offsets[pos[kh]]
            for i in range(tgt_grp.ngens):
                entries[(row + i, off_kh + i)] = entries.get((row + i, off_kh + i), 0) + 1
                for j, v in R.rows[i].items():
                    entries[(row + i, off_k + j)] = entries.get((row + i, off_k + j), 0) - v
            rows_groups.append(tgt_grp)
            row += tgt_grp.ngens
    target = BlockGroup(rows_groups)
    M = IntegerMatrix.from_entries(row, ambient.ngens, entries)
    if row == 0:
        L = IntegerMatrix.identity(ambient.ngens)
    else:
        L = _lattice_preimage(M, target.relations())
    return AbSections(tuple(arrows), ambient, Subquotient(ambient, L, ambient.relations()))


def sections_over_sieve(F, s: Site, b: Sieve):
    """Compatible families over a sieve.

    Returns :class:`SetSections` for set and group presheaves (with the
    group structure for the latter) and :class:`AbSections` for abelian ones.
    """
    arrows = tuple(b.sorted())
    return _sections(F, arrows)


def _sections(F, arrows: tuple[str, ...]):
    if F.kind == "ab":
        return _ab_sections(F, arrows)
    fams = _enumerate_families(F, arrows)
    idx = {f: i for i, f in enumerate(fams)}
    grp = None
    if F.kind == "group":
        c = F.category
        gs = [F.group(c.src[k]) for k in arrows]
        one = tuple(0 for _ in arrows)
        # identity family first
        if fams and fams[0] != one:
            j = idx[one]
            fams[0], fams[j] = fams[j], fams[0]
            idx = {f: i for i, f in enumerate(fams)}
        table = [[idx[tuple(g.mul(a, b) for g, a, b in zip(gs, x, y))] for y in fams] for x in fams]
        grp = FiniteGroup(table, [str(i) for i in range(len(fams))], "Γ")
    return SetSections(arrows, fams, idx, grp)


def _section_of_element(F, arrows: Sequence[str], x: str, a) -> Any:
    """The family ``(F(g) a)_g`` for ``a ∈ F(x)``."""
    if F.kind == "ab":
        out: list[int] = []
        for g in arrows:
            out.extend(F.restrict(g, a))
        return out
    return tuple(F.restrict(g, a) for g in arrows)


def _unit(n: int, j: int) -> list[int]:
    return [int(i == j) for i in range(n)]


def restriction_to_sections(F, x: str, sec) -> Any:
    """Component ``F(x) -> Γ(B, F)`` (dict or matrix in canonical coordinates)."""
    if F.kind == "ab":
        G = F.value(x)
        cols = [sec.sub.coords(_section_of_element(F, sec.arrows, x, _unit(G.ngens, j))) for j in range(G.ngens)]
        return IntegerMatrix.from_entries(sec.group.ngens, G.ngens,
                                          {(i, j): v for j, c in enumerate(cols) for i, v in enumerate(c)})
    return {a: sec.index.get(_section_of_element(F, sec.arrows, x, a)) for a in F.value(x)}


# ---------------------------------------------------------------------------
# Sheaf condition


@dataclass
class SheafReport(ValidationReport):
    failures: list[dict] = field(default_factory=list)


def _is_iso_component(F, x: str, sec, comp) -> tuple[bool, str]:
    if F.kind == "ab":
        h = AbHom(F.value(x), sec.group, comp)
        inj, surj = h.is_injective(), h.is_surjective()
        return inj and surj, f"F({x}) = {F.value(x)} -> Γ = {sec.group}"
    vals = list(comp.values())
    ok = None not in vals and len(set(vals)) == len(vals) == len(sec)
    return ok, f"|F({x})| = {F.size(x)} -> |Γ| = {len(sec)}"


def is_sheaf(F, s: Site, first_only: bool = False) -> SheafReport:
    """Exhaustive check of ``F(X) -> Γ(B, F)`` over every covering sieve ``B``."""
    rep = SheafReport(f"sheaf condition for {F.name or F.kind}")
    for x in s.category.objects:
        maximal = s.maximal_sieve(x).arrows
        for b in s.covering_sieves(x):
            if b.arrows == maximal:
                continue
            sec = sections_over_sieve(F, s, b)
            comp = restriction_to_sections(F, x, sec)
            ok, desc = _is_iso_component(F, x, sec, comp)
            if not ok:
                rep.fail(f"at {x}, sieve {{{', '.join(b.sorted())}}}: {desc}")
                rep.failures.append({"object": x, "sieve": b.sorted(), "detail": desc})
                if first_only:
                    return rep
    return rep


# ---------------------------------------------------------------------------
# Plus construction


def plus_construction(F, s: Site):
    """``(HF)(X) = Γ(B_min(X), F)`` with the canonical map ``F -> HF``."""
    c = s.category
    secs = {x: _sections(F, tuple(s.minimum_covering_sieve(x).sorted())) for x in c.objects}
    eta = {x: restriction_to_sections(F, x, secs[x]) for x in c.objects}
    restr: dict[str, Any] = {}
    for f in c.morphisms:
        y, x = c.src[f], c.tgt[f]
        sx, sy = secs[x], secs[y]
        pos_x = {g: i for i, g in enumerate(sx.arrows)}
        try:
            picks = [pos_x[c.table[(f, g)]] for g in sy.arrows]
        except KeyError:
            raise ValueError(f"site is not stable along {f}: minimum covering sieves do not pull back") from None
        if F.kind == "ab":
            P_entries = {}
            row = 0
            for k, g in enumerate(sy.arrows):
                i = picks[k]
                off = sx.ambient.offsets[i]
                for t in range(sx.ambient.summands[i].ngens):
                    P_entries[(row + t, off + t)] = 1
                row += sy.ambient.summands[k].ngens
            P = IntegerMatrix.from_entries(sy.ambient.ngens, sx.ambient.ngens, P_entries)
            restr[f] = sy.sub.matrix_of(P @ sx.sub.lift)
        else:
            restr[f] = {i: sy.index[tuple(fam[p] for p in picks)] for i, fam in enumerate(sx.families)}
    name = f"H({F.name})" if F.name else "HF"
    if F.kind == "ab":
        HF = AbPresheaf(c, {x: secs[x].group for x in c.objects}, restr, name)
    elif F.kind == "group":
        HF = GroupPresheaf(c, {x: secs[x].group for x in c.objects},
                           {f: [r[i] for i in range(len(r))] for f, r in restr.items()}, name)
    else:
        HF = SetPresheaf(c, {x: list(range(len(secs[x]))) for x in c.objects}, restr, name)
    if F.kind == "group":
        eta = {x: e for x, e in eta.items()}
    return HF, PresheafMap(F, HF, eta)


def sheafify(F, s: Site):
    """Two plus constructions; returns the sheaf and the canonical map from ``F``."""
    H1, e1 = plus_construction(F, s)
    H2, e2 = plus_construction(H1, s)
    H2.name = f"a({F.name})" if F.name else "aF"
    return H2, e2.compose(e1)


def plus_map(phi: PresheafMap, s: Site):
    """``H(phi): HF -> HG``, applied familywise on sections over minimum covering sieves."""
    F, G = phi.source, phi.target
    c = s.category
    HF, _ = plus_construction(F, s)
    HG, _ = plus_construction(G, s)
    comps: dict[str, Any] = {}
    for x in c.objects:
        arrows = tuple(s.minimum_covering_sieve(x).sorted())
        sf, sg = _sections(F, arrows), _sections(G, arrows)
        if F.kind == "ab":
            blocks = [phi.components[c.src[k]] for k in arrows]
            comps[x] = sg.sub.matrix_of(block_diagonal(blocks) @ sf.sub.lift)
        else:
            comps[x] = {i: sg.index[tuple(phi.components[c.src[k]][v] for k, v in zip(arrows, fam))]
                        for i, fam in enumerate(sf.families)}
    return PresheafMap(HF, HG, comps)


def sheafify_map(phi: PresheafMap, s: Site) -> PresheafMap:
    return plus_map(plus_map(phi, s), s)


def homotopy_group_sheaf(G: GroupPresheaf, s: Site):
    """Sheaf associated to a group presheaf (the plus construction keeps group structure)."""
    return sheafify(G, s)


# ---------------------------------------------------------------------------
# Standard presheaves


def constant_set(c: FiniteCategory, elements: Sequence[Hashable], name: str = "") -> SetPresheaf:
    return SetPresheaf(c, {x: list(elements) for x in c.objects},
                       {f: {a: a for a in elements} for f in c.morphisms}, name or "constant")


def constant_group(c: FiniteCategory, g: FiniteGroup, name: str = "") -> GroupPresheaf:
    return GroupPresheaf(c, {x: g for x in c.objects}, {f: list(range(g.n)) for f in c.morphisms},
                         name or f"constant:{g.name}")


def constant_ab(c: FiniteCategory, g: FGAbelianGroup, name: str = "", empty: str | None = None) -> AbPresheaf:
    """Constant presheaf; with ``empty`` set, that object gets the zero group instead."""
    vals = {x: (FGAbelianGroup() if x == empty else g) for x in c.objects}
    rest = {}
    for f in c.morphisms:
        a, b = c.src[f], c.tgt[f]
        rest[f] = IntegerMatrix.identity(g.ngens) if vals[a] == vals[b] else IntegerMatrix.zeros(vals[a].ngens, vals[b].ngens)
    return AbPresheaf(c, vals, rest, name or f"constant:{g}")


def open_components(s: Site, name: str) -> list[frozenset[str]]:
    """Connected components of an open subset of a finite space."""
    space = s.space
    if space is None:
        raise ValueError("components need an open-cover site")
    u = s.open_sets[name]
    pts = sorted(u)
    parent = {p: p for p in pts}

    def find(p):
        while parent[p] != p:
            p = parent[p]
        return p

    for p in pts:
        for q in pts:
            if q in space.minimal_opens[p]:
                parent[find(p)] = find(q)
    comps: dict[str, set[str]] = {}
    for p in pts:
        comps.setdefault(find(p), set()).add(p)
    return sorted((frozenset(v) for v in comps.values()), key=lambda t: sorted(t))


def _component_maps(s: Site) -> tuple[dict[str, list[frozenset[str]]], dict[str, list[int]]]:
    c = s.category
    comps = {x: open_components(s, x) for x in c.objects}
    maps = {}
    for f in c.morphisms:
        a, b = c.src[f], c.tgt[f]
        maps[f] = [next(j for j, cb in enumerate(comps[b]) if ca <= cb) for ca in comps[a]]
    return comps, maps


def locally_constant_set(s: Site, elements: Sequence[Hashable], name: str = "") -> SetPresheaf:
    comps, maps = _component_maps(s)
    c = s.category
    vals = {x: list(itertools.product(elements, repeat=len(comps[x]))) for x in c.objects}
    rest = {f: {t: tuple(t[j] for j in maps[f]) for t in vals[c.tgt[f]]} for f in c.morphisms}
    return SetPresheaf(c, vals, rest, name or "locally-constant")


def locally_constant_group(s: Site, g: FiniteGroup, name: str = "") -> GroupPresheaf:
    comps, maps = _component_maps(s)
    c = s.category
    vals, tuples = {}, {}
    for x in c.objects:
        k = len(comps[x])
        ts = list(itertools.product(range(g.n), repeat=k))
        idx = {t: i for i, t in enumerate(ts)}
        table = [[idx[tuple(g.mul(a, b) for a, b in zip(t, u))] for u in ts] for t in ts]
        vals[x] = FiniteGroup(table, ["(" + ",".join(g.names[a] for a in t) + ")" for t in ts], f"{g.name}^{k}")
        tuples[x] = (ts, idx)
    rest = {}
    for f in c.morphisms:
        a, b = c.src[f], c.tgt[f]
        ts_b, _ = tuples[b]
        _, idx_a = tuples[a]
        rest[f] = [idx_a[tuple(t[j] for j in maps[f])] for t in ts_b]
    return GroupPresheaf(c, vals, rest, name or f"locally-constant:{g.name}")


def locally_constant_ab(s: Site, g: FGAbelianGroup, name: str = "") -> AbPresheaf:
    comps, maps = _component_maps(s)
    c = s.category
    blocks, vals, to_c, from_c = {}, {}, {}, {}
    for x in c.objects:
        blocks[x] = BlockGroup([g] * len(comps[x]))
        vals[x], to_c[x], from_c[x] = blocks[x].normalised()
    k = g.ngens
    rest = {}
    for f in c.morphisms:
        a, b = c.src[f], c.tgt[f]
        entries = {}
        for i, j in enumerate(maps[f]):
            for t in range(k):
                entries[(i * k + t, j * k + t)] = 1
        M = IntegerMatrix.from_entries(len(comps[a]) * k, len(comps[b]) * k, entries)
        rest[f] = to_c[a] @ M @ from_c[b]
    return AbPresheaf(c, vals, rest, name or f"locally-constant:{g}")


def product_presheaf(F: SetPresheaf, G: SetPresheaf) -> SetPresheaf:
    c = F.category
    vals = {x: [(a, b) for a in F.value(x) for b in G.value(x)] for x in c.objects}
    rest = {f: {(a, b): (F.restrict(f, a), G.restrict(f, b)) for (a, b) in vals[c.tgt[f]]} for f in c.morphisms}
    return SetPresheaf(c, vals, rest, f"{F.name}x{G.name}")


def presheaf_from_spec(s: Site, spec: str, kind: str = "ab"):
    """``constant:<G>``, ``constant-nonempty:<G>``, ``locally-constant:<G>``.

    ``kind`` selects abelian (``ab``), finite group (``group``) or set values.
    """
    try:
        head, arg = spec.split(":", 1)
    except ValueError:
        raise ValueError(f"presheaf shorthand needs the form <kind>:<group>, got {spec!r}") from None
    c = s.category
    empty = "∅" if "∅" in c.identities else None
    if kind == "ab":
        g = FGAbelianGroup.parse(arg)
        if head == "constant":
            return constant_ab(c, g, spec)
        if head == "constant-nonempty":
            if empty is None:
                raise ValueError("constant-nonempty needs an empty open")
            return constant_ab(c, g, spec, empty=empty)
        if head == "locally-constant":
            return locally_constant_ab(s, g, spec)
    elif kind == "group":
        g = parse_group(arg)
        if head == "constant":
            return constant_group(c, g, spec)
        if head == "locally-constant":
            return locally_constant_group(s, g, spec)
    elif kind == "set":
        elems = [e.strip() for e in arg.split(",")]
        if head == "constant":
            return constant_set(c, elems, spec)
        if head == "locally-constant":
            return locally_constant_set(s, elems, spec)
    raise ValueError(f"unknown presheaf shorthand {spec!r} for {kind} values")


def ab_to_group_presheaf(F: AbPresheaf) -> GroupPresheaf:
    """Finite abelian presheaf as a table-valued group presheaf."""
    c = F.category
    vals, elems = {}, {}
    for x in c.objects:
        G = F.value(x)
        if G.rank:
            raise ValueError("infinite value group")
        es = G.elements()
        idx = {e: i for i, e in enumerate(es)}
        table = [[idx[G.reduce([u + v for u, v in zip(a, b)])] for b in es] for a in es]
        vals[x] = FiniteGroup(table, [str(e) for e in es], str(G))
        elems[x] = (es, idx)
    rest = {}
    for f in c.morphisms:
        es_b, _ = elems[c.tgt[f]]
        _, idx_a = elems[c.src[f]]
        rest[f] = [idx_a[F.restrict(f, e)] for e in es_b]
    return GroupPresheaf(c, vals, rest, F.name)


# ---------------------------------------------------------------------------
# Random presheaves on posets


def _poset_order(c: FiniteCategory) -> list[str]:
    """Objects sorted so every object comes after all objects above it."""
    above = {x: sum(1 for f in c.outof(x) if not c.is_identity(f)) for x in c.objects}
    return sorted(c.objects, key=lambda x: (above[x], x))


def random_poset_functor(c: FiniteCategory, rng: random.Random, max_size: int = 3,
                         contravariant: bool = True, allow_empty: bool = False):
    """Random set-valued functor on a poset category.

    Built one object at a time: each new value receives a random cocone
    from the values already placed, which is exactly the data needed.
    Returns ``(values, maps)``; ``maps[f]`` goes in the variance requested.
    """
    if contravariant:
        # presheaf: value at x receives maps from F(y) for x <= y
        order = _poset_order(c)
        larger = {x: [c.tgt[f] for f in c.outof(x) if not c.is_identity(f)] for x in c.objects}
        arrow_to = {x: {c.tgt[f]: f for f in c.outof(x)} for x in c.objects}
    else:
        below = {x: sum(1 for f in c.into(x) if not c.is_identity(f)) for x in c.objects}
        order = sorted(c.objects, key=lambda x: (below[x], x))
        larger = {x: [c.src[f] for f in c.into(x) if not c.is_identity(f)] for x in c.objects}
        arrow_to = {x: {c.src[f]: f for f in c.into(x)} for x in c.objects}
    values: dict[str, list[int]] = {}
    maps: dict[str, dict[int, int]] = {}
    for x in order:
        ys = larger[x]
        # colimit of the values above x along the existing maps
        parent: dict[tuple[str, int], tuple[str, int]] = {}

        def find(k):
            while parent[k] != k:
                k = parent[k]
            return k

        for y in ys:
            for a in values[y]:
                parent[(y, a)] = (y, a)
        for y in ys:
            for z in ys:
                if z == y or z not in arrow_to[y]:
                    continue
                m = maps[arrow_to[y][z]]
                for a in values[z]:
                    parent[find((z, a))] = find((y, m[a]))
        classes = sorted({find(k) for k in parent})
        lo = 0 if allow_empty and not classes else 1
        n = rng.randint(lo, max_size)
        if classes and n == 0:
            n = 1
        assign = {cl: rng.randrange(n) for cl in classes}
        values[x] = list(range(n))
        maps[c.identities[x]] = {a: a for a in range(n)}
        for y in ys:
            maps[arrow_to[x][y]] = {a: assign[find((y, a))] for a in values[y]}
    return values, maps


def random_set_presheaf(s: Site, rng: random.Random, max_size: int = 3) -> SetPresheaf:
    values, maps = random_poset_functor(s.category, rng, max_size, True)
    return SetPresheaf(s.category, values, maps, "random")


def random_group_presheaf(s: Site, rng: random.Random, group: FiniteGroup | None = None,
                          max_size: int = 2) -> GroupPresheaf:
    """``U -> G^{T(U)}`` for a random covariant ``T`` (restriction by precomposition)."""
    c = s.category
    g = group or rng.choice([cyclic(2), cyclic(3)])
    tvals, tmaps = random_poset_functor(c, rng, max_size, contravariant=False)
    vals, tuples = {}, {}
    for x in c.objects:
        k = len(tvals[x])
        ts = list(itertools.product(range(g.n), repeat=k))
        idx = {t: i for i, t in enumerate(ts)}
        table = [[idx[tuple(g.mul(a, b) for a, b in zip(t, u))] for u in ts] for t in ts]
        vals[x] = FiniteGroup(table, None, f"{g.name}^{k}")
        tuples[x] = (ts, idx)
    rest = {}
    for f in c.morphisms:
        a, b = c.src[f], c.tgt[f]
        m = tmaps[f]  # T(a) -> T(b)
        ts_b, _ = tuples[b]
        _, idx_a = tuples[a]
        rest[f] = [idx_a[tuple(t[m[i]] for i in range(len(tvals[a])))] for t in ts_b]
    return GroupPresheaf(c, vals, rest, f"random:{g.name}")


def equal_presheaf_values(F, G) -> bool:
    """Objectwise isomorphism types agree (sizes for sets/groups, groups for abelian)."""
    for x in F.category.objects:
        if F.kind == "ab":
            if F.value(x) != G.value(x):
                return False
        elif F.size(x) != G.size(x):
            return False
    return True
