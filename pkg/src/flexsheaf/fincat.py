"""Finite categories given by explicit composition tables."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .report import ValidationReport
from .sset import FiniteSimplicialSet


class FiniteCategory:
    """Objects and morphisms are strings; ``table[(g, f)] = g ∘ f``.

    The constructor does not validate axioms (so broken tables can be
    reported on); use :func:`check_category`.
    """

    def __init__(
        self,
        objects: Sequence[str],
        morphisms: Mapping[str, tuple[str, str]],
        table: Mapping[tuple[str, str], str],
        identities: Mapping[str, str],
        name: str = "",
    ):
        self.name = name
        self.objects: tuple[str, ...] = tuple(objects)
        self.morphisms: tuple[str, ...] = tuple(morphisms)
        self.src: dict[str, str] = {m: st[0] for m, st in morphisms.items()}
        self.tgt: dict[str, str] = {m: st[1] for m, st in morphisms.items()}
        self.table: dict[tuple[str, str], str] = dict(table)
        self.identities: dict[str, str] = dict(identities)
        self._identity_set = set(self.identities.values())
        self._hom: dict[tuple[str, str], list[str]] = {}
        self._into: dict[str, list[str]] = {x: [] for x in self.objects}
        self._outof: dict[str, list[str]] = {x: [] for x in self.objects}
        for m in self.morphisms:
            s, t = self.src[m], self.tgt[m]
            self._hom.setdefault((s, t), []).append(m)
            if t in self._into:
                self._into[t].append(m)
            if s in self._outof:
                self._outof[s].append(m)

    # -- basic access --------------------------------------------------------

    def identity(self, x: str) -> str:
        try:
            return self.identities[x]
        except KeyError:
            raise KeyError(f"unknown object {x!r}") from None

    def is_identity(self, f: str) -> bool:
        return f in self._identity_set

    def hom(self, a: str, b: str) -> list[str]:
        return self._hom.get((a, b), [])

    def into(self, x: str) -> list[str]:
        return self._into[x]

    def outof(self, x: str) -> list[str]:
        return self._outof[x]

    def compose(self, g: str, f: str) -> str:
        """``g ∘ f`` (first ``f``, then ``g``)."""
        try:
            return self.table[(g, f)]
        except KeyError:
            raise ValueError(f"{g} ∘ {f} is not defined") from None

    def compose_path(self, *fs: str) -> str:
        """``fs[0] ∘ fs[1] ∘ ...``."""
        out = fs[-1]
        for g in reversed(fs[:-1]):
            out = self.compose(g, out)
        return out

    def composable_pairs(self) -> Iterator[tuple[str, str]]:
        """Pairs ``(g, f)`` with ``tgt f == src g``."""
        for f in self.morphisms:
            for g in self._outof.get(self.tgt[f], []):
                yield g, f

    def composable_tuples(self, k: int, allow_identities: bool = True) -> list[tuple[str, ...]]:
        """Tuples ``(f1, ..., fk)`` with ``tgt f_i == src f_{i+1}``; ``k = 0`` gives ``()`` per object."""
        if k == 0:
            return [() for _ in self.objects]
        mors = [m for m in self.morphisms if allow_identities or not self.is_identity(m)]
        out = [(m,) for m in mors]
        for _ in range(k - 1):
            nxt = []
            for t in out:
                for m in self._outof[self.tgt[t[-1]]]:
                    if allow_identities or not self.is_identity(m):
                        nxt.append(t + (m,))
            out = nxt
        return out

    def is_isomorphism(self, f: str) -> str | None:
        """An inverse of ``f`` if there is one."""
        for g in self.hom(self.tgt[f], self.src[f]):
            if self.table.get((g, f)) == self.identities[self.src[f]] and \
                    self.table.get((f, g)) == self.identities[self.tgt[f]]:
                return g
        return None

    def is_groupoid(self) -> bool:
        return all(self.is_isomorphism(f) is not None for f in self.morphisms)

    def terminal_objects(self) -> list[str]:
        return [x for x in self.objects if all(len(self.hom(y, x)) == 1 for y in self.objects)]

    def initial_objects(self) -> list[str]:
        return [x for x in self.objects if all(len(self.hom(x, y)) == 1 for y in self.objects)]

    def opposite(self) -> "FiniteCategory":
        return FiniteCategory(
            self.objects,
            {m: (self.tgt[m], self.src[m]) for m in self.morphisms},
            {(f, g): h for (g, f), h in self.table.items()},
            self.identities,
            f"{self.name}^op",
        )

    def __repr__(self) -> str:
        return f"FiniteCategory({self.name or '?'}, {len(self.objects)} objects, {len(self.morphisms)} morphisms)"

    def to_record(self) -> dict:
        return {
            "objects": list(self.objects),
            "morphisms": [
                {"name": m, "src": self.src[m], "tgt": self.tgt[m]}
                for m in self.morphisms if not self.is_identity(m)
            ],
            "identities": dict(self.identities),
            "compose": [[g, f, h] for (g, f), h in sorted(self.table.items())
                        if not (self.is_identity(g) or self.is_identity(f))],
        }


def from_generators_table(
    objects: Sequence[str],
    arrows: Mapping[str, tuple[str, str]],
    compose: Mapping[tuple[str, str], str],
    name: str = "",
    identity_name: Callable[[str], str] = lambda x: f"id_{x}",
) -> FiniteCategory:
    """Add identities to a table of non-identity morphisms and their composites."""
    morphisms = {identity_name(x): (x, x) for x in objects}
    morphisms.update(arrows)
    ids = {x: identity_name(x) for x in objects}
    table = dict(compose)
    for m, (s, t) in morphisms.items():
        table[(ids[t], m)] = m
        table[(m, ids[s])] = m
    return FiniteCategory(objects, morphisms, table, ids, name)


# ---------------------------------------------------------------------------
# Standard constructions


def terminal() -> FiniteCategory:
    return from_poset(["*"], lambda a, b: True, "terminal")


def poset_arrow(a: str, b: str) -> str:
    return f"id_{a}" if a == b else f"{a}->{b}"


def from_poset(elements: Sequence[str], leq: Callable[[str, str], bool], name: str = "") -> FiniteCategory:
    """Poset as a category: one morphism ``a -> b`` when ``a <= b``."""
    morphisms = {}
    for a in elements:
        for b in elements:
            if leq(a, b):
                morphisms[poset_arrow(a, b)] = (a, b)
    table = {}
    for a in elements:
        for b in elements:
            if not leq(a, b):
                continue
            for c in elements:
                if leq(b, c):
                    table[(poset_arrow(b, c), poset_arrow(a, b))] = poset_arrow(a, c)
    return FiniteCategory(elements, morphisms, table, {a: poset_arrow(a, a) for a in elements}, name)


def arrow_category() -> FiniteCategory:
    """``[1]``: objects ``0``, ``1`` and one arrow ``0 -> 1``."""
    return from_poset(["0", "1"], lambda a, b: int(a) <= int(b), "[1]")


def ordinal(n: int) -> FiniteCategory:
    """``[n] = {0 < 1 < ... < n}``."""
    return from_poset([str(i) for i in range(n + 1)], lambda a, b: int(a) <= int(b), f"[{n}]")


def interval_I() -> FiniteCategory:
    """Objects ``0``, ``1`` with a single arrow ``1 -> 0``."""
    return interval_In(1)


def interval_In(n: int) -> FiniteCategory:
    """Objects ``0..n`` with a unique arrow ``i -> j`` whenever ``i >= j``."""
    return from_poset([str(i) for i in range(n + 1)], lambda a, b: int(a) >= int(b), f"I({n})")


def interval_Ibar() -> FiniteCategory:
    """Two objects joined by mutually inverse arrows."""
    return from_poset(["0", "1"], lambda a, b: True, "Ibar")


def from_group(elements: Sequence[str], mult: Callable[[str, str], str], identity: str,
               obj: str = "*", name: str = "") -> FiniteCategory:
    """One-object category; ``g ∘ f = mult(g, f)``."""
    morphisms = {g: (obj, obj) for g in elements}
    table = {(g, f): mult(g, f) for g in elements for f in elements}
    return FiniteCategory([obj], morphisms, table, {obj: identity}, name)


def product(c: FiniteCategory, d: FiniteCategory, name: str = "") -> FiniteCategory:
    def ob(x, y):
        return f"({x},{y})"

    objects = [ob(x, y) for x in c.objects for y in d.objects]
    morphisms = {ob(f, g): (ob(c.src[f], d.src[g]), ob(c.tgt[f], d.tgt[g])) for f in c.morphisms for g in d.morphisms}
    table = {}
    for (g1, f1), h1 in c.table.items():
        for (g2, f2), h2 in d.table.items():
            table[(ob(g1, g2), ob(f1, f2))] = ob(h1, h2)
    ids = {ob(x, y): ob(c.identities[x], d.identities[y]) for x in c.objects for y in d.objects}
    return FiniteCategory(objects, morphisms, table, ids, name or f"{c.name}x{d.name}")


# ---------------------------------------------------------------------------
# Validation


def check_category(c: FiniteCategory) -> ValidationReport:
    rep = ValidationReport(f"category {c.name}".strip())
    objs = set(c.objects)
    for m in c.morphisms:
        if c.src[m] not in objs or c.tgt[m] not in objs:
            rep.fail(f"morphism {m} has unknown source/target")
    for x in c.objects:
        i = c.identities.get(x)
        if i is None:
            rep.fail(f"object {x} has no identity")
        elif i not in c.src or c.src[i] != x or c.tgt[i] != x:
            rep.fail(f"identity {i} of {x} is not an endomorphism of {x}")
    for (g, f), h in c.table.items():
        if f not in c.src or g not in c.src:
            rep.fail(f"compose({g},{f}) mentions an unknown morphism")
            continue
        if c.tgt[f] != c.src[g]:
            rep.fail(f"compose({g},{f}) defined for non-composable pair")
            continue
        if h not in c.src:
            rep.fail(f"compose({g},{f}) = {h} is not a morphism")
        elif c.src[h] != c.src[f] or c.tgt[h] != c.tgt[g]:
            rep.fail(f"compose({g},{f}) = {h} has wrong source/target")
    if not rep.ok:
        return rep
    for g, f in c.composable_pairs():
        if (g, f) not in c.table:
            rep.fail(f"compose({g},{f}) missing")
    if not rep.ok:
        return rep
    for f in c.morphisms:
        if c.table[(c.identities[c.tgt[f]], f)] != f:
            rep.fail(f"left unit fails for {f}")
        if c.table[(f, c.identities[c.src[f]])] != f:
            rep.fail(f"right unit fails for {f}")
    for g, f in c.composable_pairs():
        gf = c.table[(g, f)]
        for h in c.outof(c.tgt[g]):
            if c.table[(h, gf)] != c.table[(c.table[(h, g)], f)]:
                rep.fail(f"associativity fails for ({h},{g},{f})")
    return rep


@dataclass(frozen=True)
class CatFunctor:
    source: FiniteCategory
    target: FiniteCategory
    on_objects: Mapping[str, str]
    on_morphisms: Mapping[str, str]

    def __call__(self, m: str) -> str:
        return self.on_morphisms[m]

    def ob(self, x: str) -> str:
        return self.on_objects[x]

    def check(self) -> ValidationReport:
        rep = ValidationReport("functor")
        s, t = self.source, self.target
        for x in s.objects:
            if x not in self.on_objects:
                rep.fail(f"object {x} unmapped")
        for m in s.morphisms:
            if m not in self.on_morphisms:
                rep.fail(f"morphism {m} unmapped")
        if not rep.ok:
            return rep
        for m in s.morphisms:
            fm = self.on_morphisms[m]
            if t.src.get(fm) != self.on_objects[s.src[m]] or t.tgt.get(fm) != self.on_objects[s.tgt[m]]:
                rep.fail(f"{m} -> {fm} does not preserve source/target")
        for x in s.objects:
            if self.on_morphisms[s.identities[x]] != t.identities[self.on_objects[x]]:
                rep.fail(f"identity of {x} not preserved")
        for (g, f), h in s.table.items():
            if t.table.get((self.on_morphisms[g], self.on_morphisms[f])) != self.on_morphisms[h]:
                rep.fail(f"composition ({g},{f}) not preserved")
        return rep


@dataclass(frozen=True)
class Subcategory:
    """Explicit object and morphism subsets; closure is checked, not inferred."""

    objects: frozenset[str]
    morphisms: frozenset[str]
    name: str = ""

    @classmethod
    def full(cls, c: FiniteCategory, objects: Iterable[str], name: str = "") -> "Subcategory":
        obs = frozenset(objects)
        mors = frozenset(m for m in c.morphisms if c.src[m] in obs and c.tgt[m] in obs)
        return cls(obs, mors, name)

    @classmethod
    def whole(cls, c: FiniteCategory) -> "Subcategory":
        return cls(frozenset(c.objects), frozenset(c.morphisms), c.name)

    def validate(self, c: FiniteCategory) -> ValidationReport:
        rep = ValidationReport(f"subcategory {self.name}".strip())
        for x in self.objects:
            if x not in c.identities:
                rep.fail(f"unknown object {x}")
            elif c.identities[x] not in self.morphisms:
                rep.fail(f"identity of {x} missing")
        for m in self.morphisms:
            if m not in c.src:
                rep.fail(f"unknown morphism {m}")
            elif c.src[m] not in self.objects or c.tgt[m] not in self.objects:
                rep.fail(f"morphism {m} leaves the object set")
        if rep.ok:
            for g, f in c.composable_pairs():
                if g in self.morphisms and f in self.morphisms and c.table[(g, f)] not in self.morphisms:
                    rep.fail(f"not closed under composition: ({g},{f})")
        return rep


def subcategory_as_category(c: FiniteCategory, sub: Subcategory) -> FiniteCategory:
    objs = [x for x in c.objects if x in sub.objects]
    mors = {m: (c.src[m], c.tgt[m]) for m in c.morphisms if m in sub.morphisms}
    table = {(g, f): h for (g, f), h in c.table.items() if g in sub.morphisms and f in sub.morphisms}
    return FiniteCategory(objs, mors, table, {x: c.identities[x] for x in objs}, sub.name)


def strip_subcategories(base: FiniteCategory, n: int) -> tuple[FiniteCategory, list[Subcategory]]:
    """``base x I(n)`` together with the strips ``base x {i-1, i}``."""
    big = product(base, interval_In(n))
    subs = []
    for i in range(1, n + 1):
        keep = {f"({x},{j})" for x in base.objects for j in (str(i - 1), str(i))}
        subs.append(Subcategory.full(big, keep, f"strip{i}"))
    return big, subs


# ---------------------------------------------------------------------------
# Derived categories


def slice_category(c: FiniteCategory, x: str) -> tuple[FiniteCategory, CatFunctor]:
    """``c/x`` with its forgetful functor.

    Objects are the morphisms into ``x`` (named as in ``c``); a morphism
    ``f -> f'`` is an ``h`` with ``f' ∘ h == f``, named ``h:f=>f'``.
    """
    if x not in c.identities:
        raise KeyError(f"unknown object {x!r}")
    objs = list(c.into(x))
    morphisms: dict[str, tuple[str, str]] = {}
    under: dict[str, str] = {}
    for f in objs:
        for f2 in objs:
            for h in c.hom(c.src[f], c.src[f2]):
                if c.table[(f2, h)] == f:
                    name = f"{h}:{f}=>{f2}"
                    morphisms[name] = (f, f2)
                    under[name] = h
    table = {}
    by_src: dict[str, list[str]] = {}
    for m, (s, _) in morphisms.items():
        by_src.setdefault(s, []).append(m)
    for m, (s, t) in morphisms.items():
        for m2 in by_src.get(t, []):
            h = c.table[(under[m2], under[m])]
            table[(m2, m)] = f"{h}:{s}=>{morphisms[m2][1]}"
    ids = {f: f"{c.identities[c.src[f]]}:{f}=>{f}" for f in objs}
    sl = FiniteCategory(objs, morphisms, table, ids, f"{c.name}/{x}")
    proj = CatFunctor(sl, c, {f: c.src[f] for f in objs}, under)
    return sl, proj


def factorization_category(c: FiniteCategory) -> FiniteCategory:
    """Objects are morphisms of ``c``; ``(u, v): psi -> phi`` whenever ``psi = u ∘ phi ∘ v``."""
    morphisms: dict[str, tuple[str, str]] = {}
    parts: dict[str, tuple[str, str]] = {}
    for psi in c.morphisms:
        for phi in c.morphisms:
            for v in c.hom(c.src[psi], c.src[phi]):
                phiv = c.table[(phi, v)]
                for u in c.hom(c.tgt[phi], c.tgt[psi]):
                    if c.table[(u, phiv)] == psi:
                        name = f"({u},{v}):{psi}=>{phi}"
                        morphisms[name] = (psi, phi)
                        parts[name] = (u, v)
    by_src: dict[str, list[str]] = {}
    for m, (s, _) in morphisms.items():
        by_src.setdefault(s, []).append(m)
    table = {}
    for m, (psi, phi) in morphisms.items():
        u, v = parts[m]
        for m2 in by_src.get(phi, []):
            u2, v2 = parts[m2]
            chi = morphisms[m2][1]
            table[(m2, m)] = f"({c.table[(u, u2)]},{c.table[(v2, v)]}):{psi}=>{chi}"
    ids = {f: f"({c.identities[c.tgt[f]]},{c.identities[c.src[f]]}):{f}=>{f}" for f in c.morphisms}
    return FiniteCategory(list(c.morphisms), morphisms, table, ids, f"Fl({c.name})")


def _composite_closure(c: FiniteCategory, gens: set[str]) -> set[str]:
    out = set(gens)
    changed = True
    while changed:
        changed = False
        for g, f in list(c.composable_pairs()):
            if g in out and f in out and c.table[(g, f)] not in out:
                out.add(c.table[(g, f)])
                changed = True
    return out


def ins_category(c: FiniteCategory, subcats: Sequence[Subcategory], phi: str) -> FiniteCategory:
    """Factorizations ``phi = alpha ∘ beta`` through objects of the subcategories.

    An object ``(Z, alpha, beta)`` is named ``alpha|beta``.  Morphisms are the
    maps ``m: Z -> Z'`` generated by the subcategories with
    ``m ∘ beta = beta'`` and ``alpha' ∘ m = alpha``.
    """
    if phi not in c.src:
        raise KeyError(f"unknown morphism {phi!r}")
    for s in subcats:
        rep = s.validate(c)
        if not rep.ok:
            raise ValueError(f"malformed subcategory: {rep.violations[0]}")
    allowed_obs = set().union(*(s.objects for s in subcats)) if subcats else set()
    allowed = _composite_closure(c, set().union(*(s.morphisms for s in subcats))) if subcats else set()
    a, b = c.src[phi], c.tgt[phi]
    objs: list[str] = []
    data: dict[str, tuple[str, str, str]] = {}
    for z in c.objects:
        if z not in allowed_obs:
            continue
        for beta in c.hom(a, z):
            for alpha in c.hom(z, b):
                if c.table[(alpha, beta)] == phi:
                    name = f"{alpha}|{beta}"
                    objs.append(name)
                    data[name] = (z, alpha, beta)
    morphisms: dict[str, tuple[str, str]] = {}
    under: dict[str, str] = {}
    for o in objs:
        z, al, be = data[o]
        for o2 in objs:
            z2, al2, be2 = data[o2]
            for m in c.hom(z, z2):
                if m in allowed and c.table[(m, be)] == be2 and c.table[(al2, m)] == al:
                    name = f"{m}:{o}=>{o2}"
                    morphisms[name] = (o, o2)
                    under[name] = m
    by_src: dict[str, list[str]] = {}
    for m, (s, _) in morphisms.items():
        by_src.setdefault(s, []).append(m)
    table = {}
    for m, (s, t) in morphisms.items():
        for m2 in by_src.get(t, []):
            table[(m2, m)] = f"{c.table[(under[m2], under[m])]}:{s}=>{morphisms[m2][1]}"
    ids = {o: f"{c.identities[data[o][0]]}:{o}=>{o}" for o in objs}
    return FiniteCategory(objs, morphisms, table, ids, f"Ins({phi})")


# ---------------------------------------------------------------------------
# Nerve


def _nerve_generic(c: FiniteCategory, chain: tuple[str, ...], start: str):
    """Generic form of a composable chain (identities allowed)."""
    sigma = [0]
    kept = []
    for g in chain:
        if c.is_identity(g):
            sigma.append(sigma[-1])
        else:
            sigma.append(sigma[-1] + 1)
            kept.append(g)
    key = tuple(kept) if kept else start
    return key, tuple(sigma)


def nerve_faces(c: FiniteCategory, chain: tuple[str, ...]) -> list[tuple[tuple[str, ...], str]]:
    """Faces ``d_0 .. d_k`` of a chain, each with its start object."""
    k = len(chain)
    out = []
    for i in range(k + 1):
        if i == 0:
            sub = chain[1:]
            start = c.tgt[chain[0]]
        elif i == k:
            sub = chain[:-1]
            start = c.src[chain[0]]
        else:
            sub = chain[:i - 1] + (c.table[(chain[i], chain[i - 1])],) + chain[i + 1:]
            start = c.src[chain[0]]
        out.append((sub, start))
    return out


def nerve(c: FiniteCategory, dim_cap: int) -> FiniteSimplicialSet:
    """Nerve with nondegenerate ``k``-simplices the chains of ``k`` non-identity arrows.

    A chain ``(f1, ..., fk)`` has ``tgt f_i == src f_{i+1}``; vertices are
    object names.
    """
    if dim_cap < 0:
        raise ValueError("dim_cap must be >= 0")
    nondeg: dict[int, list] = {0: list(c.objects)}
    faces: dict = {}
    for k in range(1, dim_cap + 1):
        chains = c.composable_tuples(k, allow_identities=False)
        nondeg[k] = chains
        for ch in chains:
            fs = []
            for sub, start in nerve_faces(c, ch):
                fs.append(_nerve_generic(c, sub, start))
            faces[ch] = fs
    return FiniteSimplicialSet(nondeg, faces, dim_cap, f"N({c.name})")


def nerve_simplex(c: FiniteCategory, chain: tuple[str, ...], start: str | None = None):
    """Generic simplex of the nerve represented by an arbitrary chain."""
    if not chain:
        if start is None:
            raise ValueError("empty chain needs a start object")
        return start, (0,)
    return _nerve_generic(c, chain, c.src[chain[0]])


def functor_on_nerve(f: CatFunctor, chain: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(f.on_morphisms[m] for m in chain)
