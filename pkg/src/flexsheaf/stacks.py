"""Groupoid-valued pseudofunctors: strictification, descent, stacks.

Conventions.  For ``u: A -> B`` in the base, ``u*`` is a functor
``P(B) -> P(A)``.  For composable ``u ∘ v`` the coherence
``ξ_{u,v}: v* u* => (u v)*`` has one component per object of ``P(tgt u)``.

Pseudo-limits over a diagram ``D -> base`` store, for every object ``d``
an object ``x_d`` of ``P(L d)`` and, for every non-identity arrow
``e: d' -> d``, an isomorphism ``φ_e: (L e)* x_d -> x_{d'}``.
"""
from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .fincat import FiniteCategory, check_category, nerve, nerve_simplex, product, arrow_category
from .groups import FiniteGroup, find_isomorphism, parse_group
from .presheaf import GroupPresheaf, SetPresheaf, constant_group, sheafify
from .report import BudgetExceeded, ValidationReport
from .site import CechIndexing, CoveringFamily, Site, family_of_sieve, top_object
from .sset import FiniteSimplicialSet


# ---------------------------------------------------------------------------
# Groupoids


class FiniteGroupoid(FiniteCategory):
    def __init__(self, objects, morphisms, table, identities, inverses: Mapping[str, str], name: str = ""):
        super().__init__(objects, morphisms, table, identities, name)
        self.inverse: dict[str, str] = dict(inverses)

    def check(self) -> ValidationReport:
        rep = check_category(self)
        rep.subject = f"groupoid {self.name}".strip()
        if not rep.ok:
            return rep
        for m in self.morphisms:
            i = self.inverse.get(m)
            if i is None or self.src[i] != self.tgt[m] or self.tgt[i] != self.src[m]:
                rep.fail(f"{m} has no recorded inverse")
            elif self.table[(i, m)] != self.identities[self.src[m]] or self.table[(m, i)] != self.identities[self.tgt[m]]:
                rep.fail(f"recorded inverse of {m} is wrong")
        return rep

    def compose(self, g: str, f: str) -> str:
        return self.table[(g, f)]

    def components(self) -> list[list[str]]:
        seen: dict[str, int] = {}
        comps: list[list[str]] = []
        for x in self.objects:
            if x in seen:
                continue
            comp = sorted({self.tgt[m] for m in self.outof(x)})
            for y in comp:
                seen[y] = len(comps)
            comps.append(comp)
        return comps

    def component_of(self) -> dict[str, int]:
        return {x: i for i, comp in enumerate(self.components()) for x in comp}

    def vertex_group(self, x: str) -> tuple[FiniteGroup, list[str]]:
        auts = [self.identities[x]] + [m for m in self.hom(x, x) if m != self.identities[x]]
        pos = {m: i for i, m in enumerate(auts)}
        table = [[pos[self.table[(a, b)]] for b in auts] for a in auts]
        return FiniteGroup(table, auts, f"Aut({x})"), auts

    def invariants(self) -> list[int]:
        """Sorted automorphism-group orders, one per component."""
        return sorted(len(self.hom(c[0], c[0])) for c in self.components())


def build_groupoid(objects: Sequence[str], keys: Iterable[Hashable], src: Callable, tgt: Callable,
                   compose: Callable, identity: Callable, inverse: Callable, name_of: Callable,
                   name: str = "") -> tuple[FiniteGroupoid, dict[Hashable, str]]:
    """Tabulate a groupoid given abstractly by morphism keys."""
    keys = list(keys)
    names = {k: name_of(k) for k in keys}
    if len(set(names.values())) != len(names):
        raise ValueError("morphism names collide")
    morphisms = {names[k]: (src(k), tgt(k)) for k in keys}
    out: dict[str, list] = {x: [] for x in objects}
    for k in keys:
        out[src(k)].append(k)
    table = {}
    for f in keys:
        for g in out[tgt(f)]:
            table[(names[g], names[f])] = names[compose(g, f)]
    ids = {x: names[identity(x)] for x in objects}
    inv = {names[k]: names[inverse(k)] for k in keys}
    return FiniteGroupoid(objects, morphisms, table, ids, inv, name), names


def bg_groupoid(G: FiniteGroup, obj: str = "*", name: str = "") -> FiniteGroupoid:
    g, _ = build_groupoid([obj], G.elements(), lambda k: obj, lambda k: obj, lambda a, b: G.mul(a, b),
                          lambda x: 0, G.inverse, lambda k: G.names[k], name or f"B{G.name}")
    return g


def block_groupoid(blocks: Sequence[Sequence[str]], G: FiniteGroup, name: str = "") -> FiniteGroupoid:
    """Each block is a set of mutually isomorphic objects with automorphism group ``G``."""
    objects = [x for b in blocks for x in b]
    keys = [(x, y, g) for b in blocks for x in b for y in b for g in G.elements()]
    grp, _ = build_groupoid(
        objects, keys, lambda k: k[0], lambda k: k[1],
        lambda k2, k1: (k1[0], k2[1], G.mul(k2[2], k1[2])),
        lambda x: (x, x, 0), lambda k: (k[1], k[0], G.inverse(k[2])),
        lambda k: f"{k[0]}>{k[1]}:{G.names[k[2]]}", name)
    return grp


@dataclass
class GroupoidFunctor:
    source: FiniteGroupoid
    target: FiniteGroupoid
    on_objects: dict[str, str]
    on_morphisms: dict[str, str]

    def __call__(self, m: str) -> str:
        return self.on_morphisms[m]

    def check(self) -> ValidationReport:
        rep = ValidationReport("functor")
        A, B = self.source, self.target
        for m in A.morphisms:
            fm = self.on_morphisms.get(m)
            if fm is None:
                rep.fail(f"{m} is not mapped")
                continue
            if B.src[fm] != self.on_objects[A.src[m]] or B.tgt[fm] != self.on_objects[A.tgt[m]]:
                rep.fail(f"{m} is sent to a morphism with the wrong ends")
        if not rep.ok:
            return rep
        for x in A.objects:
            if self.on_morphisms[A.identities[x]] != B.identities[self.on_objects[x]]:
                rep.fail(f"identity of {x} not preserved")
        for (g, f), h in A.table.items():
            if B.table[(self.on_morphisms[g], self.on_morphisms[f])] != self.on_morphisms[h]:
                rep.fail(f"composition not preserved at ({g},{f})")
                break
        return rep


def compose_functors(G: GroupoidFunctor, F: GroupoidFunctor) -> GroupoidFunctor:
    """``G ∘ F``."""
    return GroupoidFunctor(F.source, G.target, {x: G.on_objects[y] for x, y in F.on_objects.items()},
                           {m: G.on_morphisms[n] for m, n in F.on_morphisms.items()})


def identity_functor(A: FiniteGroupoid) -> GroupoidFunctor:
    return GroupoidFunctor(A, A, {x: x for x in A.objects}, {m: m for m in A.morphisms})


def equivalence_report(F: GroupoidFunctor) -> ValidationReport:
    """Exhaustive full, faithful and essentially surjective checks."""
    rep = ValidationReport("equivalence")
    A, B = F.source, F.target
    fr = F.check()
    if not fr.ok:
        rep.extend(fr)
        return rep
    full = faithful = True
    for x in A.objects:
        for y in A.objects:
            image = [F.on_morphisms[m] for m in A.hom(x, y)]
            if len(set(image)) != len(image):
                faithful = False
                rep.fail(f"not faithful on Hom({x},{y})")
            if len(set(image)) != len(B.hom(F.on_objects[x], F.on_objects[y])):
                full = False
                rep.fail(f"not full on Hom({x},{y})")
    comp = B.component_of()
    hit = {comp[F.on_objects[x]] for x in A.objects}
    missing = [c for c in B.components() if comp[c[0]] not in hit]
    if missing:
        rep.fail(f"not essentially surjective: {len(missing)} component(s) missed, e.g. {missing[0][0]}")
    rep.details.update(full=full, faithful=faithful, essentially_surjective=not missing)
    return rep


def find_equivalence(A: FiniteGroupoid, B: FiniteGroupoid) -> GroupoidFunctor | None:
    """An equivalence ``A -> B`` built from matched components, or ``None``."""
    ca, cb = A.components(), B.components()
    if len(ca) != len(cb):
        return None
    groups_b = [B.vertex_group(c[0]) for c in cb]
    used: set[int] = set()
    on_o: dict[str, str] = {}
    on_m: dict[str, str] = {}
    for comp in ca:
        a = comp[0]
        ga, auts_a = A.vertex_group(a)
        match = None
        for j, (gb, auts_b) in enumerate(groups_b):
            if j in used or gb.order != ga.order:
                continue
            iso = find_isomorphism(ga, gb)
            if iso is not None:
                match = (j, iso, auts_b)
                break
        if match is None:
            return None
        j, iso, auts_b = match
        used.add(j)
        b = cb[j][0]
        psi = {auts_a[i]: auts_b[iso[i]] for i in range(len(auts_a))}
        # t[x]: a -> x
        t = {x: A.hom(a, x)[0] for x in comp}
        t[a] = A.identities[a]
        for x in comp:
            on_o[x] = b
        for x in comp:
            for y in comp:
                for m in A.hom(x, y):
                    loop = A.table[(A.inverse[t[y]], A.table[(m, t[x])])]
                    on_m[m] = psi[loop]
    F = GroupoidFunctor(A, B, on_o, on_m)
    return F if equivalence_report(F).ok else None


# ---------------------------------------------------------------------------
# Pseudofunctors


@dataclass
class Pseudofunctor:
    base: FiniteCategory
    fibers: dict[str, FiniteGroupoid]
    pulls: dict[str, GroupoidFunctor]
    xi: dict[tuple[str, str], dict[str, str]] = field(default_factory=dict)
    name: str = ""

    def fiber(self, x: str) -> FiniteGroupoid:
        return self.fibers[x]

    def pull_obj(self, u: str, x: str) -> str:
        return self.pulls[u].on_objects[x]

    def pull_mor(self, u: str, m: str) -> str:
        return self.pulls[u].on_morphisms[m]

    def xi_at(self, u: str, v: str, x: str) -> str:
        comp = self.xi.get((u, v))
        if comp is None:
            fib = self.fibers[self.base.src[v]]
            return fib.identities[self.pull_obj(v, self.pull_obj(u, x))]
        return comp[x]

    def is_strict(self) -> bool:
        c = self.base
        for u, v in c.composable_pairs():
            F = self.fibers[c.src[v]]
            for x in self.fibers[c.tgt[u]].objects:
                if not F.identities.get(F.src[self.xi_at(u, v, x)]) == self.xi_at(u, v, x):
                    return False
        return True

    def size(self) -> dict[str, tuple[int, int]]:
        return {x: (len(g.objects), len(g.morphisms)) for x, g in self.fibers.items()}


def strict_pseudofunctor(base: FiniteCategory, fibers: Mapping[str, FiniteGroupoid],
                         pulls: Mapping[str, GroupoidFunctor], name: str = "") -> Pseudofunctor:
    return Pseudofunctor(base, dict(fibers), dict(pulls), {}, name)


def check_pseudofunctor(P: Pseudofunctor, max_report: int = 20) -> ValidationReport:
    c = P.base
    rep = ValidationReport(f"pseudofunctor {P.name}".strip())
    for x in c.objects:
        if x not in P.fibers:
            rep.fail(f"no fiber over {x}")
            continue
        r = P.fibers[x].check()
        if not r.ok:
            rep.extend(r, f"fiber {x}: ")
    if not rep.ok:
        return rep
    for u in c.morphisms:
        F = P.pulls.get(u)
        if F is None:
            rep.fail(f"no pull functor along {u}")
            continue
        if F.source is not P.fibers[c.tgt[u]] or F.target is not P.fibers[c.src[u]]:
            rep.fail(f"pull along {u} has the wrong fibers")
            continue
        r = F.check()
        if not r.ok:
            rep.extend(r, f"pull {u}: ")
        if c.is_identity(u) and (any(F.on_objects[x] != x for x in F.source.objects)
                                 or any(F.on_morphisms[m] != m for m in F.source.morphisms)):
            rep.fail(f"pull along identity {u} is not the identity functor")
    if not rep.ok:
        return rep
    unit_failures: list[str] = []
    for u, v in c.composable_pairs():
        uv = c.table[(u, v)]
        B, A = P.fibers[c.tgt[u]], P.fibers[c.src[v]]
        for x in B.objects:
            k = P.xi_at(u, v, x)
            want_src = P.pull_obj(v, P.pull_obj(u, x))
            want_tgt = P.pull_obj(uv, x)
            if A.src.get(k) != want_src or A.tgt.get(k) != want_tgt:
                rep.fail(f"ξ({u},{v}) at {x} has the wrong ends")
                continue
            if (c.is_identity(u) or c.is_identity(v)) and k != A.identities[want_src]:
                unit_failures.append(f"ξ({u},{v}) at {x} is not the identity (unit normalisation)")
        for m in B.morphisms:
            x, y = B.src[m], B.tgt[m]
            lhs = A.table[(P.pull_mor(uv, m), P.xi_at(u, v, x))]
            rhs = A.table[(P.xi_at(u, v, y), P.pull_mor(v, P.pull_mor(u, m)))]
            if lhs != rhs:
                rep.fail(f"ξ({u},{v}) is not natural at {m}")
                break
    if not rep.ok:
        return rep
    for msg in unit_failures:
        rep.fail(msg)
    found = 0
    for u, v in c.composable_pairs():
        for w in c.into(c.src[v]):
            uv, vw = c.table[(u, v)], c.table[(v, w)]
            A = P.fibers[c.src[w]]
            for x in P.fibers[c.tgt[u]].objects:
                lhs = A.table[(P.xi_at(uv, w, x), P.pull_mor(w, P.xi_at(u, v, x)))]
                rhs = A.table[(P.xi_at(u, vw, x), P.xi_at(v, w, P.pull_obj(u, x)))]
                if lhs != rhs:
                    rep.fail(f"cocycle fails at triple ({u},{v},{w}) on {x}")
                    rep.details.setdefault("violating_triple", (u, v, w))
                    found += 1
                    break
            if found >= max_report:
                return rep
    return rep


# ---------------------------------------------------------------------------
# Grothendieck construction


@dataclass
class GrothendieckResult:
    category: FiniteCategory
    projection: dict[str, str]
    cleavage: dict[tuple[str, str], str]
    report: ValidationReport


def grothendieck_construction(P: Pseudofunctor) -> GrothendieckResult:
    """Total category: objects ``X:x``; morphisms ``f|m`` with ``m: x -> f* y``."""
    v = check_pseudofunctor(P)
    if not v.ok:
        raise ValueError(v.violations[0])
    c = P.base
    objects = [f"{X}:{x}" for X in c.objects for x in P.fibers[X].objects]
    morph: dict[str, tuple[str, str]] = {}
    data: dict[str, tuple[str, str, str, str]] = {}
    proj = {}
    for f in c.morphisms:
        X, Y = c.src[f], c.tgt[f]
        FX = P.fibers[X]
        for y in P.fibers[Y].objects:
            fy = P.pull_obj(f, y)
            for m in FX.into(fy):
                name = f"{f}|{m}|{y}"
                morph[name] = (f"{X}:{FX.src[m]}", f"{Y}:{y}")
                data[name] = (f, m, FX.src[m], y)
                proj[name] = f
    by_data = {(d[0], d[1], d[3]): n for n, d in data.items()}
    table = {}
    out: dict[str, list[str]] = {}
    for n, (_, _, x, _) in data.items():
        out.setdefault(morph[n][0], []).append(n)
    for n1, (f, m, x, y) in data.items():
        for n2 in out.get(morph[n1][1], []):
            g, k, _, z = data[n2]
            gf = c.table[(g, f)]
            FX = P.fibers[c.src[f]]
            comp = FX.table[(P.xi_at(g, f, z), FX.table[(P.pull_mor(f, k), m)])]
            table[(n2, n1)] = by_data[(gf, comp, z)]
    ids = {f"{X}:{x}": by_data[(c.identities[X], P.fibers[X].identities[x], x)]
           for X in c.objects for x in P.fibers[X].objects}
    E = FiniteCategory(objects, morph, table, ids, f"∫{P.name}")
    rep = check_category(E)
    rep.subject = "Grothendieck construction"
    cleavage = {}
    for f in c.morphisms:
        X = c.src[f]
        for y in P.fibers[c.tgt[f]].objects:
            fy = P.pull_obj(f, y)
            cleavage[(f, y)] = by_data[(f, P.fibers[X].identities[fy], y)]
    if rep.ok:
        for (f, y), phi in cleavage.items():
            for psi in E.into(f"{c.tgt[f]}:{y}"):
                h = proj[psi]
                Z = c.src[h]
                for g in c.hom(Z, c.src[f]):
                    if c.table[(f, g)] != h:
                        continue
                    lifts = [chi for chi in E.hom(E.src[psi], E.src[phi]) if proj[chi] == g and E.table[(phi, chi)] == psi]
                    if len(lifts) != 1:
                        rep.fail(f"lift of {f} at {y} is not cartesian ({len(lifts)} factorisations of {psi})")
                        break
    return GrothendieckResult(E, proj, cleavage, rep)


# ---------------------------------------------------------------------------
# Pseudo-limits over diagrams


@dataclass
class Diagram:
    """A small category over the base: ``objects[d]`` is a base object, ``arrows[e] = (d_src, d_tgt, base_arrow)``."""

    objects: dict[Hashable, str]
    arrows: dict[Hashable, tuple[Hashable, Hashable, str]]
    compose: dict[tuple[Hashable, Hashable], Hashable]  # non-identity composites only; None for identities


def slice_diagram(c: FiniteCategory, x: str, keep: Callable[[str], bool] = lambda a: True) -> Diagram:
    """Full subcategory of ``c/x`` on arrows ``a`` with ``keep(src a)``."""
    objs = {a: c.src[a] for a in c.into(x) if keep(c.src[a])}
    arrows = {}
    for a in objs:
        for a2 in objs:
            for b in c.hom(c.src[a2], c.src[a]):
                if c.table[(a, b)] == a2 and not (a == a2 and c.is_identity(b)):
                    arrows[(b, a2, a)] = (a2, a, b)
    comp = {}
    for e1, (d1, d2, b1) in arrows.items():
        for e2, (d0, d1b, b2) in arrows.items():
            if d1b != d1:
                continue
            b = c.table[(b1, b2)]
            comp[(e1, e2)] = None if (d0 == d2 and c.is_identity(b)) else (b, d0, d2)
    return Diagram(objs, arrows, comp)


class PseudoLimit:
    """Gauge-fixed pseudo-limit of ``P`` over a diagram.

    A spanning forest is grown from roots along arrows into already placed
    objects; on forest arrows ``φ`` is the identity.  Every object of the
    full pseudo-limit is isomorphic to exactly such objects, and a morphism
    is determined by its components at the roots.
    """

    def __init__(self, P: Pseudofunctor, D: Diagram, max_objects: int = 20000, name: str = ""):
        self.P, self.D = P, D
        self.name = name
        self._forest()
        self._enumerate(max_objects)
        self._build()

    def _forest(self) -> None:
        D = self.D
        into: dict[Hashable, list] = {d: [] for d in D.objects}
        for e, (s, t, _) in D.arrows.items():
            into[t].append(e)
        reach = {d: len({t for e, (s, t, _) in D.arrows.items() if s == d}) for d in D.objects}
        order = sorted(D.objects, key=lambda d: (reach[d], str(d)))
        self.parent: dict[Hashable, Hashable] = {}
        self.roots: list[Hashable] = []
        self.order: list[Hashable] = []
        placed: set = set()
        for r in order:
            if r in placed:
                continue
            self.roots.append(r)
            placed.add(r)
            self.order.append(r)
            queue = deque([r])
            while queue:
                d = queue.popleft()
                for e in sorted(into[d], key=str):
                    s = D.arrows[e][0]
                    if s not in placed:
                        placed.add(s)
                        self.parent[s] = e
                        self.order.append(s)
                        queue.append(s)
        tree = set(self.parent.values())
        self.free = sorted((e for e in D.arrows if e not in tree), key=str)

    def _objects_below(self, roots_choice: Sequence[str]) -> dict:
        D, P = self.D, self.P
        x = dict(zip(self.roots, roots_choice))
        for d in self.order:
            if d in x:
                continue
            e = self.parent[d]
            x[d] = P.pull_obj(D.arrows[e][2], x[D.arrows[e][1]])
        return x

    def _phi(self, phis: Mapping, x: Mapping, e) -> str:
        if e in phis:
            return phis[e]
        s = self.D.arrows[e][0]
        return self.P.fibers[self.D.objects[s]].identities[x[s]]

    def _cocycle_ok(self, x: Mapping, phis: Mapping, e1, e2) -> bool:
        """``φ_{e1 e2} ∘ ξ = φ_{e2} ∘ (L e2)*(φ_{e1})``."""
        D, P = self.D, self.P
        d1, d2, b1 = D.arrows[e1]
        d0, _, b2 = D.arrows[e2]
        F = P.fibers[D.objects[d0]]
        rhs = F.table[(self._phi(phis, x, e2), P.pull_mor(b2, self._phi(phis, x, e1)))]
        e12 = D.compose[(e1, e2)]
        xi = P.xi_at(b1, b2, x[d2])
        if e12 is None:
            lhs = xi
        else:
            lhs = F.table[(self._phi(phis, x, e12), xi)]
        return lhs == rhs

    def _enumerate(self, max_objects: int) -> None:
        D, P = self.D, self.P
        pairs = [(e1, e2) for (e1, e2) in D.compose]
        pos = {e: i for i, e in enumerate(self.free)}
        checks: dict[int, list] = {i: [] for i in range(-1, len(self.free))}
        for e1, e2 in pairs:
            involved = [e1, e2] + ([D.compose[(e1, e2)]] if D.compose[(e1, e2)] is not None else [])
            last = max((pos[e] for e in involved if e in pos), default=-1)
            checks[last].append((e1, e2))
        self.data: list[tuple[tuple[str, ...], tuple[str, ...]]] = []
        root_choices = [P.fibers[D.objects[r]].objects for r in self.roots]
        for choice in itertools.product(*root_choices):
            x = self._objects_below(choice)
            if not all(self._cocycle_ok(x, {}, e1, e2) for e1, e2 in checks[-1]):
                continue
            phis: dict = {}

            def rec(i: int) -> None:
                if i == len(self.free):
                    self.data.append((tuple(choice), tuple(phis[e] for e in self.free)))
                    if len(self.data) > max_objects:
                        raise BudgetExceeded(f"pseudo-limit exceeds {max_objects} objects")
                    return
                e = self.free[i]
                s, t, b = D.arrows[e]
                F = P.fibers[D.objects[s]]
                for m in F.hom(P.pull_obj(b, x[t]), x[s]):
                    phis[e] = m
                    if all(self._cocycle_ok(x, phis, e1, e2) for e1, e2 in checks[i]):
                        rec(i + 1)
                phis.pop(e, None)

            rec(0)
        self.index = {d: i for i, d in enumerate(self.data)}
        self.names = [f"o{i}" for i in range(len(self.data))]

    def objects_of(self, name: str) -> dict:
        roots, _ = self.data[self._by_name[name]]
        return self._objects_below(roots)

    def phis_of(self, name: str) -> dict:
        _, ph = self.data[self._by_name[name]]
        return dict(zip(self.free, ph))

    def family(self, key) -> dict:
        """Full component family of the morphism ``key = (src_index, root components)``."""
        i, comps = key
        D, P = self.D, self.P
        h = dict(zip(self.roots, comps))
        for d in self.order:
            if d not in h:
                e = self.parent[d]
                h[d] = P.pull_mor(D.arrows[e][2], h[D.arrows[e][1]])
        return h

    def _target(self, i: int, comps: Sequence[str]) -> int:
        D, P = self.D, self.P
        roots, ph = self.data[i]
        x = self._objects_below(roots)
        h = self.family((i, tuple(comps)))
        y_roots = tuple(P.fibers[D.objects[r]].tgt[h[r]] for r in self.roots)
        psis = []
        for e, phi in zip(self.free, ph):
            s, t, b = D.arrows[e]
            F = P.fibers[D.objects[s]]
            psis.append(F.table[(h[s], F.table[(phi, F.inverse[P.pull_mor(b, h[t])])])])
        return self.index[(y_roots, tuple(psis))]

    def _build(self) -> None:
        D, P = self.D, self.P
        self._by_name = {n: i for i, n in enumerate(self.names)}
        keys = []
        tgt = {}
        for i, (roots, _) in enumerate(self.data):
            outs = [P.fibers[D.objects[r]].outof(x) for r, x in zip(self.roots, roots)]
            for comps in itertools.product(*outs):
                k = (i, comps)
                keys.append(k)
                tgt[k] = self._target(i, comps)
        fibs = [P.fibers[D.objects[r]] for r in self.roots]

        def compose(k2, k1):
            return (k1[0], tuple(F.table[(b, a)] for F, a, b in zip(fibs, k1[1], k2[1])))

        def identity(name):
            i = self._by_name[name]
            return (i, tuple(F.identities[x] for F, x in zip(fibs, self.data[i][0])))

        def inverse(k):
            return (tgt[k], tuple(F.inverse[a] for F, a in zip(fibs, k[1])))

        self.tgt_index = tgt
        self.groupoid, self.mor_names = build_groupoid(
            self.names, keys, lambda k: self.names[k[0]], lambda k: self.names[tgt[k]], compose, identity, inverse,
            lambda k: f"{self.names[k[0]]}>{self.names[tgt[k]]}:" + ",".join(k[1]), self.name)
        self.key_of = {n: k for k, n in self.mor_names.items()}

    # -- general objects -------------------------------------------------------

    def regauge(self, x: Mapping, phis: Mapping) -> tuple[str, dict]:
        """Gauge-fixed representative of an arbitrary object ``(x_d, φ_e)`` and the iso to it."""
        D, P = self.D, self.P
        h: dict = {}
        y: dict = {}
        for d in self.order:
            F = P.fibers[D.objects[d]]
            if d not in self.parent:
                h[d] = F.identities[x[d]]
                y[d] = x[d]
                continue
            e = self.parent[d]
            _, t, b = D.arrows[e]
            y[d] = P.pull_obj(b, y[t])
            h[d] = F.table[(P.pull_mor(b, h[t]), F.inverse[phis[e]])]
        psis = []
        for e in self.free:
            s, t, b = D.arrows[e]
            F = P.fibers[D.objects[s]]
            psis.append(F.table[(h[s], F.table[(phis[e], F.inverse[P.pull_mor(b, h[t])])])])
        key = (tuple(y[r] for r in self.roots), tuple(psis))
        return self.names[self.index[key]], h

    def full_phis(self, name: str) -> dict:
        """``φ_e`` for every arrow, identities on forest arrows included."""
        x = self.objects_of(name)
        ph = self.phis_of(name)
        return {e: self._phi(ph, x, e) for e in self.D.arrows}

    def morphism_from_family(self, src: str, h: Mapping) -> str:
        return self.mor_names[(self._by_name[src], tuple(h[r] for r in self.roots))]


# ---------------------------------------------------------------------------
# Strictification


@dataclass
class Strictification:
    strict: Pseudofunctor
    comparison: dict[str, GroupoidFunctor]
    report: ValidationReport


def strictify(P: Pseudofunctor) -> Strictification:
    """Sections over ``c/X`` induced by pairs ``(u: X -> Z, z)``.

    ``z`` runs over one chosen object per component of ``P(Z)``.  A section
    assigns ``(u a)* z`` to ``a: A -> X`` and ``ξ_{ua,b}(z)`` to ``b``.
    These sections are closed under reindexing, so restriction is literally
    precomposition and the result is strictly functorial.  The comparison
    sends ``x`` to the section of its representative, transporting along a
    chosen isomorphism.
    """
    v = check_pseudofunctor(P)
    if not v.ok:
        raise ValueError(v.violations[0])
    c = P.base
    slices = {X: sorted(c.into(X)) for X in c.objects}
    arrows_over = {X: [(a, b) for a in slices[X] for b in c.into(c.src[a])] for X in c.objects}

    def section(X: str, u: str, z: str) -> tuple:
        objs = tuple(P.pull_obj(c.table[(u, a)], z) for a in slices[X])
        phis = tuple(P.xi_at(c.table[(u, a)], b, z) for a, b in arrows_over[X])
        return objs, phis

    reps = {X: [comp[0] for comp in P.fibers[X].components()] for X in c.objects}
    Q: dict[str, FiniteGroupoid] = {}
    sec_names: dict[str, dict[tuple, str]] = {}
    sec_data: dict[str, list[tuple]] = {}
    mor_data: dict[str, dict[str, tuple]] = {}
    for X in c.objects:
        seen: dict[tuple, str] = {}
        for u in sorted(c.outof(X)):
            for z in reps[c.tgt[u]]:
                s = section(X, u, z)
                if s not in seen:
                    seen[s] = f"s{len(seen)}"
        sec_names[X] = seen
        sec_data[X] = list(seen)
        FX = P.fibers[X]
        idx = slices[X].index(c.identities[X])
        keys = []
        for s in sec_data[X]:
            for t in sec_data[X]:
                for m in FX.hom(s[0][idx], t[0][idx]):
                    fam = _transport(P, c, slices[X], arrows_over[X], s, t, m)
                    if fam is not None:
                        keys.append((seen[s], seen[t], fam))
        objs = [seen[s] for s in sec_data[X]]
        names = {}

        def name_of(k):
            return f"{k[0]}>{k[1]}:" + ",".join(k[2])

        def comp(k2, k1, X=X):
            return (k1[0], k2[1], tuple(P.fibers[c.src[a]].table[(g, f)] for a, g, f in zip(slices[X], k2[2], k1[2])))

        def ident(o, X=X):
            s = sec_data[X][int(o[1:])]
            return (o, o, tuple(P.fibers[c.src[a]].identities[x] for a, x in zip(slices[X], s[0])))

        def inv(k, X=X):
            return (k[1], k[0], tuple(P.fibers[c.src[a]].inverse[f] for a, f in zip(slices[X], k[2])))

        G, names = build_groupoid(objs, keys, lambda k: k[0], lambda k: k[1], comp, ident, inv, name_of, f"Q({X})")
        Q[X] = G
        mor_data[X] = {n: k for k, n in names.items()}
    pulls = {}
    for u in c.morphisms:
        Y, X = c.src[u], c.tgt[u]
        pos = {a: i for i, a in enumerate(slices[X])}
        re = [pos[c.table[(u, a)]] for a in slices[Y]]
        on_o = {}
        for s in sec_data[X]:
            t = _reindex_section(s, re, arrows_over, X, Y, c, u, pos)
            on_o[sec_names[X][s]] = sec_names[Y][t]
        on_m = {}
        for n, (s, t, fam) in mor_data[X].items():
            new = (on_o[s], on_o[t], tuple(fam[i] for i in re))
            on_m[n] = f"{new[0]}>{new[1]}:" + ",".join(new[2])
        pulls[u] = GroupoidFunctor(Q[X], Q[Y], on_o, on_m)
    strict = strict_pseudofunctor(c, Q, pulls, f"strict({P.name})")
    comparison = {}
    for X in c.objects:
        idx = slices[X].index(c.identities[X])
        FX = P.fibers[X]
        comp_of = FX.component_of()
        rep_of = {x: reps[X][comp_of[x]] for x in FX.objects}
        theta = {x: FX.hom(x, rep_of[x])[0] if x != rep_of[x] else FX.identities[x] for x in FX.objects}
        on_o = {x: sec_names[X][section(X, c.identities[X], rep_of[x])] for x in FX.objects}
        on_m = {}
        for m in FX.morphisms:
            x, y = FX.src[m], FX.tgt[m]
            s = section(X, c.identities[X], rep_of[x])
            t = section(X, c.identities[X], rep_of[y])
            fam = _transport(P, c, slices[X], arrows_over[X], s, t,
                             FX.table[(theta[y], FX.table[(m, FX.inverse[theta[x]])])])
            on_m[m] = f"{on_o[x]}>{on_o[y]}:" + ",".join(fam)
        comparison[X] = GroupoidFunctor(FX, Q[X], on_o, on_m)
    rep = ValidationReport(f"strictification of {P.name}".strip())
    r = check_pseudofunctor(strict)
    rep.extend(r, "strict: ")
    for u, w in c.composable_pairs():
        lhs = pulls[c.table[(u, w)]]
        rhs = compose_functors(pulls[w], pulls[u])
        if lhs.on_objects != rhs.on_objects or lhs.on_morphisms != rhs.on_morphisms:
            rep.fail(f"restriction is not strictly functorial at ({u},{w})")
    for X, F in comparison.items():
        r = equivalence_report(F)
        if not r.ok:
            rep.extend(r, f"comparison at {X}: ")
    return Strictification(strict, comparison, rep)


def _transport(P, c, slice_X, arrows_X, s, t, m):
    """Extend ``m: s_id -> t_id`` to a natural family over ``c/X``; ``None`` if not natural."""
    X = c.tgt[slice_X[0]] if slice_X else None
    ident = next(a for a in slice_X if c.is_identity(a))
    pos = {a: i for i, a in enumerate(slice_X)}
    phi_s = dict(zip(arrows_X, s[1]))
    phi_t = dict(zip(arrows_X, t[1]))
    fam = []
    for a in slice_X:
        F = P.fibers[c.src[a]]
        # b = a viewed as an arrow (A, a) -> (X, id)
        k = F.table[(phi_t[(ident, a)], F.table[(P.pull_mor(a, m), F.inverse[phi_s[(ident, a)]])])]
        fam.append(k)
    for (a, b) in arrows_X:
        F = P.fibers[c.src[b]]
        ab = c.table[(a, b)]
        lhs = F.table[(phi_t[(a, b)], P.pull_mor(b, fam[pos[a]]))]
        rhs = F.table[(fam[pos[ab]], phi_s[(a, b)])]
        if lhs != rhs:
            return None
    return tuple(fam)


def _reindex_section(s, re, arrows_over, X, Y, c, u, pos):
    objs = tuple(s[0][i] for i in re)
    ph = dict(zip(arrows_over[X], s[1]))
    phis = tuple(ph[(c.table[(u, a)], b)] for a, b in arrows_over[Y])
    return objs, phis


# ---------------------------------------------------------------------------
# Descent


@dataclass
class DescentCategory:
    groupoid: FiniteGroupoid
    family: CoveringFamily
    data: list[tuple[tuple[str, ...], tuple[str, ...]]]
    pairs: list[tuple[int, int]]
    mor_key: dict[str, tuple[int, tuple[str, ...]]]
    index: dict[tuple, int]
    indexing: CechIndexing


def descent_category(P: Pseudofunctor, s: Site, fam: CoveringFamily, max_objects: int = 20000) -> DescentCategory:
    """Objects ``x_α`` with gluings ``φ_αβ: p0* x_α -> p1* x_β`` satisfying the cocycle on triples."""
    c = P.base
    idx = CechIndexing(s, fam, 2)
    n = len(fam.members)
    pairs = [(a, b) for a in range(n) for b in range(n)]
    order = {p: i for i, p in enumerate(pairs)}
    checks: dict[int, list] = {i: [] for i in range(len(pairs))}
    for t in itertools.product(range(n), repeat=3):
        a, b, g = t
        checks[max(order[(a, b)], order[(b, g)], order[(a, g)])].append(t)
    fib = {t: P.fibers[idx.obj(t)] for t in list(idx.terms)}

    def p0(t):
        return idx.face(t, 1)

    def p1(t):
        return idx.face(t, 0)

    def transported(x, phi, pair, t, d_i):
        """``φ_pair`` moved to ``U_t`` along face ``d_i``, between pulls along the composite projections."""
        d = idx.face(t, d_i)
        a, b = pair
        F = fib[t]
        q0, q1 = p0(pair), p1(pair)
        inner = P.pull_mor(d, phi)
        return F.table[(P.xi_at(q1, d, x[b]), F.table[(inner, F.inverse[P.xi_at(q0, d, x[a])])])]

    def cocycle(x, phis, t):
        a, b, g = t
        F = fib[t]
        lhs = transported(x, phis[(a, g)], (a, g), t, 1)
        rhs = F.table[(transported(x, phis[(b, g)], (b, g), t, 0), transported(x, phis[(a, b)], (a, b), t, 2))]
        return lhs == rhs

    data = []
    for xs in itertools.product(*[P.fibers[idx.obj((a,))].objects for a in range(n)]):
        phis: dict = {}

        def rec(i):
            if i == len(pairs):
                data.append((tuple(xs), tuple(phis[p] for p in pairs)))
                if len(data) > max_objects:
                    raise BudgetExceeded(f"descent category exceeds {max_objects} objects")
                return
            p = pairs[i]
            a, b = p
            F = fib[p]
            for m in F.hom(P.pull_obj(p0(p), xs[a]), P.pull_obj(p1(p), xs[b])):
                phis[p] = m
                if all(cocycle(xs, phis, t) for t in checks[i]):
                    rec(i + 1)
            phis.pop(p, None)

        rec(0)
    index = {d: i for i, d in enumerate(data)}
    names = [f"d{i}" for i in range(len(data))]
    singles = [P.fibers[idx.obj((a,))] for a in range(n)]
    keys, tgt = [], {}
    for i, (xs, ph) in enumerate(data):
        for hs in itertools.product(*[F.outof(x) for F, x in zip(singles, xs)]):
            ys = tuple(F.tgt[h] for F, h in zip(singles, hs))
            psis = []
            for p, phi in zip(pairs, ph):
                a, b = p
                F = fib[p]
                psis.append(F.table[(P.pull_mor(p1(p), hs[b]), F.table[(phi, F.inverse[P.pull_mor(p0(p), hs[a])])])])
            k = (i, hs)
            keys.append(k)
            tgt[k] = index[(ys, tuple(psis))]
    G, mnames = build_groupoid(
        names, keys, lambda k: names[k[0]], lambda k: names[tgt[k]],
        lambda k2, k1: (k1[0], tuple(F.table[(b, a)] for F, a, b in zip(singles, k1[1], k2[1]))),
        lambda nm: (int(nm[1:]), tuple(F.identities[x] for F, x in zip(singles, data[int(nm[1:])][0]))),
        lambda k: (tgt[k], tuple(F.inverse[h] for F, h in zip(singles, k[1]))),
        lambda k: f"{names[k[0]]}>{names[tgt[k]]}:" + ",".join(k[1]), f"Desc({fam})")
    return DescentCategory(G, fam, data, pairs, {v: k for k, v in mnames.items()}, index, idx)


def descent_comparison(P: Pseudofunctor, desc: DescentCategory) -> GroupoidFunctor:
    """``P(X) -> Desc``: pull back along the members, glue with ``ξ``."""
    fam = desc.family
    idx = desc.indexing
    FX = P.fibers[fam.target]
    n = len(fam.members)
    on_o = {}
    for x in FX.objects:
        xs = tuple(P.pull_obj(m, x) for m in fam.members)
        ph = []
        for (a, b) in desc.pairs:
            t = (a, b)
            F = P.fibers[idx.obj(t)]
            fwd = P.xi_at(fam.members[a], idx.face(t, 1), x)
            back = P.xi_at(fam.members[b], idx.face(t, 0), x)
            ph.append(F.table[(F.inverse[back], fwd)])
        on_o[x] = desc.groupoid.objects[desc.index[(xs, tuple(ph))]]
    key_to_name = {v: k for k, v in desc.mor_key.items()}
    on_m = {}
    for m in FX.morphisms:
        hs = tuple(P.pull_mor(u, m) for u in fam.members)
        i = desc.index[(tuple(P.pull_obj(u, FX.src[m]) for u in fam.members),
                        desc.data[int(on_o[FX.src[m]][1:])][1])]
        on_m[m] = key_to_name[(i, hs)]
    return GroupoidFunctor(FX, desc.groupoid, on_o, on_m)


@dataclass
class StackReport(ValidationReport):
    per_cover: dict[str, dict] = field(default_factory=dict)


def covering_families(s: Site, x: str) -> list[CoveringFamily]:
    return [family_of_sieve(s, b) for b in s.covering_sieves(x)]


def is_stack(P: Pseudofunctor, s: Site, objects: Sequence[str] | None = None, max_objects: int = 20000) -> StackReport:
    """Every covering family's comparison functor must be an equivalence."""
    rep = StackReport(f"stack condition for {P.name}".strip())
    for x in objects or s.category.objects:
        for fam in covering_families(s, x):
            desc = descent_category(P, s, fam, max_objects)
            F = descent_comparison(P, desc)
            r = equivalence_report(F)
            rep.per_cover[str(fam)] = dict(r.details, ok=r.ok, descent_components=len(desc.groupoid.components()),
                                           fiber_components=len(P.fibers[x].components()))
            if not r.ok:
                for v in r.violations:
                    rep.fail(f"{fam}: {v}")
    return rep


# ---------------------------------------------------------------------------
# Stackification


class Stackification:
    """Pseudo-limits over the local slices, with pulls by reindexing then regauging."""

    def __init__(self, P: Pseudofunctor, s: Site, max_objects: int = 20000):
        from .cech import covered_by_local_objects

        bad = covered_by_local_objects(s)
        if bad:
            raise ValueError(f"objects not covered by local objects: {bad}")
        self.P, self.site = P, s
        c = s.category
        local = set(s.local_objects())
        self.limits: dict[str, PseudoLimit] = {}
        for X in c.objects:
            D = slice_diagram(c, X, lambda L: L in local)
            self.limits[X] = PseudoLimit(P, D, max_objects, f"St({X})")
        self._pulls()

    def _reindex(self, u: str, X_lim: PseudoLimit, Y_lim: PseudoLimit, name: str):
        c = self.site.category
        x = X_lim.objects_of(name)
        ph = X_lim.full_phis(name)
        xs = {a: x[c.table[(u, a)]] for a in Y_lim.D.objects}
        phis = {}
        for e, (s_, t_, b) in Y_lim.D.arrows.items():
            phis[e] = ph[(b, c.table[(u, s_)], c.table[(u, t_)])]
        return xs, phis

    def _pulls(self) -> None:
        c = self.site.category
        P = self.P
        self.eta: dict[tuple[str, str], dict] = {}
        pulls = {}
        for u in c.morphisms:
            Y, X = c.src[u], c.tgt[u]
            LX, LY = self.limits[X], self.limits[Y]
            on_o = {}
            for name in LX.names:
                xs, phis = self._reindex(u, LX, LY, name)
                y, h = LY.regauge(xs, phis)
                on_o[name] = y
                self.eta[(u, name)] = h
            on_m = {}
            for m in LX.groupoid.morphisms:
                k = LX.key_of[m]
                src, tgt = LX.names[k[0]], LX.names[LX.tgt_index[k]]
                fam = LX.family(k)
                h0, h1 = self.eta[(u, src)], self.eta[(u, tgt)]
                comp = {}
                for r in LY.roots:
                    F = P.fibers[LY.D.objects[r]]
                    comp[r] = F.table[(h1[r], F.table[(fam[c.table[(u, r)]], F.inverse[h0[r]])])]
                on_m[m] = LY.morphism_from_family(on_o[src], comp)
            pulls[u] = GroupoidFunctor(LX.groupoid, LY.groupoid, on_o, on_m)
        xi = {}
        for u, v in c.composable_pairs():
            uv = c.table[(u, v)]
            X, W = c.tgt[u], c.src[v]
            LW = self.limits[W]
            comp_map = {}
            for name in self.limits[X].names:
                ux = pulls[u].on_objects[name]
                e_uv, e_u, e_v = self.eta[(uv, name)], self.eta[(u, name)], self.eta[(v, ux)]
                fam = {}
                for r in LW.roots:
                    F = P.fibers[LW.D.objects[r]]
                    fam[r] = F.table[(e_uv[r], F.table[(F.inverse[e_u[c.table[(v, r)]]], F.inverse[e_v[r]])])]
                comp_map[name] = LW.morphism_from_family(pulls[v].on_objects[ux], fam)
            xi[(u, v)] = comp_map
        self.pseudofunctor = Pseudofunctor(c, {X: L.groupoid for X, L in self.limits.items()}, pulls, xi,
                                           f"stackify({P.name})")

    def unit(self, X: str) -> GroupoidFunctor:
        """The canonical functor ``P(X) -> stackify(P)(X)``."""
        c = self.site.category
        P = self.P
        L = self.limits[X]
        FX = P.fibers[X]
        on_o, eta = {}, {}
        for x in FX.objects:
            xs = {a: P.pull_obj(a, x) for a in L.D.objects}
            phis = {e: P.xi_at(t, b, x) for e, (s_, t, b) in L.D.arrows.items()}
            on_o[x], eta[x] = L.regauge(xs, phis)
        on_m = {}
        for m in FX.morphisms:
            a0, a1 = eta[FX.src[m]], eta[FX.tgt[m]]
            comp = {}
            for r in L.roots:
                F = P.fibers[L.D.objects[r]]
                comp[r] = F.table[(a1[r], F.table[(P.pull_mor(r, m), F.inverse[a0[r]])])]
            on_m[m] = L.morphism_from_family(on_o[FX.src[m]], comp)
        return GroupoidFunctor(FX, L.groupoid, on_o, on_m)


def stackify(P: Pseudofunctor, s: Site, max_objects: int = 20000) -> Pseudofunctor:
    return Stackification(P, s, max_objects).pseudofunctor


# ---------------------------------------------------------------------------
# Homotopy sheaves, nerves and Poincaré groupoids


def pi0_presheaf(P: Pseudofunctor) -> SetPresheaf:
    c = P.base
    comps = {X: P.fibers[X].component_of() for X in c.objects}
    values = {X: sorted(set(comps[X].values())) for X in c.objects}
    rep = {X: {i: P.fibers[X].components()[i][0] for i in values[X]} for X in c.objects}
    restr = {u: {i: comps[c.src[u]][P.pull_obj(u, rep[c.tgt[u]][i])] for i in values[c.tgt[u]]} for u in c.morphisms}
    return SetPresheaf(c, values, restr, f"π0({P.name})")


def pi1_presheaf(P: Pseudofunctor, top: str, t: str) -> GroupPresheaf:
    """``X -> Aut(u_X* t)`` with ``u_X: X -> top`` the unique arrow."""
    c = P.base
    to_top = {}
    for X in c.objects:
        hs = c.hom(X, top)
        if len(hs) != 1:
            raise ValueError(f"{top} is not terminal")
        to_top[X] = hs[0]
    groups, auts = {}, {}
    for X in c.objects:
        groups[X], auts[X] = P.fibers[X].vertex_group(P.pull_obj(to_top[X], t))
    restr = {}
    for f in c.morphisms:
        Y, X = c.src[f], c.tgt[f]
        F = P.fibers[Y]
        xi = P.xi_at(to_top[X], f, t)
        pos = {m: i for i, m in enumerate(auts[Y])}
        restr[f] = [pos[F.table[(xi, F.table[(P.pull_mor(f, a), F.inverse[xi])])]] for a in auts[X]]
    return GroupPresheaf(c, groups, restr, f"π1({P.name},{t})")


def homotopy_group_sheaves_of(P: Pseudofunctor, s: Site, sections: Sequence[str] | None = None):
    """Sheafified ``π0`` and, at each chosen global object, sheafified ``π1``."""
    top = top_object(s)
    if sections is None:
        sections = [comp[0] for comp in P.fibers[top].components()]
    for t in sections:
        if t not in P.fibers[top].objects:
            raise ValueError(f"{t} is not an object over {top}")
    pi0 = sheafify(pi0_presheaf(P), s)[0]
    pi1 = {t: sheafify(pi1_presheaf(P, top, t), s)[0] for t in sections}
    return pi0, pi1


@dataclass
class SimplicialPresheaf:
    category: FiniteCategory
    values: dict[str, FiniteSimplicialSet]
    maps: dict[str, dict[Hashable, tuple]]  # u -> nondegenerate simplex of tgt value -> generic simplex of src value
    name: str = ""

    def apply(self, u: str, simplex: tuple) -> tuple:
        x, theta = simplex
        img = self.maps[u][x]
        return self.values[self.category.src[u]].operator(img, theta)

    def check(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"simplicial presheaf {self.name}".strip())
        for u in c.morphisms:
            X = self.values[c.tgt[u]]
            for k in range(1, X.dim_cap + 1):
                for x in X.nondeg.get(k, []):
                    gx = (x, tuple(range(k + 1)))
                    for i in range(k + 1):
                        if self.apply(u, X.face(gx, i)) != self.values[c.src[u]].face(self.apply(u, gx), i):
                            rep.fail(f"map along {u} does not commute with d_{i} at {x}")
        for (g, f), h in c.table.items():
            X = self.values[c.tgt[g]]
            for k in range(X.dim_cap + 1):
                for x in X.nondeg.get(k, []):
                    gx = (x, tuple(range(k + 1)))
                    if self.apply(f, self.apply(g, gx)) != self.apply(h, gx):
                        rep.fail(f"not functorial at ({g},{f})")
                        break
        return rep


def nerve_of(P: Pseudofunctor, dim_cap: int = 2) -> tuple[SimplicialPresheaf, Strictification]:
    st = strictify(P)
    Q = st.strict
    c = Q.base
    values = {X: nerve(Q.fibers[X], dim_cap) for X in c.objects}
    maps = {}
    for u in c.morphisms:
        F = Q.pulls[u]
        X = values[c.tgt[u]]
        B = Q.fibers[c.src[u]]
        mp = {}
        for k in range(dim_cap + 1):
            for x in X.nondeg.get(k, []):
                if k == 0:
                    mp[x] = (F.on_objects[x], (0,))
                else:
                    mp[x] = nerve_simplex(B, tuple(F.on_morphisms[m] for m in x))
        maps[u] = mp
    return SimplicialPresheaf(c, values, maps, f"N({P.name})"), st


def truncation_report(X: FiniteSimplicialSet, kan_dim: int = 2) -> ValidationReport:
    """Kan through ``kan_dim``, and 2-simplices determined by their boundary.

    Unique 2-horn fillers are what the edge-class composition needs; higher
    Kan conditions are optional because they cost a full horn search.
    """
    from .simplicial import kan_check

    rep = kan_check(X, min(kan_dim, X.dim_cap))
    seen: dict[tuple, tuple] = {}
    for z in X.simplices(2):
        bd = tuple(X.face(z, i) for i in range(3))
        if bd in seen and seen[bd] != z:
            rep.fail("homotopy beyond degree 1 detected: two 2-simplices share a boundary")
            break
        seen[bd] = z
    return rep


def fundamental_groupoid(X: FiniteSimplicialSet, name: str = "") -> tuple[FiniteGroupoid, dict]:
    """Vertices and homotopy classes of edges of a Kan complex; returns the edge-class map."""
    edges = X.simplices(1)
    verts = [v for v in X.nondeg[0]]
    vpos = {v: str(v) for v in verts}
    parent = {e: e for e in edges}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    tris = X.simplices(2)
    for z in tris:
        d0, d1, d2 = (X.face(z, i) for i in range(3))
        if X.is_degenerate(d0):
            parent[find(d1)] = find(d2)
    classes = sorted({find(e) for e in edges}, key=str)
    cname = {e: f"[{e[0]}{''.join(map(str, e[1]))}]" for e in classes}
    ends = {}
    for e in classes:
        s_, t_ = X.face(e, 1), X.face(e, 0)
        ends[e] = (str(s_[0]), str(t_[0]))
    table = {}
    for z in tris:
        d0, d1, d2 = (find(X.face(z, i)) for i in range(3))
        key = (cname[d0], cname[d2])
        val = cname[d1]
        if table.get(key, val) != val:
            raise ValueError("edge composition is not well defined: not 1-truncated")
        table[key] = val
    ids = {str(v): cname[find(X.degeneracy((v, (0,)), 0))] for v in verts}
    morph = {cname[e]: ends[e] for e in classes}
    inverse = {}
    for (g, f), h in table.items():
        if h == ids[morph[f][0]]:
            inverse[f] = g
    G = FiniteGroupoid([str(v) for v in verts], morph, table, ids, inverse, name or f"Π({X.name})")
    return G, {e: cname[find(e)] for e in edges}


def poincare_groupoid(N: SimplicialPresheaf, kan_dim: int = 2) -> Pseudofunctor:
    c = N.category
    fibers, classes = {}, {}
    for X in c.objects:
        rep = truncation_report(N.values[X], kan_dim)
        if not rep.ok:
            raise ValueError(f"value at {X}: {rep.violations[0]}")
        fibers[X], classes[X] = fundamental_groupoid(N.values[X], f"Π({X})")
    pulls = {}
    for u in c.morphisms:
        X, Y = c.tgt[u], c.src[u]
        VX = N.values[X]
        on_o = {str(v): str(N.apply(u, (v, (0,)))[0]) for v in VX.nondeg[0]}
        on_m = {}
        for e in VX.simplices(1):
            on_m[classes[X][e]] = classes[Y][N.apply(u, e)]
        pulls[u] = GroupoidFunctor(fibers[X], fibers[Y], on_o, on_m)
    return strict_pseudofunctor(c, fibers, pulls, f"Π({N.name})")


def objectwise_equivalences(P: Pseudofunctor, Q: Pseudofunctor) -> dict[str, GroupoidFunctor | None]:
    return {X: find_equivalence(P.fibers[X], Q.fibers[X]) for X in P.base.objects}


# ---------------------------------------------------------------------------
# Torsors and fixtures


def bg_of_group_presheaf(G: GroupPresheaf, name: str = "") -> Pseudofunctor:
    c = G.category
    fibers = {X: bg_groupoid(G.group(X), "*", f"B{G.group(X).name}") for X in c.objects}
    pulls = {}
    for u in c.morphisms:
        A, B = fibers[c.tgt[u]], fibers[c.src[u]]
        gB = G.group(c.src[u])
        pulls[u] = GroupoidFunctor(A, B, {"*": "*"}, {m: gB.names[G.restrictions[u][i]]
                                                      for i, m in enumerate(G.group(c.tgt[u]).names)})
    return strict_pseudofunctor(c, fibers, pulls, name or f"B{G.name}")


def discrete_pseudofunctor(F: SetPresheaf, name: str = "") -> Pseudofunctor:
    """Each set as a groupoid with identities only."""
    c = F.category
    fibers = {}
    for X in c.objects:
        objs = [str(a) for a in F.value(X)]
        fibers[X] = FiniteGroupoid(objs, {f"id:{x}": (x, x) for x in objs}, {(f"id:{x}", f"id:{x}"): f"id:{x}" for x in objs},
                                   {x: f"id:{x}" for x in objs}, {f"id:{x}": f"id:{x}" for x in objs}, f"disc({X})")
    pulls = {}
    for u in c.morphisms:
        A, B = fibers[c.tgt[u]], fibers[c.src[u]]
        on_o = {str(a): str(F.restrict(u, a)) for a in F.value(c.tgt[u])}
        pulls[u] = GroupoidFunctor(A, B, on_o, {f"id:{x}": f"id:{y}" for x, y in on_o.items()})
    return strict_pseudofunctor(c, fibers, pulls, name or f"disc({F.name})")


def bg_pseudofunctor(c: FiniteCategory, G: FiniteGroup) -> Pseudofunctor:
    return bg_of_group_presheaf(constant_group(c, G, G.name), f"bg:{G.name}")


def constant_bg(s: Site, G: FiniteGroup) -> Pseudofunctor:
    """One-object groupoids on the constant sheaf ``G`` (locally constant sections)."""
    from .presheaf import locally_constant_group

    return bg_of_group_presheaf(locally_constant_group(s, G, G.name), f"bg:{G.name}")


def torsor_groupoid(G: GroupPresheaf, s: Site, fam: CoveringFamily, max_objects: int = 20000) -> FiniteGroupoid:
    """Cocycle-presented torsors: descent data for the prestack of one-object groupoids."""
    return descent_category(bg_of_group_presheaf(G), s, fam, max_objects).groupoid


def torsor_stack(s: Site, G: FiniteGroup) -> Pseudofunctor:
    P = stackify(constant_bg(s, G), s)
    P.name = f"torsor-stack:{G.name}"
    return P


def twist(R: Pseudofunctor, choose: Callable[[str, str, FiniteGroupoid, str], tuple[str, str]], name: str = "") -> Pseudofunctor:
    """Replace each pull ``R(u)`` by an isomorphic functor ``T_u``.

    ``choose(u, x, fiber, Rx)`` returns ``(T_u x, θ: T_u x -> R(u) x)``.  The
    coherences ``ξ_{u,v} = θ_{uv}^{-1} ∘ R(v)(θ_u) ∘ θ_v`` then satisfy the
    cocycle identity automatically.
    """
    c = R.base
    T, theta = {}, {}
    for u in c.morphisms:
        A, B = R.fibers[c.tgt[u]], R.fibers[c.src[u]]
        if c.is_identity(u):
            T[u] = R.pulls[u]
            theta[u] = {x: B.identities[x] for x in A.objects}
            continue
        on_o, th = {}, {}
        for x in A.objects:
            on_o[x], th[x] = choose(u, x, B, R.pull_obj(u, x))
        on_m = {m: B.table[(B.inverse[th[A.tgt[m]]], B.table[(R.pull_mor(u, m), th[A.src[m]])])] for m in A.morphisms}
        T[u], theta[u] = GroupoidFunctor(A, B, on_o, on_m), th
    xi = {}
    for u, v in c.composable_pairs():
        uv = c.table[(u, v)]
        F = R.fibers[c.src[v]]
        comp = {}
        for x in R.fibers[c.tgt[u]].objects:
            tux = T[u].on_objects[x]
            k = F.table[(F.inverse[theta[uv][x]], F.table[(R.pull_mor(v, theta[u][x]), theta[v][tux])])]
            comp[x] = k
        xi[(u, v)] = comp
    return Pseudofunctor(c, dict(R.fibers), T, xi, name or f"twist({R.name})")


def square_category() -> FiniteCategory:
    return product(arrow_category(), arrow_category(), "square")


def twisted_square() -> Pseudofunctor:
    """Square poset with ``Z/3`` fibres; the bottom fibre has two isomorphic objects."""
    from .groups import cyclic

    c = square_category()
    G = cyclic(3)
    bottom = "(0,0)"
    fibers = {X: (block_groupoid([["x", "y"]], G, f"pair({X})") if X == bottom else bg_groupoid(G, "*", f"B({X})"))
              for X in c.objects}
    pulls = {}
    for u in c.morphisms:
        A, B = fibers[c.tgt[u]], fibers[c.src[u]]
        if c.is_identity(u):
            pulls[u] = identity_functor(A)
        elif c.src[u] == bottom:
            pulls[u] = GroupoidFunctor(A, B, {"*": "x"}, {m: f"x>x:{m}" for m in A.morphisms})
        else:
            pulls[u] = GroupoidFunctor(A, B, {"*": "*"}, {m: m for m in A.morphisms})
    R = strict_pseudofunctor(c, fibers, pulls, "square")
    via = {"(0,1)": ("y", "y>x:2"), "(1,0)": ("x", "x>x:1")}

    def choose(u, x, B, rx):
        if c.src[u] == bottom and c.tgt[u] in via:
            return via[c.tgt[u]]
        return rx, B.identities[rx]

    return twist(R, choose, "twisted_square")


def perturb(P: Pseudofunctor, u: str, v: str, x: str, new: str) -> Pseudofunctor:
    xi = {k: dict(vv) for k, vv in P.xi.items()}
    if (u, v) not in xi:
        F = P.fibers[P.base.src[v]]
        xi[(u, v)] = {y: P.xi_at(u, v, y) for y in P.fibers[P.base.tgt[u]].objects}
    xi[(u, v)][x] = new
    return Pseudofunctor(P.base, P.fibers, P.pulls, xi, P.name + "*")


def random_pseudofunctor(rng: random.Random, base: FiniteCategory | None = None) -> Pseudofunctor:
    """Strict ``F(X) x codiscrete(2) x BG`` fibres over a poset, then randomly twisted."""
    from .fincat import interval_In
    from .groups import cyclic, symmetric
    from .presheaf import random_poset_functor

    if base is None:
        base = rng.choice([arrow_category, lambda: interval_In(2), square_category])()
    G = rng.choice([cyclic(2), cyclic(3), symmetric(3)])
    values, maps = random_poset_functor(base, rng, 2, contravariant=True)
    fibers = {X: block_groupoid([[f"{a}.{i}" for i in range(2)] for a in values[X]], G, f"F({X})") for X in base.objects}
    pulls = {}
    for u in base.morphisms:
        A, B = fibers[base.tgt[u]], fibers[base.src[u]]
        mp = maps[u]

        def on_obj(x, mp=mp):
            a, i = x.split(".")
            return f"{mp[int(a)]}.{i}"

        on_o = {x: on_obj(x) for x in A.objects}
        on_m = {}
        for m in A.morphisms:
            head, g = m.rsplit(":", 1)
            on_m[m] = f"{on_o[A.src[m]]}>{on_o[A.tgt[m]]}:{g}"
        pulls[u] = GroupoidFunctor(A, B, on_o, on_m)
    R = strict_pseudofunctor(base, fibers, pulls, "random")

    def choose(u, x, B, rx):
        comp = [y for y in B.objects if B.hom(y, rx)]
        y = rng.choice(comp)
        return y, rng.choice(B.hom(y, rx))

    return twist(R, choose, "random")


def fixture_pseudofunctor(name: str, s: Site | None = None) -> Pseudofunctor:
    """``bg:<group>``, ``torsor-stack:<group>`` or ``twisted_square``."""
    if name == "twisted_square":
        return twisted_square()
    kind, _, grp = name.partition(":")
    if kind in ("bg", "torsor-stack"):
        if s is None:
            raise ValueError(f"{name} needs a site")
        G = parse_group(grp)
        G.name = grp
        if kind == "bg":
            return constant_bg(s, G)
        return torsor_stack(s, G)
    raise KeyError(f"unknown pseudofunctor fixture {name!r}")
