"""Grothendieck topologies on finite categories.

A topology is stored as the set of covering sieves over each object.
Fiber products are a chosen table; operations that need a missing entry
raise :class:`MissingPullback` instead of searching for one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .fincat import FiniteCategory, check_category, from_poset, poset_arrow
from .report import ValidationReport


class MissingPullback(KeyError):
    def __init__(self, f: str, g: str):
        super().__init__(f"no chosen fiber product for ({f}, {g})")
        self.pair = (f, g)


@dataclass(frozen=True)
class Sieve:
    base: str
    arrows: frozenset[str]

    def __le__(self, other: "Sieve") -> bool:
        return self.base == other.base and self.arrows <= other.arrows

    def __len__(self) -> int:
        return len(self.arrows)

    def __contains__(self, f: str) -> bool:
        return f in self.arrows

    def sorted(self) -> list[str]:
        return sorted(self.arrows)

    def __str__(self) -> str:
        return f"Sieve({self.base}: {', '.join(self.sorted())})"


@dataclass(frozen=True)
class CoveringFamily:
    target: str
    members: tuple[str, ...]

    def __str__(self) -> str:
        return f"{{{', '.join(self.members)}}} -> {self.target}"


@dataclass(frozen=True)
class FiniteTopSpace:
    """Finite space given by the minimal open neighbourhood of each point."""

    points: tuple[str, ...]
    minimal_opens: Mapping[str, frozenset[str]]
    name: str = ""

    @classmethod
    def from_minimal_opens(cls, mins: Mapping[str, Iterable[str]], name: str = "") -> "FiniteTopSpace":
        pts = tuple(sorted(mins))
        return cls(pts, {p: frozenset(v) for p, v in mins.items()}, name)

    def check(self) -> list[str]:
        bad = []
        for p, u in self.minimal_opens.items():
            if p not in u:
                bad.append(f"point {p} not in its minimal open")
            for q in u:
                if q not in self.minimal_opens:
                    bad.append(f"unknown point {q}")
                elif not self.minimal_opens[q] <= u:
                    bad.append(f"minimal opens not nested at ({p},{q})")
        return bad

    @cached_property
    def opens(self) -> list[frozenset[str]]:
        found = {frozenset()}
        mins = list(self.minimal_opens.values())
        for r in range(1, len(mins) + 1):
            for combo in itertools.combinations(mins, r):
                found.add(frozenset().union(*combo))
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def open_name(self, u: frozenset[str]) -> str:
        if not u:
            return "∅"
        if u == frozenset(self.points):
            return "X"
        owners = [p for p, m in self.minimal_opens.items() if m == u]
        if len(owners) == 1:
            return "U" + owners[0]
        return "{" + ",".join(sorted(u)) + "}"


@dataclass(frozen=True)
class PullbackEntry:
    obj: str
    p1: str
    p2: str


class Site:
    """A finite category with covering sieves and chosen fiber products."""

    def __init__(
        self,
        category: FiniteCategory,
        covering: Mapping[str, Iterable[Iterable[str]]],
        pullbacks: Mapping[tuple[str, str], tuple[str, str, str]] | None = None,
        name: str = "",
        space: FiniteTopSpace | None = None,
        open_sets: Mapping[str, frozenset[str]] | None = None,
    ):
        self.category = category
        self.name = name or category.name
        self.covering: dict[str, set[frozenset[str]]] = {
            x: {frozenset(s) for s in covering.get(x, [])} for x in category.objects
        }
        self.pullbacks: dict[tuple[str, str], PullbackEntry] = {
            k: PullbackEntry(*v) for k, v in (pullbacks or {}).items()
        }
        c = category
        for f in c.morphisms:
            x = c.tgt[f]
            a = c.src[f]
            ix = c.identities[x]
            self.pullbacks.setdefault((f, ix), PullbackEntry(a, c.identities[a], f))
            self.pullbacks.setdefault((ix, f), PullbackEntry(a, f, c.identities[a]))
        self.space = space
        self.open_sets = dict(open_sets or {})

    def __repr__(self) -> str:
        return f"Site({self.name}, {len(self.category.objects)} objects)"

    # -- sieves --------------------------------------------------------------

    def maximal_sieve(self, x: str) -> Sieve:
        return Sieve(x, frozenset(self.category.into(x)))

    def close_sieve(self, x: str, arrows: Iterable[str]) -> Sieve:
        c = self.category
        out = set(arrows)
        frontier = list(out)
        while frontier:
            f = frontier.pop()
            for g in c.into(c.src[f]):
                h = c.table[(f, g)]
                if h not in out:
                    out.add(h)
                    frontier.append(h)
        return Sieve(x, frozenset(out))

    def is_sieve(self, s: Sieve) -> bool:
        c = self.category
        return all(c.tgt[f] == s.base for f in s.arrows) and all(
            c.table[(f, g)] in s.arrows for f in s.arrows for g in c.into(c.src[f])
        )

    def is_covering(self, s: Sieve) -> bool:
        return s.arrows in self.covering[s.base]

    def covering_sieves(self, x: str) -> list[Sieve]:
        return sorted((Sieve(x, a) for a in self.covering[x]), key=lambda s: (len(s), s.sorted()))

    def minimum_covering_sieve(self, x: str) -> Sieve:
        """Intersection of all covering sieves over ``x`` (itself covering on a valid site)."""
        sieves = self.covering[x]
        if not sieves:
            raise ValueError(f"object {x} has no covering sieve")
        inter = frozenset.intersection(*sieves)
        return Sieve(x, inter)

    def local_objects(self) -> list[str]:
        """Objects whose only covering sieve is the maximal one."""
        return [x for x in self.category.objects if self.covering[x] == {self.maximal_sieve(x).arrows}]

    # -- pullbacks -----------------------------------------------------------

    def pullback(self, f: str, g: str) -> PullbackEntry:
        try:
            return self.pullbacks[(f, g)]
        except KeyError:
            raise MissingPullback(f, g) from None

    def __hash__(self) -> int:
        return id(self)


# ---------------------------------------------------------------------------
# Operations


def generate_sieve(s: Site, fam: CoveringFamily) -> Sieve:
    c = s.category
    for m in fam.members:
        if c.tgt.get(m) != fam.target:
            raise ValueError(f"member {m} does not land in {fam.target}")
    return s.close_sieve(fam.target, fam.members)


def pullback_sieve(s: Site, f: str, b: Sieve) -> Sieve:
    c = s.category
    if c.tgt[f] != b.base:
        raise ValueError(f"morphism {f} does not land in the base {b.base}")
    y = c.src[f]
    return Sieve(y, frozenset(g for g in c.into(y) if c.table[(f, g)] in b.arrows))


def is_covering_family(s: Site, fam: CoveringFamily) -> bool:
    return s.is_covering(generate_sieve(s, fam))


def enumerate_sieves(s: Site, x: str) -> list[tuple[Sieve, bool]]:
    """All sieves over ``x`` with a covering flag, ordered by size then arrows."""
    c = s.category
    found: set[frozenset[str]] = {frozenset()}
    frontier = [frozenset()]
    arrows = c.into(x)
    while frontier:
        nxt = []
        for base in frontier:
            for f in arrows:
                if f in base:
                    continue
                t = s.close_sieve(x, set(base) | {f}).arrows
                if t not in found:
                    found.add(t)
                    nxt.append(t)
        frontier = nxt
    out = [Sieve(x, a) for a in found]
    out.sort(key=lambda b: (len(b), b.sorted()))
    return [(b, s.is_covering(b)) for b in out]


def family_of_sieve(s: Site, b: Sieve) -> CoveringFamily:
    """A small family generating ``b`` (the finite witness of quasi-compactness)."""
    members = sorted(b.arrows)
    i = 0
    while i < len(members):
        trial = members[:i] + members[i + 1:]
        if s.close_sieve(b.base, trial).arrows == b.arrows:
            members = trial
        else:
            i += 1
    return CoveringFamily(b.base, tuple(members))


def check_pullback_entry(s: Site, f: str, g: str, e: PullbackEntry) -> str | None:
    c = s.category
    if c.tgt[f] != c.tgt[g]:
        return f"pullback ({f},{g}) of arrows with different targets"
    if c.src[e.p1] != e.obj or c.src[e.p2] != e.obj or c.tgt[e.p1] != c.src[f] or c.tgt[e.p2] != c.src[g]:
        return f"pullback ({f},{g}) has ill-typed projections"
    if c.table[(f, e.p1)] != c.table[(g, e.p2)]:
        return f"pullback square ({f},{g}) does not commute"
    for q in c.objects:
        for q1 in c.hom(q, c.src[f]):
            fq1 = c.table[(f, q1)]
            for q2 in c.hom(q, c.src[g]):
                if c.table[(g, q2)] != fq1:
                    continue
                lifts = [u for u in c.hom(q, e.obj) if c.table[(e.p1, u)] == q1 and c.table[(e.p2, u)] == q2]
                if len(lifts) != 1:
                    return f"pullback ({f},{g}) has {len(lifts)} lifts for cone ({q1},{q2})"
    return None


def check_site(s: Site, require_pullbacks_for: Iterable[CoveringFamily] = ()) -> ValidationReport:
    rep = ValidationReport(f"site {s.name}")
    crep = check_category(s.category)
    rep.extend(crep, "category: ")
    if not crep.ok:
        return rep
    c = s.category
    for x in c.objects:
        for a in s.covering[x]:
            if not s.is_sieve(Sieve(x, a)):
                rep.fail(f"covering set over {x} is not a sieve: {sorted(a)}")
        if s.maximal_sieve(x).arrows not in s.covering[x]:
            rep.fail(f"maximal sieve over {x} does not cover")
    if not rep.ok:
        return rep
    for x in c.objects:
        for a in s.covering[x]:
            b = Sieve(x, a)
            for f in c.into(x):
                pb = pullback_sieve(s, f, b)
                if not any(cov <= pb.arrows for cov in s.covering[c.src[f]]):
                    rep.fail(f"stability: pullback of {b} along {f} contains no covering sieve")
                elif not s.is_covering(pb):
                    rep.fail(f"stability: pullback of {b} along {f} is not covering")
    all_sieves = {x: [b for b, _ in enumerate_sieves(s, x)] for x in c.objects}
    for x in c.objects:
        for r in all_sieves[x]:
            if s.is_covering(r):
                continue
            for a in s.covering[x]:
                if all(s.is_covering(pullback_sieve(s, f, r)) for f in a):
                    rep.fail(f"transitivity: {r} is locally covering for {sorted(a)} but does not cover")
                    break
    for (f, g), e in s.pullbacks.items():
        msg = check_pullback_entry(s, f, g, e)
        if msg:
            rep.fail(msg)
    for fam in require_pullbacks_for:
        for f in fam.members:
            for g in fam.members:
                if (f, g) not in s.pullbacks:
                    rep.warn(f"incomplete-pullbacks: ({f},{g}) missing for {fam}")
    return rep


# ---------------------------------------------------------------------------
# Čech indexing


@dataclass(frozen=True)
class CechTerm:
    index: tuple[int, ...]
    obj: str
    to_base: str
    projections: tuple[str, ...]


class CechIndexing:
    """Iterated fiber products ``U_{a0...an}`` of a covering family up to ``depth``.

    Tuples are ordered, repeats allowed.  ``face(t, i)`` is the arrow
    ``U_t -> U_{t without position i}``.
    """

    def __init__(self, s: Site, fam: CoveringFamily, depth: int):
        self.site = s
        self.family = fam
        self.depth = depth
        c = s.category
        self.terms: dict[tuple[int, ...], CechTerm] = {}
        n = len(fam.members)
        for a, m in enumerate(fam.members):
            self.terms[(a,)] = CechTerm((a,), c.src[m], m, (c.identities[c.src[m]],))
        for k in range(1, depth + 1):
            for t in itertools.product(range(n), repeat=k + 1):
                prev = self.terms[t[:-1]]
                last = fam.members[t[-1]]
                e = s.pullback(prev.to_base, last)
                to_base = c.table[(last, e.p2)]
                projs = tuple(c.table[(p, e.p1)] for p in prev.projections) + (e.p2,)
                self.terms[t] = CechTerm(t, e.obj, to_base, projs)
        self._faces: dict[tuple[tuple[int, ...], int], str] = {}

    def tuples(self, k: int) -> list[tuple[int, ...]]:
        return list(itertools.product(range(len(self.family.members)), repeat=k + 1))

    def alternating_tuples(self, k: int) -> list[tuple[int, ...]]:
        return list(itertools.combinations(range(len(self.family.members)), k + 1))

    def obj(self, t: tuple[int, ...]) -> str:
        return self.terms[t].obj

    def face(self, t: tuple[int, ...], i: int) -> str:
        key = (t, i)
        hit = self._faces.get(key)
        if hit is not None:
            return hit
        c = self.site.category
        src = self.terms[t]
        u = t[:i] + t[i + 1:]
        tgt = self.terms[u]
        want = src.projections[:i] + src.projections[i + 1:]
        lifts = [h for h in c.hom(src.obj, tgt.obj)
                 if all(c.table[(p, h)] == w for p, w in zip(tgt.projections, want))]
        if len(lifts) != 1:
            raise ValueError(f"face {i} of {t} is not unique ({len(lifts)} candidates)")
        self._faces[key] = lifts[0]
        return lifts[0]

    def check(self) -> list[str]:
        """Simplicial identities ``d_i d_j = d_{j-1} d_i`` on the Čech nerve."""
        c = self.site.category
        bad = []
        for k in range(2, self.depth + 1):
            for t in self.tuples(k):
                for i in range(k + 1):
                    for j in range(i + 1, k + 1):
                        a = c.table[(self.face(t[:j] + t[j + 1:], i), self.face(t, j))]
                        b = c.table[(self.face(t[:i] + t[i + 1:], j - 1), self.face(t, i))]
                        if a != b:
                            bad.append(f"face identity ({i},{j}) fails at {t}")
        return bad


def cech_products(s: Site, fam: CoveringFamily, depth: int) -> CechIndexing:
    return CechIndexing(s, fam, depth)


# ---------------------------------------------------------------------------
# Constructions and fixtures


def open_cover_site(space: FiniteTopSpace) -> Site:
    bad = space.check()
    if bad:
        raise ValueError("not a topology: " + "; ".join(bad))
    opens = space.opens
    names = [space.open_name(u) for u in opens]
    if len(set(names)) != len(names):
        raise ValueError("open names collide")
    by_name = dict(zip(names, opens))
    cat = from_poset(names, lambda a, b: by_name[a] <= by_name[b], space.name or "opens")
    covering: dict[str, list[frozenset[str]]] = {}
    for x in names:
        below = [y for y in names if by_name[y] <= by_name[x]]
        # covering sieves = down-closed sets of opens whose union is x
        sieves = []
        for r in range(len(below) + 1):
            for combo in itertools.combinations(below, r):
                cs = set(combo)
                if any(not by_name[z] <= by_name[x] for z in cs):
                    continue
                closed = all(z in cs for y in cs for z in below if by_name[z] <= by_name[y])
                if not closed:
                    continue
                union = frozenset().union(*(by_name[y] for y in cs)) if cs else frozenset()
                if union == by_name[x]:
                    sieves.append(frozenset(poset_arrow(y, x) for y in cs))
        covering[x] = sieves
    pullbacks = {}
    for a in names:
        for b in names:
            inter = by_name[a] & by_name[b]
            p = names[opens.index(inter)]
            for x in names:
                if by_name[a] <= by_name[x] and by_name[b] <= by_name[x]:
                    pullbacks[(poset_arrow(a, x), poset_arrow(b, x))] = (p, poset_arrow(p, a), poset_arrow(p, b))
    return Site(cat, covering, pullbacks, space.name, space, by_name)


def coarse(c: FiniteCategory) -> Site:
    """Only maximal sieves cover."""
    return Site(c, {x: [frozenset(c.into(x))] for x in c.objects}, {}, f"coarse({c.name})")


def point_space() -> FiniteTopSpace:
    return FiniteTopSpace.from_minimal_opens({"p": {"p"}}, "point")


def pseudocircle_space() -> FiniteTopSpace:
    return FiniteTopSpace.from_minimal_opens(
        {"a": {"a"}, "b": {"b"}, "c": {"a", "b", "c"}, "d": {"a", "b", "d"}}, "pseudocircle")


def pseudosphere_space() -> FiniteTopSpace:
    return FiniteTopSpace.from_minimal_opens(
        {
            "a": {"a"}, "b": {"b"},
            "c": {"a", "b", "c"}, "d": {"a", "b", "d"},
            "e": {"a", "b", "c", "d", "e"}, "f": {"a", "b", "c", "d", "f"},
        },
        "pseudosphere",
    )


def interval_space() -> FiniteTopSpace:
    """Closed points ``l``, ``r`` and an open point ``m`` between them."""
    return FiniteTopSpace.from_minimal_opens({"l": {"l", "m"}, "m": {"m"}, "r": {"m", "r"}}, "two_cover_interval")


FIXTURE_SITES = ("point", "pseudocircle", "pseudosphere", "two_cover_interval")


def fixture_site(name: str) -> Site:
    """Named fixture: ``point``, ``pseudocircle``, ``pseudosphere``, ``two_cover_interval``, ``coarse:<cat>``."""
    from . import fincat

    if name == "point":
        return open_cover_site(point_space())
    if name == "pseudocircle":
        return open_cover_site(pseudocircle_space())
    if name == "pseudosphere":
        return open_cover_site(pseudosphere_space())
    if name == "two_cover_interval":
        return open_cover_site(interval_space())
    if name.startswith("coarse"):
        arg = name.split(":", 1)[1] if ":" in name else "terminal"
        cats = {
            "terminal": fincat.terminal,
            "arrow": fincat.arrow_category,
            "square": lambda: fincat.product(fincat.arrow_category(), fincat.arrow_category(), "square"),
        }
        if arg not in cats:
            raise KeyError(f"unknown category for coarse site: {arg}")
        return coarse(cats[arg]())
    raise KeyError(f"unknown site fixture {name!r}")


def resolve_cover(s: Site, target: str, names: Sequence[str]) -> CoveringFamily:
    """Build a family from object names (each member is the unique arrow in a poset site)."""
    c = s.category
    members = []
    for nm in names:
        nm = nm.strip()
        if nm in c.src and c.tgt[nm] == target:
            members.append(nm)
            continue
        if nm not in c.identities:
            raise KeyError(f"unknown cover member {nm!r}")
        hs = c.hom(nm, target)
        if len(hs) != 1:
            raise ValueError(f"member {nm} has {len(hs)} arrows to {target}; name the arrow")
        members.append(hs[0])
    return CoveringFamily(target, tuple(members))


def top_object(s: Site) -> str:
    """The terminal object (``X`` on open-cover sites)."""
    t = s.category.terminal_objects()
    if not t:
        raise ValueError("site category has no terminal object")
    return t[0]
