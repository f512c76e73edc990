"""Finite groups by multiplication table.

Elements are ``0..n-1`` with ``0`` the identity; ``names`` gives display
labels.  Nothing here is clever: everything is table lookup.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence


class FiniteGroup:
    def __init__(self, table: Sequence[Sequence[int]], names: Sequence[str] | None = None, name: str = ""):
        self.table = [list(r) for r in table]
        self.n = len(self.table)
        self.names = list(names) if names is not None else [str(i) for i in range(self.n)]
        self.name = name
        self.index = {nm: i for i, nm in enumerate(self.names)}
        self.inv = [0] * self.n
        for a in range(self.n):
            for b in range(self.n):
                if self.table[a][b] == 0:
                    self.inv[a] = b
                    break

    @property
    def order(self) -> int:
        return self.n

    def elements(self) -> range:
        return range(self.n)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inverse(self, a: int) -> int:
        return self.inv[a]

    def conj(self, g: int, a: int) -> int:
        """``g a g^-1``."""
        return self.table[self.table[g][a]][self.inv[g]]

    def power(self, a: int, k: int) -> int:
        out = 0
        base = a if k >= 0 else self.inv[a]
        for _ in range(abs(k)):
            out = self.table[out][base]
        return out

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.table[x][a]
            k += 1
        return k

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a] for a in range(self.n) for b in range(self.n))

    def check(self) -> list[str]:
        bad = []
        n = self.n
        if any(len(r) != n for r in self.table):
            return ["table is not square"]
        if any(self.table[0][a] != a or self.table[a][0] != a for a in range(n)):
            bad.append("0 is not the identity")
        for a in range(n):
            if sorted(self.table[a]) != list(range(n)):
                bad.append(f"row {a} is not a permutation")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                bad.append(f"associativity fails at ({a},{b},{c})")
                break
        return bad

    def subgroup_generated(self, gens: Iterable[int]) -> frozenset[int]:
        out = {0}
        frontier = [0]
        gens = list(gens)
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.table[x][g]
                if y not in out:
                    out.add(y)
                    frontier.append(y)
        return frozenset(out)

    def is_subgroup(self, s: Iterable[int]) -> bool:
        s = set(s)
        return 0 in s and all(self.table[a][self.inv[b]] in s for a in s for b in s)

    def is_normal(self, sub: Iterable[int], within: Iterable[int] | None = None) -> bool:
        sub = set(sub)
        within = range(self.n) if within is None else within
        return all(self.conj(g, h) in sub for g in within for h in sub)

    def conjugacy_classes(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for a in range(self.n):
            if a in seen:
                continue
            cls = frozenset(self.conj(g, a) for g in range(self.n))
            seen |= cls
            out.append(cls)
        return out

    def center(self) -> frozenset[int]:
        return frozenset(a for a in range(self.n) if all(self.table[a][b] == self.table[b][a] for b in range(self.n)))

    def centralizer(self, a: int) -> frozenset[int]:
        return frozenset(g for g in range(self.n) if self.table[g][a] == self.table[a][g])

    def quotient(self, sub: Iterable[int], within: Iterable[int] | None = None) -> tuple["FiniteGroup", dict[int, int]]:
        """``within / sub`` as a group, and the projection on ``within``."""
        sub = frozenset(sub)
        within = sorted(set(range(self.n) if within is None else within))
        cosets: list[frozenset[int]] = []
        proj: dict[int, int] = {}
        for g in within:
            if g in proj:
                continue
            c = frozenset(self.table[g][h] for h in sub)
            for x in c:
                proj[x] = len(cosets)
            cosets.append(c)
        reps = [min(c) for c in cosets]
        # make sure the identity coset is 0
        table = [[proj[self.table[reps[i]][reps[j]]] for j in range(len(reps))] for i in range(len(reps))]
        names = ["{" + ",".join(self.names[x] for x in sorted(c)) + "}" for c in cosets]
        return FiniteGroup(table, names, f"{self.name}/N"), proj

    def subgroup_as_group(self, sub: Iterable[int]) -> tuple["FiniteGroup", list[int]]:
        elems = sorted(set(sub))
        pos = {g: i for i, g in enumerate(elems)}
        table = [[pos[self.table[a][b]] for b in elems] for a in elems]
        return FiniteGroup(table, [self.names[g] for g in elems]), elems

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or '?'}, order={self.n})"


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], [str(a) for a in range(n)], f"Z{n}")


def from_permutations(perms: Sequence[tuple[int, ...]], name: str = "") -> FiniteGroup:
    """Group of permutations (closed under composition; identity first).

    Product convention: ``(p q)(x) = p(q(x))``.
    """
    perms = list(perms)
    idx = {p: i for i, p in enumerate(perms)}
    table = [[idx[tuple(p[q[x]] for x in range(len(p)))] for q in perms] for p in perms]
    names = ["".join(str(v) for v in p) for p in perms]
    return FiniteGroup(table, names, name)


def symmetric(n: int) -> FiniteGroup:
    perms = sorted(itertools.permutations(range(n)))
    return from_permutations(perms, f"S{n}")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of an ``n``-gon, as permutations of the vertices."""
    rots = [tuple((i + k) % n for i in range(n)) for k in range(n)]
    refl = [tuple((k - i) % n for i in range(n)) for k in range(n)]
    return from_permutations(rots + refl, f"D{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    pairs = [(a, b) for a in range(g.n) for b in range(h.n)]
    idx = {p: i for i, p in enumerate(pairs)}
    table = [[idx[(g.table[a][c], h.table[b][d])] for (c, d) in pairs] for (a, b) in pairs]
    return FiniteGroup(table, [f"({g.names[a]},{h.names[b]})" for a, b in pairs], f"{g.name}x{h.name}")


def trivial_group() -> FiniteGroup:
    return FiniteGroup([[0]], ["e"], "1")


def parse_group(spec: str) -> FiniteGroup:
    """``"S3"``, ``"Z2"``, ``"Z/2"``, ``"D4"``, ``"1"``, ``"Z2xZ2"``."""
    spec = spec.strip()
    if "x" in spec:
        parts = [parse_group(p) for p in spec.split("x")]
        out = parts[0]
        for p in parts[1:]:
            out = direct_product(out, p)
        return out
    if spec in ("1", "trivial", "e"):
        return trivial_group()
    if spec.startswith("Z/"):
        return cyclic(int(spec[2:]))
    if spec[0] == "Z" and spec[1:].isdigit():
        return cyclic(int(spec[1:]))
    if spec[0] == "S" and spec[1:].isdigit():
        return symmetric(int(spec[1:]))
    if spec[0] == "D" and spec[1:].isdigit():
        return dihedral(int(spec[1:]))
    raise ValueError(f"unknown finite group {spec!r}")


def is_homomorphism(g: FiniteGroup, h: FiniteGroup, f: Sequence[int]) -> bool:
    return all(f[g.table[a][b]] == h.table[f[a]][f[b]] for a in range(g.n) for b in range(g.n))


def generators(g: FiniteGroup) -> list[int]:
    """A small generating set, found greedily."""
    gens: list[int] = []
    span = frozenset({0})
    for a in sorted(range(g.n), key=lambda x: -g.element_order(x)):
        if a not in span:
            gens.append(a)
            span = g.subgroup_generated(gens)
            if len(span) == g.n:
                break
    return gens


def find_isomorphism(g: FiniteGroup, h: FiniteGroup) -> list[int] | None:
    """An isomorphism ``g -> h`` as a list, or ``None``; backtracking on generators."""
    if g.n != h.n:
        return None
    if sorted(g.element_order(a) for a in range(g.n)) != sorted(h.element_order(a) for a in range(h.n)):
        return None
    gens = generators(g)
    words: dict[int, list[int]] = {0: []}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for k, s in enumerate(gens):
                y = g.table[x][s]
                if y not in words:
                    words[y] = words[x] + [k]
                    nxt.append(y)
        frontier = nxt
    candidates = [[b for b in range(h.n) if h.element_order(b) == g.element_order(s)] for s in gens]
    for images in itertools.product(*candidates):
        f = [0] * g.n
        for x, w in words.items():
            v = 0
            for k in w:
                v = h.table[v][images[k]]
            f[x] = v
        if len(set(f)) == g.n and is_homomorphism(g, h, f):
            return f
    return None


def abelian_invariants(g: FiniteGroup) -> tuple[int, ...] | None:
    """Invariant factors for an abelian group, ``None`` otherwise."""
    if not g.is_abelian():
        return None
    from .exactalg import FGAbelianGroup, IntegerMatrix
    gens = list(range(1, g.n))
    if not gens:
        return ()
    # relations: orders and the table
    rels = []
    idx = {a: i for i, a in enumerate(gens)}

    def vec(a):
        v = [0] * len(gens)
        if a:
            v[idx[a]] += 1
        return v

    for a in gens:
        for b in gens:
            c = g.table[a][b]
            v = vec(a)
            w = vec(b)
            u = vec(c)
            rels.append([v[i] + w[i] - u[i] for i in range(len(gens))])
    m = IntegerMatrix.from_rows(rels, len(gens)).transpose()
    A, _, _ = FGAbelianGroup.from_relations(len(gens), m)
    return A.torsion
