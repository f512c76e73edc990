"""Nonabelian complexes, their cohomology, and the E2 page of a tower.

A complex ending at degree ``n`` has abelian groups ``G_0 .. G_{n-2}``, a
finite group ``G_{n-1}``, a pointed finite set ``(G_n, p)`` acted on by
``G_{n-1}`` and a boolean function ``d_n`` on ``G_n``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .cech import NotASheaf, sheaf_cohomology
from .exactalg import ChainComplex, FGAbelianGroup, IntegerMatrix, is_valid_hom
from .groups import FiniteGroup, find_isomorphism, trivial_group
from .presheaf import AbPresheaf, is_sheaf
from .report import ValidationReport
from .site import Site


@dataclass
class NonabelianComplex:
    """``abelian[i]`` for ``i <= n-2`` with ``d[i]: G_i -> G_{i+1}`` for ``i <= n-3``.

    ``top_map[j]`` is the image in ``G_{n-1}`` of generator ``j`` of ``G_{n-2}``.
    ``action[g][x]`` is ``g·x`` on ``G_n = range(len(boolean))``.
    """

    n: int
    abelian: dict[int, FGAbelianGroup]
    d: dict[int, IntegerMatrix]
    group: FiniteGroup
    top_map: list[int]
    action: list[list[int]]
    boolean: list[int]
    point: int = 0
    name: str = ""

    @property
    def npoints(self) -> int:
        return len(self.boolean)

    def act(self, g: int, x: int) -> int:
        return self.action[g][x]

    def evaluate_top(self, vec: Sequence[int]) -> int:
        """Image under ``d_{n-2}`` of an element of ``G_{n-2}``."""
        out = 0
        for j, k in enumerate(vec):
            if k:
                g = self.top_map[j]
                out = self.group.mul(out, self.group.power(g, k % self.group.element_order(g)))
        return out

    def image_of_top(self) -> frozenset[int]:
        return self.group.subgroup_generated(self.top_map)

    def stabilizer(self, x: int | None = None) -> frozenset[int]:
        x = self.point if x is None else x
        return frozenset(g for g in self.group.elements() if self.act(g, x) == x)


def trivial_complex(n: int) -> NonabelianComplex:
    ab = {i: FGAbelianGroup() for i in range(n - 1)}
    d = {i: IntegerMatrix.zeros(0, 0) for i in range(n - 2)}
    return NonabelianComplex(n, ab, d, trivial_group(), [], [[0]], [0], 0, "trivial")


def validate(nc: NonabelianComplex) -> ValidationReport:
    rep = ValidationReport(f"nonabelian complex {nc.name}".strip())
    G = nc.group
    n = nc.n
    for msg in G.check():
        rep.fail(f"G_{n - 1}: {msg}")
    if not rep.ok:
        return rep
    if set(nc.abelian) != set(range(max(n - 1, 0))):
        rep.fail(f"abelian groups must sit in degrees 0..{n - 2}")
        return rep
    for i in range(n - 2):
        m = nc.d.get(i)
        if m is None or not is_valid_hom(nc.abelian[i], nc.abelian[i + 1], m):
            rep.fail(f"d_{i} is not a homomorphism")
    for i in range(1, n - 2):
        if rep.ok and not _reduce(nc.abelian[i + 1], nc.d[i] @ nc.d[i - 1]).is_zero():
            rep.fail(f"d_{i} d_{i - 1} is not zero")
    if n >= 2:
        top = nc.abelian[n - 2]
        if len(nc.top_map) != top.ngens:
            rep.fail(f"d_{n - 2} needs one image per generator of G_{n - 2}")
            return rep
        for a, b in itertools.combinations(nc.top_map, 2):
            if G.mul(a, b) != G.mul(b, a):
                rep.fail(f"d_{n - 2} images {G.names[a]} and {G.names[b]} do not commute")
        for j, order in enumerate(top.orders):
            if order and G.power(nc.top_map[j], order) != 0:
                rep.fail(f"d_{n - 2} does not respect the order of generator {j}")
        if rep.ok and n >= 3:
            prev = nc.d[n - 3]
            for j in range(prev.ncols):
                if nc.evaluate_top(prev.column(j)) != 0:
                    rep.fail(f"d_{n - 2} d_{n - 3} is not trivial on generator {j}")
    N = len(nc.boolean)
    if not 0 <= nc.point < N:
        rep.fail("base point out of range")
        return rep
    if len(nc.action) != G.order or any(sorted(row) != list(range(N)) for row in nc.action):
        rep.fail("action rows must be permutations of G_n")
        return rep
    if nc.action[0] != list(range(N)):
        rep.fail("identity does not act trivially")
    for g in G.elements():
        for h in G.elements():
            for x in range(N):
                if nc.act(G.mul(g, h), x) != nc.act(g, nc.act(h, x)):
                    rep.fail(f"not an action at ({G.names[g]},{G.names[h]},{x})")
                    break
    if not rep.ok:
        return rep
    stab = nc.stabilizer()
    im = nc.image_of_top() if n >= 2 else frozenset({0})
    if not im <= stab:
        rep.fail(f"image of d_{n - 2} is not inside the stabilizer of p")
    elif not G.is_normal(im, stab):
        rep.fail(f"image of d_{n - 2} is not normal in the stabilizer of p")
    for g in G.elements():
        for x in range(N):
            if nc.boolean[nc.act(g, x)] != nc.boolean[x]:
                rep.fail(f"action of {G.names[g]} does not preserve d_{n} at {x}")
    if nc.boolean[nc.point]:
        rep.fail(f"d_{n}(p) is not 0")
    return rep


def _reduce(target: FGAbelianGroup, m: IntegerMatrix) -> IntegerMatrix:
    from .exactalg import reduce_matrix

    return reduce_matrix(target, m)


def _top_kernel_lattice(nc: NonabelianComplex) -> IntegerMatrix:
    """Columns generating ``{v in Z^k : d_{n-2}(v) = 1}`` (Schreier relations of a BFS)."""
    G = nc.group
    k = len(nc.top_map)
    word = {0: (0,) * k}
    queue = [0]
    rels = []
    while queue:
        h = queue.pop(0)
        for j, g in enumerate(nc.top_map):
            h2 = G.mul(h, g)
            w = list(word[h])
            w[j] += 1
            if h2 not in word:
                word[h2] = tuple(w)
                queue.append(h2)
            else:
                rels.append([a - b for a, b in zip(w, word[h2])])
    entries = {(i, c): v for c, r in enumerate(rels) for i, v in enumerate(r) if v}
    return IntegerMatrix.from_entries(k, len(rels), entries)


@dataclass
class NonabCohomology:
    degree: int
    kind: str  # "abelian", "group" or "pointed_set"
    abelian: FGAbelianGroup | None = None
    group: FiniteGroup | None = None
    classes: list[frozenset[int]] = field(default_factory=list)
    base_class: int = 0

    @property
    def size(self) -> int | None:
        if self.kind == "abelian":
            return self.abelian.order()
        if self.kind == "group":
            return self.group.order
        return len(self.classes)

    def describe(self) -> str:
        if self.kind == "abelian":
            return str(self.abelian)
        if self.kind == "group":
            return f"group of order {self.group.order}"
        return f"pointed set with {len(self.classes)} classes"


def abelian_part(nc: NonabelianComplex) -> ChainComplex:
    """``G_0 -> ... -> G_{n-2} -> im d_{n-2}`` as an abelian cochain complex."""
    n = nc.n
    groups = dict(nc.abelian)
    d = {i: nc.d[i] for i in range(n - 2)}
    if n >= 2:
        k = len(nc.top_map)
        img, to_c, _ = FGAbelianGroup.from_relations(k, _top_kernel_lattice(nc))
        groups[n - 1] = img
        d[n - 2] = _reduce(img, to_c)
    return ChainComplex(groups, d, cohomological=True)


def cohomology(nc: NonabelianComplex, i: int) -> NonabCohomology:
    rep = validate(nc)
    if not rep.ok:
        raise ValueError(rep.violations[0])
    n = nc.n
    if i < 0 or i > n:
        raise ValueError(f"degree {i} outside 0..{n}")
    if i <= n - 2:
        return NonabCohomology(i, "abelian", abelian=abelian_part(nc).homology(i))
    G = nc.group
    if i == n - 1:
        im = nc.image_of_top() if n >= 2 else frozenset({0})
        Q, _ = G.quotient(im, nc.stabilizer())
        return NonabCohomology(i, "group", group=Q)
    zeros = [x for x in range(nc.npoints) if nc.boolean[x] == 0]
    seen: set[int] = set()
    classes = []
    for x in zeros:
        if x in seen:
            continue
        orbit = frozenset(nc.act(g, x) for g in G.elements())
        seen |= orbit
        classes.append(orbit)
    base = next(j for j, c in enumerate(classes) if nc.point in c)
    return NonabCohomology(i, "pointed_set", classes=classes, base_class=base)


def rebase(nc: NonabelianComplex, g: int) -> NonabelianComplex:
    """Move the base point to ``g·p`` and conjugate ``d_{n-2}`` by ``g``."""
    G = nc.group
    return NonabelianComplex(nc.n, dict(nc.abelian), dict(nc.d), G, [G.conj(g, a) for a in nc.top_map],
                             nc.action, list(nc.boolean), nc.act(g, nc.point), nc.name + f"@{G.names[g]}")


def same_cohomology(a: NonabCohomology, b: NonabCohomology) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind == "abelian":
        return a.abelian == b.abelian
    if a.kind == "group":
        return find_isomorphism(a.group, b.group) is not None
    return sorted(len(c) for c in a.classes) == sorted(len(c) for c in b.classes)


def finite_group_of(A: FGAbelianGroup) -> tuple[FiniteGroup, list[tuple[int, ...]]]:
    """Multiplication table of a finite abelian group, elements listed in ``A.elements()`` order."""
    elems = A.elements()
    pos = {e: i for i, e in enumerate(elems)}
    table = [[pos[A.reduce([x + y for x, y in zip(a, b)])] for b in elems] for a in elems]
    names = ["(" + ",".join(map(str, e)) + ")" for e in elems]
    return FiniteGroup(table, names, str(A)), elems


def from_abelian_complex(cx: ChainComplex, n: int) -> NonabelianComplex:
    """Reshape a cochain complex ending at ``n`` (finite in degrees ``n-1, n``).

    ``G_{n-1}`` acts on ``G_n`` by translation through ``d_{n-1}`` and the
    boolean function is ``x != 0 in d_n``.  Its cohomology agrees with the
    complex's up to degree ``n - 1``; in degree ``n`` the classes are the
    elements of ``H^n``.
    """
    if not cx.cohomological:
        raise ValueError("expected a cochain complex")
    G, gel = finite_group_of(cx.group(n - 1))
    top = cx.group(n)
    xel = top.elements()
    xpos = {x: i for i, x in enumerate(xel)}
    dm = cx.differential(n - 1)
    dn = cx.differential(n)
    nxt = cx.group(n + 1)
    action = []
    for g in gel:
        shift = dm.apply(g)
        action.append([xpos[top.reduce([a + b for a, b in zip(x, shift)])] for x in xel])
    boolean = [0 if all(v == 0 for v in nxt.reduce(dn.apply(x))) else 1 for x in xel]
    abelian = {i: cx.group(i) for i in range(n - 1)}
    d = {i: cx.differential(i) for i in range(n - 2)}
    top_map = []
    if n >= 2:
        gpos = {e: i for i, e in enumerate(gel)}
        dd = cx.differential(n - 2)
        top_map = [gpos[cx.group(n - 1).reduce(dd.column(j))] for j in range(cx.dim(n - 2))]
    return NonabelianComplex(n, abelian, d, G, top_map, action, boolean, xpos[top.zero()], "reshaped")


# ---------------------------------------------------------------------------
# Towers


def em_tower_homotopy(pc: ChainComplex, i: int, n: int) -> FGAbelianGroup:
    """``π_i`` of the degenerate tower with Eilenberg–MacLane fibres: ``H^{n-i}``."""
    if not pc.cohomological:
        raise ValueError("expected a cochain complex")
    if n - i < pc.lo or n - i > pc.hi:
        raise ValueError(f"degree {n - i} is outside the complex ({pc.lo}..{pc.hi})")
    return pc.homology(n - i)


def tower_e2_page(s: Site, sheaves: Mapping[int, AbPresheaf], x: str, cap: int = 3) -> dict[tuple[int, int], FGAbelianGroup]:
    """``E_2^{p,q} = H^{-p}(x; ϖ_q)`` for ``-cap <= p <= 0``; absent ``q`` are zero."""
    for q, F in sheaves.items():
        r = is_sheaf(F, s)
        if not r.ok:
            raise NotASheaf(f"ϖ_{q} is not a sheaf: {r.violations[0]}")
    page = {}
    for q, F in sheaves.items():
        for p in range(-cap, 1):
            page[(p, q)] = sheaf_cohomology(s, x, F, -p)
    return page


def e2_diagonal(page: Mapping[tuple[int, int], FGAbelianGroup], total: int) -> dict[tuple[int, int], FGAbelianGroup]:
    """Entries on the line ``p + q = total`` that may contribute to ``π_total``."""
    return {k: g for k, g in page.items() if k[0] + k[1] == total and not g.is_trivial()}


def s3_endpoint(n: int = 2) -> NonabelianComplex:
    """``S_3`` permuting three points, ``d_n = 0`` and ``d_{n-2}`` trivial."""
    from .groups import symmetric

    if n < 1:
        raise ValueError("end degree must be >= 1")
    G = symmetric(3)
    perms = [tuple(int(ch) for ch in name) for name in G.names]
    action = [[p[x] for x in range(3)] for p in perms]
    ab = {i: FGAbelianGroup() for i in range(n - 1)}
    d = {i: IntegerMatrix.zeros(0, 0) for i in range(n - 2)}
    return NonabelianComplex(n, ab, d, G, [], action, [0, 0, 0], 0, "S3-endpoint")


def fixture_complex(name: str) -> NonabelianComplex:
    """``trivial:<n>`` or ``s3-endpoint[:<n>]``."""
    head, _, arg = name.partition(":")
    if head == "trivial":
        return trivial_complex(int(arg or 2))
    if head == "s3-endpoint":
        return s3_endpoint(int(arg or 2))
    raise KeyError(f"unknown nonabelian complex fixture {name!r}")
