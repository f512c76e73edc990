"""Planar tree diagrams and their cubical cell complex.

A planar tree with ``m`` leaves (numbered left to right) and no unary
vertices is determined by its internal edges.  Each internal edge is
recorded as the interval ``(a, b)`` of leaves hanging below it; these
intervals are pairwise nested or disjoint.  Contracting an edge deletes its
interval, so edges keep their identity across faces.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

from .exactalg import ChainComplex, FGAbelianGroup, IntegerMatrix
from .report import ValidationReport

Interval = tuple[int, int]


def _compatible(p: Interval, q: Interval) -> bool:
    (a, b), (c, d) = p, q
    return b < c or d < a or (a <= c and d <= b) or (c <= a and b <= d)


@dataclass(frozen=True, order=True)
class PlanarTree:
    leaves: int
    edges: tuple[Interval, ...]  # sorted internal edges

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if not (0 <= a < b < self.leaves) or b - a + 1 >= self.leaves:
                raise ValueError(f"({a},{b}) is not an internal edge for {self.leaves} leaves")
        for p, q in combinations(self.edges, 2):
            if not _compatible(p, q):
                raise ValueError(f"edges {p} and {q} cross")

    @property
    def width(self) -> int:
        return self.leaves - 2

    def arities(self) -> list[int]:
        """Arity of every internal vertex (root first, then edges in order)."""
        nodes = [(0, self.leaves - 1)] + list(self.edges)
        out = []
        for a, b in nodes:
            children = [e for e in self.edges if e != (a, b) and a <= e[0] and e[1] <= b]
            maximal = [e for e in children if not any(f != e and f[0] <= e[0] and e[1] <= f[1] for f in children)]
            covered = sum(e[1] - e[0] + 1 for e in maximal)
            out.append(len(maximal) + (b - a + 1 - covered))
        return out

    def is_binary(self) -> bool:
        return len(self.edges) == self.leaves - 2

    def contract(self, e: Interval) -> "PlanarTree":
        return PlanarTree(self.leaves, tuple(x for x in self.edges if x != e))

    def __str__(self) -> str:
        def render(a: int, b: int) -> str:
            inner = [e for e in self.edges if a <= e[0] and e[1] <= b and e != (a, b)]
            top = [e for e in inner if not any(f != e and f[0] <= e[0] and e[1] <= f[1] for f in inner)]
            parts, i = [], a
            for e in sorted(top):
                parts.extend(str(k) for k in range(i, e[0]))
                parts.append(render(*e))
                i = e[1] + 1
            parts.extend(str(k) for k in range(i, b + 1))
            return "(" + " ".join(parts) + ")"

        return render(0, self.leaves - 1)


def _candidate_edges(m: int) -> list[Interval]:
    return [(a, b) for a in range(m) for b in range(a + 1, m) if b - a + 1 < m]


@lru_cache(maxsize=None)
def enumerate_trees(n: int) -> tuple[PlanarTree, ...]:
    """All planar trees with ``n + 2`` leaves, sorted by edge count then edges."""
    if n < 0:
        raise ValueError("width must be >= 0")
    m = n + 2
    cands = _candidate_edges(m)
    found: list[tuple[Interval, ...]] = []

    def grow(start: int, chosen: list[Interval]) -> None:
        found.append(tuple(chosen))
        for i in range(start, len(cands)):
            e = cands[i]
            if all(_compatible(e, f) for f in chosen):
                chosen.append(e)
                grow(i + 1, chosen)
                chosen.pop()

    grow(0, [])
    trees = [PlanarTree(m, tuple(sorted(es))) for es in found]
    return tuple(sorted(trees, key=lambda t: (len(t.edges), t.edges)))


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


@dataclass(frozen=True, order=True)
class TreeCell:
    tree: PlanarTree
    frozen: frozenset[Interval]

    def __post_init__(self) -> None:
        if not self.frozen <= set(self.tree.edges):
            raise ValueError("frozen edges must be internal edges")

    @property
    def dim(self) -> int:
        return len(self.tree.edges) - len(self.frozen)

    def free_edges(self) -> list[Interval]:
        return [e for e in self.tree.edges if e not in self.frozen]

    def boundary(self) -> list[tuple["TreeCell", int]]:
        """Signed faces: the ``i``-th free edge contributes ``(-1)^i (freeze - contract)``."""
        out = []
        for i, e in enumerate(self.free_edges()):
            s = -1 if i % 2 else 1
            out.append((TreeCell(self.tree, self.frozen | {e}), s))
            out.append((TreeCell(self.tree.contract(e), self.frozen), -s))
        return out

    def key(self):
        return (self.tree.edges, tuple(sorted(self.frozen)))

    def __str__(self) -> str:
        fz = ",".join(f"{a}-{b}" for a, b in sorted(self.frozen))
        return f"{self.tree}[{fz}]"


@dataclass
class TreeCellComplex:
    width: int
    cells: dict[int, list[TreeCell]]
    complex: ChainComplex

    def counts(self) -> list[int]:
        return [len(self.cells.get(d, [])) for d in range(self.width + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(cs) for d, cs in self.cells.items())


def _cellular_complex(cells: dict[int, list[TreeCell]], top: int) -> ChainComplex:
    pos = {d: {c: i for i, c in enumerate(cs)} for d, cs in cells.items()}
    groups = {d: FGAbelianGroup.free(len(cells.get(d, []))) for d in range(top + 1)}
    d = {}
    for k in range(1, top + 1):
        entries: dict[tuple[int, int], int] = {}
        for j, c in enumerate(cells.get(k, [])):
            for face, s in c.boundary():
                i = pos[k - 1].get(face)
                if i is None:
                    raise ValueError(f"face {face} of {c} is not in the complex")
                entries[(i, j)] = entries.get((i, j), 0) + s
        d[k] = IntegerMatrix.from_entries(len(cells.get(k - 1, [])), len(cells.get(k, [])), entries)
    return ChainComplex(groups, d, cohomological=False)


def _all_cells(n: int, keep=lambda c: True) -> dict[int, list[TreeCell]]:
    cells: dict[int, list[TreeCell]] = {d: [] for d in range(n + 1)}
    for t in enumerate_trees(n):
        for r in range(len(t.edges) + 1):
            for fz in combinations(t.edges, r):
                c = TreeCell(t, frozenset(fz))
                if keep(c):
                    cells[c.dim].append(c)
    for d in cells:
        cells[d].sort(key=TreeCell.key)
    return cells


def tree_cell_complex(n: int) -> TreeCellComplex:
    cells = _all_cells(n)
    return TreeCellComplex(n, cells, _cellular_complex(cells, n))


def boundary_subcomplex(n: int) -> TreeCellComplex:
    """Cells with at least one edge pinned at length one (closed under faces)."""
    cells = _all_cells(n, lambda c: bool(c.frozen))
    return TreeCellComplex(n, cells, _cellular_complex(cells, n))


def sphere_homology(k: int, top: int) -> dict[int, FGAbelianGroup]:
    """Homology of ``S^k`` in degrees ``0..top`` (``S^0`` is two points)."""
    out = {d: FGAbelianGroup.free(0) for d in range(top + 1)}
    if k == 0:
        out[0] = FGAbelianGroup.free(2)
    else:
        out[0] = FGAbelianGroup.free(1)
        if k <= top:
            out[k] = FGAbelianGroup.free(1)
    return out


def verify_disk(n: int) -> ValidationReport:
    """Check that the tree complex of width ``n`` has disk homology with sphere boundary."""
    if n < 1:
        raise ValueError("width must be >= 1")
    rep = ValidationReport(f"tree diagrams of width {n}")
    total = tree_cell_complex(n)
    bd = boundary_subcomplex(n)
    if total.complex.check_square_zero() is not None:
        rep.fail("boundary of boundary is nonzero")
    h_total = {d: total.complex.homology(d) for d in range(n + 1)}
    h_bd = {d: bd.complex.homology(d) for d in range(n + 1)}
    point = {d: FGAbelianGroup.free(1 if d == 0 else 0) for d in range(n + 1)}
    sphere = sphere_homology(n - 1, n)
    for d in range(n + 1):
        if h_total[d] != point[d]:
            rep.fail(f"H_{d} of the complex is {h_total[d]}, expected {point[d]}")
        if h_bd[d] != sphere[d]:
            rep.fail(f"H_{d} of the boundary is {h_bd[d]}, expected {sphere[d]}")
    for d, cs in bd.cells.items():
        for c in cs:
            for face, _ in c.boundary():
                if not face.frozen:
                    rep.fail(f"boundary subcomplex not closed at {c}")
    top = [c for c in total.cells[n] if not c.frozen]
    if len(top) != catalan(n + 1):
        rep.fail(f"{len(top)} top cells, expected Catalan({n + 1}) = {catalan(n + 1)}")
    rep.details.update(
        cell_counts=total.counts(),
        boundary_counts=bd.counts(),
        euler_characteristic=total.euler_characteristic(),
        boundary_euler_characteristic=bd.euler_characteristic(),
        homology={d: str(g) for d, g in h_total.items()},
        boundary_homology={d: str(g) for d, g in h_bd.items()},
        top_cells=len(top),
    )
    return rep
