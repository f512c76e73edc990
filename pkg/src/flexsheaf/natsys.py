"""Natural systems on a finite category and their obstruction complexes.

Tuples ``(f0, ..., fk)`` are written in composition order: ``src f_i ==
tgt f_{i+1}`` and the composite is ``f0 ∘ f1 ∘ ... ∘ fk``.  Cochains of
degree ``n`` live on ``n``-tuples; degree 0 lives on objects (the empty
tuple at ``x`` composes to ``id_x``).
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .exactalg import (ChainComplex, ChainMap, FGAbelianGroup, IntegerMatrix, complex_from_blocks,
                       is_quasi_isomorphism, reduce_matrix)
from .fincat import FiniteCategory, Subcategory
from .report import ValidationReport
from .sset import FiniteSimplicialSet, Mono, from_model

Tuple = tuple[str, ...]


def composite(c: FiniteCategory, t: Sequence[str]) -> str:
    out = t[-1]
    for f in reversed(t[:-1]):
        out = c.table[(f, out)]
    return out


def _composable(c: FiniteCategory, g: str, f: str) -> bool:
    return c.src[g] == c.tgt[f]


class NaturalSystem:
    """``D(f)`` for every morphism, with ``left[(g, f)]: D(f) -> D(g∘f)`` (``b -> g b``)
    and ``right[(g, f)]: D(g) -> D(g∘f)`` (``a -> a f``)."""

    def __init__(self, category: FiniteCategory, groups: Mapping[str, FGAbelianGroup],
                 left: Mapping[tuple[str, str], IntegerMatrix], right: Mapping[tuple[str, str], IntegerMatrix],
                 name: str = ""):
        self.category = category
        self.groups = dict(groups)
        self.left = {k: reduce_matrix(self.groups[category.table[k]], m) for k, m in left.items()}
        self.right = {k: reduce_matrix(self.groups[category.table[k]], m) for k, m in right.items()}
        self.name = name

    def value(self, f: str) -> FGAbelianGroup:
        return self.groups[f]

    def check(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"natural system {self.name}".strip())
        pairs = list(c.composable_pairs())
        for g, f in pairs:
            if (g, f) not in self.left or (g, f) not in self.right:
                rep.fail(f"missing translation for ({g},{f})")
        if not rep.ok:
            return rep

        def same(grp, a, b):
            return reduce_matrix(grp, a - b).is_zero()

        for f in c.morphisms:
            n = self.groups[f].ngens
            I = IntegerMatrix.identity(n)
            if not same(self.groups[f], self.left[(c.identities[c.tgt[f]], f)], I):
                rep.fail(f"identity does not act trivially on the left of D({f})")
            if not same(self.groups[f], self.right[(f, c.identities[c.src[f]])], I):
                rep.fail(f"identity does not act trivially on the right of D({f})")
        for g, f in pairs:
            gf = c.table[(g, f)]
            for h in c.outof(c.tgt[g]):
                hg, hgf = c.table[(h, g)], c.table[(h, gf)]
                # (hg) b = h (g b)
                if not same(self.groups[hgf], self.left[(hg, f)], self.left[(h, gf)] @ self.left[(g, f)]):
                    rep.fail(f"left action not functorial at ({h},{g},{f})")
                # a (gf) = (a g) f
                if not same(self.groups[hgf], self.right[(h, gf)], self.right[(hg, f)] @ self.right[(h, g)]):
                    rep.fail(f"right action not functorial at ({h},{g},{f})")
                # (h b) f = h (b f) for b in D(g)
                if not same(self.groups[hgf], self.right[(hg, f)] @ self.left[(h, g)], self.left[(h, gf)] @ self.right[(g, f)]):
                    rep.fail(f"actions do not commute at ({h},{g},{f})")
        return rep


def constant_natsys(c: FiniteCategory, A: FGAbelianGroup) -> NaturalSystem:
    I = IntegerMatrix.identity(A.ngens)
    pairs = list(c.composable_pairs())
    return NaturalSystem(c, {f: A for f in c.morphisms}, {p: I for p in pairs}, {p: I for p in pairs}, f"const({A})")


def _kron(a: IntegerMatrix, b: IntegerMatrix) -> IntegerMatrix:
    entries = {}
    for i, ra in enumerate(a.rows):
        for j, va in ra.items():
            for k, rb in enumerate(b.rows):
                for l, vb in rb.items():
                    entries[(i * b.nrows + k, j * b.ncols + l)] = va * vb
    return IntegerMatrix.from_entries(a.nrows * b.nrows, a.ncols * b.ncols, entries)


def _linearize(m: Mapping[int, int], n_src: int, n_tgt: int) -> IntegerMatrix:
    return IntegerMatrix.from_entries(n_tgt, n_src, {(m[a], a): 1 for a in range(n_src)})


def bimodule_natsys(c: FiniteCategory, contra: tuple[dict, dict], co: tuple[dict, dict],
                    modulus: int = 0, name: str = "") -> NaturalSystem:
    """``D(f) = Z[P(src f)] ⊗ Z[Q(tgt f)]`` (mod ``modulus``) for set functors ``P`` (contravariant), ``Q`` (covariant)."""
    pv, pm = contra
    qv, qm = co
    unit = FGAbelianGroup.free(1) if modulus == 0 else FGAbelianGroup.cyclic(modulus)
    groups = {f: unit.power(len(pv[c.src[f]]) * len(qv[c.tgt[f]])) for f in c.morphisms}
    left, right = {}, {}
    for g, f in c.composable_pairs():
        # g b: D(f) -> D(gf) moves the target along Q(g)
        P_id = IntegerMatrix.identity(len(pv[c.src[f]]))
        left[(g, f)] = _kron(P_id, _linearize(qm[g], len(qv[c.src[g]]), len(qv[c.tgt[g]])))
        # a f: D(g) -> D(gf) moves the source along P(f)
        Q_id = IntegerMatrix.identity(len(qv[c.tgt[g]]))
        right[(g, f)] = _kron(_linearize(pm[f], len(pv[c.tgt[f]]), len(pv[c.src[f]])), Q_id)
    return NaturalSystem(c, groups, left, right, name or "bimodule")


def random_natsys(c: FiniteCategory, rng: random.Random, max_size: int = 2) -> NaturalSystem:
    """Random bimodule natural system on a poset category."""
    from .presheaf import random_poset_functor

    contra = random_poset_functor(c, rng, max_size, contravariant=True)
    co = random_poset_functor(c, rng, max_size, contravariant=False)
    return bimodule_natsys(c, contra, co, rng.choice([0, 0, 2, 3]), "random")


# ---------------------------------------------------------------------------
# Cell families


@dataclass
class CellFamily:
    """``cells[k]`` holds composable ``(k+1)``-tuples; ``objects`` carry the empty tuples."""

    category: FiniteCategory
    objects: tuple[str, ...]
    cells: dict[int, list[Tuple]]
    name: str = ""

    def of_length(self, n: int) -> list:
        """``n``-tuples (``n = 0`` gives objects)."""
        if n == 0:
            return list(self.objects)
        return self.cells.get(n - 1, [])

    @property
    def k_max(self) -> int:
        return max(self.cells) if self.cells else -1

    def check_closed(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"cell family {self.name}".strip())
        obs = set(self.objects)
        for k, ts in self.cells.items():
            lower = set(self.cells.get(k - 1, [])) if k else None
            for t in ts:
                if k == 0:
                    if c.src[t[0]] not in obs or c.tgt[t[0]] not in obs:
                        rep.fail(f"endpoint of {t} is not a cell object")
                    continue
                faces = [t[1:], t[:-1]] + [t[:i] + (c.table[(t[i], t[i + 1])],) + t[i + 2:] for i in range(k)]
                for fc in faces:
                    if fc not in lower:
                        rep.fail(f"boundary {fc} of {t} is missing")
        return rep


def _tuples(c: FiniteCategory, length: int, allowed: set[str] | None = None) -> list[Tuple]:
    mors = [m for m in c.morphisms if allowed is None or m in allowed]
    into = {x: [m for m in mors if c.tgt[m] == x] for x in c.objects}
    out = [(m,) for m in mors]
    for _ in range(length - 1):
        out = [t + (m,) for t in out for m in into[c.src[t[-1]]]]
    return out


def full_cells(c: FiniteCategory, k_max: int) -> CellFamily:
    return CellFamily(c, tuple(c.objects), {k: _tuples(c, k + 1) for k in range(k_max + 1)}, "full")


def subcategory_cells(c: FiniteCategory, subcats: Sequence[Subcategory], k_max: int) -> CellFamily:
    """Tuples lying entirely inside one of the subcategories."""
    objs = [x for x in c.objects if any(x in s.objects for s in subcats)]
    cells = {}
    for k in range(k_max + 1):
        seen: set[Tuple] = set()
        for s in subcats:
            seen.update(_tuples(c, k + 1, set(s.morphisms)))
        cells[k] = sorted(seen, key=lambda t: [c.morphisms.index(m) for m in t])
    return CellFamily(c, tuple(objs), cells, "+".join(s.name for s in subcats) or "sub")


def normalized_cells(cells: CellFamily) -> CellFamily:
    c = cells.category
    return CellFamily(c, cells.objects,
                      {k: [t for t in ts if not any(c.is_identity(m) for m in t)] for k, ts in cells.cells.items()},
                      cells.name + ",normalized")


# ---------------------------------------------------------------------------
# The PC complex


def _cell_group(G: NaturalSystem, c: FiniteCategory, t) -> FGAbelianGroup:
    return G.value(c.identities[t]) if isinstance(t, str) else G.value(composite(c, t))


def pc_complex(c: FiniteCategory, cells: CellFamily, G: NaturalSystem, k_max: int | None = None,
               normalized: bool = False) -> ChainComplex:
    """Cochains ``PC^n = ∏ D(f1∘...∘fn)`` over ``n``-tuples in the family, ``0 <= n <= k_max + 1``.

    ``(dg)(f1..f_{n+1}) = f1·g(f2..) + Σ_{i=1}^{n} (-1)^i g(..f_i f_{i+1}..) + (-1)^{n+1} g(f1..f_n)·f_{n+1}``.
    Cohomology is exact in degrees ``<= k_max``.
    """
    if normalized:
        cells = normalized_cells(cells)
    top = cells.k_max + 1 if k_max is None else k_max + 1
    rep = cells.check_closed()
    if not rep.ok:
        raise ValueError(rep.violations[0])
    terms = {n: cells.of_length(n) for n in range(top + 1)}
    if len(terms[top]) == 0 and top > 0 and top - 1 > cells.k_max:
        raise ValueError(f"cell family only reaches length {cells.k_max + 1}")
    summands, offsets = {}, {}
    for n, ts in terms.items():
        summands[n] = [_cell_group(G, c, t) for t in ts]
        off, offsets[n] = 0, {}
        for t, g in zip(ts, summands[n]):
            offsets[n][t] = off
            off += g.ngens
    blocks = {}
    for n in range(top):
        entries: dict[tuple[int, int], int] = {}

        def put(row: int, col_key, M: IntegerMatrix, sign: int) -> None:
            col = offsets[n].get(col_key)
            if col is None:
                return  # face outside a normalized family: the cochain vanishes there
            for r, rr in enumerate(M.rows):
                for cc, v in rr.items():
                    entries[(row + r, col + cc)] = entries.get((row + r, col + cc), 0) + sign * v

        for t in terms[n + 1]:
            row = offsets[n + 1][t]
            total = composite(c, t)
            if n == 0:
                f = t[0]
                put(row, c.src[f], G.left[(f, c.identities[c.src[f]])], 1)
                put(row, c.tgt[f], G.right[(c.identities[c.tgt[f]], f)], -1)
                continue
            put(row, t[1:], G.left[(t[0], composite(c, t[1:]))], 1)
            for i in range(n):
                merged = t[:i] + (c.table[(t[i], t[i + 1])],) + t[i + 2:]
                put(row, merged, IntegerMatrix.identity(G.value(total).ngens), (-1) ** (i + 1))
            put(row, t[:-1], G.right[(composite(c, t[:-1]), t[-1])], (-1) ** (n + 1))
        rows = sum(g.ngens for g in summands[n + 1])
        cols = sum(g.ngens for g in summands[n])
        blocks[n] = IntegerMatrix.from_entries(rows, cols, entries)
    cx, _ = complex_from_blocks(summands, blocks, cohomological=True)
    return cx


def pc_cohomology(c: FiniteCategory, cells: CellFamily, G: NaturalSystem, k_max: int) -> dict[int, FGAbelianGroup]:
    cx = pc_complex(c, cells, G, k_max)
    return {k: cx.homology(k) for k in range(k_max + 1)}


def pc_restriction(c: FiniteCategory, full: CellFamily, sub: CellFamily, G: NaturalSystem, k_max: int) -> ChainMap:
    """Restriction of cochains ``PC(full) -> PC(sub)`` (projection onto the sub-cells)."""
    A = pc_complex(c, full, G, k_max)
    B = pc_complex(c, sub, G, k_max)
    maps = {}
    for n in range(k_max + 2):
        fo, so = full.of_length(n), sub.of_length(n)
        # both complexes are built with identical block layouts per tuple, so
        # the projection is computed in block coordinates and normalised
        fpos, off = {}, 0
        for t in fo:
            fpos[t] = off
            off += _cell_group(G, c, t).ngens
        entries, row = {}, 0
        for t in so:
            w = _cell_group(G, c, t).ngens
            if t not in fpos:
                raise ValueError(f"sub-cell {t} is not a full cell")
            for r in range(w):
                entries[(row + r, fpos[t] + r)] = 1
            row += w
        blk = IntegerMatrix.from_entries(row, off, entries)
        fa = _layout(c, fo, G)
        fb = _layout(c, so, G)
        maps[n] = fb[0] @ blk @ fa[1]
    return ChainMap(A, B, maps)


def _layout(c, ts, G):
    from .exactalg import BlockGroup

    _, to_c, from_c = BlockGroup([_cell_group(G, c, t) for t in ts]).normalised()
    return to_c, from_c


# ---------------------------------------------------------------------------
# Λ-nerves


def lambda_nerve(c: FiniteCategory, cells: CellFamily, phi: str, dim_cap: int | None = None) -> FiniteSimplicialSet:
    """Simplices ``α(f1..fk)β`` with ``α∘f1∘...∘fk∘β = phi`` and ``(f1..fk)`` a cell.

    Vertex ``j`` of such a simplex is the cut ``(α f1..fj | f_{j+1}..fk β)``;
    an operator ``θ`` re-cuts, composing the skipped pieces.
    """
    dim_cap = cells.k_max + 1 if dim_cap is None else dim_cap
    a, b = c.src[phi], c.tgt[phi]
    cell_sets = {k: set(cells.of_length(k)) for k in range(1, dim_cap + 1)}

    def simplices(k: int):
        out = []
        if k == 0:
            for z in cells.objects:
                for beta in c.hom(a, z):
                    for alpha in c.hom(z, b):
                        if c.table[(alpha, beta)] == phi:
                            out.append((0, alpha, (), beta))
            return out
        for t in cells.of_length(k):
            comp = composite(c, t)
            for beta in c.hom(a, c.src[comp]):
                for alpha in c.hom(c.tgt[comp], b):
                    if c.table[(alpha, c.table[(comp, beta)])] == phi:
                        out.append((k, alpha, t, beta))
        return out

    def cut_object(key, j: int) -> str:
        _, alpha, t, _ = key
        if not t:
            return c.src[alpha]
        return c.tgt[t[0]] if j == 0 else c.src[t[j - 1]]

    def piece(key, i: int, j: int) -> str:
        """Composite of ``f_{i+1} .. f_j`` (identity at the cut when ``i == j``)."""
        t = key[2]
        if i == j:
            return c.identities[cut_object(key, i)]
        return composite(c, t[i:j])

    def operator(key, theta: Mono):
        k, alpha, t, beta = key
        m = len(theta) - 1
        new_alpha = c.table[(alpha, piece(key, 0, theta[0]))] if theta[0] else alpha
        new_beta = c.table[(piece(key, theta[-1], k), beta)] if theta[-1] < k else beta
        new_t = tuple(piece(key, theta[s - 1], theta[s]) for s in range(1, m + 1))
        return (m, new_alpha, new_t, new_beta)

    X, _ = from_model(simplices, operator, dim_cap, name=f"Λ({phi})")
    return X


def inclusion_chain_map(sub: FiniteSimplicialSet, full: FiniteSimplicialSet, top: int) -> ChainMap:
    A, B = sub.chain_complex(top), full.chain_complex(top)
    maps = {}
    for k in range(top + 1):
        pos = {x: j for j, x in enumerate(full.nondeg[k])}
        maps[k] = IntegerMatrix.from_entries(len(full.nondeg[k]), len(sub.nondeg[k]),
                                             {(pos[x], j): 1 for j, x in enumerate(sub.nondeg[k])})
    return ChainMap(A, B, maps)


@dataclass
class Flex05Report(ValidationReport):
    per_morphism: dict[str, bool] = field(default_factory=dict)
    pc_comparison: dict[str, bool] = field(default_factory=dict)


def flex05_criterion(c: FiniteCategory, subcats: Sequence[Subcategory], coefficient_groups: Sequence[FGAbelianGroup],
                     k_max: int = 2) -> Flex05Report:
    """Compare ``Λ_sub(φ)`` with ``Λ_full(φ)`` for every ``φ``; if all agree, compare the PC complexes."""
    rep = Flex05Report("flex05 criterion")
    rep.details["convention"] = "PC degree n uses n-tuples; Λ simplices of degree n use n-tuples"
    # one extra cell length so that degree k_max is computed honestly
    full = full_cells(c, k_max + 1)
    sub = subcategory_cells(c, subcats, k_max + 1)
    for phi in c.morphisms:
        Lf = lambda_nerve(c, full, phi, k_max + 2)
        Ls = lambda_nerve(c, sub, phi, k_max + 2)
        f = inclusion_chain_map(Ls, Lf, k_max + 2)
        # cone acyclic in 0..k_max+1 gives isomorphisms on H_0..H_{k_max}
        ok = is_quasi_isomorphism(f, range(0, k_max + 2))
        rep.per_morphism[phi] = ok
        if not ok:
            rep.fail(f"Λ comparison fails at {phi}")
    if not rep.ok:
        return rep
    for A in coefficient_groups:
        G = constant_natsys(c, A)
        r = pc_restriction(c, full, sub, G, k_max + 1)
        # cone^n for -1 <= n <= k_max covers H^0..H^{k_max}
        ok = is_quasi_isomorphism(r, range(-1, k_max + 1))
        rep.pc_comparison[str(A)] = ok
        if not ok:
            rep.fail(f"PC(sub) and PC(full) differ with coefficients {A}")
    return rep
