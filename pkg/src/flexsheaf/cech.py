"""Čech complexes, nonabelian H^0/H^1 and sheaf cohomology on finite sites."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .exactalg import (AbHom, BlockGroup, ChainComplex, ChainMap, FGAbelianGroup, IntegerMatrix,
                       complex_from_blocks, reduce_matrix, subquotient_data)
from .groups import FiniteGroup
from .presheaf import AbPresheaf, GroupPresheaf, is_sheaf
from .report import BudgetExceeded
from .site import CechIndexing, CoveringFamily, Site, family_of_sieve

DEFAULT_DEGREE_CAP = 4


class NotASheaf(ValueError):
    pass


def _embed(F: AbPresheaf, arrow: str, row_off: int, col_off: int, sign: int, entries: dict) -> None:
    for i, r in enumerate(F.restrictions[arrow].rows):
        for j, v in r.items():
            key = (row_off + i, col_off + j)
            entries[key] = entries.get(key, 0) + sign * v


@dataclass
class CechData:
    complex: ChainComplex
    indexing: CechIndexing
    tuples: dict[int, list[tuple[int, ...]]]
    conv: dict
    offsets: dict[int, dict[tuple[int, ...], int]]


def cech_data(s: Site, fam: CoveringFamily, F: AbPresheaf, depth: int, alternating: bool = False) -> CechData:
    idx = CechIndexing(s, fam, depth)
    tuples = {n: (idx.alternating_tuples(n) if alternating else idx.tuples(n)) for n in range(depth + 1)}
    summands, offsets = {}, {}
    for n, ts in tuples.items():
        summands[n] = [F.value(idx.obj(t)) for t in ts]
        off, offsets[n] = 0, {}
        for t, g in zip(ts, summands[n]):
            offsets[n][t] = off
            off += g.ngens
    blocks = {}
    for n in range(depth):
        entries: dict[tuple[int, int], int] = {}
        rows = sum(g.ngens for g in summands[n + 1])
        cols = sum(g.ngens for g in summands[n])
        for t in tuples[n + 1]:
            for i in range(n + 2):
                u = t[:i] + t[i + 1:]
                if u not in offsets[n]:
                    continue
                _embed(F, idx.face(t, i), offsets[n + 1][t], offsets[n][u], (-1) ** i, entries)
        blocks[n] = IntegerMatrix.from_entries(rows, cols, entries)
    cx, conv = complex_from_blocks(summands, blocks, cohomological=True)
    return CechData(cx, idx, tuples, conv, offsets)


def cech_complex(s: Site, fam: CoveringFamily, F: AbPresheaf, depth: int, alternating: bool = False) -> ChainComplex:
    """``C^n = ⊕ F(U_{a0..an})`` over ordered tuples (repeats allowed unless ``alternating``)."""
    return cech_data(s, fam, F, depth, alternating).complex


def cech_cohomology(s: Site, fam: CoveringFamily, F: AbPresheaf, i: int, alternating: bool = False) -> FGAbelianGroup:
    if i < 0:
        raise IndexError("negative degree")
    return cech_complex(s, fam, F, i + 1, alternating).homology(i)


def refinement_chain_map(s: Site, fine: CoveringFamily, coarse: CoveringFamily, F: AbPresheaf,
                         choice: Sequence[int], through: Sequence[str], depth: int) -> tuple[ChainMap, CechData, CechData]:
    """Chain map ``C(coarse) -> C(fine)`` induced by ``fine[a] = coarse[choice[a]] ∘ through[a]``."""
    c = s.category
    for a, (k, h) in enumerate(zip(choice, through)):
        if c.table.get((coarse.members[k], h)) != fine.members[a]:
            raise ValueError(f"member {fine.members[a]} does not factor as {coarse.members[k]} ∘ {h}")
    A = cech_data(s, coarse, F, depth)
    B = cech_data(s, fine, F, depth)
    maps = {}
    for n in range(depth + 1):
        entries: dict[tuple[int, int], int] = {}
        for t in B.tuples[n]:
            u = tuple(choice[a] for a in t)
            tf, tc = B.indexing.terms[t], A.indexing.terms[u]
            # the arrow U^fine_t -> U^coarse_u through the chosen factorizations
            want = [c.table[(through[a], p)] for a, p in zip(t, tf.projections)]
            lifts = [h for h in c.hom(tf.obj, tc.obj)
                     if all(c.table[(q, h)] == w for q, w in zip(tc.projections, want))]
            if len(lifts) != 1:
                raise ValueError(f"no unique comparison arrow at {t}")
            _embed(F, lifts[0], B.offsets[n][t], A.offsets[n][u], 1, entries)
        rows = sum(F.value(B.indexing.obj(t)).ngens for t in B.tuples[n])
        cols = sum(F.value(A.indexing.obj(t)).ngens for t in A.tuples[n])
        block = IntegerMatrix.from_entries(rows, cols, entries)
        maps[n] = B.conv[n][0] @ block @ A.conv[n][1]
    return ChainMap(A.complex, B.complex, maps), A, B


def induced_maps_agree(f: ChainMap, g: ChainMap, n: int) -> bool:
    """Do two chain maps agree on ``H^n``?  (Difference sends cycles to boundaries.)"""
    A, B = f.source, f.target
    Z = subquotient_data(A.group(n), A.hom(n), None)
    diff = f.at(n) - g.at(n)
    img_cycles = diff @ Z.lift if Z.lift.ncols else IntegerMatrix(B.dim(n), 0)
    H = subquotient_data(B.group(n), B.hom(n), B.hom(n - 1) if B.dim(n - 1) else None)
    for col in img_cycles.columns():
        vec = [col.get(i, 0) for i in range(B.dim(n))]
        if any(H.coords(vec)):
            return False
    return True


# ---------------------------------------------------------------------------
# Nonabelian H^0 and H^1


@dataclass
class NonabelianH1:
    h0: FiniteGroup
    h0_elements: list[tuple[int, ...]]
    pairs: list[tuple[int, int]]
    classes: list[tuple[int, ...]]
    class_sizes: list[int]
    cocycle_count: int

    @property
    def count(self) -> int:
        return len(self.classes)


def nonabelian_h0_h1(s: Site, fam: CoveringFamily, G: GroupPresheaf, max_cocycles: int = 200000) -> NonabelianH1:
    """Exhaustive cocycles ``g_ab ∈ G(U_ab)`` modulo ``h_a g_ab h_b^{-1}``.

    The cocycle condition is ``g_ab|·g_bc| = g_ac|`` on ``U_abc``; each class is
    reported by its lexicographically least cocycle (tuples over ``pairs``).
    """
    idx = CechIndexing(s, fam, 2)
    n = len(fam.members)
    singles = [(a,) for a in range(n)]
    pairs = [(a, a) for a in range(n)] + [(a, b) for a in range(n) for b in range(n) if a < b] + \
            [(a, b) for a in range(n) for b in range(n) if a > b]
    res = {}

    def restr(t, i):
        return G.restrictions[idx.face(t, i)]

    # H^0
    h0_fams = []
    for fam_el in itertools.product(*[range(G.group(idx.obj(t)).n) for t in singles]):
        ok = True
        for (a, b) in pairs:
            t = (a, b)
            if restr(t, 1)[fam_el[a]] != restr(t, 0)[fam_el[b]]:
                ok = False
                break
        if ok:
            h0_fams.append(fam_el)
    gs0 = [G.group(idx.obj(t)) for t in singles]
    pos0 = {f: i for i, f in enumerate(h0_fams)}
    h0 = FiniteGroup([[pos0[tuple(g.mul(a, b) for g, a, b in zip(gs0, x, y))] for y in h0_fams] for x in h0_fams],
                     None, "H0")

    # cocycles
    pgroups = {p: G.group(idx.obj(p)) for p in pairs}
    triples = list(itertools.product(range(n), repeat=3))
    order = {p: k for k, p in enumerate(pairs)}
    checks_at: dict[int, list[tuple[int, int, int]]] = {k: [] for k in range(len(pairs))}
    for t in triples:
        a, b, cc = t
        last = max(order[(a, b)], order[(b, cc)], order[(a, cc)])
        checks_at[last].append(t)
    assign: dict[tuple[int, int], int] = {}
    cocycles: list[tuple[int, ...]] = []

    def check(t):
        a, b, cc = t
        gt = G.group(idx.obj(t))
        # faces: d2 -> (a,b), d0 -> (b,c), d1 -> (a,c)
        x = restr(t, 2)[assign[(a, b)]]
        y = restr(t, 0)[assign[(b, cc)]]
        z = restr(t, 1)[assign[(a, cc)]]
        return gt.mul(x, y) == z

    def rec(k: int) -> None:
        if k == len(pairs):
            cocycles.append(tuple(assign[p] for p in pairs))
            if len(cocycles) > max_cocycles:
                raise BudgetExceeded(f"more than {max_cocycles} cocycles")
            return
        p = pairs[k]
        for v in range(pgroups[p].n):
            assign[p] = v
            if all(check(t) for t in checks_at[k]):
                rec(k + 1)
        del assign[p]

    rec(0)
    cset = set(cocycles)
    # coboundary action
    hgroups = [G.group(idx.obj(t)) for t in singles]
    seen: set[tuple[int, ...]] = set()
    classes, sizes = [], []
    for z in sorted(cocycles):
        if z in seen:
            continue
        orbit = set()
        for h in itertools.product(*[range(g.n) for g in hgroups]):
            w = []
            for (a, b), v in zip(pairs, z):
                gp = pgroups[(a, b)]
                ha = restr((a, b), 1)[h[a]]
                hb = restr((a, b), 0)[h[b]]
                w.append(gp.mul(gp.mul(ha, v), gp.inverse(hb)))
            orbit.add(tuple(w))
        if not orbit <= cset:
            raise AssertionError("coboundary action left the cocycle set")
        seen |= orbit
        classes.append(min(orbit))
        sizes.append(len(orbit))
    return NonabelianH1(h0, h0_fams, pairs, classes, sizes, len(cocycles))


# ---------------------------------------------------------------------------
# Sheaf cohomology


def local_slice_chains(s: Site, x: str, max_len: int) -> dict[int, list[tuple[tuple[str, ...], tuple[str, ...]]]]:
    """Nondegenerate chains in the slice of local objects over ``x``.

    A ``p``-chain is ``((u_0, ..., u_p), (m_1, ..., m_p))`` where the
    ``u_i: y_i -> x`` have local source and the ``m_i: y_{i-1} -> y_i`` are
    non-identity arrows with ``u_i m_i = u_{i-1}``.
    """
    c = s.category
    local = set(s.local_objects())
    objs = [f for f in c.into(x) if c.src[f] in local]
    moves: dict[str, list[tuple[str, str]]] = {u: [] for u in objs}
    for u in objs:
        for v in objs:
            for h in c.hom(c.src[u], c.src[v]):
                if c.table[(v, h)] == u and not c.is_identity(h):
                    moves[u].append((h, v))
    chains = {0: [((u,), ()) for u in objs]}
    for p in range(1, max_len + 1):
        chains[p] = [(us + (v,), ms + (h,)) for us, ms in chains[p - 1] for h, v in moves[us[-1]]]
    return chains


def local_resolution(s: Site, x: str, F: AbPresheaf, top: int) -> tuple[ChainComplex, dict]:
    """Cochain complex computing ``R lim`` of ``F`` over local objects above ``x``.

    ``C^p = ∏ F(y_0)`` over nondegenerate chains ``y_0 -> ... -> y_p`` in the
    local slice, with the cosimplicial-replacement differential; degenerate
    faces contribute nothing.
    """
    c = s.category
    chains = local_slice_chains(s, x, top + 1)
    summands, offsets = {}, {}
    for p, chs in chains.items():
        summands[p] = [F.value(c.src[us[0]]) for us, _ in chs]
        off, offsets[p] = 0, {}
        for ch, g in zip(chs, summands[p]):
            offsets[p][ch] = off
            off += g.ngens
    blocks = {}
    for p in range(top + 1):
        entries: dict[tuple[int, int], int] = {}
        rows = sum(g.ngens for g in summands[p + 1])
        cols = sum(g.ngens for g in summands[p])
        for ch in chains[p + 1]:
            us, ms = ch
            row = offsets[p + 1][ch]
            _embed(F, ms[0], row, offsets[p][(us[1:], ms[1:])], 1, entries)
            n = F.value(c.src[us[0]]).ngens
            for i in range(1, p + 2):
                if i == p + 1:
                    face = (us[:-1], ms[:-1])
                else:
                    comp = c.table[(ms[i], ms[i - 1])]
                    if c.is_identity(comp):
                        continue
                    face = (us[:i] + us[i + 1:], ms[:i - 1] + (comp,) + ms[i + 1:])
                col = offsets[p][face]
                for t in range(n):
                    entries[(row + t, col + t)] = entries.get((row + t, col + t), 0) + (-1) ** i
        blocks[p] = IntegerMatrix.from_entries(rows, cols, entries)
    cx, conv = complex_from_blocks({p: summands[p] for p in range(top + 2)}, blocks, cohomological=True)
    return cx, {"chains": chains, "offsets": offsets, "conv": conv, "summands": summands}


def covered_by_local_objects(s: Site) -> list[str]:
    """Objects whose local arrows do not generate a covering sieve."""
    c = s.category
    local = set(s.local_objects())
    bad = []
    for x in c.objects:
        gens = [f for f in c.into(x) if c.src[f] in local]
        if not s.is_covering(s.close_sieve(x, gens)):
            bad.append(x)
    return bad


def sheaf_cohomology(s: Site, x: str, F: AbPresheaf, i: int, require_sheaf: bool = True) -> FGAbelianGroup:
    """``H^i(x, F)`` as the derived limit over local objects above ``x``.

    Valid when every object is covered by local objects (then sheaves are
    determined by their values on local objects).  ``require_sheaf=False``
    skips the sheaf check; the result is then the cohomology of the
    associated sheaf.
    """
    bad = covered_by_local_objects(s)
    if bad:
        raise ValueError(f"objects not covered by local objects: {bad}")
    if require_sheaf:
        rep = is_sheaf(F, s, first_only=True)
        if not rep.ok:
            raise NotASheaf(rep.violations[0])
    if i < 0:
        return FGAbelianGroup()
    cx, _ = local_resolution(s, x, F, i + 1)
    return cx.homology(i)


def finest_cover(s: Site, x: str) -> CoveringFamily:
    """A covering family refining every other one: generators of the minimum covering sieve."""
    return family_of_sieve(s, s.minimum_covering_sieve(x))


def cech_colimit_cohomology(s: Site, x: str, F: AbPresheaf, i: int) -> tuple[FGAbelianGroup, CoveringFamily]:
    """Colimit of Čech cohomology over covers of ``x``.

    The generators of the minimum covering sieve refine every covering
    family, so the colimit is the value there; that family is returned as
    the witness.
    """
    fam = finest_cover(s, x)
    return cech_cohomology(s, fam, F, i), fam
