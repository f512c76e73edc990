"""Coskeleta, Kan checks, Dold-Kan, and presheaves of chain complexes on sites.

Simplicial abelian presheaves are modelled by presheaves of (homological)
chain complexes; homotopy questions become homology questions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Mapping, Sequence

from .cech import covered_by_local_objects, finest_cover, local_slice_chains, NotASheaf
from .exactalg import (AbHom, BlockGroup, ChainComplex, FGAbelianGroup, IntegerMatrix, Subquotient,
                       _lattice_preimage, complex_from_blocks, reduce_matrix, subquotient_data)
from .fincat import FiniteCategory
from .presheaf import AbPresheaf, PresheafMap, is_sheaf, sheafify_map
from .report import ValidationReport
from .site import CechIndexing, CoveringFamily, Site, family_of_sieve
from .sset import (FiniteSimplicialSet, Mono, coface, compose_maps, epi_mono, from_model, identity_map,
                   surjections)

DEFAULT_DIM_CAP = 6


# ---------------------------------------------------------------------------
# Coskeleton


@lru_cache(maxsize=None)
def _frame(k: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Index subsets of ``[k]`` carrying the data of a ``k``-simplex of ``cosk_n``."""
    return tuple(itertools.combinations(range(k + 1), min(k, n) + 1))


def _positions(sub: Sequence[int], within: Sequence[int]) -> Mono:
    pos = {v: i for i, v in enumerate(within)}
    return tuple(pos[v] for v in sub)


@lru_cache(maxsize=None)
def _frame_overlaps(k: int, n: int) -> tuple[tuple[int, int, Mono, Mono], ...]:
    """Pairs of frame subsets meeting in an ``(n-1)``-simplex, with both inclusions."""
    fr = _frame(k, n)
    out = []
    if n == 0 or k <= n:
        return ()
    for b in range(len(fr)):
        for a in range(b):
            common = sorted(set(fr[a]) & set(fr[b]))
            if len(common) == n:
                out.append((a, b, _positions(common, fr[a]), _positions(common, fr[b])))
    return tuple(out)


def coskeleton(X: FiniteSimplicialSet, n: int, dim_cap: int | None = None) -> FiniteSimplicialSet:
    """``cosk_n X``: a ``k``-simplex is a compatible family of ``n``-simplices over the ``n``-faces of ``Δ[k]``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    dim_cap = X.dim_cap if dim_cap is None else dim_cap

    def families(k: int):
        fr = _frame(k, n)
        if k <= n:
            return [(k, (x,)) for x in X.simplices(k)]
        pool = X.simplices(n)
        checks: dict[int, list[tuple[int, Mono, Mono]]] = {b: [] for b in range(len(fr))}
        for a, b, ia, ib in _frame_overlaps(k, n):
            checks[b].append((a, ia, ib))
        out, cur = [], []

        def rec(b: int) -> None:
            if b == len(fr):
                out.append((k, tuple(cur)))
                return
            for x in pool:
                if all(X.operator(cur[a], ia) == X.operator(x, ib) for a, ia, ib in checks[b]):
                    cur.append(x)
                    rec(b + 1)
                    cur.pop()

        rec(0)
        return out

    def operator(key, theta: Mono):
        k, fam = key
        m = len(theta) - 1
        fr_k = _frame(k, n)
        out = []
        for sub in _frame(m, n):
            img = [theta[t] for t in sub]
            support = set(img)
            j = next(i for i, S in enumerate(fr_k) if support <= set(S))
            out.append(X.operator(fam[j], _positions(img, fr_k[j])))
        return m, tuple(out)

    Y, _ = from_model(families, operator, dim_cap, name=f"cosk{n}({X.name})")
    return Y


# ---------------------------------------------------------------------------
# Kan condition


def kan_check(X: FiniteSimplicialSet, dim_cap: int | None = None, max_report: int = 5) -> ValidationReport:
    """Exhaustive horn-filler search for ``Λ^k_i``, ``1 <= k <= dim_cap``."""
    dim_cap = X.dim_cap if dim_cap is None else dim_cap
    rep = ValidationReport(f"Kan condition for {X.name or 'X'}")
    horns_seen = 0
    unfilled = 0
    for k in range(1, dim_cap + 1):
        fillers = set()
        for z in X.simplices(k):
            fillers.add(tuple(X.face(z, j) for j in range(k + 1)))
        pool = X.simplices(k - 1)
        for i in range(k + 1):
            idx = [j for j in range(k + 1) if j != i]
            filled = {tuple(f[j] for j in idx) for f in fillers}
            cur: list = []

            def rec(t: int) -> None:
                nonlocal horns_seen, unfilled
                if t == len(idx):
                    horns_seen += 1
                    if tuple(cur) not in filled:
                        unfilled += 1
                        if unfilled <= max_report:
                            rep.fail(f"horn Λ^{k}_{i} with faces {tuple(cur)} has no filler")
                    return
                l = idx[t]
                for y in pool:
                    ok = True
                    for s, j in enumerate(idx[:t]):
                        # d_j y_l = d_{l-1} y_j for j < l
                        if X.face(y, j) != X.face(cur[s], l - 1):
                            ok = False
                            break
                    if ok:
                        cur.append(y)
                        rec(t + 1)
                        cur.pop()

            rec(0)
    rep.details = {"horns": horns_seen, "unfilled": unfilled}
    return rep


# ---------------------------------------------------------------------------
# Simplicial abelian groups and Dold-Kan


class SimplicialAbGroup:
    """Degreewise groups with operator matrices, up to ``dim_cap``.

    ``operator(theta)`` is the matrix of ``theta^*: A_k -> A_m`` for an
    :class:`Op` ``theta: [m] -> [k]``.
    """

    def __init__(self, groups: Mapping[int, FGAbelianGroup], op, dim_cap: int, name: str = ""):
        self.groups = dict(groups)
        self._op = op
        self.dim_cap = dim_cap
        self.name = name
        self._cache: dict[Mono, IntegerMatrix] = {}

    def group(self, k: int) -> FGAbelianGroup:
        return self.groups[k]

    def operator(self, theta: "Op") -> IntegerMatrix:
        hit = self._cache.get(theta)
        if hit is None:
            hit = reduce_matrix(self.groups[len(theta) - 1], self._op(theta))
            self._cache[theta] = hit
        return hit

    def face(self, k: int, i: int) -> IntegerMatrix:
        return self.operator(face_op(k, i))

    def check_identities(self) -> list[str]:
        bad = []
        for k in range(2, self.dim_cap + 1):
            for i in range(k + 1):
                for j in range(i + 1, k + 1):
                    lhs = self.face(k - 1, i) @ self.face(k, j)
                    rhs = self.face(k - 1, j - 1) @ self.face(k, i)
                    if not reduce_matrix(self.group(k - 2), lhs - rhs).is_zero():
                        bad.append(f"d_{i} d_{j} != d_{j - 1} d_{i} in degree {k}")
        return bad


def _stack_rows(ms: Sequence[IntegerMatrix], ncols: int) -> IntegerMatrix:
    out = IntegerMatrix(0, ncols)
    for m in ms:
        out = out.vstack(m)
    return out


def dold_kan(C: ChainComplex, dim_cap: int = DEFAULT_DIM_CAP) -> SimplicialAbGroup:
    """``Γ(C)_m = ⊕_{σ: [m] ↠ [k]} C_k`` for a homological complex in degrees ``>= 0``."""
    if C.cohomological:
        raise ValueError("dold_kan expects a homological complex")
    if C.groups and C.lo < 0:
        raise ValueError("complex has negative degrees")
    index: dict[int, list[tuple[Mono, int]]] = {}
    groups, conv, offsets = {}, {}, {}
    for m in range(dim_cap + 1):
        index[m] = [(sig, k) for k in range(m + 1) for sig in surjections(m, k)]
        parts = [C.group(k) for _, k in index[m]]
        G, to_c, from_c = BlockGroup(parts).normalised()
        groups[m], conv[m] = G, (to_c, from_c)
        off, offsets[m] = 0, {}
        for key, g in zip(index[m], parts):
            offsets[m][key] = off
            off += g.ngens

    def op(theta: Mono) -> IntegerMatrix:
        m, n = len(theta) - 1, theta.source
        entries: dict[tuple[int, int], int] = {}
        for (sig, k) in index[n]:
            eps, iota = epi_mono(compose_maps(sig, theta))
            j = len(iota) - 1
            col = offsets[n][(sig, k)]
            if iota == identity_map(k):
                row, M = offsets[m][(eps, k)], IntegerMatrix.identity(C.dim(k))
            elif j == k - 1 and iota == coface(k, 0):
                row, M = offsets[m][(eps, j)], C.differential(k)
            else:
                continue
            for r, rr in enumerate(M.rows):
                for cc, v in rr.items():
                    entries[(row + r, col + cc)] = entries.get((row + r, col + cc), 0) + v
        blk = IntegerMatrix.from_entries(sum(C.dim(k) for _, k in index[m]), sum(C.dim(k) for _, k in index[n]), entries)
        return conv[m][0] @ blk @ conv[n][1]

    return SimplicialAbGroup(groups, op, dim_cap, "Γ(C)")


class Op(tuple):
    """A monotone map tagged with its codomain ``[source]`` (``theta: [m] -> [source]``)."""

    def __new__(cls, values: Sequence[int], source: int):
        obj = super().__new__(cls, tuple(values))
        obj.source = source
        return obj

    def __hash__(self):
        return hash((tuple(self), self.source))

    def __eq__(self, other):
        return tuple(self) == tuple(other) and getattr(other, "source", None) == self.source


def face_op(k: int, i: int) -> Op:
    return Op(coface(k, i), k)


def moore_complex(A: SimplicialAbGroup, top: int | None = None) -> ChainComplex:
    """Normalised complex ``N_k = ∩_{i>=1} ker d_i`` with differential ``d_0``."""
    top = A.dim_cap if top is None else top
    subs: dict[int, Subquotient] = {}
    for k in range(top + 1):
        G = A.group(k)
        if k == 0:
            subs[k] = Subquotient(G, IntegerMatrix.identity(G.ngens), G.relations())
            continue
        faces = [A.operator(face_op(k, i)) for i in range(1, k + 1)]
        M = _stack_rows(faces, G.ngens)
        tgt_rel = BlockGroup([A.group(k - 1)] * k).relations()
        L = _lattice_preimage(M, tgt_rel)
        subs[k] = Subquotient(G, L, G.relations())
    groups = {k: subs[k].group for k in subs}
    d = {}
    for k in range(1, top + 1):
        d0 = A.operator(face_op(k, 0))
        d[k] = subs[k - 1].matrix_of(d0 @ subs[k].lift)
    return ChainComplex(groups, d, cohomological=False)


def coskeleton_ab(A: SimplicialAbGroup, n: int, dim_cap: int | None = None) -> SimplicialAbGroup:
    """Coskeleton of a simplicial abelian group: compatible frame families form a subgroup."""
    dim_cap = A.dim_cap if dim_cap is None else dim_cap
    subs: dict[int, Subquotient] = {}
    groups = {}
    for k in range(dim_cap + 1):
        if k <= n:
            groups[k] = A.group(k)
            continue
        fr = _frame(k, n)
        amb = BlockGroup([A.group(n)] * len(fr))
        G, to_c, from_c = amb.normalised()
        rows = IntegerMatrix(0, amb.ngens)
        w = A.group(n).ngens
        for a, b, ia, ib in _frame_overlaps(k, n):
            fa = A.operator(Op(ia, n))
            fb = A.operator(Op(ib, n))
            blk_entries = {}
            for r, rr in enumerate(fa.rows):
                for cc, v in rr.items():
                    blk_entries[(r, a * w + cc)] = v
            for r, rr in enumerate(fb.rows):
                for cc, v in rr.items():
                    blk_entries[(r, b * w + cc)] = blk_entries.get((r, b * w + cc), 0) - v
            rows = rows.vstack(IntegerMatrix.from_entries(fa.nrows, amb.ngens, blk_entries))
        tgt = BlockGroup([A.group(n - 1)] * (rows.nrows // max(A.group(n - 1).ngens, 1))) if n else None
        if rows.nrows and tgt is not None and A.group(n - 1).ngens:
            L = _lattice_preimage(rows @ from_c, tgt.relations())
        else:
            L = IntegerMatrix.identity(G.ngens)
        subs[k] = Subquotient(G, L, G.relations())
        subs[k]._block = (to_c, from_c)
        groups[k] = subs[k].group

    def family(theta: Op) -> IntegerMatrix:
        """Matrix from degree ``k`` to the block family over ``_frame(m, n)``."""
        k, m = theta.source, len(theta) - 1
        fr_k = _frame(k, n)
        mats = []
        for sub in _frame(m, n):
            img = [theta[t] for t in sub]
            j = next(i for i, S in enumerate(fr_k) if set(img) <= set(S))
            rho = Op(_positions(img, fr_k[j]), len(fr_k[j]) - 1)
            if k <= n:
                proj = IntegerMatrix.identity(A.group(k).ngens)
            else:
                w = A.group(n).ngens
                to_c, from_c = subs[k]._block
                sel = IntegerMatrix.from_entries(w, len(fr_k) * w, {(r, j * w + r): 1 for r in range(w)})
                proj = sel @ from_c @ subs[k].lift
            mats.append(A.operator(rho) @ proj)
        return _stack_rows(mats, groups[k].ngens)

    def op(theta: Op) -> IntegerMatrix:
        m = len(theta) - 1
        fam = family(theta)
        if m <= n:
            return fam
        to_c, _ = subs[m]._block
        return subs[m].matrix_of(to_c @ fam)

    return SimplicialAbGroup(groups, op, dim_cap, f"cosk{n}")


# ---------------------------------------------------------------------------
# Presheaves of chain complexes


class AbChainPresheaf:
    """Object ``x`` gets a homological complex; arrow ``f: y -> x`` a chain map ``T(x) -> T(y)``."""

    def __init__(self, category: FiniteCategory, complexes: Mapping[str, ChainComplex],
                 maps: Mapping[str, Mapping[int, IntegerMatrix]], name: str = ""):
        self.category = category
        self.complexes = {x: complexes[x] for x in category.objects}
        degs: set[int] = set()
        for cx in self.complexes.values():
            degs |= set(cx.degrees)
        self.degrees = sorted(degs)
        self.maps: dict[str, dict[int, IntegerMatrix]] = {}
        for f in category.morphisms:
            y, x = category.src[f], category.tgt[f]
            given = maps.get(f)
            comp = {}
            for q in self.degrees:
                if given is not None and q in given:
                    comp[q] = reduce_matrix(self.value(y, q), given[q])
                elif category.is_identity(f):
                    comp[q] = IntegerMatrix.identity(self.value(x, q).ngens)
                else:
                    comp[q] = IntegerMatrix.zeros(self.value(y, q).ngens, self.value(x, q).ngens)
            self.maps[f] = comp
        self.name = name

    def value(self, x: str, q: int) -> FGAbelianGroup:
        return self.complexes[x].group(q)

    def restriction(self, f: str, q: int) -> IntegerMatrix:
        return self.maps[f][q]

    def degree_presheaf(self, q: int) -> AbPresheaf:
        c = self.category
        return AbPresheaf(c, {x: self.value(x, q) for x in c.objects}, {f: self.maps[f][q] for f in c.morphisms})

    def check(self) -> ValidationReport:
        c = self.category
        rep = ValidationReport(f"presheaf of complexes {self.name}")
        for q in self.degrees:
            rep.extend(self.degree_presheaf(q).check(), f"degree {q}: ")
        for f in c.morphisms:
            y, x = c.src[f], c.tgt[f]
            for q in self.degrees:
                lhs = self.complexes[y].differential(q) @ self.maps[f][q]
                rhs = self.maps[f].get(q - 1, IntegerMatrix.zeros(self.value(y, q - 1).ngens, self.value(x, q - 1).ngens)) \
                    @ self.complexes[x].differential(q)
                if not reduce_matrix(self.value(y, q - 1), lhs - rhs).is_zero():
                    rep.fail(f"restriction along {f} is not a chain map in degree {q}")
        return rep


@dataclass
class AbChainMap:
    source: AbChainPresheaf
    target: AbChainPresheaf
    components: dict[str, dict[int, IntegerMatrix]]

    def at(self, x: str, q: int) -> IntegerMatrix:
        m = self.components.get(x, {}).get(q)
        if m is None:
            return IntegerMatrix.zeros(self.target.value(x, q).ngens, self.source.value(x, q).ngens)
        return m

    def check(self) -> ValidationReport:
        rep = ValidationReport("map of presheaves of complexes")
        c = self.source.category
        degs = sorted(set(self.source.degrees) | set(self.target.degrees))
        for x in c.objects:
            for q in degs:
                lhs = self.target.complexes[x].differential(q) @ self.at(x, q)
                rhs = self.at(x, q - 1) @ self.source.complexes[x].differential(q)
                if not reduce_matrix(self.target.value(x, q - 1), lhs - rhs).is_zero():
                    rep.fail(f"not a chain map at {x}, degree {q}")
        for f in c.morphisms:
            y, x = c.src[f], c.tgt[f]
            for q in degs:
                lhs = self.at(y, q) @ self.source.maps[f].get(q, IntegerMatrix.zeros(self.source.value(y, q).ngens, self.source.value(x, q).ngens))
                rhs = self.target.maps[f].get(q, IntegerMatrix.zeros(self.target.value(y, q).ngens, self.target.value(x, q).ngens)) @ self.at(x, q)
                if not reduce_matrix(self.target.value(y, q), lhs - rhs).is_zero():
                    rep.fail(f"not natural along {f} in degree {q}")
        return rep


def em_presheaf(G: AbPresheaf, n: int) -> AbChainPresheaf:
    """``K(G, n)`` in the abelian model: ``G`` placed in degree ``n``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    c = G.category
    cxs = {x: ChainComplex({n: G.value(x)}, {}, cohomological=False) for x in c.objects}
    return AbChainPresheaf(c, cxs, {f: {n: G.restrictions[f]} for f in c.morphisms}, f"K({G.name or 'G'},{n})")


def map_of_em(phi: PresheafMap, n: int) -> AbChainMap:
    return AbChainMap(em_presheaf(phi.source, n), em_presheaf(phi.target, n),
                      {x: {n: m} for x, m in phi.components.items()})


# ---------------------------------------------------------------------------
# Sections over a cover


def sections_hypercomplex(s: Site, fam: CoveringFamily, T: AbChainPresheaf, depth: int | None = None) -> ChainComplex:
    """Total complex of the Čech double complex ``C^p(U, T_q)`` in degree ``q - p``.

    The differential is ``δ + (-1)^p d_T``.  With ``depth = max degree + 1``
    (the default) homology in degrees ``>= 0`` is exact.
    """
    if not T.degrees:
        return ChainComplex({}, {}, cohomological=False)
    qmax, qmin = max(T.degrees), min(T.degrees)
    P = qmax + 1 if depth is None else depth
    idx = CechIndexing(s, fam, P)
    tuples = {p: idx.tuples(p) for p in range(P + 1)}
    keys: dict[int, list[tuple[int, int, tuple[int, ...]]]] = {}
    for p in range(P + 1):
        for q in T.degrees:
            for t in tuples[p]:
                keys.setdefault(q - p, []).append((p, q, t))
    summands, offsets = {}, {}
    for j, ks in keys.items():
        summands[j] = [T.value(idx.obj(t), q) for p, q, t in ks]
        off, offsets[j] = 0, {}
        for k, g in zip(ks, summands[j]):
            offsets[j][k] = off
            off += g.ngens
    blocks = {}
    for j, ks in keys.items():
        if j - 1 not in keys:
            continue
        entries: dict[tuple[int, int], int] = {}
        for (p, q, t) in ks:
            col = offsets[j][(p, q, t)]
            # Čech direction
            if p < P:
                for t2 in tuples[p + 1]:
                    for i in range(p + 2):
                        if t2[:i] + t2[i + 1:] != t:
                            continue
                        R = T.restriction(idx.face(t2, i), q)
                        row = offsets[j - 1][(p + 1, q, t2)]
                        for r, rr in enumerate(R.rows):
                            for cc, v in rr.items():
                                entries[(row + r, col + cc)] = entries.get((row + r, col + cc), 0) + (-1) ** i * v
            # internal direction
            if (p, q - 1, t) in offsets[j - 1]:
                D = T.complexes[idx.obj(t)].differential(q)
                row = offsets[j - 1][(p, q - 1, t)]
                sign = (-1) ** p
                for r, rr in enumerate(D.rows):
                    for cc, v in rr.items():
                        entries[(row + r, col + cc)] = entries.get((row + r, col + cc), 0) + sign * v
        rows = sum(g.ngens for g in summands[j - 1])
        cols = sum(g.ngens for g in summands[j])
        blocks[j] = IntegerMatrix.from_entries(rows, cols, entries)
    cx, _ = complex_from_blocks(summands, blocks, cohomological=False)
    return cx


def homotopy_of_sections(s: Site, fam: CoveringFamily, T: AbChainPresheaf, j: int) -> FGAbelianGroup:
    """``π_j`` of sections over the cover, as ``H_j`` of the total complex (``j >= 0``)."""
    if j < 0:
        raise ValueError("homotopy degree must be >= 0")
    if not T.degrees or j > max(T.degrees):
        return FGAbelianGroup()
    return sections_hypercomplex(s, fam, T).homology(j)


def local_resolution_presheaf(s: Site, G: AbPresheaf, n: int) -> AbChainPresheaf:
    """``R(V)_q = C^{n-q}`` of ``G`` over the local objects above ``V``, for ``-1 <= q <= n``.

    Restriction along ``f: V' -> V`` re-indexes chains by composing with
    ``f``.  Each ``R_q`` is Čech-acyclic (local objects lift through any
    cover), which is what makes Čech sections of ``R`` compute ``Γ``.
    """
    c = s.category
    bad = covered_by_local_objects(s)
    if bad:
        raise ValueError(f"objects not covered by local objects: {bad}")
    pmax = n + 1
    chains = {x: local_slice_chains(s, x, pmax) for x in c.objects}
    offs: dict[str, dict[int, dict]] = {}
    cxs = {}
    for x in c.objects:
        summands, blocks, offs[x] = {}, {}, {}
        for p in range(pmax + 1):
            parts = [G.value(c.src[us[0]]) for us, _ in chains[x][p]]
            summands[n - p] = parts
            off, offs[x][p] = 0, {}
            for ch, g in zip(chains[x][p], parts):
                offs[x][p][ch] = off
                off += g.ngens
        for p in range(pmax):
            entries: dict[tuple[int, int], int] = {}
            for ch in chains[x][p + 1]:
                us, ms = ch
                row = offs[x][p + 1][ch]
                R = G.restrictions[ms[0]]
                col = offs[x][p][(us[1:], ms[1:])]
                for r, rr in enumerate(R.rows):
                    for cc, v in rr.items():
                        entries[(row + r, col + cc)] = entries.get((row + r, col + cc), 0) + v
                w = G.value(c.src[us[0]]).ngens
                for i in range(1, p + 2):
                    if i == p + 1:
                        face = (us[:-1], ms[:-1])
                    else:
                        comp = c.table[(ms[i], ms[i - 1])]
                        if c.is_identity(comp):
                            continue
                        face = (us[:i] + us[i + 1:], ms[:i - 1] + (comp,) + ms[i + 1:])
                    col = offs[x][p][face]
                    for t in range(w):
                        entries[(row + t, col + t)] = entries.get((row + t, col + t), 0) + (-1) ** i
            rows = sum(g.ngens for g in summands[n - p - 1])
            cols = sum(g.ngens for g in summands[n - p])
            blocks[n - p] = IntegerMatrix.from_entries(rows, cols, entries)
        cx, conv = complex_from_blocks(summands, blocks, cohomological=False)
        cxs[x] = (cx, conv)
    maps = {}
    for f in c.morphisms:
        y, x = c.src[f], c.tgt[f]
        comp = {}
        for p in range(pmax + 1):
            entries = {}
            for ch in chains[y][p]:
                us, ms = ch
                image = (tuple(c.table[(f, u)] for u in us), ms)
                row = offs[y][p][ch]
                col = offs[x][p][image]
                for t in range(G.value(c.src[us[0]]).ngens):
                    entries[(row + t, col + t)] = 1
            blk = IntegerMatrix.from_entries(sum(g.ngens for g in (G.value(c.src[u[0]]) for u, _ in chains[y][p])),
                                             sum(g.ngens for g in (G.value(c.src[u[0]]) for u, _ in chains[x][p])),
                                             entries)
            comp[n - p] = cxs[y][1][n - p][0] @ blk @ cxs[x][1][n - p][1]
        maps[f] = comp
    return AbChainPresheaf(c, {x: cxs[x][0] for x in c.objects}, maps, f"R({G.name or 'G'},{n})")


@dataclass
class BrownResult:
    group: FGAbelianGroup
    witness: CoveringFamily
    per_cover: dict[str, str] = field(default_factory=dict)


def brown_sections(s: Site, x: str, G: AbPresheaf, n: int, j: int, require_sheaf: bool = True,
                   all_covers: bool = False) -> BrownResult:
    """``π_j`` of sections of a fibrant ``K(G, n)`` over ``x``.

    The fibrant model is :func:`local_resolution_presheaf`; sections over a
    cover are Čech total complexes.  The finest cover is the witness; with
    ``all_covers`` every covering sieve's family is computed and must agree.
    """
    if require_sheaf:
        rep = is_sheaf(G, s, first_only=True)
        if not rep.ok:
            raise NotASheaf(rep.violations[0])
    if j < 0:
        raise ValueError("homotopy degree must be >= 0")
    fine = finest_cover(s, x)
    if j > n:
        return BrownResult(FGAbelianGroup(), fine)
    R = local_resolution_presheaf(s, G, n)
    val = homotopy_of_sections(s, fine, R, j)
    out = BrownResult(val, fine, {str(fine): str(val)})
    if all_covers:
        for b in s.covering_sieves(x):
            fam = family_of_sieve(s, b)
            other = homotopy_of_sections(s, fam, R, j)
            out.per_cover[str(fam)] = str(other)
            if other != val:
                raise AssertionError(f"covers disagree: {fam} gives {other}, {fine} gives {val}")
    return out


# ---------------------------------------------------------------------------
# Homology presheaves and Illusie equivalences


def _homology_data(cx: ChainComplex, q: int) -> Subquotient:
    return subquotient_data(cx.group(q), cx.hom(q), cx.hom(q + 1) if cx.dim(q + 1) else None)


def homology_presheaf(T: AbChainPresheaf, q: int) -> AbPresheaf:
    c = T.category
    data = {x: _homology_data(T.complexes[x], q) for x in c.objects}
    restr = {f: data[c.src[f]].matrix_of(T.maps[f].get(q, IntegerMatrix.zeros(T.value(c.src[f], q).ngens, 0)) @ data[c.tgt[f]].lift)
             for f in c.morphisms}
    return AbPresheaf(c, {x: data[x].group for x in c.objects}, restr, f"H_{q}({T.name})")


def homology_map(phi: AbChainMap, q: int) -> PresheafMap:
    c = phi.source.category
    src, tgt = homology_presheaf(phi.source, q), homology_presheaf(phi.target, q)
    comps = {}
    for x in c.objects:
        ds = _homology_data(phi.source.complexes[x], q)
        dt = _homology_data(phi.target.complexes[x], q)
        comps[x] = dt.matrix_of(phi.at(x, q) @ ds.lift)
    return PresheafMap(src, tgt, comps)


def illusie_check(phi: AbChainMap, s: Site, degrees: Sequence[int] | None = None) -> ValidationReport:
    """Do the sheafified homology maps become isomorphisms in every degree?"""
    degs = sorted(set(phi.source.degrees) | set(phi.target.degrees)) if degrees is None else list(degrees)
    rep = ValidationReport("Illusie weak equivalence")
    objectwise = True
    for q in degs:
        hm = homology_map(phi, q)
        if not hm.is_isomorphism():
            objectwise = False
        a = sheafify_map(hm, s)
        bad = a.failing_objects()
        if bad:
            rep.fail(f"degree {q}: sheafified homology map is not an isomorphism at {bad[0]}")
            rep.details.setdefault("first_failure", {"degree": q, "object": bad[0]})
    rep.details["objectwise_isomorphism"] = objectwise
    return rep


# ---------------------------------------------------------------------------
# Truncation


def truncate_complex(C: ChainComplex, n: int) -> ChainComplex:
    """Good truncation keeping homology in degrees ``<= n`` (homological)
    or ``<= n`` (cohomological, degree ``n`` replaced by cocycles)."""
    groups, d = {}, {}
    if not C.cohomological:
        for k in C.degrees:
            if k < n:
                groups[k] = C.group(k)
        Q = subquotient_data(C.group(n), None, C.hom(n + 1) if C.dim(n + 1) else None)
        groups[n] = Q.group
        for k in C.degrees:
            if k < n and k - 1 in groups:
                d[k] = C.differential(k)
        if n - 1 in groups:
            d[n] = C.differential(n) @ Q.lift
        return ChainComplex(groups, d, cohomological=False)
    for k in C.degrees:
        if k < n:
            groups[k] = C.group(k)
    Z = subquotient_data(C.group(n), C.hom(n), None)
    groups[n] = Z.group
    for k in C.degrees:
        if k + 1 < n:
            d[k] = C.differential(k)
    if n - 1 in groups:
        d[n - 1] = Z.matrix_of(C.differential(n - 1))
    return ChainComplex(groups, d, cohomological=True)
