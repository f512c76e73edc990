"""Finite simplicial sets stored by their nondegenerate simplices.

A *generic* simplex of degree ``n`` is a pair ``(x, sigma)`` where ``x`` is
a nondegenerate simplex of degree ``m`` and ``sigma`` is a monotone
surjection ``[n] -> [m]`` given as the tuple of its values.  By the
Eilenberg-Zilber lemma every simplex has exactly one such form.

Monotone maps ``[m] -> [n]`` are tuples of length ``m + 1``.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .exactalg import ChainComplex, FGAbelianGroup, IntegerMatrix, cohomology_with_coefficients

Mono = tuple[int, ...]
Simplex = tuple[Hashable, Mono]


def identity_map(n: int) -> Mono:
    return tuple(range(n + 1))


def coface(n: int, i: int) -> Mono:
    """``delta_i: [n-1] -> [n]`` skipping ``i``."""
    return tuple(t if t < i else t + 1 for t in range(n))


def codegeneracy(n: int, i: int) -> Mono:
    """``sigma_i: [n+1] -> [n]`` hitting ``i`` twice."""
    return tuple(t if t <= i else t - 1 for t in range(n + 2))


def compose_maps(outer: Mono, inner: Mono) -> Mono:
    """``outer ∘ inner``."""
    return tuple(outer[t] for t in inner)


def epi_mono(theta: Mono) -> tuple[Mono, Mono]:
    """Factor ``theta = iota ∘ s`` with ``s`` surjective, ``iota`` injective."""
    image = sorted(set(theta))
    pos = {v: k for k, v in enumerate(image)}
    return tuple(pos[v] for v in theta), tuple(image)


@lru_cache(maxsize=None)
def surjections(n: int, m: int) -> tuple[Mono, ...]:
    """All monotone surjections ``[n] -> [m]``."""
    out = []
    for jumps in itertools.combinations(range(1, n + 1), m):
        js = set(jumps)
        cur, vals = 0, []
        for t in range(n + 1):
            if t in js:
                cur += 1
            vals.append(cur)
        out.append(tuple(vals))
    return tuple(out)


def monotone_maps(m: int, n: int) -> Iterator[Mono]:
    """All monotone maps ``[m] -> [n]``."""
    return itertools.combinations_with_replacement(range(n + 1), m + 1)


class FiniteSimplicialSet:
    """Nondegenerate simplices up to ``dim_cap`` with their faces.

    ``faces[x]`` lists ``d_0 x, ..., d_k x`` as generic simplices.
    Simplex identifiers must be hashable and unique across degrees.
    """

    def __init__(
        self,
        nondegenerate: dict[int, list[Hashable]],
        faces: dict[Hashable, Sequence[Simplex]],
        dim_cap: int,
        name: str = "",
    ):
        self.dim_cap = dim_cap
        self.name = name
        self.nondeg: dict[int, list[Hashable]] = {k: list(nondegenerate.get(k, [])) for k in range(dim_cap + 1)}
        self.degree_of: dict[Hashable, int] = {}
        for k, xs in self.nondeg.items():
            for x in xs:
                if x in self.degree_of:
                    raise ValueError(f"duplicate simplex id {x!r}")
                self.degree_of[x] = k
        self.faces: dict[Hashable, tuple[Simplex, ...]] = {x: tuple(faces.get(x, ())) for x in self.degree_of}
        for x, k in self.degree_of.items():
            if k > 0 and len(self.faces[x]) != k + 1:
                raise ValueError(f"simplex {x!r} of degree {k} needs {k + 1} faces")
        self._face_cache: dict[tuple[Hashable, Mono], Simplex] = {}

    # -- simplicial operators ------------------------------------------------

    def nd_operator(self, x: Hashable, theta: Mono) -> Simplex:
        """``theta^*(x)`` for nondegenerate ``x``, ``theta: [m] -> [dim x]``."""
        s, iota = epi_mono(theta)
        z, rho = self._restrict(x, iota)
        return z, compose_maps(rho, s)

    def _restrict(self, x: Hashable, iota: Mono) -> Simplex:
        k = self.degree_of[x]
        if len(iota) == k + 1:
            return x, identity_map(k)
        key = (x, iota)
        hit = self._face_cache.get(key)
        if hit is not None:
            return hit
        missing = max(set(range(k + 1)) - set(iota))
        y, tau = self.faces[x][missing]
        inner = tuple(t if t < missing else t - 1 for t in iota)
        res = self.nd_operator(y, compose_maps(tau, inner))
        self._face_cache[key] = res
        return res

    def operator(self, simplex: Simplex, theta: Mono) -> Simplex:
        x, sigma = simplex
        return self.nd_operator(x, compose_maps(sigma, theta))

    def face(self, simplex: Simplex, i: int) -> Simplex:
        n = len(simplex[1]) - 1
        return self.operator(simplex, coface(n, i))

    def degeneracy(self, simplex: Simplex, i: int) -> Simplex:
        n = len(simplex[1]) - 1
        return self.operator(simplex, codegeneracy(n, i))

    def vertices_of(self, simplex: Simplex) -> tuple[Hashable, ...]:
        return tuple(self.operator(simplex, (t,))[0] for t in range(len(simplex[1])))

    # -- enumeration ---------------------------------------------------------

    def nd(self, x: Hashable) -> Simplex:
        return x, identity_map(self.degree_of[x])

    def simplices(self, n: int) -> list[Simplex]:
        """All simplices of degree ``n``, degenerate ones included."""
        out = []
        for m in range(min(n, self.dim_cap) + 1):
            for sigma in surjections(n, m):
                out.extend((x, sigma) for x in self.nondeg[m])
        return out

    def count(self, n: int) -> int:
        return len(self.nondeg.get(n, []))

    def counts(self) -> list[int]:
        return [self.count(k) for k in range(self.dim_cap + 1)]

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.count(k) for k in range(self.dim_cap + 1))

    def is_degenerate(self, simplex: Simplex) -> bool:
        x, sigma = simplex
        return len(sigma) - 1 != self.degree_of[x]

    # -- chains --------------------------------------------------------------

    def chain_complex(self, top: int | None = None) -> ChainComplex:
        """Normalized chains (free on nondegenerate simplices), homological."""
        top = self.dim_cap if top is None else top
        index = {k: {x: j for j, x in enumerate(self.nondeg[k])} for k in range(top + 1)}
        groups = {k: len(self.nondeg[k]) for k in range(top + 1)}
        d = {}
        for k in range(1, top + 1):
            entries: dict[tuple[int, int], int] = {}
            for j, x in enumerate(self.nondeg[k]):
                for i, (y, sigma) in enumerate(self.faces[x]):
                    if len(sigma) - 1 == self.degree_of[y]:
                        key = (index[k - 1][y], j)
                        entries[key] = entries.get(key, 0) + (-1) ** i
            d[k] = IntegerMatrix.from_entries(groups[k - 1], groups[k], entries)
        return ChainComplex(groups, d, cohomological=False)

    def homology(self, top: int | None = None) -> dict[int, FGAbelianGroup]:
        """Integral homology in degrees below the cap (the top degree is unreliable)."""
        top = self.dim_cap if top is None else top
        c = self.chain_complex(top)
        return {k: c.homology(k) for k in range(top)}

    def cohomology(self, coeff: FGAbelianGroup, top: int | None = None) -> dict[int, FGAbelianGroup]:
        top = self.dim_cap if top is None else top
        c = self.chain_complex(top)
        return {k: cohomology_with_coefficients(c, coeff, k) for k in range(top)}

    def connected_components(self) -> list[set[Hashable]]:
        parent = {v: v for v in self.nondeg[0]}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for e in self.nondeg[1] if self.dim_cap >= 1 else []:
            a, b = self.faces[e][1][0], self.faces[e][0][0]
            parent[find(a)] = find(b)
        comps: dict[Hashable, set[Hashable]] = {}
        for v in self.nondeg[0]:
            comps.setdefault(find(v), set()).add(v)
        return list(comps.values())

    # -- checks --------------------------------------------------------------

    def check_identities(self, top: int | None = None) -> list[str]:
        """Exhaustive simplicial identities on every simplex up to ``top``."""
        top = self.dim_cap if top is None else top
        bad = []
        for n in range(0, top + 1):
            for s in self.simplices(n):
                for i in range(n + 1):
                    for j in range(i + 1, n + 1):
                        if n >= 2 and self.face(self.face(s, j), i) != self.face(self.face(s, i), j - 1):
                            bad.append(f"d_{i} d_{j} != d_{j - 1} d_{i} on {s!r}")
                if n + 1 > top:
                    continue
                for i in range(n + 1):
                    t = self.degeneracy(s, i)
                    for j in range(n + 2):
                        f = self.face(t, j)
                        if j in (i, i + 1):
                            ok = f == s
                        elif j < i:
                            ok = f == self.degeneracy(self.face(s, j), i - 1)
                        else:
                            ok = f == self.degeneracy(self.face(s, j - 1), i)
                        if not ok:
                            bad.append(f"d_{j} s_{i} identity fails on {s!r}")
        return bad

    def __repr__(self) -> str:
        return f"FiniteSimplicialSet({self.name or '?'}, nondegenerate={self.counts()})"


# ---------------------------------------------------------------------------
# Building from explicit models


def from_model(
    simplices: Callable[[int], Iterable[Hashable]],
    operator: Callable[[Hashable, Mono], Hashable],
    dim_cap: int,
    name: str = "",
) -> tuple[FiniteSimplicialSet, Callable[[Hashable, int], Simplex]]:
    """Compress an explicit simplicial set to its nondegenerate part.

    ``simplices(k)`` lists every simplex of degree ``k``; ``operator(x, theta)``
    applies a monotone ``theta: [m] -> [k]``.  Keys of degree ``k`` simplices
    must be distinct from those of other degrees.  Returns the compressed set
    and a function sending an explicit simplex to its generic form.
    """
    decomp: dict[Hashable, Simplex] = {}
    nondeg: dict[int, list[Hashable]] = {}
    faces: dict[Hashable, list[Simplex]] = {}

    def decompose(x: Hashable, k: int) -> Simplex:
        hit = decomp.get(x)
        if hit is not None:
            return hit
        for i in range(k):
            y = operator(x, coface(k, i))
            if operator(y, codegeneracy(k - 1, i)) == x:
                z, rho = decompose(y, k - 1)
                res = (z, compose_maps(rho, codegeneracy(k - 1, i)))
                decomp[x] = res
                return res
        raise KeyError(f"simplex {x!r} was not enumerated as nondegenerate")

    for k in range(dim_cap + 1):
        nondeg[k] = []
        for x in simplices(k):
            if x in decomp:
                continue
            degenerate = False
            for i in range(k):
                y = operator(x, coface(k, i))
                if operator(y, codegeneracy(k - 1, i)) == x:
                    degenerate = True
                    break
            if degenerate:
                decompose(x, k)
            else:
                decomp[x] = (x, identity_map(k))
                nondeg[k].append(x)
                faces[x] = [decompose(operator(x, coface(k, i)), k - 1) for i in range(k + 1)] if k else []
    sset = FiniteSimplicialSet(nondeg, faces, dim_cap, name)

    def to_generic(x: Hashable, k: int) -> Simplex:
        return decompose(x, k)

    return sset, to_generic


def discrete(points: Sequence[Hashable], dim_cap: int = 3, name: str = "discrete") -> FiniteSimplicialSet:
    return FiniteSimplicialSet({0: list(points)}, {}, dim_cap, name)


def standard_simplex(n: int, dim_cap: int | None = None) -> FiniteSimplicialSet:
    """``Delta[n]``: nondegenerate simplices are nonempty subsets of ``[n]``."""
    dim_cap = n if dim_cap is None else dim_cap
    nondeg: dict[int, list[Hashable]] = {}
    faces = {}
    for k in range(min(n, dim_cap) + 1):
        nondeg[k] = [tuple(c) for c in itertools.combinations(range(n + 1), k + 1)]
        if k:
            for c in nondeg[k]:
                faces[c] = [(c[:i] + c[i + 1:], identity_map(k - 1)) for i in range(k + 1)]
    return FiniteSimplicialSet(nondeg, faces, dim_cap, f"Delta[{n}]")


def product(x: FiniteSimplicialSet, y: FiniteSimplicialSet, dim_cap: int | None = None) -> FiniteSimplicialSet:
    cap = min(x.dim_cap, y.dim_cap) if dim_cap is None else dim_cap

    def simplices(k):
        return [(a, b) for a in x.simplices(k) for b in y.simplices(k)]

    def op(s, theta):
        return (x.operator(s[0], theta), y.operator(s[1], theta))

    out, _ = from_model(simplices, op, cap, f"{x.name}x{y.name}")
    return out


def is_isomorphic_by_counts(a: FiniteSimplicialSet, b: FiniteSimplicialSet) -> bool:
    return a.counts() == b.counts()
