"""Independent reference computations used to derive frozen test values.

Nothing here imports flexsheaf: ranks are computed over Q with fractions and
over F_p by plain elimination, and combinatorial counts by direct recursion.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations


def rank_q(rows: list[list[int]]) -> int:
    m = [[Fraction(v) for v in r] for r in rows]
    return _eliminate(m, lambda a: a != 0, lambda a, b: a / b)


def rank_p(rows: list[list[int]], p: int) -> int:
    m = [[v % p for v in r] for r in rows]
    return _eliminate(m, lambda a: a % p != 0, lambda a, b: (a * pow(b, -1, p)) % p, p)


def _eliminate(m, nonzero, div, p=None) -> int:
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if nonzero(m[r][col])), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and nonzero(m[r][col]):
                c = div(m[r][col], m[rank][col])
                m[r] = [(a - c * b) % p if p else a - c * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def order_complex(elements: list, leq) -> dict[int, list[tuple]]:
    """Chains ``x0 < x1 < ... < xk`` of a finite poset, by dimension."""
    out: dict[int, list[tuple]] = {}
    lt = lambda a, b: a != b and leq(a, b)

    def grow(chain):
        out.setdefault(len(chain) - 1, []).append(tuple(chain))
        for y in elements:
            if lt(chain[-1], y):
                grow(chain + [y])

    for x in elements:
        grow([x])
    return out


def boundary_rows(simplices: dict[int, list[tuple]], k: int) -> list[list[int]]:
    """Matrix of ``∂_k`` with rows indexed by (k-1)-simplices."""
    lower = {s: i for i, s in enumerate(simplices.get(k - 1, []))}
    rows = [[0] * len(simplices.get(k, [])) for _ in lower]
    for j, s in enumerate(simplices.get(k, [])):
        for i in range(len(s)):
            rows[lower[s[:i] + s[i + 1:]]][j] += (-1) ** i
    return rows


def betti_and_torsion(simplices: dict[int, list[tuple]], p: int = 2) -> tuple[list[int], list[int]]:
    """Betti numbers and the number of ``Z/p^a`` summands in each homology degree."""
    top = max(simplices)
    rq = {k: rank_q(boundary_rows(simplices, k)) if simplices.get(k - 1) else 0 for k in range(top + 2)}
    rp = {k: rank_p(boundary_rows(simplices, k), p) if simplices.get(k - 1) else 0 for k in range(top + 2)}
    betti = [len(simplices.get(k, [])) - rq[k] - rq[k + 1] for k in range(top + 1)]
    torsion = [rq[k + 1] - rp[k + 1] for k in range(top + 1)]
    return betti, torsion


def finite_space_betti(points: list[str], minimal_opens: dict[str, set[str]]) -> list[int]:
    """Betti numbers of a finite T0 space via the order complex of its specialisation order."""
    leq = lambda x, y: x in minimal_opens[y]
    betti, _ = betti_and_torsion(order_complex(points, leq))
    return betti


def conjugacy_class_count_sym(n: int) -> int:
    perms = list(permutations(range(n)))
    mul = lambda a, b: tuple(a[b[i]] for i in range(n))
    inv = lambda a: tuple(sorted(range(n), key=lambda i: a[i]))
    seen, count = set(), 0
    for x in perms:
        if x in seen:
            continue
        count += 1
        seen |= {mul(mul(g, x), inv(g)) for g in perms}
    return count


def planar_tree_count(leaves: int) -> int:
    """Plane trees with ``leaves`` leaves and no unary vertices (small Schröder numbers)."""
    memo: dict[int, int] = {1: 1}

    def forests(m: int, parts: int) -> int:
        if parts == 0:
            return 1 if m == 0 else 0
        return sum(trees(a) * forests(m - a, parts - 1) for a in range(1, m - parts + 2))

    def trees(m: int) -> int:
        if m not in memo:
            memo[m] = sum(forests(m, k) for k in range(2, m + 1))
        return memo[m]

    return trees(leaves)


def binary_tree_count(leaves: int) -> int:
    if leaves == 1:
        return 1
    return sum(binary_tree_count(a) * binary_tree_count(leaves - a) for a in range(1, leaves))


def smith_invariants_2x2(rows: list[list[int]]) -> list[int]:
    """Invariant factors of a 2x2 matrix from gcds of minors."""
    from math import gcd

    d1 = 0
    for r in rows:
        for v in r:
            d1 = gcd(d1, v)
    det = abs(rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0])
    return [d1, det // d1] if d1 else []


def monotone_surjections(m: int, k: int) -> int:
    """Order-preserving surjections ``[m] -> [k]``."""
    return sum(1 for cuts in combinations(range(1, m + 1), k))
