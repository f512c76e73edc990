"""Exact integer linear algebra.

Smith normal form, finitely generated abelian groups in invariant-factor
form, homomorphisms between them, and bounded complexes with homology.
Everything uses Python integers, so there is no overflow.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class IntegerMatrix:
    """Rectangular integer matrix with sparse row storage.

    Only nonzero entries are stored; ``rows[i]`` maps column -> value.
    Instances are treated as immutable.
    """

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[Mapping[int, int]] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self.rows = tuple({} for _ in range(nrows))
        else:
            if len(rows) != nrows:
                raise ValueError("row count mismatch")
            self.rows = tuple({j: v for j, v in r.items() if v} for r in rows)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntegerMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "IntegerMatrix":
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
        return cls(len(rows), ncols, [{j: int(v) for j, v in enumerate(r) if v} for r in rows])

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, entries: Mapping[tuple[int, int], int]) -> "IntegerMatrix":
        rows: list[dict[int, int]] = [{} for _ in range(nrows)]
        for (i, j), v in entries.items():
            if v:
                rows[i][j] = rows[i].get(j, 0) + v
        return cls(nrows, ncols, rows)

    @classmethod
    def diagonal(cls, entries: Sequence[int], nrows: int | None = None, ncols: int | None = None) -> "IntegerMatrix":
        nrows = len(entries) if nrows is None else nrows
        ncols = len(entries) if ncols is None else ncols
        return cls(nrows, ncols, [{i: entries[i]} if i < len(entries) else {} for i in range(nrows)])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i].get(j, 0)

    def to_rows(self) -> list[list[int]]:
        out = []
        for r in self.rows:
            row = [0] * self.ncols
            for j, v in r.items():
                row[j] = v
            out.append(row)
        return out

    def column(self, j: int) -> list[int]:
        return [r.get(j, 0) for r in self.rows]

    def columns(self) -> list[dict[int, int]]:
        cols: list[dict[int, int]] = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                cols[j][i] = v
        return cols

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(self.ncols, self.nrows, self.columns())

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        orows = other.rows
        for r in self.rows:
            acc: dict[int, int] = {}
            for k, a in r.items():
                for j, b in orows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            out.append(acc)
        return IntegerMatrix(self.nrows, other.ncols, out)

    def apply(self, vec: Sequence[int]) -> list[int]:
        return [sum(v * vec[j] for j, v in r.items()) for r in self.rows]

    def __add__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = []
        for a, b in zip(self.rows, other.rows):
            acc = dict(a)
            for j, v in b.items():
                acc[j] = acc.get(j, 0) + v
            out.append(acc)
        return IntegerMatrix(self.nrows, self.ncols, out)

    def __neg__(self) -> "IntegerMatrix":
        return self.scale(-1)

    def __sub__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        return self + (-other)

    def scale(self, c: int) -> "IntegerMatrix":
        return IntegerMatrix(self.nrows, self.ncols, [{j: c * v for j, v in r.items()} for r in self.rows])

    def is_zero(self) -> bool:
        return not any(self.rows)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.shape, tuple(tuple(sorted(r.items())) for r in self.rows)))

    def __repr__(self) -> str:
        return f"IntegerMatrix({self.to_rows()!r})"

    def select_rows(self, idx: Sequence[int]) -> "IntegerMatrix":
        return IntegerMatrix(len(idx), self.ncols, [self.rows[i] for i in idx])

    def select_columns(self, idx: Sequence[int]) -> "IntegerMatrix":
        pos = {j: k for k, j in enumerate(idx)}
        return IntegerMatrix(self.nrows, len(idx), [{pos[j]: v for j, v in r.items() if j in pos} for r in self.rows])

    def hstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.nrows != other.nrows:
            raise ValueError("row mismatch")
        off = self.ncols
        return IntegerMatrix(self.nrows, self.ncols + other.ncols,
                             [{**a, **{off + j: v for j, v in b.items()}} for a, b in zip(self.rows, other.rows)])

    def vstack(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.ncols != other.ncols:
            raise ValueError("column mismatch")
        return IntegerMatrix(self.nrows + other.nrows, self.ncols, list(self.rows) + list(other.rows))

    def kron_identity(self, k: int) -> "IntegerMatrix":
        """``self ⊗ I_k``."""
        rows = []
        for r in self.rows:
            for a in range(k):
                rows.append({j * k + a: v for j, v in r.items()})
        return IntegerMatrix(self.nrows * k, self.ncols * k, rows)


def block_diagonal(blocks: Sequence[IntegerMatrix]) -> IntegerMatrix:
    rows: list[dict[int, int]] = []
    coff = 0
    for b in blocks:
        for r in b.rows:
            rows.append({coff + j: v for j, v in r.items()})
        coff += b.ncols
    return IntegerMatrix(len(rows), coff, rows)


def determinant(m: IntegerMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = m.nrows
    if n != m.ncols:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SmithForm:
    """``U @ M @ V == D`` with ``U``, ``V`` unimodular.

    ``U_inv`` and ``V_inv`` are kept because kernels, images and integer
    solves all need them.
    """

    D: IntegerMatrix
    U: IntegerMatrix
    V: IntegerMatrix
    U_inv: IntegerMatrix
    V_inv: IntegerMatrix
    diagonal: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.diagonal)


def smith_form(m: IntegerMatrix) -> SmithForm:
    nr, nc = m.shape
    a = m.to_rows()
    U = [[int(i == j) for j in range(nr)] for i in range(nr)]
    Ui = [[int(i == j) for j in range(nr)] for i in range(nr)]
    V = [[int(i == j) for j in range(nc)] for i in range(nc)]
    Vi = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i: int, k: int) -> None:
        a[i], a[k] = a[k], a[i]
        U[i], U[k] = U[k], U[i]
        for row in Ui:
            row[i], row[k] = row[k], row[i]

    def swap_cols(j: int, k: int) -> None:
        for row in a:
            row[j], row[k] = row[k], row[j]
        for row in V:
            row[j], row[k] = row[k], row[j]
        Vi[j], Vi[k] = Vi[k], Vi[j]

    def add_row(src: int, dst: int, c: int) -> None:
        # row_dst += c * row_src
        if not c:
            return
        ra, rd = a[src], a[dst]
        for j in range(nc):
            if ra[j]:
                rd[j] += c * ra[j]
        us, ud = U[src], U[dst]
        for j in range(nr):
            if us[j]:
                ud[j] += c * us[j]
        for row in Ui:
            if row[dst]:
                row[src] -= c * row[dst]

    def add_col(src: int, dst: int, c: int) -> None:
        # col_dst += c * col_src
        if not c:
            return
        for row in a:
            if row[src]:
                row[dst] += c * row[src]
        for row in V:
            if row[src]:
                row[dst] += c * row[src]
        vs, vd = Vi[src], Vi[dst]
        for j in range(nc):
            if vd[j]:
                vs[j] -= c * vd[j]

    def negate_row(i: int) -> None:
        a[i] = [-x for x in a[i]]
        U[i] = [-x for x in U[i]]
        for row in Ui:
            row[i] = -row[i]

    diag: list[int] = []
    t = 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                v = a[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            p = a[t][t]
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // p))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // p))
                    if a[t][j]:
                        done = False
            if not done:
                # a smaller remainder appeared; move it to the pivot
                best = None
                for i in range(t, nr):
                    if a[i][t] and (best is None or abs(a[i][t]) < best[0]):
                        best = (abs(a[i][t]), i, t)
                for j in range(t, nc):
                    if a[t][j] and (best is None or abs(a[t][j]) < best[0]):
                        best = (abs(a[t][j]), t, j)
                _, i, j = best
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            # divisibility of the remaining block by the pivot
            bad = None
            for i in range(t + 1, nr):
                for j in range(t + 1, nc):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(bad, t, 1)
        if a[t][t] < 0:
            negate_row(t)
        diag.append(a[t][t])
        t += 1
    D = IntegerMatrix.from_rows(a, nc) if nr else IntegerMatrix(0, nc)
    return SmithForm(
        D=D,
        U=IntegerMatrix.from_rows(U, nr) if nr else IntegerMatrix(0, 0),
        V=IntegerMatrix.from_rows(V, nc) if nc else IntegerMatrix(0, 0),
        U_inv=IntegerMatrix.from_rows(Ui, nr) if nr else IntegerMatrix(0, 0),
        V_inv=IntegerMatrix.from_rows(Vi, nc) if nc else IntegerMatrix(0, 0),
        diagonal=tuple(diag),
    )


def smith_normal_form(m: IntegerMatrix) -> tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """Return ``(D, U, V)`` with ``U @ m @ V == D`` and ``D`` in Smith form."""
    sf = smith_form(m)
    return sf.D, sf.U, sf.V


def kernel_basis(m: IntegerMatrix) -> IntegerMatrix:
    """Columns form a basis of the integer kernel of ``m``."""
    sf = smith_form(m)
    return sf.V.select_columns(list(range(sf.rank, m.ncols)))


def image_basis(m: IntegerMatrix) -> IntegerMatrix:
    """Columns form a basis of the lattice spanned by the columns of ``m``."""
    sf = smith_form(m)
    cols = []
    for i, d in enumerate(sf.diagonal):
        cols.append({r: v * d for r, v in sf.U_inv.columns()[i].items()})
    out = IntegerMatrix(m.nrows, len(cols))
    rows: list[dict[int, int]] = [{} for _ in range(m.nrows)]
    for j, c in enumerate(cols):
        for r, v in c.items():
            rows[r][j] = v
    return IntegerMatrix(m.nrows, len(cols), rows) if cols else out


def solve_integer(m: IntegerMatrix, b: Sequence[int], sf: SmithForm | None = None) -> list[int] | None:
    """An integer solution of ``m x = b`` or ``None``."""
    sf = sf or smith_form(m)
    y = sf.U.apply(b)
    z = [0] * m.ncols
    for i, v in enumerate(y):
        if i < sf.rank:
            d = sf.diagonal[i]
            if v % d:
                return None
            z[i] = v // d
        elif v:
            return None
    return sf.V.apply(z)


# ---------------------------------------------------------------------------
# Sparse invariant factors (fast path for big boundary matrices)


def invariant_factors(m: IntegerMatrix) -> list[int]:
    """Nonzero Smith diagonal of ``m``.

    Unit pivots are eliminated sparsely first; whatever is left without a
    unit entry goes through the dense Smith form.
    """
    rows: dict[int, dict[int, int]] = {i: dict(r) for i, r in enumerate(m.rows) if r}
    cols: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)
    version = {i: 0 for i in rows}
    heap = [(len(r), i, 0) for i, r in rows.items()]
    heapq.heapify(heap)
    units = 0
    while heap:
        ln, i, ver = heapq.heappop(heap)
        if i not in rows or version[i] != ver:
            continue
        r = rows[i]
        piv = None
        for j, v in r.items():
            if v == 1 or v == -1:
                if piv is None or len(cols[j]) < len(cols[piv]):
                    piv = j
        if piv is None:
            continue
        pv = r[piv]
        del rows[i]
        for j in r:
            cols[j].discard(i)
        for k in list(cols[piv]):
            rk = rows[k]
            f = rk[piv] * pv
            for j, v in r.items():
                nv = rk.get(j, 0) - f * v
                if nv:
                    if j not in rk:
                        cols[j].add(k)
                    rk[j] = nv
                elif j in rk:
                    del rk[j]
                    cols[j].discard(k)
            version[k] += 1
            if rk:
                heapq.heappush(heap, (len(rk), k, version[k]))
            else:
                del rows[k]
        units += 1
    rest = [r for r in rows.values() if r]
    if not rest:
        return [1] * units
    used = sorted({j for r in rest for j in r})
    pos = {j: k for k, j in enumerate(used)}
    dense = IntegerMatrix(len(rest), len(used), [{pos[j]: v for j, v in r.items()} for r in rest])
    return [1] * units + list(smith_form(dense).diagonal)


def rank_mod_p(m: IntegerMatrix, p: int) -> int:
    """Rank over ``F_p`` by sparse row reduction."""
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for r in m.rows:
        row = {j: v % p for j, v in r.items() if v % p}
        while row:
            j = min(row)
            if j not in pivots:
                inv = pow(row[j], -1, p)
                pivots[j] = {k: v * inv % p for k, v in row.items()}
                rank += 1
                break
            f = row[j]
            for k, v in pivots[j].items():
                nv = (row.get(k, 0) - f * v) % p
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
    return rank


def matrix_rank(m: IntegerMatrix) -> int:
    return len(invariant_factors(m))


# ---------------------------------------------------------------------------
# Finitely generated abelian groups


@dataclass(frozen=True)
class FGAbelianGroup:
    """``Z^rank + Z/d1 + ... + Z/dk`` with ``d1 | d2 | ...`` and every ``di >= 2``.

    Elements are integer vectors: the first ``rank`` coordinates are free,
    the remaining ones are read modulo the invariant factors.
    """

    rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.rank < 0:
            raise ValueError("negative rank")
        t = tuple(int(d) for d in self.torsion)
        object.__setattr__(self, "torsion", t)
        for d in t:
            if d < 2:
                raise ValueError(f"invariant factor {d} < 2")
        for a, b in zip(t, t[1:]):
            if b % a:
                raise ValueError(f"divisibility chain broken: {a} does not divide {b}")

    @classmethod
    def free(cls, rank: int) -> "FGAbelianGroup":
        return cls(rank, ())

    @classmethod
    def cyclic(cls, n: int) -> "FGAbelianGroup":
        if n == 0:
            return cls(1)
        if n == 1:
            return cls()
        return cls(0, (n,))

    @classmethod
    def parse(cls, text: str) -> "FGAbelianGroup":
        """Parse ``"Z"``, ``"Z/2"``, ``"Z^2 + Z/3"``, ``"0"``."""
        text = text.strip()
        if text in ("0", "", "1", "trivial"):
            return cls()
        gens = FGAbelianGroup()
        for part in text.split("+"):
            part = part.strip()
            if part.startswith("Z/"):
                g = cls.cyclic(int(part[2:]))
            elif part.startswith("Z^"):
                g = cls.free(int(part[2:]))
            elif part == "Z":
                g = cls.free(1)
            else:
                raise ValueError(f"cannot parse group {part!r}")
            gens = gens.direct_sum(g)
        return gens

    @property
    def ngens(self) -> int:
        return self.rank + len(self.torsion)

    @property
    def orders(self) -> tuple[int, ...]:
        """Order of each generator, 0 meaning infinite."""
        return (0,) * self.rank + self.torsion

    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    def is_free(self) -> bool:
        return not self.torsion

    def order(self) -> int | None:
        if self.rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def relations(self) -> IntegerMatrix:
        """Relation matrix: columns generate the kernel of ``Z^ngens -> self``."""
        return IntegerMatrix.from_entries(self.ngens, len(self.torsion),
                                          {(self.rank + k, k): d for k, d in enumerate(self.torsion)})

    def reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        out = list(vec)
        for k, d in enumerate(self.torsion):
            out[self.rank + k] %= d
        return tuple(out)

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.ngens

    def elements(self) -> list[tuple[int, ...]]:
        if self.rank:
            raise ValueError("infinite group has no element list")
        import itertools
        return [tuple(v) for v in itertools.product(*[range(d) for d in self.torsion])]

    def direct_sum(self, other: "FGAbelianGroup") -> "FGAbelianGroup":
        return FGAbelianGroup.from_orders(self.orders + other.orders)[0]

    def power(self, k: int) -> "FGAbelianGroup":
        return FGAbelianGroup.from_orders(self.orders * k)[0]

    @classmethod
    def from_orders(cls, orders: Sequence[int]) -> tuple["FGAbelianGroup", IntegerMatrix, IntegerMatrix]:
        """Normalise ``+ Z/orders[i]`` (0 = free)."""
        n = len(orders)
        rel = IntegerMatrix.from_entries(n, n, {(i, i): o for i, o in enumerate(orders) if o != 1})
        if all(o == 0 for o in orders):
            return cls(n), IntegerMatrix.identity(n), IntegerMatrix.identity(n)
        free = [i for i, o in enumerate(orders) if o == 0]
        tor = [i for i, o in enumerate(orders) if o > 1]
        if len({orders[i] for i in tor}) == 1:
            # already canonical up to a permutation of coordinates
            keep = free + tor
            to_c = IntegerMatrix.from_entries(len(keep), n, {(k, i): 1 for k, i in enumerate(keep)})
            return cls(len(free), tuple(orders[i] for i in tor)), to_c, to_c.transpose()
        return cls.from_relations(n, rel)

    @classmethod
    def from_relations(cls, ngens: int, rel: IntegerMatrix) -> tuple["FGAbelianGroup", IntegerMatrix, IntegerMatrix]:
        """Canonical form of ``Z^ngens / im(rel)``.

        Returns ``(G, to_canonical, from_canonical)``; both matrices are
        homomorphisms (presentation coords <-> canonical coords) and are
        mutually inverse isomorphisms on the quotient.
        """
        if rel.nrows != ngens:
            raise ValueError("relation matrix has wrong row count")
        sf = smith_form(rel)
        diag = list(sf.diagonal) + [0] * (ngens - sf.rank)
        free_idx = [i for i in range(ngens) if diag[i] == 0]
        tor_idx = [i for i in range(ngens) if diag[i] > 1]
        keep = free_idx + tor_idx
        G = cls(len(free_idx), tuple(diag[i] for i in tor_idx))
        to_c = sf.U.select_rows(keep)
        from_c = sf.U_inv.select_columns(keep)
        return G, to_c, from_c

    def __str__(self) -> str:
        parts = []
        if self.rank == 1:
            parts.append("Z")
        elif self.rank > 1:
            parts.append(f"Z^{self.rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FGAbelianGroup({self})"


class BlockGroup:
    """Direct sum of finitely generated groups in concatenated coordinates.

    Not normalised: coordinate ``k`` is read modulo ``orders[k]`` (0 = free).
    It offers the same ``ngens``/``relations``/``reduce`` surface as
    :class:`FGAbelianGroup`, which is all that kernels and subquotients use.
    """

    def __init__(self, summands: Sequence[FGAbelianGroup]):
        self.summands = list(summands)
        self.offsets: list[int] = []
        orders: list[int] = []
        for g in self.summands:
            self.offsets.append(len(orders))
            orders.extend(g.orders)
        self.orders = tuple(orders)

    @property
    def ngens(self) -> int:
        return len(self.orders)

    def relations(self) -> IntegerMatrix:
        tors = [(k, d) for k, d in enumerate(self.orders) if d]
        return IntegerMatrix.from_entries(self.ngens, len(tors), {(k, j): d for j, (k, d) in enumerate(tors)})

    def reduce(self, vec: Sequence[int]) -> tuple[int, ...]:
        return tuple(v % d if d else v for v, d in zip(vec, self.orders))

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.ngens

    def reduce_matrix(self, m: IntegerMatrix) -> IntegerMatrix:
        rows = []
        for i, r in enumerate(m.rows):
            d = self.orders[i]
            rows.append({j: v % d for j, v in r.items()} if d else r)
        return IntegerMatrix(m.nrows, m.ncols, rows)

    def normalised(self) -> tuple[FGAbelianGroup, IntegerMatrix, IntegerMatrix]:
        return FGAbelianGroup.from_orders(self.orders)


def is_valid_hom(source: FGAbelianGroup, target: FGAbelianGroup, matrix: IntegerMatrix) -> bool:
    if matrix.shape != (target.ngens, source.ngens):
        return False
    cols = matrix.columns()
    for k, d in enumerate(source.torsion):
        col = cols[source.rank + k]
        img = [d * col.get(i, 0) for i in range(target.ngens)]
        if any(img[:target.rank]):
            return False
        for t, e in enumerate(target.torsion):
            if img[target.rank + t] % e:
                return False
    return True


@dataclass(frozen=True)
class AbHom:
    """Homomorphism ``source -> target`` given on canonical coordinates."""

    source: FGAbelianGroup
    target: FGAbelianGroup
    matrix: IntegerMatrix

    def __post_init__(self) -> None:
        if not is_valid_hom(self.source, self.target, self.matrix):
            raise ValueError("matrix does not define a homomorphism between these groups")

    @classmethod
    def identity(cls, g: FGAbelianGroup) -> "AbHom":
        return cls(g, g, IntegerMatrix.identity(g.ngens))

    @classmethod
    def zero(cls, s: FGAbelianGroup, t: FGAbelianGroup) -> "AbHom":
        return cls(s, t, IntegerMatrix.zeros(t.ngens, s.ngens))

    def __call__(self, vec: Sequence[int]) -> tuple[int, ...]:
        return self.target.reduce(self.matrix.apply(vec))

    def compose(self, first: "AbHom") -> "AbHom":
        """``self ∘ first``."""
        if first.target != self.source:
            raise ValueError("non-composable homomorphisms")
        return AbHom(first.source, self.target, reduce_matrix(self.target, self.matrix @ first.matrix))

    def is_zero(self) -> bool:
        return all(self(col) == self.target.zero() for col in _unit_vectors(self.source.ngens))

    def kernel(self) -> tuple[FGAbelianGroup, "AbHom"]:
        return kernel(self)

    def cokernel(self) -> tuple[FGAbelianGroup, "AbHom"]:
        return cokernel(self)

    def is_injective(self) -> bool:
        return kernel(self)[0].is_trivial()

    def is_surjective(self) -> bool:
        return cokernel(self)[0].is_trivial()

    def is_isomorphism(self) -> bool:
        return self.is_injective() and self.is_surjective()


def _unit_vectors(n: int) -> list[list[int]]:
    return [[int(i == j) for i in range(n)] for j in range(n)]


def reduce_matrix(target: FGAbelianGroup, m: IntegerMatrix) -> IntegerMatrix:
    if not target.torsion:
        return m
    rows = []
    for i, r in enumerate(m.rows):
        if i >= target.rank:
            d = target.torsion[i - target.rank]
            rows.append({j: v % d for j, v in r.items()})
        else:
            rows.append(r)
    return IntegerMatrix(m.nrows, m.ncols, rows)


def _lattice_preimage(m: IntegerMatrix, target_rel: IntegerMatrix) -> IntegerMatrix:
    """Basis (columns) of ``{x : m x ∈ im target_rel}``."""
    big = m.hstack(target_rel)
    ker = kernel_basis(big)
    proj = ker.select_rows(list(range(m.ncols)))
    if proj.ncols == 0:
        return IntegerMatrix(m.ncols, 0)
    return image_basis(proj)


def _coords_in(basis: IntegerMatrix, vectors: IntegerMatrix) -> IntegerMatrix:
    """Express each column of ``vectors`` in the lattice basis ``basis``."""
    sf = smith_form(basis)
    cols = []
    vcols = vectors.columns()
    for j in range(vectors.ncols):
        b = [vcols[j].get(i, 0) for i in range(vectors.nrows)]
        x = solve_integer(basis, b, sf)
        if x is None:
            raise ArithmeticError("vector not in lattice")
        cols.append(x)
    return IntegerMatrix.from_entries(basis.ncols, len(cols),
                                      {(i, j): v for j, c in enumerate(cols) for i, v in enumerate(c)})


class Subquotient:
    """``L / (gens)`` inside an ambient group, with coordinates.

    ``basis`` spans the lattice ``L`` (columns, ambient coordinates);
    ``lift`` sends canonical coordinates of ``group`` to ambient vectors.
    """

    def __init__(self, ambient: FGAbelianGroup, basis: IntegerMatrix, gens: IntegerMatrix):
        self.ambient = ambient
        self.basis = basis
        n = ambient.ngens
        if basis.ncols == 0:
            self.group = FGAbelianGroup()
            self.lift = IntegerMatrix(n, 0)
            self._to_c = IntegerMatrix(0, 0)
        else:
            C = _coords_in(basis, gens)
            self.group, self._to_c, from_c = FGAbelianGroup.from_relations(basis.ncols, C)
            self.lift = basis @ from_c
        self._solver = basis.hstack(ambient.relations())
        self._sf: SmithForm | None = None

    def coords(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Canonical coordinates of the class of an ambient vector lying in ``L``."""
        if self.basis.ncols == 0:
            if any(self.ambient.reduce(vec)):
                raise ArithmeticError("vector not in the subgroup")
            return ()
        if self._sf is None:
            self._sf = smith_form(self._solver)
        x = solve_integer(self._solver, list(vec), self._sf)
        if x is None:
            raise ArithmeticError("vector not in the subgroup")
        y = x[: self.basis.ncols]
        return self.group.reduce(self._to_c.apply(y))

    def matrix_of(self, vectors: IntegerMatrix) -> IntegerMatrix:
        """Canonical coordinates of each column of ``vectors``."""
        cols = vectors.columns()
        out = [self.coords([c.get(i, 0) for i in range(vectors.nrows)]) for c in cols]
        return IntegerMatrix.from_entries(self.group.ngens, len(out),
                                          {(i, j): v for j, c in enumerate(out) for i, v in enumerate(c)})


def subquotient_data(
    ambient: FGAbelianGroup,
    cycles_of: AbHom | None,
    boundaries_from: AbHom | None,
) -> Subquotient:
    n = ambient.ngens
    rel = ambient.relations()
    if cycles_of is None:
        L = IntegerMatrix.identity(n)
    else:
        L = _lattice_preimage(cycles_of.matrix, cycles_of.target.relations())
    gens = rel if boundaries_from is None else boundaries_from.matrix.hstack(rel)
    return Subquotient(ambient, L, gens)


def subquotient(
    ambient: FGAbelianGroup,
    cycles_of: AbHom | None,
    boundaries_from: AbHom | None,
) -> tuple[FGAbelianGroup, IntegerMatrix]:
    """``ker(cycles_of) / im(boundaries_from)`` inside ``ambient``.

    Returns the group and a matrix taking canonical coordinates of the
    result to coordinates in ``ambient`` (a representative lift).
    """
    sq = subquotient_data(ambient, cycles_of, boundaries_from)
    return sq.group, sq.lift


def kernel(h: AbHom) -> tuple[FGAbelianGroup, AbHom]:
    K, lift = subquotient(h.source, h, None)
    return K, AbHom(K, h.source, reduce_matrix(h.source, lift))


def cokernel(h: AbHom) -> tuple[FGAbelianGroup, AbHom]:
    gens = h.matrix.hstack(h.target.relations())
    C, to_c, _ = FGAbelianGroup.from_relations(h.target.ngens, gens)
    return C, AbHom(h.target, C, reduce_matrix(C, to_c))


def image_group(h: AbHom) -> FGAbelianGroup:
    """The image of ``h`` up to isomorphism (source / kernel)."""
    K, inc = kernel(h)
    G, _, _ = FGAbelianGroup.from_relations(h.source.ngens, inc.matrix.hstack(h.source.relations()))
    return G


def direct_sum(groups: Sequence[FGAbelianGroup]) -> tuple[FGAbelianGroup, list[int]]:
    """Direct sum with *block* coordinates (not normalised).

    Returns the normalised group only for reporting; block offsets are
    given for callers that work in concatenated coordinates.
    """
    orders: list[int] = []
    offsets = []
    for g in groups:
        offsets.append(len(orders))
        orders.extend(g.orders)
    return FGAbelianGroup.from_orders(orders)[0], offsets


# ---------------------------------------------------------------------------
# Chain complexes


class ChainComplex:
    """Bounded complex of finitely generated abelian groups.

    ``groups[n]`` is the term in degree ``n`` (default free of the given
    dimension when an int is passed).  With ``cohomological=True`` the
    differential ``d[n]`` maps degree ``n`` to ``n + 1``; otherwise to
    ``n - 1``.  ``d ∘ d = 0`` is checked on construction unless
    ``check=False``.  Terms outside the stored range are zero.
    """

    def __init__(
        self,
        groups: Mapping[int, FGAbelianGroup | int],
        differentials: Mapping[int, IntegerMatrix],
        cohomological: bool = True,
        check: bool = True,
    ):
        self.groups: dict[int, FGAbelianGroup] = {
            n: (g if isinstance(g, FGAbelianGroup) else FGAbelianGroup.free(int(g))) for n, g in groups.items()
        }
        self.cohomological = cohomological
        self.step = 1 if cohomological else -1
        self.d: dict[int, IntegerMatrix] = {}
        for n, m in differentials.items():
            src, tgt = self.group(n), self.group(n + self.step)
            if m.shape != (tgt.ngens, src.ngens):
                raise ValueError(f"differential in degree {n} has shape {m.shape}, expected {(tgt.ngens, src.ngens)}")
            self.d[n] = reduce_matrix(tgt, m)
        if check:
            bad = self.check_square_zero()
            if bad is not None:
                raise ValueError(f"d∘d != 0 at degree {bad}")

    @property
    def degrees(self) -> list[int]:
        return sorted(n for n, g in self.groups.items())

    @property
    def lo(self) -> int:
        return min(self.groups) if self.groups else 0

    @property
    def hi(self) -> int:
        return max(self.groups) if self.groups else -1

    def group(self, n: int) -> FGAbelianGroup:
        return self.groups.get(n, FGAbelianGroup())

    def dim(self, n: int) -> int:
        return self.group(n).ngens

    def differential(self, n: int) -> IntegerMatrix:
        m = self.d.get(n)
        if m is None:
            return IntegerMatrix.zeros(self.dim(n + self.step), self.dim(n))
        return m

    def hom(self, n: int) -> AbHom:
        return AbHom(self.group(n), self.group(n + self.step), self.differential(n))

    def is_free(self) -> bool:
        return all(g.is_free() for g in self.groups.values())

    def check_square_zero(self) -> int | None:
        for n in self.degrees:
            a = self.differential(n)
            b = self.differential(n + self.step)
            if a.ncols == 0 or b.nrows == 0:
                continue
            prod = reduce_matrix(self.group(n + 2 * self.step), b @ a)
            if not prod.is_zero():
                return n
        return None

    def homology(self, n: int) -> FGAbelianGroup:
        g = self.group(n)
        if g.ngens == 0:
            return FGAbelianGroup()
        if self.is_free():
            out_f = invariant_factors(self.differential(n))
            in_f = invariant_factors(self.differential(n - self.step))
            rank = g.ngens - len(out_f) - len(in_f)
            tors = tuple(d for d in in_f if d > 1)
            return FGAbelianGroup(rank, tors)
        p = self._elementary_prime()
        if p is not None:
            r_out = rank_mod_p(self.differential(n), p)
            r_in = rank_mod_p(self.differential(n - self.step), p)
            return FGAbelianGroup(0, (p,) * (g.ngens - r_out - r_in))
        H, _ = subquotient(g, self.hom(n), self.hom(n - self.step) if self.dim(n - self.step) else None)
        return H

    def _elementary_prime(self) -> int | None:
        """``p`` when every term is a sum of copies of ``Z/p`` for one prime ``p``."""
        ps = {d for g in self.groups.values() for d in g.torsion}
        if len(ps) != 1 or any(g.rank for g in self.groups.values()):
            return None
        p = ps.pop()
        return p if all(p % k for k in range(2, int(p ** 0.5) + 1)) else None

    def homology_all(self) -> dict[int, FGAbelianGroup]:
        return {n: self.homology(n) for n in self.degrees}

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * self.group(n).rank for n in self.degrees)

    def shift(self, k: int) -> "ChainComplex":
        """Reindex so the old degree ``n`` sits in degree ``n + k``; signs of d flip for odd ``k``."""
        sgn = -1 if k % 2 else 1
        return ChainComplex({n + k: g for n, g in self.groups.items()},
                            {n + k: m.scale(sgn) for n, m in self.d.items()},
                            self.cohomological, check=False)

    def truncate_degrees(self, lo: int, hi: int) -> "ChainComplex":
        """Brutal truncation keeping only degrees in ``[lo, hi]``."""
        groups = {n: g for n, g in self.groups.items() if lo <= n <= hi}
        d = {n: m for n, m in self.d.items() if n in groups and (n + self.step) in groups}
        return ChainComplex(groups, d, self.cohomological, check=False)

    def __repr__(self) -> str:
        dims = {n: str(g) if not g.is_free() else g.rank for n, g in sorted(self.groups.items())}
        kind = "cochain" if self.cohomological else "chain"
        return f"ChainComplex({kind}, {dims})"


def homology(c: ChainComplex, i: int) -> FGAbelianGroup:
    """Homology (or cohomology, by orientation) of ``c`` in degree ``i``."""
    if c.groups and not (c.lo - 1 <= i <= c.hi + 1):
        raise IndexError(f"degree {i} outside [{c.lo}, {c.hi}]")
    return c.homology(i)


def cyclic_summands(g: FGAbelianGroup) -> list[FGAbelianGroup]:
    return [FGAbelianGroup.free(1)] * g.rank + [FGAbelianGroup.cyclic(d) for d in g.torsion]


def cohomology_with_coefficients(c: ChainComplex, g: FGAbelianGroup, n: int) -> FGAbelianGroup:
    """Homology of ``Hom(C, G)`` in degree ``n``, summed over cyclic summands of ``G``."""
    out = FGAbelianGroup()
    for h in cyclic_summands(g):
        out = out.direct_sum(hom_complex_with_coefficients(c, h).homology(n))
    return out


def hom_complex_with_coefficients(c: ChainComplex, g: FGAbelianGroup) -> ChainComplex:
    """``Hom(C, G)`` for a free complex ``C``.

    A chain complex becomes a cochain complex and vice versa.  Coordinates
    in degree ``n`` are ``(basis element of C_n) x (generator of G)``.
    """
    if not c.is_free():
        raise ValueError("Hom(C, G) needs a free complex")
    if g.rank and g.torsion or len(set(g.torsion)) > 1:
        raise ValueError("coefficients must be free or a power of one cyclic group; split the group first")
    k = g.ngens
    groups = {n: _block_group(g, c.dim(n)) for n in c.degrees}
    d = {}
    for n, m in c.d.items():
        # C_n -> C_{n+step}; dual goes Hom(C_{n+step}, G) -> Hom(C_n, G)
        d[n + c.step] = m.transpose().kron_identity(k)
    return ChainComplex(groups, d, not c.cohomological)


def _block_group(g: FGAbelianGroup, copies: int) -> FGAbelianGroup:
    """``G^copies`` kept in block coordinates when that is already canonical."""
    if copies == 0 or g.is_trivial():
        return FGAbelianGroup()
    if not g.torsion:
        return FGAbelianGroup.free(g.rank * copies)
    return FGAbelianGroup(0, g.torsion * copies)


@dataclass
class ChainMap:
    """Degreewise matrices ``source_n -> target_n``."""

    source: ChainComplex
    target: ChainComplex
    maps: dict[int, IntegerMatrix] = field(default_factory=dict)

    def at(self, n: int) -> IntegerMatrix:
        m = self.maps.get(n)
        if m is None:
            return IntegerMatrix.zeros(self.target.dim(n), self.source.dim(n))
        return m

    def is_chain_map(self) -> bool:
        degs = set(self.source.degrees) | set(self.target.degrees)
        st = self.source.step
        for n in degs:
            lhs = self.target.differential(n) @ self.at(n)
            rhs = self.at(n + st) @ self.source.differential(n)
            if not reduce_matrix(self.target.group(n + st), lhs - rhs).is_zero():
                return False
        return True


def mapping_cone(f: ChainMap) -> ChainComplex:
    """Cone of ``f``; acyclic iff ``f`` is a quasi-isomorphism.

    Cohomological convention: ``Cone^n = A^{n+1} ⊕ B^n`` with
    ``d(a, b) = (-d a, f a + d b)``.  The homological version is the dual
    arrangement ``Cone_n = A_{n-1} ⊕ B_n``.
    """
    A, B = f.source, f.target
    if A.cohomological != B.cohomological:
        raise ValueError("mixed orientations")
    st = A.step
    degs = sorted(set(n - st for n in A.degrees) | set(B.degrees))
    groups = {n: A.dim(n + st) + B.dim(n) for n in degs}
    d = {}
    for n in degs:
        a_src, b_src = A.dim(n + st), B.dim(n)
        a_tgt, b_tgt = A.dim(n + 2 * st), B.dim(n + st)
        top = (-A.differential(n + st)).hstack(IntegerMatrix.zeros(a_tgt, b_src))
        bot = f.at(n + st).hstack(B.differential(n))
        d[n] = top.vstack(bot)
        assert d[n].shape == (a_tgt + b_tgt, a_src + b_src)
    if A.is_free() and B.is_free():
        return ChainComplex(groups, d, A.cohomological)
    summands = {n: [A.group(n + st), B.group(n)] for n in degs}
    cone, _ = complex_from_blocks(summands, {n: d[n] for n in degs if n + st in summands}, A.cohomological)
    return cone


def is_quasi_isomorphism(f: ChainMap, degrees: Iterable[int] | None = None) -> bool:
    cone = mapping_cone(f)
    degs = cone.degrees if degrees is None else list(degrees)
    return all(cone.homology(n).is_trivial() for n in degs)


def complex_from_blocks(
    summands: Mapping[int, Sequence[FGAbelianGroup]],
    blocks: Mapping[int, IntegerMatrix],
    cohomological: bool = True,
) -> tuple[ChainComplex, dict[int, tuple[IntegerMatrix, IntegerMatrix]]]:
    """Complex whose terms are direct sums given in block coordinates.

    Each term is normalised; the returned dict holds, per degree, the
    ``(to_canonical, from_canonical)`` pair between block and canonical
    coordinates.
    """
    step = 1 if cohomological else -1
    groups, conv = {}, {}
    for n, parts in summands.items():
        G, to_c, from_c = BlockGroup(parts).normalised()
        groups[n] = G
        conv[n] = (to_c, from_c)
    d = {}
    for n, m in blocks.items():
        if n not in groups or n + step not in groups:
            continue
        d[n] = conv[n + step][0] @ m @ conv[n][1]
    return ChainComplex(groups, d, cohomological), conv
