from itertools import permutations

import pytest

from flexsheaf.cech import NotASheaf
from flexsheaf.exactalg import ChainComplex, FGAbelianGroup, IntegerMatrix
from flexsheaf.groups import symmetric
from flexsheaf.nonab import (
    NonabelianComplex,
    cohomology,
    e2_diagonal,
    em_tower_homotopy,
    fixture_complex,
    from_abelian_complex,
    rebase,
    s3_endpoint,
    same_cohomology,
    tower_e2_page,
    trivial_complex,
    validate,
)
from flexsheaf.presheaf import presheaf_from_spec
from flexsheaf.site import fixture_site

Z = FGAbelianGroup.free(1)
ZERO = FGAbelianGroup()


def brute_stabilizer_and_orbits(n_points: int, base: int) -> tuple[int, int]:
    perms = list(permutations(range(n_points)))
    stab = sum(1 for p in perms if p[base] == base)
    orbits, seen = 0, set()
    for x in range(n_points):
        if x not in seen:
            orbits += 1
            seen |= {p[x] for p in perms}
    return stab, orbits


@pytest.mark.parametrize("n", [1, 2, 3])
def test_trivial_complex(n):
    nc = trivial_complex(n)
    assert validate(nc).ok
    assert all(cohomology(nc, i).size == 1 for i in range(n + 1))


@pytest.mark.parametrize("n", [2, 3])
def test_s3_endpoint(n):
    nc = s3_endpoint(n)
    assert validate(nc).ok
    stab, orbits = brute_stabilizer_and_orbits(3, 0)
    top = cohomology(nc, n - 1)
    assert top.kind == "group" and top.group.order == stab == 2
    last = cohomology(nc, n)
    assert last.kind == "pointed_set" and len(last.classes) == orbits == 1
    assert cohomology(nc, n).describe() == "pointed set with 1 classes"


def test_fixture_names():
    assert fixture_complex("s3-endpoint").n == 2
    assert fixture_complex("s3-endpoint:4").n == 4
    assert fixture_complex("trivial:3").n == 3
    with pytest.raises(KeyError):
        fixture_complex("nope")


def circle_cochains() -> ChainComplex:
    # cochains of the triangle boundary, then padded with a zero degree 2
    d0 = IntegerMatrix.from_rows([[-1, 1, 0], [-1, 0, 1], [0, -1, 1]])
    return ChainComplex({0: 3, 1: 3, 2: 0}, {0: d0, 1: IntegerMatrix.zeros(0, 3)}, cohomological=True)


def test_abelian_input_matches_homology():
    cx = ChainComplex({0: 1, 1: 1, 2: FGAbelianGroup.cyclic(2), 3: FGAbelianGroup.cyclic(2)},
                      {0: IntegerMatrix.from_rows([[2]]), 1: IntegerMatrix.from_rows([[1]]),
                       2: IntegerMatrix.from_rows([[0]])}, cohomological=True)
    nc = from_abelian_complex(cx, 3)
    assert validate(nc).ok
    for i in range(3):
        got = cohomology(nc, i)
        expect = cx.homology(i)
        if got.kind == "abelian":
            assert got.abelian == expect
        else:
            assert got.size == expect.order()
    assert cohomology(nc, 3).size == cx.homology(3).order()


def test_violation_reported():
    nc = s3_endpoint(2)
    bad = NonabelianComplex(nc.n, nc.abelian, nc.d, nc.group, nc.top_map, nc.action, [1, 0, 0], nc.point, "bad")
    assert not validate(bad).ok
    with pytest.raises(ValueError):
        cohomology(bad, 2)


def test_rebase_preserves_cohomology():
    nc = s3_endpoint(2)
    for g in nc.group.elements():
        other = rebase(nc, g)
        for i in range(3):
            assert same_cohomology(cohomology(nc, i), cohomology(other, i))


def test_em_tower_homotopy():
    cx = circle_cochains()
    assert em_tower_homotopy(cx, 1, 2) == Z
    assert em_tower_homotopy(cx, 2, 2) == Z
    assert em_tower_homotopy(cx, 0, 2) == ZERO


def test_tower_page_single_sheaf_matches_sections():
    from flexsheaf.simplicial import brown_sections

    s = fixture_site("pseudocircle")
    G = presheaf_from_spec(s, "locally-constant:Z")
    page = tower_e2_page(s, {2: G}, "X")
    for j in range(3):
        diag = e2_diagonal(page, j)
        got = next(iter(diag.values()), ZERO)
        assert got == brown_sections(s, "X", G, 2, j).group


def test_tower_page_zero_and_block():
    s = fixture_site("pseudocircle")
    zero = presheaf_from_spec(s, "locally-constant:0")
    assert all(g.is_trivial() for g in tower_e2_page(s, {1: zero, 2: zero}, "X").values())
    G = presheaf_from_spec(s, "locally-constant:Z")
    page = tower_e2_page(s, {1: G, 2: G}, "X")
    nonzero = {k for k, g in page.items() if not g.is_trivial()}
    assert nonzero == {(0, 1), (-1, 1), (0, 2), (-1, 2)}
    assert all(page[k] == Z for k in nonzero)


def test_tower_page_rejects_presheaf():
    s = fixture_site("pseudocircle")
    with pytest.raises(NotASheaf):
        tower_e2_page(s, {1: presheaf_from_spec(s, "constant:Z")}, "X")


def test_s3_action_is_symmetric_group():
    nc = s3_endpoint(2)
    assert nc.group.order == symmetric(3).order
