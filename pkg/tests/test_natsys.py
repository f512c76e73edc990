import random
from itertools import product as cartesian

import pytest

from flexsheaf.exactalg import FGAbelianGroup
from flexsheaf.fincat import (
    Subcategory,
    arrow_category,
    interval_I,
    interval_Ibar,
    product,
    strip_subcategories,
    terminal,
)
from flexsheaf.natsys import (
    constant_natsys,
    flex05_criterion,
    full_cells,
    lambda_nerve,
    pc_cohomology,
    pc_complex,
    random_natsys,
    subcategory_cells,
)

Z = FGAbelianGroup.free(1)
Z2 = FGAbelianGroup.cyclic(2)
ZERO = FGAbelianGroup()


def composable_pairs_brute(c) -> int:
    return sum(1 for f, g in cartesian(c.morphisms, repeat=2) if c.tgt[f] == c.src[g])


def test_terminal_cells():
    cells = full_cells(terminal(), 2)
    assert [len(cells.of_length(n)) for n in range(4)] == [1, 1, 1, 1]


def test_arrow_cells():
    a = arrow_category()
    cells = full_cells(a, 2)
    assert len(cells.of_length(1)) == 3
    # three morphisms of [1] give four composable pairs
    assert len(cells.of_length(2)) == composable_pairs_brute(a) == 4


def test_subcategory_cells_whole_is_full():
    a = arrow_category()
    assert subcategory_cells(a, [Subcategory.whole(a)], 2).cells == full_cells(a, 2).cells


def test_strip_cells_do_not_mix():
    big, subs = strip_subcategories(arrow_category(), 2)
    cells = subcategory_cells(big, subs, 2)
    assert cells.check_closed().ok
    for t in cells.of_length(2):
        assert any(all(m in s.morphisms for m in t) for s in subs)
    assert len(cells.of_length(2)) < len(full_cells(big, 2).of_length(2))


def test_disjoint_subcategories_give_disjoint_union():
    big, subs = strip_subcategories(arrow_category(), 2)
    left = Subcategory.full(big, ["(0,0)", "(1,0)"], "left")
    right = Subcategory.full(big, ["(0,2)", "(1,2)"], "right")
    both = subcategory_cells(big, [left, right], 2)
    for n in range(1, 3):
        one = subcategory_cells(big, [left], 2).of_length(n)
        two = subcategory_cells(big, [right], 2).of_length(n)
        assert sorted(both.of_length(n)) == sorted(one + two)


@pytest.mark.parametrize("c", [terminal(), arrow_category()], ids=["terminal", "arrow"])
def test_pc_cohomology_constant_z(c):
    H = pc_cohomology(c, full_cells(c, 3), constant_natsys(c, Z), 2)
    assert H == {0: Z, 1: ZERO, 2: ZERO}


def test_pc_square_zero_random():
    rng = random.Random(5)
    c = product(arrow_category(), arrow_category())
    for _ in range(5):
        G = random_natsys(c, rng)
        assert G.check().ok
        cx = pc_complex(c, full_cells(c, 3), G, 2)
        assert cx.check_square_zero() is None


def test_lambda_nerve_point_homology():
    c = terminal()
    L = lambda_nerve(c, full_cells(c, 3), c.morphisms[0])
    assert L.homology()[0] == Z and all(g.is_trivial() for d, g in L.homology().items() if d)
    big, subs = strip_subcategories(arrow_category(), 2)
    long_arrow = "(0->1,2->0)"
    for cells in (full_cells(big, 3), subcategory_cells(big, subs, 3)):
        H = lambda_nerve(big, cells, long_arrow).homology()
        assert H[0] == Z and all(g.is_trivial() for d, g in H.items() if d)


def test_flex05_whole_category():
    a = arrow_category()
    assert flex05_criterion(a, [Subcategory.whole(a)], [Z]).ok


def test_flex05_strips():
    big, subs = strip_subcategories(arrow_category(), 2)
    rep = flex05_criterion(big, subs, [Z, Z2])
    assert rep.ok
    assert all(rep.per_morphism.values()) and rep.pc_comparison == {"Z": True, "Z/2": True}


def test_flex05_ibar_versus_i():
    a = arrow_category()
    big = product(a, interval_Ibar())
    sub = Subcategory(frozenset(big.objects), frozenset(product(a, interval_I()).morphisms), "XxI")
    assert sub.validate(big).ok
    assert flex05_criterion(big, [sub], [Z, Z2]).ok


def test_flex05_fails_when_cells_miss_a_morphism():
    # the discrete subcategory misses the arrow, so Λ(φ) is empty for it
    a = arrow_category()
    disc = Subcategory(frozenset(a.objects), frozenset(a.identities.values()), "discrete")
    rep = flex05_criterion(a, [disc], [Z])
    assert not rep.ok
    assert rep.per_morphism["0->1"] is False


def test_natsys_check_detects_bad_translation():
    a = arrow_category()
    G = constant_natsys(a, Z)
    pair = next(iter(G.left))
    G.left[pair] = G.left[pair].scale(2)
    assert not G.check().ok
