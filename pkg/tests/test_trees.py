import pytest

from flexsheaf.exactalg import FGAbelianGroup
from flexsheaf.trees import (
    PlanarTree,
    TreeCell,
    boundary_subcomplex,
    enumerate_trees,
    tree_cell_complex,
    verify_disk,
)

from .oracles import binary_tree_count, planar_tree_count


@pytest.mark.parametrize("n", range(5))
def test_tree_counts(n):
    trees = enumerate_trees(n)
    assert len(trees) == planar_tree_count(n + 2)
    assert sum(t.is_binary() for t in trees) == binary_tree_count(n + 2)


def test_small_tree_counts_frozen():
    assert [len(enumerate_trees(n)) for n in range(3)] == [1, 3, 11]


def test_width_one_complex():
    cx = tree_cell_complex(1)
    assert cx.counts() == [3, 2]
    assert cx.euler_characteristic() == 1


def test_width_two_complex():
    cx = tree_cell_complex(2)
    assert cx.euler_characteristic() == 1
    top = [c for c in cx.cells[2] if not c.frozen]
    assert len(top) == binary_tree_count(4) == 5


@pytest.mark.parametrize("n", range(1, 6))
def test_boundary_squares_to_zero(n):
    assert tree_cell_complex(n).complex.check_square_zero() is None


def test_verify_disk_width_one():
    rep = verify_disk(1)
    assert rep.ok
    assert rep.details["homology"][0] == "Z"
    assert rep.details["boundary_homology"][0] == "Z^2"


def test_verify_disk_width_two():
    rep = verify_disk(2)
    assert rep.ok
    assert rep.details["boundary_euler_characteristic"] == 0
    assert rep.details["boundary_homology"] == {0: "Z", 1: "Z", 2: "0"}


@pytest.mark.parametrize("n", [3, 4])
def test_verify_disk_larger(n):
    rep = verify_disk(n)
    assert rep.ok
    assert rep.details["euler_characteristic"] == 1
    assert rep.details["boundary_euler_characteristic"] == 1 + (-1) ** (n - 1)


def test_cell_count_formula():
    # every tree contributes one cell per subset of frozen internal edges
    for n in range(1, 4):
        total = sum(2 ** len(t.edges) for t in enumerate_trees(n))
        assert sum(tree_cell_complex(n).counts()) == total
        assert sum(boundary_subcomplex(n).counts()) == total - len(enumerate_trees(n))


def test_tree_validation():
    with pytest.raises(ValueError):
        PlanarTree(4, ((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        PlanarTree(3, ((0, 2),))
    t = PlanarTree(4, ((0, 1), (0, 2)))
    assert t.is_binary()
    assert str(t) == "(((0 1) 2) 3)"
    assert t.arities() == [2, 2, 2]
    with pytest.raises(ValueError):
        TreeCell(t, frozenset({(1, 2)}))


def test_faces_of_a_square_cell():
    t = PlanarTree(4, ((0, 1), (0, 2)))
    faces = TreeCell(t, frozenset()).boundary()
    assert len(faces) == 4
    assert sum(s for _, s in faces) == 0


def test_invalid_width():
    with pytest.raises(ValueError):
        verify_disk(0)
    assert tree_cell_complex(1).complex.homology(0) == FGAbelianGroup.free(1)
