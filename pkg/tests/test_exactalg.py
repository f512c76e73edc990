import pytest

from flexsheaf.exactalg import (
    AbHom,
    ChainComplex,
    ChainMap,
    FGAbelianGroup,
    IntegerMatrix,
    cohomology_with_coefficients,
    invariant_factors,
    is_quasi_isomorphism,
    kernel_basis,
    mapping_cone,
    smith_form,
    smith_normal_form,
    solve_integer,
)

Z = FGAbelianGroup.free(1)
Z2 = FGAbelianGroup.cyclic(2)


def circle_complex() -> ChainComplex:
    # triangle boundary: vertices 0,1,2, edges 01, 02, 12
    d1 = IntegerMatrix.from_rows([[-1, -1, 0], [1, 0, -1], [0, 1, 1]])
    return ChainComplex({0: 3, 1: 3}, {1: d1}, cohomological=False)


def point_complex() -> ChainComplex:
    return ChainComplex({0: 1}, {}, cohomological=False)


def test_smith_of_frozen_example():
    # gcd(entries) = 2 and |det| = 8 give diag(2, 4)
    D, U, V = smith_normal_form(IntegerMatrix.from_rows([[2, 4], [6, 8]]))
    assert D.to_rows() == [[2, 0], [0, 4]]


def test_smith_transforms_are_consistent():
    m = IntegerMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    D, U, V = smith_normal_form(m)
    assert (U @ m @ V).to_rows() == D.to_rows()
    assert invariant_factors(m) == [2, 6, 12]


@pytest.mark.parametrize("m", [IntegerMatrix.identity(3), IntegerMatrix.zeros(2, 3)])
def test_smith_identity_and_zero(m):
    D, _, _ = smith_normal_form(m)
    assert D.to_rows() == m.to_rows()


def test_homology_of_triangle_boundary():
    c = circle_complex()
    assert c.homology(0) == Z
    assert c.homology(1) == Z


def test_homology_of_point():
    c = point_complex()
    assert c.homology(0) == Z
    assert c.homology(1) == FGAbelianGroup()


def test_multiplication_by_two():
    c = ChainComplex({0: 1, 1: 1}, {1: IntegerMatrix.from_rows([[2]])}, cohomological=False)
    assert c.homology(0) == Z2
    assert c.homology(1) == FGAbelianGroup()


def test_cohomology_with_coefficients():
    assert cohomology_with_coefficients(point_complex(), FGAbelianGroup.cyclic(3), 0) == FGAbelianGroup.cyclic(3)
    c = circle_complex()
    assert cohomology_with_coefficients(c, Z, 0) == Z
    assert cohomology_with_coefficients(c, Z, 1) == Z
    assert cohomology_with_coefficients(c, Z2, 1) == Z2


def test_parse_and_str_round_trip():
    for text in ["0", "Z", "Z/2", "Z^2 + Z/3", "Z/2 + Z/4"]:
        g = FGAbelianGroup.parse(text)
        assert FGAbelianGroup.parse(str(g)) == g
    assert str(FGAbelianGroup.parse("Z^2 + Z/3")) == "Z^2 + Z/3"
    with pytest.raises(ValueError):
        FGAbelianGroup.parse("Q")


def test_invalid_divisibility_rejected():
    with pytest.raises(ValueError):
        FGAbelianGroup(0, (2, 3))


def test_kernel_and_solve():
    m = IntegerMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    k = kernel_basis(m)
    assert k.shape[1] == 2
    assert (m @ k).is_zero()
    assert solve_integer(m, [1, 2]) is not None
    assert solve_integer(m, [1, 3]) is None


def test_abhom_on_torsion():
    double = AbHom(Z, Z, IntegerMatrix.from_rows([[2]]))
    assert double.is_injective() and not double.is_surjective()
    assert double.cokernel()[0] == Z2
    to_z2 = AbHom(Z, Z2, IntegerMatrix.from_rows([[1]]))
    assert to_z2.is_surjective()
    assert to_z2.kernel()[0] == Z


def test_square_zero_enforced():
    with pytest.raises(ValueError):
        ChainComplex({0: 1, 1: 1, 2: 1}, {2: IntegerMatrix.from_rows([[1]]), 1: IntegerMatrix.from_rows([[1]])},
                     cohomological=False)


def test_mapping_cone_detects_quasi_isomorphism():
    c = ChainComplex({0: 1}, {}, cohomological=False)
    iso = ChainMap(c, c, {0: IntegerMatrix.identity(1)})
    assert is_quasi_isomorphism(iso)
    cone = mapping_cone(iso)
    assert all(cone.homology(n).is_trivial() for n in cone.degrees)
    double = ChainMap(c, c, {0: IntegerMatrix.from_rows([[2]])})
    assert not is_quasi_isomorphism(double)


def test_smith_rank():
    assert smith_form(IntegerMatrix.from_rows([[1, 1], [1, 1]])).rank == 1
