import pytest

from flexsheaf.cech import (
    NotASheaf,
    cech_cohomology,
    cech_colimit_cohomology,
    cech_complex,
    covered_by_local_objects,
    finest_cover,
    nonabelian_h0_h1,
    refinement_chain_map,
    sheaf_cohomology,
)
from flexsheaf.exactalg import FGAbelianGroup, is_quasi_isomorphism
from flexsheaf.presheaf import ab_to_group_presheaf, presheaf_from_spec
from flexsheaf.report import BudgetExceeded
from flexsheaf.site import CoveringFamily, fixture_site, resolve_cover

from .oracles import conjugacy_class_count_sym, finite_space_betti

Z = FGAbelianGroup.free(1)
ZERO = FGAbelianGroup()

CIRCLE_OPENS = {"a": {"a"}, "b": {"b"}, "c": {"a", "b", "c"}, "d": {"a", "b", "d"}}
SPHERE_OPENS = dict(CIRCLE_OPENS, e=set("abcde"), f=set("abcdf"))


@pytest.fixture(scope="module")
def circle():
    return fixture_site("pseudocircle")


@pytest.fixture(scope="module")
def sphere():
    return fixture_site("pseudosphere")


def test_singleton_cover(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z")
    fam = CoveringFamily("{a,b}", ("id_{a,b}",))
    assert cech_cohomology(circle, fam, F, 0) == FGAbelianGroup.free(2)
    assert cech_cohomology(circle, fam, F, 1) == ZERO
    assert cech_cohomology(circle, fam, F, 2) == ZERO


def test_pseudocircle_cover(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z")
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    # oracle: the order complex of the four points is a circle
    assert finite_space_betti(list("abcd"), CIRCLE_OPENS) == [1, 1]
    assert cech_cohomology(circle, fam, F, 0) == Z
    assert cech_cohomology(circle, fam, F, 1) == Z
    assert cech_cohomology(circle, fam, F, 2) == ZERO


def test_alternating_agrees(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z/2")
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    for i in range(3):
        assert cech_cohomology(circle, fam, F, i) == cech_cohomology(circle, fam, F, i, alternating=True)


def test_pseudosphere_cech_misses_h2(sphere):
    # every cover of X contains both Ue and Uf, whose overlap is a pseudocircle:
    # the Čech groups stay at Z, 0, 0 while sheaf cohomology has H^2 = Z
    F = presheaf_from_spec(sphere, "locally-constant:Z")
    fam = finest_cover(sphere, "X")
    assert str(fam) == "{Ue->X, Uf->X} -> X"
    assert [cech_cohomology(sphere, fam, F, i) for i in range(3)] == [Z, ZERO, ZERO]
    assert cech_colimit_cohomology(sphere, "X", F, 2)[0] == ZERO


def test_cech_complex_square_zero(sphere):
    F = presheaf_from_spec(sphere, "locally-constant:Z/2")
    cx = cech_complex(sphere, resolve_cover(sphere, "X", ["Ue", "Uf"]), F, 3)
    assert cx.check_square_zero() is None


def test_refinement_map_is_chain_map(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z")
    fine = resolve_cover(circle, "X", ["Uc", "Ud"])
    coarse = CoveringFamily("X", ("id_X",))
    phi, _, _ = refinement_chain_map(circle, fine, coarse, F, [0, 0], list(fine.members), 2)
    assert phi.is_chain_map()
    assert is_quasi_isomorphism(phi, [0]) and not is_quasi_isomorphism(phi, [1])


def test_nonabelian_trivial_group(circle):
    G = presheaf_from_spec(circle, "locally-constant:1", "group")
    assert nonabelian_h0_h1(circle, resolve_cover(circle, "X", ["Uc", "Ud"]), G).count == 1


def test_nonabelian_s3_on_circle(circle):
    G = presheaf_from_spec(circle, "locally-constant:S3", "group")
    h = nonabelian_h0_h1(circle, resolve_cover(circle, "X", ["Uc", "Ud"]), G)
    assert h.count == conjugacy_class_count_sym(3) == 3
    assert h.h0.order == 6
    assert sum(h.class_sizes) == h.cocycle_count


@pytest.mark.parametrize("coeff", ["Z/2", "Z/3", "Z/2 + Z/2"])
def test_nonabelian_matches_abelian(circle, coeff):
    F = presheaf_from_spec(circle, f"locally-constant:{coeff}")
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    h = nonabelian_h0_h1(circle, fam, ab_to_group_presheaf(F))
    assert h.count == cech_cohomology(circle, fam, F, 1).order()
    assert h.h0.order == cech_cohomology(circle, fam, F, 0).order()


def test_nonabelian_budget(circle):
    G = presheaf_from_spec(circle, "locally-constant:S3", "group")
    with pytest.raises(BudgetExceeded):
        nonabelian_h0_h1(circle, resolve_cover(circle, "X", ["Uc", "Ud"]), G, max_cocycles=3)


def test_sheaf_cohomology_point():
    s = fixture_site("point")
    F = presheaf_from_spec(s, "locally-constant:Z/5")
    x = s.category.terminal_objects()[0]
    assert sheaf_cohomology(s, x, F, 0) == FGAbelianGroup.cyclic(5)
    assert sheaf_cohomology(s, x, F, 1) == ZERO


def test_sheaf_cohomology_circle(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z")
    assert [sheaf_cohomology(circle, "X", F, i) for i in range(3)] == [Z, Z, ZERO]


def test_sheaf_cohomology_sphere(sphere):
    F = presheaf_from_spec(sphere, "locally-constant:Z")
    assert finite_space_betti(list("abcdef"), SPHERE_OPENS) == [1, 0, 1]
    assert [sheaf_cohomology(sphere, "X", F, i) for i in range(4)] == [Z, ZERO, Z, ZERO]


def test_sheaf_cohomology_requires_sheaf(circle):
    with pytest.raises(NotASheaf):
        sheaf_cohomology(circle, "X", presheaf_from_spec(circle, "constant:Z"), 1)
    F = presheaf_from_spec(circle, "constant:Z")
    assert sheaf_cohomology(circle, "X", F, 1, require_sheaf=False) == Z


def test_fixture_sites_covered_by_local_objects():
    for name in ["point", "pseudocircle", "pseudosphere", "coarse:square"]:
        assert covered_by_local_objects(fixture_site(name)) == []
