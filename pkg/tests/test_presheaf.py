import random

import pytest

from flexsheaf.exactalg import FGAbelianGroup
from flexsheaf.groups import symmetric
from flexsheaf.presheaf import (
    AbPresheaf,
    ab_to_group_presheaf,
    constant_ab,
    is_sheaf,
    locally_constant_group,
    plus_construction,
    presheaf_from_spec,
    random_group_presheaf,
    random_set_presheaf,
    sections_over_sieve,
    sheafify,
)
from flexsheaf.site import fixture_site, generate_sieve, resolve_cover

Z = FGAbelianGroup.free(1)
Z2 = FGAbelianGroup.free(2)
TRIVIAL = FGAbelianGroup()


@pytest.fixture(scope="module")
def circle():
    return fixture_site("pseudocircle")


def test_sections_over_maximal_sieve(circle):
    F = presheaf_from_spec(circle, "constant:Z")
    assert sections_over_sieve(F, circle, circle.maximal_sieve("X")).group == Z


@pytest.mark.parametrize("spec", ["constant:Z", "locally-constant:Z"])
def test_sections_over_two_member_cover(circle, spec):
    F = presheaf_from_spec(circle, spec)
    b = generate_sieve(circle, resolve_cover(circle, "X", ["Uc", "Ud"]))
    assert sections_over_sieve(F, circle, b).group == Z


def test_constant_z_not_a_sheaf(circle):
    rep = is_sheaf(presheaf_from_spec(circle, "constant:Z"), circle)
    assert not rep.ok
    # F(∅) = Z forces agreement on the empty overlap, so only ∅ fails here
    assert {f["object"] for f in rep.failures} == {"∅"}
    rep = is_sheaf(presheaf_from_spec(circle, "constant-nonempty:Z"), circle)
    assert {f["object"] for f in rep.failures} == {"{a,b}"}
    assert "Γ = Z^2" in rep.violations[0]


def test_locally_constant_is_sheaf(circle):
    assert is_sheaf(presheaf_from_spec(circle, "locally-constant:Z"), circle).ok
    assert is_sheaf(presheaf_from_spec(circle, "locally-constant:S3", "group"), circle).ok


def test_coarse_site_everything_is_sheaf():
    s = fixture_site("coarse:square")
    assert is_sheaf(presheaf_from_spec(s, "constant:Z/2"), s).ok
    rng = random.Random(3)
    assert is_sheaf(random_set_presheaf(s, rng), s).ok


def test_plus_construction_values(circle):
    HF, _ = plus_construction(presheaf_from_spec(circle, "constant:Z"), circle)
    assert HF.value("{a,b}") == Z
    assert HF.value("∅") == TRIVIAL
    HF, _ = plus_construction(presheaf_from_spec(circle, "constant-nonempty:Z"), circle)
    assert HF.value("{a,b}") == Z2
    assert HF.value("∅") == TRIVIAL


def test_plus_on_sheaf_is_iso(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z")
    _, eta = plus_construction(F, circle)
    assert eta.is_isomorphism()


def test_sheafify_constant_z(circle):
    aF, eta = sheafify(presheaf_from_spec(circle, "constant:Z"), circle)
    assert aF.value("X") == Z
    assert aF.value("{a,b}") == Z2
    assert aF.value("∅") == TRIVIAL
    assert is_sheaf(aF, circle).ok
    assert set(eta.failing_objects()) == {"∅", "{a,b}"}
    assert eta.is_natural()


def test_sheafify_sheaf_is_iso(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z/2")
    aF, eta = sheafify(F, circle)
    assert eta.is_isomorphism()


def test_group_sheafify(circle):
    G = presheaf_from_spec(circle, "constant:S3", "group")
    aG, eta = sheafify(G, circle)
    assert aG.group("{a,b}").order == 36
    assert aG.group("∅").order == 1
    assert is_sheaf(aG, circle).ok
    L = locally_constant_group(circle, symmetric(3))
    _, eta = sheafify(L, circle)
    assert eta.is_isomorphism()


def test_set_sheafify(circle):
    F = presheaf_from_spec(circle, "constant:p,q", "set")
    aF, _ = sheafify(F, circle)
    assert aF.size("{a,b}") == 4
    assert aF.size("∅") == 1


def test_presheaf_checks_restrictions(circle):
    F = constant_ab(circle.category, Z)
    assert F.check().ok
    with pytest.raises(ValueError):
        AbPresheaf(circle.category, F.values, {}, "missing")


def test_ab_to_group_presheaf(circle):
    F = presheaf_from_spec(circle, "locally-constant:Z/3")
    G = ab_to_group_presheaf(F)
    assert G.group("{a,b}").order == 9
    assert G.check().ok


def test_random_presheaves_valid(circle):
    rng = random.Random(11)
    for _ in range(10):
        assert random_set_presheaf(circle, rng).check().ok
        assert random_group_presheaf(circle, rng).check().ok


def test_bad_spec(circle):
    with pytest.raises(ValueError):
        presheaf_from_spec(circle, "weird:Z")
    with pytest.raises(ValueError):
        presheaf_from_spec(circle, "Z")
