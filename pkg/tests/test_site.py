from itertools import combinations

import pytest

from flexsheaf.fincat import arrow_category, terminal
from flexsheaf.site import (
    CoveringFamily,
    Site,
    cech_products,
    check_site,
    coarse,
    enumerate_sieves,
    fixture_site,
    generate_sieve,
    open_cover_site,
    pseudocircle_space,
    pullback_sieve,
    resolve_cover,
    top_object,
)


def count_down_sets(below: dict[str, str]) -> int:
    pts = sorted(below)
    return sum(1 for r in range(len(pts) + 1) for sub in combinations(pts, r)
               if all(set(below[p]) <= set(sub) for p in sub))


@pytest.fixture(scope="module")
def circle():
    return fixture_site("pseudocircle")


def test_generate_sieve_identity_is_maximal(circle):
    x = top_object(circle)
    assert generate_sieve(circle, CoveringFamily(x, (circle.category.identities[x],))) == circle.maximal_sieve(x)


def test_generate_sieve_of_two_member_cover(circle):
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    b = generate_sieve(circle, fam)
    sources = {circle.category.src[f] for f in b.arrows}
    assert sources == set(circle.category.objects) - {"X"}
    assert circle.is_covering(b)


def test_empty_family_gives_empty_sieve(circle):
    assert len(generate_sieve(circle, CoveringFamily("X", ()))) == 0


def test_pullback_sieve_examples(circle):
    c = circle.category
    b = generate_sieve(circle, resolve_cover(circle, "X", ["Uc", "Ud"]))
    assert pullback_sieve(circle, c.identities["X"], b) == b
    uc = c.hom("Uc", "X")[0]
    assert pullback_sieve(circle, uc, b) == circle.maximal_sieve("Uc")
    assert pullback_sieve(circle, uc, circle.maximal_sieve("X")) == circle.maximal_sieve("Uc")


@pytest.mark.parametrize("name", ["point", "pseudocircle", "pseudosphere", "two_cover_interval",
                                  "coarse:terminal", "coarse:arrow", "coarse:square"])
def test_fixture_sites_valid(name):
    assert check_site(fixture_site(name)).ok


def test_missing_pullback_warns():
    s = fixture_site("pseudocircle")
    fam = resolve_cover(s, "X", ["Uc", "Ud"])
    c = s.category
    drop = (c.hom("Uc", "X")[0], c.hom("Ud", "X")[0])
    pruned = Site(c, {x: [b.arrows for b in s.covering_sieves(x)] for x in c.objects},
                  {k: (e.obj, e.p1, e.p2) for k, e in s.pullbacks.items() if k != drop}, "pruned")
    rep = check_site(pruned, [fam])
    assert any("incomplete-pullbacks" in w for w in rep.warnings)


def test_sieve_enumeration_counts():
    t = coarse(terminal())
    sieves = enumerate_sieves(t, t.category.objects[0])
    assert len(sieves) == 2
    assert sum(cov for _, cov in sieves) == 1
    a = coarse(arrow_category())
    assert len(enumerate_sieves(a, "1")) == 3


def test_covering_sieves_have_a_minimum(circle):
    covering = circle.covering_sieves("X")
    least = circle.minimum_covering_sieve("X")
    assert circle.is_covering(least)
    assert all(least <= b for b in covering)


def test_open_cover_site_sizes():
    assert len(fixture_site("point").category.objects) == 2
    assert len(open_cover_site(pseudocircle_space()).category.objects) == 7
    below = {"a": "", "b": "", "c": "ab", "d": "ab", "e": "abcd", "f": "abcd"}
    assert len(fixture_site("pseudosphere").category.objects) == count_down_sets(below) == 10


def test_cech_products(circle):
    c = circle.category
    fam = CoveringFamily("X", (c.identities["X"],))
    idx = cech_products(circle, fam, 2)
    assert {idx.obj(t) for k in range(3) for t in idx.tuples(k)} == {"X"}
    idx = cech_products(circle, resolve_cover(circle, "X", ["Uc", "Ud"]), 2)
    assert idx.obj((0, 1)) == "{a,b}"
    assert idx.obj((0, 1, 0)) == "{a,b}"
    assert idx.check() == []


def test_local_objects(circle):
    assert set(circle.local_objects()) == {"Ua", "Ub", "Uc", "Ud"}


def test_resolve_cover_errors(circle):
    with pytest.raises(KeyError):
        resolve_cover(circle, "X", ["nope"])


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixture_site("torus")
