import random

import pytest

from flexsheaf.cech import nonabelian_h0_h1
from flexsheaf.fincat import check_category, terminal
from flexsheaf.groups import cyclic, find_isomorphism, symmetric, trivial_group
from flexsheaf.presheaf import locally_constant_group, presheaf_from_spec, sheafify
from flexsheaf.simplicial import kan_check
from flexsheaf.site import CoveringFamily, fixture_site, resolve_cover
from flexsheaf.stacks import (
    Stackification,
    bg_groupoid,
    bg_pseudofunctor,
    block_groupoid,
    check_pseudofunctor,
    constant_bg,
    descent_category,
    descent_comparison,
    discrete_pseudofunctor,
    equivalence_report,
    find_equivalence,
    fixture_pseudofunctor,
    fundamental_groupoid,
    grothendieck_construction,
    homotopy_group_sheaves_of,
    is_stack,
    nerve_of,
    objectwise_equivalences,
    perturb,
    pi0_presheaf,
    poincare_groupoid,
    random_pseudofunctor,
    stackify,
    strictify,
    torsor_groupoid,
    torsor_stack,
    twisted_square,
)

S3 = symmetric(3)


@pytest.fixture(scope="module")
def circle():
    return fixture_site("pseudocircle")


@pytest.fixture(scope="module")
def circle_stackification(circle):
    return Stackification(constant_bg(circle, S3), circle)


# -- groupoids --------------------------------------------------------------


def test_bg_groupoid():
    g = bg_groupoid(S3)
    assert g.check().ok
    assert len(g.objects) == 1 and len(g.morphisms) == 6
    assert g.invariants() == [6]


def test_block_groupoid_equivalent_to_bg():
    b = block_groupoid([["x", "y"]], cyclic(3))
    assert b.check().ok and b.invariants() == [3]
    F = find_equivalence(b, bg_groupoid(cyclic(3)))
    assert F is not None and equivalence_report(F).ok
    assert find_equivalence(b, bg_groupoid(cyclic(2))) is None


# -- pseudofunctors -----------------------------------------------------------


def test_strict_pseudofunctor_valid():
    P = bg_pseudofunctor(terminal(), S3)
    assert P.is_strict() and check_pseudofunctor(P).ok


def test_twisted_square_valid_and_not_strict():
    P = twisted_square()
    assert check_pseudofunctor(P).ok
    assert not P.is_strict()


def test_perturbed_twisted_square_names_triple():
    P = perturb(twisted_square(), "(0->1,0->1)", "(id_0,id_0)", "*", "x>x:1")
    rep = check_pseudofunctor(P)
    assert not rep.ok
    assert any("cocycle fails at triple" in v for v in rep.violations)
    assert "violating_triple" in rep.details


def test_grothendieck_terminal_base_is_bg():
    res = grothendieck_construction(bg_pseudofunctor(terminal(), S3))
    assert res.report.ok
    assert len(res.category.objects) == 1 and len(res.category.morphisms) == 6


def test_grothendieck_twisted_square():
    P = twisted_square()
    res = grothendieck_construction(P)
    assert res.report.ok and check_category(res.category).ok
    assert len(res.category.objects) == sum(len(P.fibers[x].objects) for x in P.base.objects) == 5
    assert len(res.category.morphisms) == 45


# -- strictification --------------------------------------------------------


def test_strictify_strict_input():
    st = strictify(bg_pseudofunctor(fixture_site("coarse:square").category, cyclic(2)))
    assert st.report.ok and st.strict.is_strict()


def test_strictify_twisted_square():
    P = twisted_square()
    st = strictify(P)
    assert st.report.ok
    assert st.strict.is_strict()
    for x in P.base.objects:
        assert equivalence_report(st.comparison[x]).ok
        assert st.strict.fibers[x].invariants() == P.fibers[x].invariants()


def test_strictify_random():
    rng = random.Random(2024)
    for _ in range(5):
        P = random_pseudofunctor(rng)
        assert check_pseudofunctor(P).ok
        st = strictify(P)
        assert st.report.ok
        for x in P.base.objects:
            assert st.strict.fibers[x].invariants() == P.fibers[x].invariants()


# -- descent -----------------------------------------------------------------


def test_descent_singleton_cover(circle):
    P = constant_bg(circle, S3)
    desc = descent_category(P, circle, CoveringFamily("X", ("id_X",)))
    assert equivalence_report(descent_comparison(P, desc)).ok


def test_descent_classes_match_nonabelian_h1(circle):
    P = constant_bg(circle, S3)
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    desc = descent_category(P, circle, fam)
    h = nonabelian_h0_h1(circle, fam, locally_constant_group(circle, S3))
    assert len(desc.groupoid.components()) == h.count == 3


def test_descent_of_discrete_sheaf_is_sections(circle):
    F = presheaf_from_spec(circle, "locally-constant:p,q", "set")
    P = discrete_pseudofunctor(F)
    desc = descent_category(P, circle, resolve_cover(circle, "X", ["Uc", "Ud"]))
    assert len(desc.groupoid.objects) == len(desc.groupoid.components()) == F.size("X")


def test_bg_not_a_stack(circle):
    rep = is_stack(constant_bg(circle, S3), circle)
    assert not rep.ok
    assert "{Uc->X, Ud->X} -> X: not essentially surjective" in rep.violations[0]


def test_coarse_site_everything_is_stack():
    s = fixture_site("coarse:square")
    assert is_stack(twisted_square(), s).ok
    assert is_stack(bg_pseudofunctor(s.category, S3), s).ok


def test_torsor_stack_is_stack(circle):
    assert is_stack(torsor_stack(circle, cyclic(2)), circle).ok


# -- stackification ----------------------------------------------------------


def test_stackify_bg_circle(circle, circle_stackification):
    S = circle_stackification.pseudofunctor
    assert check_pseudofunctor(S).ok
    assert is_stack(S, circle).ok
    assert len(S.fibers["X"].components()) == 3
    assert S.fibers["X"].invariants() == [2, 3, 6]
    for x in circle.category.objects:
        assert equivalence_report(circle_stackification.unit(x)).ok == (x != "X")


def test_stackify_is_idempotent_up_to_equivalence(circle, circle_stackification):
    again = Stackification(circle_stackification.pseudofunctor, circle)
    assert all(equivalence_report(again.unit(x)).ok for x in circle.category.objects)


def test_stackify_discrete_matches_sheafify(circle):
    F = presheaf_from_spec(circle, "constant:p,q", "set")
    S = stackify(discrete_pseudofunctor(F), circle)
    aF, _ = sheafify(F, circle)
    for x in circle.category.objects:
        g = S.fibers[x]
        assert len(g.components()) == aF.size(x)
        assert set(g.invariants()) <= {1}


def test_torsor_groupoid_counts(circle):
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    T = torsor_groupoid(locally_constant_group(circle, S3), circle, fam)
    assert len(T.components()) == 3
    T = torsor_groupoid(locally_constant_group(circle, trivial_group()), circle, fam)
    assert len(T.components()) == 1


def test_trivial_torsor_automorphisms(circle):
    fam = resolve_cover(circle, "X", ["Uc", "Ud"])
    G = locally_constant_group(circle, S3)
    T = torsor_groupoid(G, circle, fam)
    aut, _ = T.vertex_group(T.objects[0])
    h = nonabelian_h0_h1(circle, fam, G)
    assert find_isomorphism(aut, h.h0) is not None


# -- homotopy sheaves --------------------------------------------------------


def test_homotopy_sheaves_of_torsor_stack(circle, circle_stackification):
    S = circle_stackification.pseudofunctor
    pi0, pi1 = homotopy_group_sheaves_of(S, circle)
    assert all(pi0.size(x) == 1 for x in circle.category.objects)
    assert sorted(g.group("X").order for g in pi1.values()) == [2, 3, 6]


def test_homotopy_sheaves_of_discrete(circle):
    F = presheaf_from_spec(circle, "locally-constant:p,q", "set")
    pi0, pi1 = homotopy_group_sheaves_of(discrete_pseudofunctor(F), circle)
    assert all(pi0.size(x) == F.size(x) for x in circle.category.objects)
    assert all(G.group(x).order == 1 for G in pi1.values() for x in circle.category.objects)


def test_stackify_preserves_homotopy_sheaves(circle, circle_stackification):
    P = constant_bg(circle, S3)
    a0, a1 = homotopy_group_sheaves_of(P, circle)
    b0, b1 = homotopy_group_sheaves_of(circle_stackification.pseudofunctor, circle)
    assert [a0.size(x) for x in circle.category.objects] == [b0.size(x) for x in circle.category.objects]
    assert pi0_presheaf(P).size("X") == 1


# -- nerves and the Poincaré groupoid ----------------------------------------


def test_nerve_of_bg():
    N, _ = nerve_of(bg_pseudofunctor(terminal(), S3), 2)
    X = N.values[terminal().objects[0]]
    assert X.counts()[:2] == [1, 5]
    assert kan_check(X, 2).ok


def test_fundamental_groupoid_of_nerve():
    N, _ = nerve_of(twisted_square())
    for x, X in N.values.items():
        g, _ = fundamental_groupoid(X)
        assert g.invariants() == twisted_square().fibers[x].invariants()


def test_round_trip_twisted_square():
    P = twisted_square()
    N, st = nerve_of(P)
    Q = poincare_groupoid(N)
    eqs = objectwise_equivalences(Q, st.strict)
    assert all(F is not None and equivalence_report(F).ok for F in eqs.values())


def test_fixture_names(circle):
    assert fixture_pseudofunctor("bg:Z2", circle).name == "bg:Z2"
    with pytest.raises(KeyError):
        fixture_pseudofunctor("nope", circle)
