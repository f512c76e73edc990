"""Randomised invariant checks; every suite runs at least 1000 cases."""

import random
from itertools import combinations

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from flexsheaf.cech import cech_complex
from flexsheaf.exactalg import (
    ChainComplex,
    FGAbelianGroup,
    IntegerMatrix,
    invariant_factors,
    kernel_basis,
    smith_normal_form,
)
from flexsheaf.fincat import from_poset
from flexsheaf.fincat import nerve as category_nerve
from flexsheaf.natsys import full_cells, pc_complex, random_natsys
from flexsheaf.presheaf import AbPresheaf, is_sheaf, random_group_presheaf, random_poset_functor, random_set_presheaf, sheafify
from flexsheaf.simplicial import dold_kan, moore_complex, truncate_complex
from flexsheaf.site import FiniteTopSpace, check_site, family_of_sieve, fixture_site, open_cover_site
from flexsheaf.stacks import check_pseudofunctor, random_pseudofunctor

from .oracles import rank_q

CASES = settings(max_examples=1000, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(min_value=0, max_value=2**32 - 1)
SITES = {name: fixture_site(name) for name in ("pseudocircle", "pseudosphere")}


def small_matrix(rng: random.Random, rows: int, cols: int, bound: int = 4) -> IntegerMatrix:
    return IntegerMatrix.from_rows([[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)], ncols=cols)


def random_complex(rng: random.Random) -> ChainComplex:
    # d1 is random and d2 factors through ker d1, so d1 d2 = 0 by construction
    r0, r1, r2 = (rng.randint(0, 3) for _ in range(3))
    d1 = small_matrix(rng, r0, r1, 3)
    k = kernel_basis(d1)
    d2 = k @ small_matrix(rng, k.shape[1], r2, 2)
    return ChainComplex({0: r0, 1: r1, 2: r2}, {1: d1, 2: d2}, cohomological=False)


def random_ab_presheaf(s, rng: random.Random) -> AbPresheaf:
    # functions T(U) -> Z/n for a random covariant T, restricted by precomposition
    c = s.category
    tvals, tmaps = random_poset_functor(c, rng, 2, contravariant=False)
    base = FGAbelianGroup.free(1) if rng.random() < 0.5 else FGAbelianGroup.cyclic(rng.choice([2, 3]))
    values = {x: base.power(len(tvals[x])) for x in c.objects}
    res = {}
    for f in c.morphisms:
        x, y = c.src[f], c.tgt[f]
        res[f] = IntegerMatrix.from_entries(len(tvals[x]), len(tvals[y]), {(a, tmaps[f][a]): 1 for a in tvals[x]})
    return AbPresheaf(c, values, res, "random")


def random_space(rng: random.Random) -> tuple[FiniteTopSpace, dict[str, set[str]]]:
    pts = [chr(ord("a") + i) for i in range(rng.randint(1, 4))]
    below = {p: {p} | {q for q in pts if rng.random() < 0.3} for p in pts}
    changed = True
    while changed:
        changed = False
        for p in pts:
            closure = set().union(*(below[q] for q in below[p]))
            if closure != below[p]:
                below[p], changed = closure, True
    return FiniteTopSpace.from_minimal_opens({p: sorted(v) for p, v in below.items()}, "random"), below


def random_poset(rng: random.Random):
    n = rng.randint(1, 4)
    elems = [str(i) for i in range(n)]
    # a random order compatible with the integer order is automatically acyclic
    rel = {(a, b) for a, b in combinations(elems, 2) if rng.random() < 0.5}
    changed = True
    while changed:
        new = {(a, c) for a, b in rel for b2, c in rel if b == b2} - rel
        rel |= new
        changed = bool(new)
    return from_poset(elems, lambda a, b: a == b or (a, b) in rel, "random")


# -- exact algebra ------------------------------------------------------------


@CASES
@given(seeds)
def test_smith_form_is_a_factorisation(seed):
    rng = random.Random(seed)
    m = small_matrix(rng, rng.randint(0, 4), rng.randint(0, 4))
    D, U, V = smith_normal_form(m)
    assert U @ m @ V == D
    diag = [D[i, i] for i in range(min(D.shape)) if D[i, i]]
    assert all(d > 0 for d in diag)
    assert all(b % a == 0 for a, b in zip(diag, diag[1:]))
    assert D.nnz() == len(diag) == rank_q(m.to_rows())
    assert invariant_factors(m) == diag


@CASES
@given(seeds)
def test_random_complexes_square_to_zero(seed):
    C = random_complex(random.Random(seed))
    assert C.check_square_zero() is None
    # rank-nullity gives the free ranks independently of the Smith form
    r1, r2 = rank_q(C.differential(1).to_rows()), rank_q(C.differential(2).to_rows())
    H = C.homology_all()
    assert H[1].rank == C.groups[1].ngens - r1 - r2


# -- simplicial identities -----------------------------------------------------


@CASES
@given(seeds)
def test_dold_kan_identities_and_inverse(seed):
    C = random_complex(random.Random(seed))
    A = dold_kan(C, 3)
    assert A.check_identities() == []
    N = moore_complex(A, 3)
    for k in range(3):
        assert N.homology(k) == C.homology(k)


@CASES
@given(seeds)
def test_nerve_identities_on_random_posets(seed):
    c = random_poset(random.Random(seed))
    assert category_nerve(c, 3).check_identities() == []


@CASES
@given(seeds)
def test_truncation_keeps_low_homology(seed):
    rng = random.Random(seed)
    C = random_complex(rng)
    n = rng.randint(0, 2)
    T = truncate_complex(C, n)
    for k in range(3):
        expect = C.homology(k) if k <= n else FGAbelianGroup()
        assert T.homology(k) == expect


# -- sites, presheaves and Čech complexes -------------------------------------------


@CASES
@given(seeds)
def test_site_axioms_on_random_spaces(seed):
    space, below = random_space(random.Random(seed))
    s = open_cover_site(space)
    assert check_site(s).ok
    pts = sorted(below)
    downsets = sum(1 for r in range(len(pts) + 1) for sub in combinations(pts, r)
                   if all(below[p] <= set(sub) for p in sub))
    assert len(s.category.objects) == downsets


@CASES
@given(seeds, st.sampled_from(sorted(SITES)))
def test_cech_square_zero(seed, name):
    rng = random.Random(seed)
    s = SITES[name]
    F = random_ab_presheaf(s, rng)
    assert F.check().ok
    x = rng.choice(s.category.objects)
    fam = family_of_sieve(s, rng.choice(s.covering_sieves(x)))
    assert cech_complex(s, fam, F, 3).check_square_zero() is None


@CASES
@given(seeds, st.sampled_from(sorted(SITES)))
def test_sheafify_outputs_a_sheaf(seed, name):
    rng = random.Random(seed)
    s = SITES[name]
    F = random_set_presheaf(s, rng) if rng.random() < 0.7 else random_group_presheaf(s, rng)
    aF, _ = sheafify(F, s)
    assert is_sheaf(aF, s).ok


# -- natural systems and pseudofunctors -----------------------------------------


@CASES
@given(seeds)
def test_pc_complex_square_zero(seed):
    rng = random.Random(seed)
    c = random_poset(rng)
    G = random_natsys(c, rng)
    assert G.check().ok
    assert pc_complex(c, full_cells(c, 3), G, 2).check_square_zero() is None


@CASES
@given(seeds)
def test_random_pseudofunctors_satisfy_cocycle(seed):
    P = random_pseudofunctor(random.Random(seed))
    assert check_pseudofunctor(P).ok
