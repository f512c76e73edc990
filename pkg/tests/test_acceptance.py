"""Acceptance gate: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary by ``conftest.py``.  ``python -m
tests.test_acceptance`` prints them without pytest.
"""

import inspect
import random
import time
from itertools import permutations
from itertools import product as iter_product

import pytest

from flexsheaf.cech import cech_cohomology, nonabelian_h0_h1, sheaf_cohomology
from flexsheaf.exactalg import ChainComplex, FGAbelianGroup, IntegerMatrix, kernel_basis
from flexsheaf.fincat import Subcategory, arrow_category, interval_I, interval_Ibar, product, strip_subcategories
from flexsheaf.groups import cyclic, symmetric
from flexsheaf.natsys import flex05_criterion
from flexsheaf.nonab import cohomology, from_abelian_complex, s3_endpoint, validate
from flexsheaf.presheaf import (
    is_sheaf,
    plus_construction,
    presheaf_from_spec,
    random_group_presheaf,
    random_set_presheaf,
    sheafify,
)
from flexsheaf.simplicial import brown_sections, em_presheaf, homotopy_of_sections
from flexsheaf.site import FIXTURE_SITES, fixture_site, resolve_cover
from flexsheaf.stacks import (
    check_pseudofunctor,
    constant_bg,
    equivalence_report,
    is_stack,
    nerve_of,
    objectwise_equivalences,
    poincare_groupoid,
    random_pseudofunctor,
    stackify,
    strictify,
    torsor_stack,
    twisted_square,
)
from flexsheaf.trees import verify_disk

from . import test_properties

Z = FGAbelianGroup.free(1)
Z2 = FGAbelianGroup.cyclic(2)
ZERO = FGAbelianGroup()
OPEN_SITES = ("pseudocircle", "pseudosphere")
TOP_COVERS = {"pseudocircle": ["Uc", "Ud"], "pseudosphere": ["Ue", "Uf"]}

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(line(n))


def line(n: int) -> str:
    ok, detail = RESULTS[n]
    return f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


# -- criteria -------------------------------------------------------------------


def criterion_1() -> tuple[bool, str]:
    start = time.perf_counter()
    rng = random.Random(1)
    bad = []
    for name in OPEN_SITES:
        s = fixture_site(name)
        for i in range(50):
            F = random_set_presheaf(s, rng) if i % 2 == 0 else random_group_presheaf(s, rng)
            aF, _ = sheafify(F, s)
            if not is_sheaf(aF, s).ok:
                bad.append(f"{name}#{i}")
    s = fixture_site("pseudocircle")
    HF, _ = plus_construction(presheaf_from_spec(s, "constant:Z"), s)
    once_fails = not is_sheaf(HF, s).ok
    elapsed = time.perf_counter() - start
    ok = not bad and once_fails and elapsed < 10
    return ok, (f"100 sheafified presheaves, {len(bad)} not sheaves; single plus on constant Z "
                f"{'fails' if once_fails else 'passes'} is_sheaf; {elapsed:.2f}s")


def criterion_2() -> tuple[bool, str]:
    specs = [("constant:Z", "ab"), ("constant-nonempty:Z", "ab"), ("constant:Z/2", "ab"),
             ("locally-constant:Z", "ab"), ("locally-constant:Z/2", "ab"), ("constant:p,q", "set"),
             ("locally-constant:p,q", "set"), ("constant:S3", "group"), ("locally-constant:S3", "group")]
    rng = random.Random(2)
    checked, mismatches = 0, []
    for name in [*FIXTURE_SITES, "coarse:arrow", "coarse:square"]:
        s = fixture_site(name)
        cases = []
        for spec, kind in specs:
            try:
                cases.append(presheaf_from_spec(s, spec, kind))
            except ValueError:
                continue
        cases += [random_set_presheaf(s, rng) for _ in range(5)]
        for F in cases:
            _, eta = plus_construction(F, s)
            checked += 1
            if eta.is_isomorphism() != is_sheaf(F, s).ok:
                mismatches.append(f"{name}/{F.name}")
    return not mismatches, f"{checked} presheaves, F->HF iso iff sheaf fails on {mismatches or 'none'}"


def criterion_3() -> tuple[bool, str]:
    mismatches, checked = [], 0
    for name in OPEN_SITES:
        s = fixture_site(name)
        fam = resolve_cover(s, "X", TOP_COVERS[name])
        for coeff in ("Z", "Z/2"):
            G = presheaf_from_spec(s, f"locally-constant:{coeff}")
            for i in (1, 2):
                T = em_presheaf(G, i)
                for j in range(i + 2):
                    expect = cech_cohomology(s, fam, G, i - j) if j <= i else ZERO
                    checked += 1
                    if homotopy_of_sections(s, fam, T, j) != expect:
                        mismatches.append(f"{name} {coeff} i={i} j={j}")
    # expected oracle values: H^1 of the circle and H^2 of the sphere with Z coefficients
    got = {}
    for name, deg in (("pseudocircle", 1), ("pseudosphere", 2)):
        s = fixture_site(name)
        G = presheaf_from_spec(s, "locally-constant:Z")
        got[name] = cech_cohomology(s, resolve_cover(s, "X", TOP_COVERS[name]), G, deg)
    expected_ok = got["pseudocircle"] == Z and got["pseudosphere"] == Z
    ok = not mismatches and expected_ok
    return ok, (f"pi_j = cech H^(i-j) in {checked - len(mismatches)}/{checked} cases; "
                f"pseudocircle cech H^1 = {got['pseudocircle']} (want Z), "
                f"pseudosphere cech H^2 = {got['pseudosphere']} (want Z)")


def criterion_4() -> tuple[bool, str]:
    mismatches, checked = [], 0
    for name in OPEN_SITES:
        s = fixture_site(name)
        for coeff in ("Z", "Z/2"):
            G = presheaf_from_spec(s, f"locally-constant:{coeff}")
            for x in s.category.objects:
                for n in (1, 2):
                    for j in range(n + 2):
                        expect = sheaf_cohomology(s, x, G, n - j) if j <= n else ZERO
                        checked += 1
                        if brown_sections(s, x, G, n, j).group != expect:
                            mismatches.append(f"{name} {coeff} {x} n={n} j={j}")
    return not mismatches, f"{checked} (object, n, j) cases, mismatches: {mismatches[:3] or 'none'}"


def criterion_5() -> tuple[bool, str]:
    start = time.perf_counter()
    rng = random.Random(5)
    inputs = [twisted_square()] + [random_pseudofunctor(rng) for _ in range(20)]
    bad = []
    for k, P in enumerate(inputs):
        if not check_pseudofunctor(P).ok:
            bad.append(f"input {k} invalid")
            continue
        st = strictify(P)
        exact = st.strict.is_strict() and check_pseudofunctor(st.strict).ok
        equiv = all(equivalence_report(st.comparison[x]).ok for x in P.base.objects)
        if not (st.report.ok and exact and equiv):
            bad.append(f"input {k}")
    elapsed = time.perf_counter() - start
    return not bad and elapsed < 30, f"{len(inputs)} pseudofunctors strictified, failures {bad or 'none'}; {elapsed:.2f}s"


def criterion_6() -> tuple[bool, str]:
    s = fixture_site("pseudocircle")
    S3 = symmetric(3)
    S = stackify(constant_bg(s, S3), s)
    stack_ok = is_stack(S, s).ok
    pi0 = len(S.fibers["X"].components())
    h1 = nonabelian_h0_h1(s, resolve_cover(s, "X", ["Uc", "Ud"]),
                          presheaf_from_spec(s, "locally-constant:S3", "group")).count
    ok = stack_ok and pi0 == h1 == 3
    return ok, f"stackified BS3 is_stack={stack_ok}; |pi0(X)| = {pi0}, nonabelian H^1 classes = {h1} (want 3)"


def criterion_7() -> tuple[bool, str]:
    sq = fixture_site("coarse:square")
    circle, sphere = fixture_site("pseudocircle"), fixture_site("pseudosphere")
    fixtures = {
        "twisted_square": (twisted_square(), sq),
        "torsor-stack:S3 on pseudocircle": (torsor_stack(circle, symmetric(3)), circle),
        "torsor-stack:Z2 on pseudosphere": (torsor_stack(sphere, cyclic(2)), sphere),
    }
    bad = []
    for label, (P, s) in fixtures.items():
        if not is_stack(P, s).ok:
            bad.append(f"{label} not a stack")
            continue
        N, st = nerve_of(P)
        eqs = objectwise_equivalences(poincare_groupoid(N), st.strict)
        if not all(F is not None and equivalence_report(F).ok for F in eqs.values()):
            bad.append(label)
    return not bad, f"{len(fixtures)} stack fixtures round-tripped, failures {bad or 'none'}"


def criterion_8() -> tuple[bool, str]:
    start = time.perf_counter()
    bad = []
    for n in range(1, 6):
        rep = verify_disk(n)
        d = rep.details
        if not (rep.ok and d["euler_characteristic"] == 1
                and d["boundary_euler_characteristic"] == 1 + (-1) ** (n - 1)):
            bad.append(n)
    elapsed = time.perf_counter() - start
    return not bad and elapsed < 10, f"widths 1..5 disk with sphere boundary, failures {bad or 'none'}; {elapsed:.2f}s"


def criterion_9() -> tuple[bool, str]:
    a = arrow_category()
    big, subs = strip_subcategories(a, 2)
    strip = flex05_criterion(big, subs, [Z, Z2])
    bar = product(a, interval_Ibar())
    sub = Subcategory(frozenset(bar.objects), frozenset(product(a, interval_I()).morphisms), "XxI")
    ibar = flex05_criterion(bar, [sub], [Z, Z2])
    parts = {"strip": strip, "ibar": ibar}
    ok = all(r.ok and all(r.pc_comparison.values()) for r in parts.values())
    return ok, "; ".join(f"{k}: criterion {'holds' if r.ok else 'fails'}, PC sub = full {r.pc_comparison}"
                         for k, r in parts.items())


def random_abelian_cochains(rng: random.Random) -> ChainComplex:
    # free in degrees 0 and 1, (Z/m)^k in degrees 2 and 3; each d composes to zero by construction
    m = rng.choice([2, 3])
    r0, r1, a, b = rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 2)
    d2 = IntegerMatrix.from_rows([[rng.randrange(m) for _ in range(a)] for _ in range(b)], ncols=a)
    cycles = [v for v in product_range(m, a) if all(x % m == 0 for x in d2.apply(v))]
    cols = [rng.choice(cycles) for _ in range(r1)]
    d1 = IntegerMatrix.from_rows([[c[i] for c in cols] for i in range(a)], ncols=r1)
    k = kernel_basis(d1)
    d0 = k @ IntegerMatrix.from_rows([[rng.randint(-2, 2) for _ in range(r0)] for _ in range(k.shape[1])], ncols=r0)
    groups = {0: r0, 1: r1, 2: FGAbelianGroup.cyclic(m).power(a), 3: FGAbelianGroup.cyclic(m).power(b)}
    return ChainComplex(groups, {0: d0, 1: d1, 2: d2}, cohomological=True)


def product_range(m: int, a: int) -> list[tuple[int, ...]]:
    return list(iter_product(range(m), repeat=a))


def criterion_10() -> tuple[bool, str]:
    rng = random.Random(10)
    bad = []
    for k in range(30):
        cx = random_abelian_cochains(rng)
        nc = from_abelian_complex(cx, 3)
        if not validate(nc).ok:
            bad.append(f"random {k} invalid")
            continue
        for i in range(4):
            got, expect = cohomology(nc, i), cx.homology(i)
            same = got.abelian == expect if got.kind == "abelian" else got.size == expect.order()
            if not same:
                bad.append(f"random {k} H^{i}")
    # brute force over S3 acting on three points
    perms = list(permutations(range(3)))
    stab = sum(1 for p in perms if p[0] == 0)
    orbits = len({frozenset(p[x] for p in perms) for x in range(3)})
    for n in (2, 3):
        nc = s3_endpoint(n)
        top, last = cohomology(nc, n - 1), cohomology(nc, n)
        if not (validate(nc).ok and top.group.order == stab and len(last.classes) == orbits):
            bad.append(f"S3 endpoint n={n}")
    return not bad, f"30 abelian complexes vs SNF and S3 endpoint stabilizer {stab}, orbits {orbits}; failures {bad or 'none'}"


def criterion_11() -> tuple[bool, str]:
    suites = [(name, fn) for name, fn in inspect.getmembers(test_properties, inspect.isfunction)
              if name.startswith("test_")]
    bad, counts = [], []
    for name, fn in suites:
        settings = getattr(fn, "_hypothesis_internal_use_settings", None)
        n = settings.max_examples if settings is not None else 0
        counts.append(n)
        if n < 1000:
            bad.append(f"{name} runs {n} cases")
            continue
        try:
            fn()
        except Exception as e:  # report every failing suite rather than stop at the first
            bad.append(f"{name}: {type(e).__name__}")
    return not bad, f"{len(suites)} suites, min {min(counts)} cases each, violations {bad or 'none'}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 12)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    record(n, ok, detail)
    assert ok, line(n)


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        record(n, *fn())
