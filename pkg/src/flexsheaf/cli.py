"""Command-line interface.

Exit codes: 0 computed, 1 invalid input, 2 verdict failed under ``--assert``,
3 budget exceeded.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable

import click

from .document import Document, DocumentError
from .exactalg import FGAbelianGroup
from .report import BudgetExceeded

EXIT_OK, EXIT_INPUT, EXIT_VERDICT, EXIT_BUDGET = 0, 1, 2, 3


class Outcome:
    """What a command computed: ordered fields plus an optional verdict."""

    def __init__(self, command: str):
        self.command = command
        self.fields: dict[str, Any] = {}
        self.verdict: bool | None = None
        self.violations: list[str] = []

    def set(self, key: str, value: Any) -> None:
        self.fields[key] = value

    def to_dict(self) -> dict:
        out = {"command": self.command, **self.fields}
        if self.verdict is not None:
            out["verdict"] = "PASS" if self.verdict else "FAIL"
            out["violations"] = self.violations
        return out


# keys whose values are groups print as ``H^1 = Z``
GROUP_KEYS = ("H^", "H_", "pi_", "cech_H", "sheaf_H", "E2[")


def _text(value: Any, indent: str = "") -> list[str]:
    if isinstance(value, dict):
        lines = []
        for k in value:
            v = value[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}{k}:")
                lines.extend(_text(v, indent + "  "))
            else:
                sep = " = " if k.startswith(GROUP_KEYS) else ": "
                lines.append(f"{indent}{k}{sep}{_scalar(v)}")
        return lines
    if isinstance(value, list):
        lines = []
        for v in value:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{indent}-")
                lines.extend(_text(v, indent + "  "))
            else:
                lines.append(f"{indent}- {_scalar(v)}")
        return lines
    return [f"{indent}{_scalar(value)}"]


def _scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (list, dict)):
        return "none"
    return str(v)


def _emit(out: Outcome, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(out.to_dict(), indent=2, sort_keys=False, ensure_ascii=False))
        return
    for line in _text(out.fields):
        click.echo(line)
    if out.verdict is not None:
        click.echo(f"verdict: {'PASS' if out.verdict else 'FAIL'}")
        for v in out.violations:
            click.echo(f"  violation: {v}")


def command(name: str, help_text: str):
    """Register a command with the shared ``--doc``, ``--format`` and ``--assert`` options."""

    def wrap(fn: Callable[..., Outcome]):
        @main.command(name, help=help_text)
        @click.option("--doc", "docs", multiple=True, type=click.Path(dir_okay=False), help="YAML document (repeatable).")
        @click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
        @click.option("--assert", "check", is_flag=True, help="Exit 2 when the verdict is FAIL.")
        @functools.wraps(fn)
        def run(docs, fmt, check, **kwargs):
            try:
                texts = [Path(p).read_text(encoding="utf-8") for p in docs]
                doc = Document.from_texts(texts)
                out = fn(doc, **kwargs)
            except BudgetExceeded as e:
                click.echo(f"budget exceeded: {e}", err=True)
                sys.exit(EXIT_BUDGET)
            except (DocumentError, OSError, ValueError, KeyError) as e:
                msg = e.args[0] if isinstance(e, KeyError) and e.args else e
                click.echo(f"invalid input: {str(msg).strip(chr(39) + chr(34))}", err=True)
                sys.exit(EXIT_INPUT)
            _emit(out, fmt)
            if check and out.verdict is False:
                sys.exit(EXIT_VERDICT)
            sys.exit(EXIT_OK)

        return run

    return wrap


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Finite sites, descent, Čech and nonabelian cohomology, stacks and tree complexes."""


SITE = click.option("--site", "site_ref", required=True, help="fixture:<name> or a site record.")
PRESHEAF = click.option("--presheaf", "presheaf_ref", required=True,
                        help="constant:<G>, locally-constant:<G> or a presheaf record.")
KIND = click.option("--kind", type=click.Choice(["ab", "group", "set"]), default="ab", show_default=True)
COVER = click.option("--cover", "cover_ref", required=True, help="Comma-separated members or a cover record.")
TARGET = click.option("--target", default=None, help="Cover target (inferred when omitted).")
PSEUDO = click.option("--pseudofunctor", "pf_ref", required=True,
                      help="fixture:bg:<G>, fixture:torsor-stack:<G>, fixture:twisted_square or a record.")
MAX_FIBER = click.option("--max-fiber", default=20000, show_default=True, help="Budget on enumerated fiber objects.")


def _describe_value(F, x: str) -> str:
    kind = getattr(F, "kind", "ab")
    if kind == "ab":
        return str(F.value(x))
    if kind == "group":
        return f"group of order {F.group(x).order}"
    return f"set of size {len(F.value(x))}"


# ---------------------------------------------------------------------------
# Validation and sheaves


@command("validate", "Validate every record of the documents (and any named fixtures).")
@click.option("--site", "site_ref", default=None)
@click.option("--category", "cat_ref", default=None)
def validate_cmd(doc: Document, site_ref, cat_ref) -> Outcome:
    from .fincat import check_category
    from .site import check_site

    out = Outcome("validate")
    results = {f"{k} {n}": v for k, n, v in doc.validate_all()}
    if site_ref:
        results[f"site {site_ref}"] = check_site(doc.site(site_ref)).violations
    if cat_ref:
        results[f"category {cat_ref}"] = check_category(doc.category(cat_ref)).violations
    out.set("records", {k: ("ok" if not v else "; ".join(v)) for k, v in results.items()})
    out.verdict = all(not v for v in results.values())
    out.violations = [f"{k}: {v[0]}" for k, v in results.items() if v]
    return out


@command("sheaf-check", "Exhaustive sheaf condition for every covering sieve.")
@SITE
@PRESHEAF
@KIND
def sheaf_check_cmd(doc: Document, site_ref, presheaf_ref, kind) -> Outcome:
    from .presheaf import is_sheaf

    s = doc.site(site_ref)
    F = doc.presheaf(presheaf_ref, s, kind)
    rep = is_sheaf(F, s)
    out = Outcome("sheaf-check")
    out.set("site", s.name)
    out.set("presheaf", F.name)
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


@command("sheafify", "Apply the plus construction twice and check the result.")
@SITE
@PRESHEAF
@KIND
def sheafify_cmd(doc: Document, site_ref, presheaf_ref, kind) -> Outcome:
    from .presheaf import is_sheaf, sheafify

    s = doc.site(site_ref)
    F = doc.presheaf(presheaf_ref, s, kind)
    aF, unit = sheafify(F, s)
    out = Outcome("sheafify")
    out.set("presheaf", F.name)
    out.set("values", {x: _describe_value(aF, x) for x in sorted(s.category.objects)})
    out.set("unit_is_isomorphism", unit.is_isomorphism())
    rep = is_sheaf(aF, s)
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


@command("cech", "Čech cohomology of a presheaf of abelian groups on a cover.")
@SITE
@PRESHEAF
@COVER
@TARGET
@click.option("--degree", type=int, required=True)
@click.option("--alternating", is_flag=True, help="Use strictly increasing index tuples.")
def cech_cmd(doc: Document, site_ref, presheaf_ref, cover_ref, target, degree, alternating) -> Outcome:
    from .cech import cech_cohomology

    s = doc.site(site_ref)
    F = doc.presheaf(presheaf_ref, s, "ab")
    fam = doc.cover(cover_ref, s, target)
    out = Outcome("cech")
    out.set("cover", str(fam))
    out.set(f"H^{degree}", str(cech_cohomology(s, fam, F, degree, alternating)))
    return out


@command("h1-nonab", "Nonabelian H^0 and H^1 of a group presheaf on a cover.")
@SITE
@PRESHEAF
@COVER
@TARGET
@click.option("--max-cocycles", default=200000, show_default=True)
def h1_nonab_cmd(doc: Document, site_ref, presheaf_ref, cover_ref, target, max_cocycles) -> Outcome:
    from .cech import nonabelian_h0_h1
    from .site import CechIndexing

    s = doc.site(site_ref)
    G = doc.presheaf(presheaf_ref, s, "group")
    fam = doc.cover(cover_ref, s, target)
    h = nonabelian_h0_h1(s, fam, G, max_cocycles)
    out = Outcome("h1-nonab")
    out.set("cover", str(fam))
    out.set("h0_order", h.h0.order)
    out.set("h1_classes", h.count)
    out.set("cocycles", h.cocycle_count)
    idx = CechIndexing(s, fam, 2)
    names = {p: G.group(idx.obj(p)) for p in h.pairs}
    out.set("representatives", [
        {f"{fam.members[a]}|{fam.members[b]}": names[(a, b)].names[g] for (a, b), g in zip(h.pairs, cls)}
        for cls in h.classes])
    out.set("class_sizes", list(h.class_sizes))
    return out


@command("sheaf-cohomology", "Sheaf cohomology as a derived limit over local objects.")
@SITE
@PRESHEAF
@click.option("--object", "obj", default=None, help="Defaults to the terminal object.")
@click.option("--degree", type=int, required=True)
@click.option("--allow-presheaf", is_flag=True, help="Skip the sheaf precondition.")
def sheaf_cohomology_cmd(doc: Document, site_ref, presheaf_ref, obj, degree, allow_presheaf) -> Outcome:
    from .cech import sheaf_cohomology
    from .site import top_object

    s = doc.site(site_ref)
    F = doc.presheaf(presheaf_ref, s, "ab")
    x = obj or top_object(s)
    out = Outcome("sheaf-cohomology")
    out.set("object", x)
    out.set(f"H^{degree}", str(sheaf_cohomology(s, x, F, degree, not allow_presheaf)))
    return out


# ---------------------------------------------------------------------------
# Category cohomology


@command("pc-cohomology", "Cohomology of the obstruction complex of a natural system.")
@click.option("--category", "cat_ref", required=True, help="fixture:<arrow|I|Ibar|I<n>|square|A*B> or a record.")
@click.option("--natsys", "ns_ref", default="constant:Z", show_default=True)
@click.option("--kmax", type=int, default=2, show_default=True)
def pc_cohomology_cmd(doc: Document, cat_ref, ns_ref, kmax) -> Outcome:
    from .natsys import full_cells, pc_cohomology

    c = doc.category(cat_ref)
    G = doc.natsys(ns_ref, c)
    rep = G.check()
    if not rep.ok:
        raise DocumentError(f"natural system invalid: {rep.violations[0]}")
    H = pc_cohomology(c, full_cells(c, kmax + 1), G, kmax)
    out = Outcome("pc-cohomology")
    out.set("category", c.name)
    for k in sorted(H):
        out.set(f"H^{k}", str(H[k]))
    return out


@command("flex05", "Sub-cell versus full-cell comparison for the strip or the Ibar configuration.")
@click.option("--config", type=click.Choice(["strip", "ibar"]), required=True)
@click.option("--base", "base_ref", default="fixture:arrow", show_default=True)
@click.option("--coeff", "coeffs", multiple=True, default=("Z", "Z/2"), show_default=True)
@click.option("--kmax", type=int, default=2, show_default=True)
def flex05_cmd(doc: Document, config, base_ref, coeffs, kmax) -> Outcome:
    from .natsys import flex05_criterion

    c, subs = flex05_configuration(doc.category(base_ref), config)
    rep = flex05_criterion(c, subs, [FGAbelianGroup.parse(a) for a in coeffs], kmax)
    out = Outcome("flex05")
    out.set("category", c.name)
    out.set("subcategories", len(subs))
    out.set("per_morphism", {m: rep.per_morphism[m] for m in sorted(rep.per_morphism)})
    out.set("pc_comparison", dict(rep.pc_comparison))
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


def flex05_configuration(base, config: str):
    from .fincat import Subcategory, interval_I, interval_Ibar, product, strip_subcategories

    if config == "strip":
        return strip_subcategories(base, 2)
    big = product(base, interval_Ibar())
    small = product(base, interval_I())
    sub = Subcategory(frozenset(big.objects), frozenset(small.morphisms), "X×I")
    rep = sub.validate(big)
    if not rep.ok:
        raise ValueError(rep.violations[0])
    return big, [sub]


# ---------------------------------------------------------------------------
# Eilenberg–MacLane sections


@command("em-sections", "Homotopy of sections of K(G, n) over a cover, against Čech cohomology.")
@SITE
@PRESHEAF
@COVER
@TARGET
@click.option("--n", "n", type=int, required=True)
@click.option("--j", "j", type=int, required=True)
def em_sections_cmd(doc: Document, site_ref, presheaf_ref, cover_ref, target, n, j) -> Outcome:
    from .cech import cech_cohomology
    from .simplicial import em_presheaf, homotopy_of_sections

    s = doc.site(site_ref)
    G = doc.presheaf(presheaf_ref, s, "ab")
    fam = doc.cover(cover_ref, s, target)
    val = homotopy_of_sections(s, fam, em_presheaf(G, n), j)
    expect = cech_cohomology(s, fam, G, n - j) if n - j >= 0 else FGAbelianGroup()
    out = Outcome("em-sections")
    out.set("cover", str(fam))
    out.set(f"pi_{j}", str(val))
    out.set(f"cech_H^{n - j}", str(expect))
    out.verdict = val == expect
    if not out.verdict:
        out.violations = [f"π_{j} = {val} but Ȟ^{n - j} = {expect}"]
    return out


@command("brown", "Sections of a fibrant K(G, n) against sheaf cohomology.")
@SITE
@PRESHEAF
@click.option("--object", "obj", default=None)
@click.option("--n", "n", type=int, required=True)
@click.option("--j", "j", type=int, required=True)
@click.option("--all-covers", is_flag=True, help="Also compute over every covering family.")
def brown_cmd(doc: Document, site_ref, presheaf_ref, obj, n, j, all_covers) -> Outcome:
    from .cech import sheaf_cohomology
    from .simplicial import brown_sections
    from .site import top_object

    s = doc.site(site_ref)
    G = doc.presheaf(presheaf_ref, s, "ab")
    x = obj or top_object(s)
    try:
        res = brown_sections(s, x, G, n, j, True, all_covers)
    except AssertionError as e:
        out = Outcome("brown")
        out.verdict = False
        out.violations = [str(e)]
        return out
    expect = sheaf_cohomology(s, x, G, n - j) if j <= n else FGAbelianGroup()
    out = Outcome("brown")
    out.set("object", x)
    out.set("witness_cover", str(res.witness))
    out.set(f"pi_{j}", str(res.group))
    out.set(f"sheaf_H^{n - j}", str(expect))
    out.verdict = res.group == expect
    if not out.verdict:
        out.violations = [f"π_{j} = {res.group} but H^{n - j} = {expect}"]
    return out


@command("illusie", "Is the sheafification map of K(F, n) an Illusie weak equivalence?")
@SITE
@PRESHEAF
@click.option("--n", "n", type=int, default=0, show_default=True)
def illusie_cmd(doc: Document, site_ref, presheaf_ref, n) -> Outcome:
    from .presheaf import sheafify
    from .simplicial import illusie_check, map_of_em

    s = doc.site(site_ref)
    F = doc.presheaf(presheaf_ref, s, "ab")
    _, unit = sheafify(F, s)
    rep = illusie_check(map_of_em(unit, n), s)
    out = Outcome("illusie")
    out.set("presheaf", F.name)
    out.set("objectwise_isomorphism", rep.details.get("objectwise_isomorphism"))
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


# ---------------------------------------------------------------------------
# Stacks


def _fiber_summary(P) -> dict:
    out = {}
    for X in sorted(P.base.objects):
        g = P.fibers[X]
        out[X] = {"objects": len(g.objects), "morphisms": len(g.morphisms),
                  "components": len(g.components()), "automorphism_orders": g.invariants()}
    return out


@command("stack-check", "Descent along every covering family.")
@PSEUDO
@SITE
@MAX_FIBER
def stack_check_cmd(doc: Document, pf_ref, site_ref, max_fiber) -> Outcome:
    from .stacks import check_pseudofunctor, is_stack

    s = doc.site(site_ref)
    P = doc.pseudofunctor(pf_ref, s)
    v = check_pseudofunctor(P)
    if not v.ok:
        raise DocumentError(f"pseudofunctor invalid: {v.violations[0]}")
    rep = is_stack(P, s, max_objects=max_fiber)
    out = Outcome("stack-check")
    out.set("pseudofunctor", P.name)
    out.set("covers", {k: rep.per_cover[k] for k in sorted(rep.per_cover)})
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


@command("stackify", "Stackification; reports the fibers and re-checks descent.")
@PSEUDO
@SITE
@MAX_FIBER
def stackify_cmd(doc: Document, pf_ref, site_ref, max_fiber) -> Outcome:
    from .stacks import Stackification, check_pseudofunctor, equivalence_report, is_stack

    s = doc.site(site_ref)
    P = doc.pseudofunctor(pf_ref, s)
    v = check_pseudofunctor(P)
    if not v.ok:
        raise DocumentError(f"pseudofunctor invalid: {v.violations[0]}")
    st = Stackification(P, s, max_fiber)
    S = st.pseudofunctor
    out = Outcome("stackify")
    out.set("pseudofunctor", P.name)
    out.set("fibers", _fiber_summary(S))
    out.set("unit_is_equivalence", {X: equivalence_report(st.unit(X)).ok for X in sorted(s.category.objects)})
    rep = is_stack(S, s, max_objects=max_fiber)
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


@command("strictify", "Strictification with exhaustive strictness and equivalence checks.")
@PSEUDO
@click.option("--site", "site_ref", default=None, help="Needed for bg and torsor-stack fixtures.")
def strictify_cmd(doc: Document, pf_ref, site_ref) -> Outcome:
    from .stacks import strictify

    s = doc.site(site_ref) if site_ref else None
    P = doc.pseudofunctor(pf_ref, s)
    st = strictify(P)
    out = Outcome("strictify")
    out.set("pseudofunctor", P.name)
    out.set("fibers", _fiber_summary(st.strict))
    out.verdict = st.report.ok
    out.violations = list(st.report.violations)
    return out


@command("torsors", "Groupoid of cocycle-presented torsors on a cover.")
@SITE
@PRESHEAF
@COVER
@TARGET
@MAX_FIBER
def torsors_cmd(doc: Document, site_ref, presheaf_ref, cover_ref, target, max_fiber) -> Outcome:
    from .cech import nonabelian_h0_h1
    from .stacks import torsor_groupoid

    s = doc.site(site_ref)
    G = doc.presheaf(presheaf_ref, s, "group")
    fam = doc.cover(cover_ref, s, target)
    T = torsor_groupoid(G, s, fam, max_fiber)
    h = nonabelian_h0_h1(s, fam, G)
    out = Outcome("torsors")
    out.set("cover", str(fam))
    out.set("iso_classes", len(T.components()))
    out.set("automorphism_orders", T.invariants())
    out.set("h1_classes", h.count)
    out.verdict = len(T.components()) == h.count
    if not out.verdict:
        out.violations = [f"{len(T.components())} torsor classes but {h.count} cocycle classes"]
    return out


# ---------------------------------------------------------------------------
# Trees and towers


@command("tree-disk", "Disk and sphere homology of the tree-diagram cell complex.")
@click.option("--width", type=int, required=True)
def tree_disk_cmd(doc: Document, width) -> Outcome:
    from .trees import verify_disk

    rep = verify_disk(width)
    out = Outcome("tree-disk")
    out.set("width", width)
    for k in ("cell_counts", "boundary_counts", "euler_characteristic", "boundary_euler_characteristic", "top_cells"):
        out.set(k, rep.details[k])
    out.set("homology", {f"H_{d}": g for d, g in rep.details["homology"].items()})
    out.set("boundary_homology", {f"H_{d}": g for d, g in rep.details["boundary_homology"].items()})
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


@command("tower-e2", "E2 page from homotopy sheaves given as q=<presheaf> pairs.")
@SITE
@click.option("--sheaf", "sheaves", multiple=True, required=True, help="q=<presheaf>, e.g. 1=locally-constant:Z.")
@click.option("--object", "obj", default=None)
@click.option("--cap", type=int, default=3, show_default=True)
def tower_e2_cmd(doc: Document, site_ref, sheaves, obj, cap) -> Outcome:
    from .nonab import tower_e2_page
    from .site import top_object

    s = doc.site(site_ref)
    table = {}
    for item in sheaves:
        q, sep, ref = item.partition("=")
        if not sep or not q.strip().lstrip("-").isdigit():
            raise DocumentError(f"--sheaf expects q=<presheaf>, got {item!r}")
        table[int(q)] = doc.presheaf(ref, s, "ab")
    x = obj or top_object(s)
    page = tower_e2_page(s, table, x, cap)
    out = Outcome("tower-e2")
    out.set("object", x)
    out.set("E2", {f"E2[{p},{q}]": str(page[(p, q)]) for p, q in sorted(page, key=lambda k: (k[1], -k[0]))})
    return out


@command("nonab-cohomology", "Cohomology of a nonabelian complex fixture.")
@click.option("--complex", "cx_ref", default="s3-endpoint:2", show_default=True,
              help="s3-endpoint[:n] or trivial:<n>.")
@click.option("--degree", type=int, default=None, help="Defaults to every degree.")
def nonab_cohomology_cmd(doc: Document, cx_ref, degree) -> Outcome:
    from .nonab import cohomology, fixture_complex, validate

    try:
        nc = fixture_complex(cx_ref)
    except (KeyError, ValueError) as e:
        raise DocumentError(str(e).strip("'\"")) from None
    rep = validate(nc)
    out = Outcome("nonab-cohomology")
    out.set("complex", nc.name)
    out.set("end_degree", nc.n)
    if rep.ok:
        degs = range(nc.n + 1) if degree is None else [degree]
        out.set("cohomology", {f"H^{i}": cohomology(nc, i).describe() for i in degs})
    out.verdict = rep.ok
    out.violations = list(rep.violations)
    return out


if __name__ == "__main__":  # pragma: no cover
    main()
