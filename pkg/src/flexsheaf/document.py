"""YAML documents of typed records, and resolution of ``fixture:`` references.

A document is a YAML list.  Each entry is a mapping whose first key names the
record kind and carries the record name, for example::

    - category: V
      objects: [a, b, c]
      morphisms: [{name: f, src: a, tgt: c}, {name: g, src: b, tgt: c}]
      compose: []

Kinds: ``category``, ``space``, ``site``, ``presheaf``, ``cover``,
``natsys``, ``pseudofunctor``.  Identities are named ``id_<object>`` unless
an ``identities`` mapping is given.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import yaml

from .exactalg import FGAbelianGroup, IntegerMatrix
from .fincat import FiniteCategory, arrow_category, check_category, interval_I, interval_Ibar, interval_In, product, terminal
from .groups import parse_group
from .natsys import NaturalSystem, constant_natsys
from .presheaf import AbPresheaf, GroupPresheaf, SetPresheaf, presheaf_from_spec
from .site import CoveringFamily, FiniteTopSpace, Site, check_site, coarse, fixture_site, open_cover_site, resolve_cover

KINDS = ("category", "space", "site", "presheaf", "cover", "natsys", "pseudofunctor")


class DocumentError(ValueError):
    """Malformed or unresolvable input."""


@dataclass
class Document:
    records: dict[str, dict[str, dict]] = field(default_factory=lambda: {k: {} for k in KINDS})
    _cache: dict[tuple[str, str], Any] = field(default_factory=dict)

    # -- loading ---------------------------------------------------------------

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "Document":
        doc = cls()
        for text in texts:
            try:
                data = yaml.safe_load(text)
            except yaml.YAMLError as e:
                raise DocumentError(f"YAML parse error: {e}") from None
            if data is None:
                continue
            if not isinstance(data, list):
                raise DocumentError("a document must be a list of records")
            for rec in data:
                doc.add(rec)
        return doc

    def add(self, rec: Any) -> None:
        if not isinstance(rec, dict) or not rec:
            raise DocumentError(f"record must be a non-empty mapping, got {rec!r}")
        kind = next(iter(rec))
        if kind not in KINDS:
            raise DocumentError(f"unknown record kind {kind!r}")
        name = str(rec[kind])
        if name in self.records[kind]:
            raise DocumentError(f"duplicate {kind} record {name!r}")
        self.records[kind][name] = rec

    def names(self, kind: str) -> list[str]:
        return sorted(self.records[kind])

    def _record(self, kind: str, name: str) -> dict:
        try:
            return self.records[kind][name]
        except KeyError:
            raise DocumentError(f"no {kind} named {name!r}") from None

    def _cached(self, kind: str, name: str, build):
        key = (kind, name)
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # -- resolution --------------------------------------------------------------

    def category(self, ref: str) -> FiniteCategory:
        if ref.startswith("fixture:"):
            return fixture_category(ref[len("fixture:"):])
        return self._cached("category", ref, lambda: category_from_record(self._record("category", ref)))

    def space(self, ref: str) -> FiniteTopSpace:
        rec = self._record("space", ref)
        mins = rec.get("minimal_opens")
        if not isinstance(mins, dict):
            raise DocumentError(f"space {ref}: minimal_opens must be a mapping")
        return FiniteTopSpace.from_minimal_opens({str(p): [str(q) for q in v] for p, v in mins.items()}, ref)

    def site(self, ref: str) -> Site:
        if ref.startswith("fixture:"):
            try:
                return fixture_site(ref[len("fixture:"):])
            except KeyError as e:
                raise DocumentError(str(e)) from None
        return self._cached("site", ref, lambda: self._build_site(ref))

    def _build_site(self, ref: str) -> Site:
        rec = self._record("site", ref)
        if "space" in rec:
            try:
                return open_cover_site(self.space(str(rec["space"])))
            except ValueError as e:
                raise DocumentError(f"site {ref}: {e}") from None
        if "category" not in rec:
            raise DocumentError(f"site {ref} needs a space or a category")
        c = self.category(str(rec["category"]))
        if rec.get("coarse", "covering" not in rec):
            return coarse(c)
        cov = {str(x): [[str(a) for a in sv] for sv in sieves] for x, sieves in rec["covering"].items()}
        pbs = {}
        for row in rec.get("pullbacks", []):
            f, g, p, p1, p2 = (str(v) for v in row)
            pbs[(f, g)] = (p, p1, p2)
        return Site(c, cov, pbs, ref)

    def presheaf(self, ref: str, site: Site, kind: str = "ab"):
        if ":" in ref and ref.split(":", 1)[0] in ("constant", "constant-nonempty", "locally-constant"):
            try:
                return presheaf_from_spec(site, ref, kind)
            except ValueError as e:
                raise DocumentError(str(e)) from None
        rec = self._record("presheaf", ref)
        rkind = rec.get("kind", "ab")
        if rkind != kind and not (kind == "group" and rkind == "ab"):
            raise DocumentError(f"presheaf {ref} has kind {rkind}, expected {kind}")
        F = presheaf_from_record(rec, site.category)
        if rkind == "ab" and kind == "group":
            from .presheaf import ab_to_group_presheaf

            return ab_to_group_presheaf(F)
        return F

    def cover(self, ref: str, site: Site, target: str | None = None) -> CoveringFamily:
        """A ``cover`` record name, or comma-separated member names."""
        if ref in self.records["cover"]:
            rec = self.records["cover"][ref]
            target = str(rec["target"])
            members = [str(m) for m in rec["members"]]
        else:
            members = [m for m in ref.split(",") if m.strip()]
            if target is None:
                target = _common_target(site, members)
        try:
            return resolve_cover(site, target, members)
        except (KeyError, ValueError) as e:
            raise DocumentError(str(e).strip("'\"")) from None

    def natsys(self, ref: str, c: FiniteCategory) -> NaturalSystem:
        if ref.startswith("constant:"):
            return constant_natsys(c, FGAbelianGroup.parse(ref.split(":", 1)[1]))
        rec = self._record("natsys", ref)
        if "constant" in rec:
            return constant_natsys(c, FGAbelianGroup.parse(str(rec["constant"])))
        groups = {str(k): FGAbelianGroup.parse(str(v)) for k, v in rec["groups"].items()}
        left = {(str(g), str(f)): IntegerMatrix.from_rows(m, groups[str(f)].ngens) for g, f, m in rec.get("left", [])}
        right = {(str(g), str(f)): IntegerMatrix.from_rows(m, groups[str(g)].ngens) for g, f, m in rec.get("right", [])}
        return NaturalSystem(c, groups, left, right, ref)

    def pseudofunctor(self, ref: str, site: Site | None):
        from .stacks import fixture_pseudofunctor

        if ref.startswith("fixture:"):
            try:
                return fixture_pseudofunctor(ref[len("fixture:"):], site)
            except KeyError as e:
                raise DocumentError(str(e).strip("'\"")) from None
        return self._cached("pseudofunctor", ref, lambda: pseudofunctor_from_record(
            self._record("pseudofunctor", ref), self.category(str(self._record("pseudofunctor", ref)["category"]))))

    # -- validation ----------------------------------------------------------------

    def validate_all(self) -> list[tuple[str, str, list[str]]]:
        """``(kind, name, violations)`` for every record, in sorted order."""
        from .stacks import check_pseudofunctor

        out = []
        for kind in KINDS:
            for name in self.names(kind):
                try:
                    if kind == "category":
                        bad = check_category(self.category(name)).violations
                    elif kind == "space":
                        bad = self.space(name).check()
                    elif kind == "site":
                        bad = check_site(self.site(name)).violations
                    elif kind == "presheaf":
                        rec = self._record("presheaf", name)
                        s = self.site(str(rec["site"]))
                        bad = self.presheaf(name, s, rec.get("kind", "ab")).check().violations
                    elif kind == "cover":
                        rec = self._record("cover", name)
                        self.cover(name, self.site(str(rec["site"])))
                        bad = []
                    elif kind == "natsys":
                        rec = self._record("natsys", name)
                        bad = self.natsys(name, self.category(str(rec["category"]))).check().violations
                    else:
                        bad = check_pseudofunctor(self.pseudofunctor(name, None)).violations
                except DocumentError as e:
                    bad = [str(e)]
                except (KeyError, ValueError, TypeError) as e:
                    bad = [f"malformed record: {e}"]
                out.append((kind, name, bad))
        return out


def _common_target(site: Site, members: list[str]) -> str:
    c = site.category
    objs = [m.strip() for m in members]
    cands = [x for x in c.objects if all(c.hom(o, x) for o in objs)]
    minimal = [x for x in cands if not any(y != x and c.hom(y, x) for y in cands)]
    if len(minimal) != 1:
        raise DocumentError("cannot infer the cover target; pass --target")
    return minimal[0]


def fixture_category(name: str) -> FiniteCategory:
    """``terminal``, ``arrow``, ``I``, ``Ibar``, ``I<n>``, ``square``, ``A*B`` products."""
    if "*" in name:
        parts = [fixture_category(p) for p in name.split("*")]
        out = parts[0]
        for p in parts[1:]:
            out = product(out, p)
        return out
    table = {"terminal": terminal, "arrow": arrow_category, "I": interval_I, "Ibar": interval_Ibar,
             "square": lambda: product(arrow_category(), arrow_category(), "square")}
    if name in table:
        return table[name]()
    if name.startswith("I") and name[1:].isdigit():
        return interval_In(int(name[1:]))
    raise DocumentError(f"unknown category fixture {name!r}")


def category_from_record(rec: dict) -> FiniteCategory:
    name = str(rec["category"])
    objects = [str(x) for x in rec["objects"]]
    ids = {str(k): str(v) for k, v in (rec.get("identities") or {}).items()} or {x: f"id_{x}" for x in objects}
    morph = {ids[x]: (x, x) for x in objects}
    for m in rec.get("morphisms", []):
        morph[str(m["name"])] = (str(m["src"]), str(m["tgt"]))
    table = {}
    for m, (s, t) in morph.items():
        table[(ids[t], m)] = m
        table[(m, ids[s])] = m
    for row in rec.get("compose", []):
        g, f, h = (str(v) for v in row)
        table[(g, f)] = h
    return FiniteCategory(objects, morph, table, ids, name)


def presheaf_from_record(rec: dict, c: FiniteCategory):
    name = str(rec["presheaf"])
    kind = rec.get("kind", "ab")
    vals = rec["values"]
    rest = rec.get("restrictions", {})
    missing = [x for x in c.objects if x not in vals]
    if missing:
        raise DocumentError(f"presheaf {name}: no value at {missing[0]}")
    if kind == "ab":
        groups = {x: FGAbelianGroup.parse(str(vals[x])) for x in c.objects}
        mats = {str(f): IntegerMatrix.from_rows(rows, groups[c.tgt[str(f)]].ngens) if rows else
                IntegerMatrix.zeros(groups[c.src[str(f)]].ngens, groups[c.tgt[str(f)]].ngens)
                for f, rows in rest.items()}
        return AbPresheaf(c, groups, mats, name)
    if kind == "group":
        groups = {x: parse_group(str(vals[x])) for x in c.objects}
        return GroupPresheaf(c, groups, {str(f): list(v) for f, v in rest.items()}, name)
    if kind == "set":
        return SetPresheaf(c, {x: [str(a) for a in vals[x]] for x in c.objects},
                           {str(f): {str(a): str(b) for a, b in v.items()} for f, v in rest.items()}, name)
    raise DocumentError(f"presheaf {name}: unknown kind {kind!r}")


def pseudofunctor_from_record(rec: dict, c: FiniteCategory):
    from .stacks import FiniteGroupoid, GroupoidFunctor, Pseudofunctor, identity_functor

    name = str(rec["pseudofunctor"])
    fibers = {}
    for X in c.objects:
        f = rec["fibers"].get(X)
        if f is None:
            raise DocumentError(f"pseudofunctor {name}: no fiber over {X}")
        cat = category_from_record(dict(f, category=f"{name}({X})"))
        inv = {str(k): str(v) for k, v in (f.get("inverses") or {}).items()}
        for x, i in cat.identities.items():
            inv.setdefault(i, i)
        fibers[X] = FiniteGroupoid(cat.objects, {m: (cat.src[m], cat.tgt[m]) for m in cat.morphisms}, cat.table,
                                   cat.identities, inv, cat.name)
    pulls = {}
    for u in c.morphisms:
        A, B = fibers[c.tgt[u]], fibers[c.src[u]]
        p = rec.get("pulls", {}).get(u)
        if p is None:
            if c.is_identity(u):
                pulls[u] = identity_functor(A)
                continue
            raise DocumentError(f"pseudofunctor {name}: no pull along {u}")
        on_o = {str(k): str(v) for k, v in p["objects"].items()}
        on_m = {str(k): str(v) for k, v in (p.get("morphisms") or {}).items()}
        for x in A.objects:
            on_m.setdefault(A.identities[x], B.identities.get(on_o.get(x, ""), ""))
        pulls[u] = GroupoidFunctor(A, B, on_o, on_m)
    xi = {}
    for row in rec.get("xi", []):
        xi[(str(row["u"]), str(row["v"]))] = {str(k): str(v) for k, v in row["components"].items()}
    return Pseudofunctor(c, fibers, pulls, xi, name)
