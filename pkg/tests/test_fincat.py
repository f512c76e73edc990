import pytest

from flexsheaf.fincat import (
    FiniteCategory,
    Subcategory,
    arrow_category,
    check_category,
    factorization_category,
    from_poset,
    ins_category,
    nerve,
    product,
    slice_category,
    strip_subcategories,
    terminal,
)
from flexsheaf.site import fixture_site

from .oracles import order_complex


def pseudocircle_poset() -> FiniteCategory:
    return fixture_site("pseudocircle").category


def square() -> FiniteCategory:
    return product(arrow_category(), arrow_category())


def test_terminal_valid():
    c = terminal()
    assert check_category(c).ok
    assert len(c.objects) == 1 and len(c.morphisms) == 1


def test_pseudocircle_poset_valid():
    assert check_category(pseudocircle_poset()).ok


def test_wrong_source_reported_with_pair():
    c = FiniteCategory(
        ["A", "B"],
        {"id_A": ("A", "A"), "id_B": ("B", "B"), "f": ("A", "B"), "g": ("B", "A")},
        {("id_A", "id_A"): "id_A", ("id_B", "id_B"): "id_B", ("f", "id_A"): "f", ("id_B", "f"): "f",
         ("g", "id_B"): "g", ("id_A", "g"): "g", ("g", "f"): "f", ("f", "g"): "id_B"},
        {"A": "id_A", "B": "id_B"},
    )
    rep = check_category(c)
    assert not rep.ok
    assert any("compose(g,f)" in v for v in rep.violations)


def test_associativity_failure_detected():
    # unital table on one object that is not associative
    c = FiniteCategory(
        ["*"], {"e": ("*", "*"), "a": ("*", "*"), "b": ("*", "*")},
        {("e", "e"): "e", ("e", "a"): "a", ("a", "e"): "a", ("e", "b"): "b", ("b", "e"): "b",
         ("a", "a"): "b", ("b", "b"): "b", ("a", "b"): "a", ("b", "a"): "b"},
        {"*": "e"},
    )
    assert any("associativity" in v for v in check_category(c).violations)


def test_slice_examples():
    s, _ = slice_category(terminal(), terminal().objects[0])
    assert len(s.objects) == 1 and len(s.morphisms) == 1
    s, _ = slice_category(arrow_category(), "1")
    assert len(s.objects) == 2
    assert sum(not s.is_identity(m) for m in s.morphisms) == 1
    c = pseudocircle_poset()
    top = c.terminal_objects()[0]
    s, proj = slice_category(c, top)
    assert len(s.objects) == len(c.objects) == 7
    assert proj.check().ok


def test_factorization_category_counts():
    assert len(factorization_category(terminal()).objects) == 1
    assert len(factorization_category(arrow_category()).objects) == 3
    fl = factorization_category(square())
    assert len(fl.objects) == 9
    assert check_category(fl).ok


def test_ins_category_examples():
    t = terminal()
    ins = ins_category(t, [Subcategory.whole(t)], t.morphisms[0])
    assert len(ins.objects) == 1
    a = arrow_category()
    ins = ins_category(a, [Subcategory.whole(a)], "0->1")
    assert len(ins.objects) == 2
    assert sum(not ins.is_identity(m) for m in ins.morphisms) == 1
    assert check_category(ins).ok


def test_ins_of_strips_is_connected():
    big, subs = strip_subcategories(arrow_category(), 2)
    ins = ins_category(big, subs, "(0->1,2->0)")
    n = nerve(ins, 2)
    assert len(n.connected_components()) == 1


def test_nerve_examples():
    assert nerve(terminal(), 3).counts() == [1, 0, 0, 0]
    assert nerve(arrow_category(), 3).counts()[:2] == [2, 1]


def test_nerve_of_pseudocircle_points_is_a_circle():
    # specialisation order of the four points: a, b below c, d
    below = {"a": "", "b": "", "c": "ab", "d": "ab"}
    leq = lambda x, y: x == y or x in below[y]
    c = from_poset(list("abcd"), leq, "pseudocircle points")
    n = nerve(c, 2)
    assert n.euler_characteristic() == 0
    chains = order_complex(list("abcd"), leq)
    assert n.counts() == [len(chains.get(k, [])) for k in range(3)]


def test_nerve_of_open_poset_matches_order_complex():
    # the open poset has a top and a bottom, so its order complex is a cone
    c = pseudocircle_poset()
    chains = order_complex(list(c.objects), lambda u, v: bool(c.hom(u, v)))
    top = max(chains)
    n = nerve(c, top)
    assert n.counts() == [len(chains.get(k, [])) for k in range(top + 1)]
    assert n.euler_characteristic() == 1


def test_poset_builder_and_opposite():
    c = from_poset(["0", "1", "2"], lambda a, b: a <= b, "[2]")
    assert check_category(c).ok
    assert len(c.morphisms) == 6
    assert check_category(c.opposite()).ok
    assert c.terminal_objects() == ["2"] and c.initial_objects() == ["0"]


def test_record_round_trip():
    from flexsheaf.document import category_from_record

    c = square()
    back = category_from_record({"category": "square", **c.to_record()})
    assert set(back.morphisms) == set(c.morphisms)
    assert back.table == c.table


def test_unknown_ins_morphism():
    with pytest.raises(KeyError):
        ins_category(terminal(), [Subcategory.whole(terminal())], "nope")
