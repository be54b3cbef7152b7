from itertools import chain, combinations

import pytest
from hypothesis import given, settings, strategies as st

from descentlab.cat import (CategoryError, FinCat, Sieve, Site, enumerate_sieves, generate_topology,
                            generated_sieve, maximal_sieve, pullback, slice_index, trivial_topology,
                            validate_category, validate_site)
from descentlab.registry import (build_countable_choice_site, idempotent_elements_cat, poset01_cat,
                                 poset_bot01_cat, walking_idempotent_monoid, walking_retract_cat, z2)

CATS = [FinCat.terminal(), z2(), poset_bot01_cat(), poset01_cat(), idempotent_elements_cat(),
        walking_idempotent_monoid(), walking_retract_cat()]


def subsets(xs):
    return chain.from_iterable(combinations(xs, r) for r in range(len(xs) + 1))


def closed(cat, x, members):
    return all(cat.compose(f, g) in members for f in members for g in cat.into(cat.dom(f)))


@pytest.mark.parametrize("cat", CATS, ids=lambda c: c.name)
def test_builtin_categories_are_valid(cat):
    assert validate_category(cat).ok


def test_planted_associativity_defect():
    # monoid {1, a, b} with the table of a non-associative magma
    mult = {("1", "1"): "1", ("1", "a"): "a", ("1", "b"): "b", ("a", "1"): "a", ("b", "1"): "b",
            ("a", "a"): "b", ("a", "b"): "a", ("b", "a"): "b", ("b", "b"): "a"}
    cat = FinCat.from_monoid(["1", "a", "b"], lambda x, y: mult[(x, y)], "1")
    rep = validate_category(cat)
    assert not rep.ok
    assert "associativity" in rep.laws()
    h, g, f = next(v.witness for v in rep.violations if v.law == "associativity")
    assert cat.compose(h, cat.compose(g, f)) != cat.compose(cat.compose(h, g), f)


def test_missing_composite_reported():
    cat = z2()
    del cat.comp[("t", "t")]
    assert "composite missing" in validate_category(cat).laws()


def test_slice_index_examples():
    assert slice_index(FinCat.terminal(), "pt") == [("pt", "id")]
    assert slice_index(z2(), "pt") == [("pt", "id"), ("pt", "t")]
    assert slice_index(poset_bot01_cat(), "0") == [("0", "id_0"), ("bot", "bot_0")]
    with pytest.raises(CategoryError):
        slice_index(z2(), "nope")


@pytest.mark.parametrize("cat", CATS, ids=lambda c: c.name)
def test_slice_index_is_exhaustive_and_stable(cat):
    for x in cat.objects:
        fs = [f for _, f in slice_index(cat, x)]
        assert sorted(fs) == sorted(f for f, (_, c) in cat.morphisms.items() if c == x)
        assert len(set(fs)) == len(fs)
        assert slice_index(cat, x) == slice_index(cat, x)


@pytest.mark.parametrize("cat", CATS, ids=lambda c: c.name)
def test_enumerate_sieves_matches_subset_oracle(cat):
    for x in cat.objects:
        oracle = {frozenset(s) for s in subsets(cat.into(x)) if closed(cat, x, set(s))}
        got = enumerate_sieves(cat, x)
        assert {s.members for s in got} == oracle
        assert len(got) == len(oracle)


def test_sieve_counts():
    assert len(enumerate_sieves(FinCat.terminal(), "pt")) == 2
    assert len(enumerate_sieves(z2(), "pt")) == 2
    assert [sorted(s.members) for s in enumerate_sieves(poset_bot01_cat(), "0")] == [
        [], ["bot_0"], ["bot_0", "id_0"]]


@pytest.mark.parametrize("cat", CATS, ids=lambda c: c.name)
def test_pullback_of_maximal_is_maximal(cat):
    for f in cat.morphisms:
        assert pullback(cat, maximal_sieve(cat, cat.cod(f)), f) == maximal_sieve(cat, cat.dom(f))


@pytest.mark.parametrize("cat", CATS, ids=lambda c: c.name)
def test_trivial_topology_valid(cat):
    assert validate_site(trivial_topology(cat)).ok


def test_missing_maximal_sieve_detected():
    cat = poset_bot01_cat()
    site = Site(cat, {"0": [Sieve("0", ["bot_0"])], "1": [maximal_sieve(cat, "1")],
                      "bot": [maximal_sieve(cat, "bot")]})
    assert "maximal sieve absent at 0" in validate_site(site).laws()


def test_missing_pullback_detected():
    cat = poset_bot01_cat()
    covers = {x: [maximal_sieve(cat, x)] for x in cat.objects}
    covers["0"].append(Sieve("0", ["bot_0"]))
    assert "pullback stability" not in validate_site(Site(cat, covers)).laws()
    covers["0"].append(Sieve("0", []))
    rep = validate_site(Site(cat, covers))
    assert "pullback stability" in rep.laws()


def test_sieve_with_wrong_codomain_rejected():
    with pytest.raises(CategoryError):
        Site(poset_bot01_cat(), {"0": [Sieve("0", ["bot_1"])]})


def test_non_closed_member_set_rejected():
    with pytest.raises(CategoryError):
        Site(z2(), {"pt": [Sieve("pt", ["id"])]})


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CATS), st.data())
def test_generated_sieve_is_smallest(cat, data):
    x = data.draw(st.sampled_from(cat.objects))
    fs = data.draw(st.lists(st.sampled_from(cat.into(x)), max_size=3))
    s = generated_sieve(cat, x, fs)
    assert closed(cat, x, s.members) and set(fs) <= s.members
    for t in enumerate_sieves(cat, x):
        if set(fs) <= t.members:
            assert s.members <= t.members


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(CATS[1:4]), st.data())
def test_generated_topology_is_valid_and_coarsest(cat, data):
    x = data.draw(st.sampled_from(cat.objects))
    gen = data.draw(st.sampled_from(enumerate_sieves(cat, x)))
    site = generate_topology(cat, [gen])
    assert validate_site(site).ok
    assert gen in site.covers[x]


def test_countable_choice_site():
    site = build_countable_choice_site(3)
    assert validate_site(site).ok
    assert len(site.generators) == 3
    for s in site.generators:
        assert s in site.covers[s.apex]
    triv = trivial_topology(site.cat)
    assert all(triv.covers[x] <= site.covers[x] for x in site.cat.objects)
    assert any(triv.covers[x] < site.covers[x] for x in site.cat.objects)


def test_countable_choice_needs_positive_bound():
    with pytest.raises(CategoryError):
        build_countable_choice_site(0)
