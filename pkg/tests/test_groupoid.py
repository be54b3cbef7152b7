import pytest
from hypothesis import given, settings, strategies as st

from descentlab.cat import FinCat
from descentlab.groupoid import (FinGroupoid, GpdFunctor, GpdPresheaf, PresheafMap, check_equivalence,
                                 global_points, is_contractible, pointwise_contractible,
                                 validate_functor, validate_groupoid, validate_presheaf,
                                 validate_presheaf_map)
from descentlab.registry import builtin_presheaves, z2, z2_swap

SWAP = FinGroupoid.chaotic(["a", "b"])
GROUPOIDS = [FinGroupoid.terminal(), SWAP, FinGroupoid.discrete(["p", "q"]), FinGroupoid.empty(),
             FinGroupoid.from_components([["x"], ["y", "z"]]),
             FinGroupoid.from_group(["0", "1", "2"], lambda a, b: str((int(a) + int(b)) % 3), "0")]


@pytest.mark.parametrize("g", GROUPOIDS, ids=repr)
def test_builtin_groupoids_valid(g):
    assert validate_groupoid(g).ok


def test_planted_inverse_defect():
    g = FinGroupoid.chaotic(["a", "b"])
    g.inverse["a_b"] = "a_b"
    assert not validate_groupoid(g).ok


def brute_contractible(g):
    return bool(g.objects) and all(
        sum(1 for f, dc in g.morphisms.items() if dc == (a, b)) == 1
        for a in g.objects for b in g.objects)


@pytest.mark.parametrize("g", GROUPOIDS, ids=repr)
def test_contractible_matches_equivalence_to_terminal(g):
    ok, _ = is_contractible(g)
    assert ok == brute_contractible(g)
    assert ok == check_equivalence(GpdFunctor.to_terminal(g))[0]


def test_contractible_examples():
    assert is_contractible(FinGroupoid.terminal()) == (True, "pt")
    assert is_contractible(SWAP)[0]
    assert is_contractible(FinGroupoid.empty()) == (False, ())


def test_equivalence_examples():
    assert check_equivalence(GpdFunctor.identity(SWAP))[0]
    ok, section = check_equivalence(GpdFunctor.to_terminal(SWAP))
    assert ok and section["pt"][0] == "a"
    ok, why = check_equivalence(GpdFunctor.to_terminal(FinGroupoid.discrete(["p", "q"])))
    assert not ok and why[0] == "not full"


def test_not_essentially_surjective():
    F = GpdFunctor(FinGroupoid.terminal(), SWAP, {"pt": "a"}, {"id_pt": "id_a"})
    assert check_equivalence(F)[0]
    F = GpdFunctor(FinGroupoid.terminal(), FinGroupoid.discrete(["p", "q"]), {"pt": "p"},
                   {"id_pt": "id_p"})
    assert check_equivalence(F) == (False, ("not essentially surjective", "q"))


def test_not_faithful():
    g = GROUPOIDS[-1]
    F = GpdFunctor.to_terminal(g)
    assert check_equivalence(F)[1][0] == "not faithful"


@pytest.mark.parametrize("g", GROUPOIDS[:3], ids=repr)
def test_equivalence_stable_under_identity(g):
    F = GpdFunctor.to_terminal(g)
    assert check_equivalence(GpdFunctor.identity(g).then(F)) == check_equivalence(F)


def test_functor_validator_catches_bad_map():
    F = GpdFunctor(SWAP, SWAP, {"a": "a", "b": "b"},
                   {"id_a": "id_a", "id_b": "id_b", "a_b": "b_a", "b_a": "a_b"})
    assert "dom/cod not preserved" in validate_functor(F).laws()


@pytest.mark.parametrize("name,A", builtin_presheaves().items())
def test_builtin_presheaves_valid(name, A):
    assert validate_presheaf(A).ok


def brute_points(A):
    from itertools import product
    objs = A.base.objects
    out = []
    for choice in product(*[A.level[x].objects for x in objs]):
        pt = dict(zip(objs, choice))
        if all(A.r_obj(f, pt[A.base.cod(f)]) == pt[A.base.dom(f)] for f in A.base.morphisms):
            out.append(pt)
    return out


@pytest.mark.parametrize("name,A", builtin_presheaves().items())
def test_global_points_match_brute_force(name, A):
    assert global_points(A) == brute_points(A)


def test_global_point_counts():
    P = builtin_presheaves()
    assert len(global_points(P["z2-swap"])) == 0
    assert len(global_points(P["walking-idempotent"])) == 0
    assert len(global_points(P["poset-bot-01"])) == 0
    assert len(global_points(P["constant"])) == 2
    assert len(global_points(GpdPresheaf.constant(FinCat.terminal(), FinGroupoid.terminal()))) == 1


def test_pointwise_contractible():
    P = builtin_presheaves()
    for name in ["z2-swap", "walking-idempotent", "poset-bot-01", "poset-01"]:
        assert pointwise_contractible(P[name])[0]
    empty = GpdPresheaf.constant(z2(), FinGroupoid.empty())
    assert not pointwise_contractible(empty)[0]
    assert global_points(empty) == []


def test_planted_non_functorial_restriction():
    A = z2_swap()
    A.restrict["t"] = GpdFunctor.identity(A.level["pt"])
    A.restrict["id"] = GpdFunctor(SWAP, SWAP, {"a": "b", "b": "a"},
                                  {"id_a": "id_b", "id_b": "id_a", "a_b": "b_a", "b_a": "a_b"})
    assert "restriction along identity is not the identity" in validate_presheaf(A).laws()


def test_map_to_terminal_is_pointwise_equivalence():
    A = z2_swap()
    s = PresheafMap.to_terminal(A)
    assert validate_presheaf_map(s).ok
    assert all(check_equivalence(s[x])[0] for x in A.base.objects)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=3, unique=True),
                min_size=1, max_size=3))
def test_from_components_is_valid(blocks):
    seen, clean = set(), []
    for b in blocks:
        b = [x for x in b if x not in seen]
        seen.update(b)
        if b:
            clean.append(b)
    g = FinGroupoid.from_components(clean)
    assert validate_groupoid(g).ok
    assert is_contractible(g)[0] == (len(clean) == 1)
