from itertools import permutations, product

import pytest
from hypothesis import given, settings, strategies as st

from descentlab.cat import FinCat
from descentlab.lexlaws import (Carrier, DInstance, EInstance, ExpInstance, Map, Planted, Universe,
                                all_maps, builtin_instances, derived_eta, dependent_modal_check,
                                enumerate_carriers, equivalence_preservation_check, fibres,
                                iso_check, key2_groupoid_check, modality_condition_check,
                                run_law_suite, sum_closure_check)
from descentlab.registry import poset_bot01_cat, z2

PT = FinCat.terminal()


@pytest.fixture(scope="module")
def sets3():
    return Universe.generate(PT, 3)


@pytest.fixture(scope="module")
def z2sets():
    return Universe.generate(z2(), 3)


def involutions(n):
    return sum(1 for p in permutations(range(n)) if all(p[p[i]] == i for i in range(n)))


def test_carrier_counts():
    assert len(enumerate_carriers(z2(), 3)) == sum(involutions(n) for n in range(4))
    # presheaves on bot < 0, 1: two maps into the set at bot
    oracle = sum(b ** (x + y) for b, x, y in product(range(4), repeat=3) if b + x + y <= 3)
    assert len(enumerate_carriers(poset_bot01_cat(), 3)) == oracle


def test_map_counts_between_sets(sets3):
    assert len(sets3.maps) == sum(b ** a for a in range(4) for b in range(4))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_exp_laws(sets3, k):
    inst = ExpInstance(["r", "s"][:k])
    rep = run_law_suite(inst, sets3)
    assert rep.ok, rep.violations[:2]
    assert rep.counts["pair of projections"] > 0
    cert = derived_eta(inst, sets3, rep)
    assert cert.ok
    for (_, _, a), d in cert.derived.items():
        assert d == (a,) * k  # the constant family


def test_e_laws_over_z2(z2sets):
    inst = EInstance(z2())
    rep = run_law_suite(inst, z2sets)
    assert rep.ok, rep.violations[:2]
    assert derived_eta(inst, z2sets, rep).ok


def test_e_over_terminal_is_identity(sets3):
    inst = EInstance(PT)
    for A in sets3.carriers:
        assert [u for u in inst.D(A, "pt")] == [(a,) for a in A.at("pt")]
        assert all(inst.eta(A, "pt", a) == (a,) for a in A.at("pt"))
    assert run_law_suite(inst, sets3).ok


def test_d_laws_over_z2():
    base = z2()
    U = Universe.generate(base, 2)
    inst = DInstance(base, 1)
    assert run_law_suite(inst, U).ok
    # on discrete carriers vertex elements are natural families, so D A ≅ A
    for A in U.carriers:
        assert len(inst.D(A, "pt")) == len(A.at("pt"))


@pytest.mark.parametrize("kind,law", [("pair-swap", "pair of projections"),
                                      ("sec-twist", "second projection of a pair")])
def test_planted_pairing_defects(sets3, kind, law):
    rep = run_law_suite(Planted(ExpInstance(["r", "s"]), kind), sets3)
    hits = [v for v in rep.violations if v.law == law]
    assert hits and hits[0].witness


def test_planted_eta_defect(sets3):
    inst = Planted(ExpInstance(["r", "s"]), "eta-twist")
    cert = derived_eta(inst, sets3)
    assert "declared η is (D ε_a)⟨⟩" in cert.report.laws()


def test_derived_eta_needs_laws(sets3):
    with pytest.raises(ValueError):
        derived_eta(Planted(ExpInstance(["r", "s"]), "pair-swap"), sets3)


def test_unknown_defect():
    with pytest.raises(ValueError):
        Planted(ExpInstance(["r"]), "nonsense")


@pytest.mark.parametrize("k", [0, 1, 2])
def test_iso_is_identity_for_exp(sets3, k):
    inst = ExpInstance(["r", "s"][:k])
    seen = 0
    for B in sets3.families:
        for g in B.over.globals():
            cert = iso_check(inst, B, g)
            assert cert.ok and cert.identity
            if k == 0:
                assert cert.size == 1  # both sides are the one-point set
            seen += 1
    assert seen > 0


def test_iso_over_z2(z2sets):
    inst = EInstance(z2())
    for B in z2sets.families[:80]:
        for g in B.over.globals():
            cert = iso_check(inst, B, g)
            assert cert.ok and cert.identity


def test_modality_discriminates(sets3):
    one = modality_condition_check(ExpInstance(["r"]), sets3)
    assert one.ok and all(s for _, s, _ in one.carriers.values())
    two = modality_condition_check(ExpInstance(["r", "s"]), sets3)
    assert not two.ok
    # D η and η_D already differ on a two-element set
    assert two.carriers["A2"][1] is False


def test_modality_d_with_key2():
    base = z2()
    rep = modality_condition_check(DInstance(base, 1), Universe.generate(base, 2),
                                   groupoid_check=key2_groupoid_check(limit=2))
    assert rep.ok and rep.extra["key2 chain"] == 2


def test_modality_needs_path(sets3):
    inst = ExpInstance(["r"])
    inst.path = None
    with pytest.raises(ValueError):
        modality_condition_check(inst, sets3)


def test_structural_checks(sets3):
    one = ExpInstance(["r"])
    assert sum_closure_check(one, sets3).ok
    assert dependent_modal_check(one, sets3).ok
    for k in (0, 1, 2):
        assert equivalence_preservation_check(ExpInstance(["r", "s"][:k]), sets3).ok


def test_universe_rejects_outside_maps(sets3):
    A = Carrier(PT, {"pt": ["x"]}, name="X")
    f = Map(A, sets3.carriers[1], {"pt": {"x": "e0"}})
    with pytest.raises(ValueError):
        run_law_suite(ExpInstance(["r"]), Universe(sets3.carriers, [f]))


def test_universe_rejects_unnatural_maps():
    base = z2()
    swap = Carrier(base, {"pt": ["a", "b"]}, {"id": {"a": "a", "b": "b"}, "t": {"a": "b", "b": "a"}})
    fixed = Carrier(base, {"pt": ["a", "b"]})
    bad = Map(swap, fixed, {"pt": {"a": "a", "b": "b"}})
    with pytest.raises(ValueError):
        Universe([swap, fixed], [bad]).check()


def test_registry_names():
    insts = builtin_instances()
    assert set(insts) == {"exp", "E", "D"}
    assert [len(i.R) for i, _ in insts["exp"]] == [0, 1, 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3))
def test_exp_counts(k, n):
    A = Carrier(PT, {"pt": [f"e{i}" for i in range(n)]})
    inst = ExpInstance([f"r{i}" for i in range(k)])
    assert len(inst.D(A, "pt")) == n ** k


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3))
def test_fibres_partition(n, m):
    A = Carrier(PT, {"pt": [f"a{i}" for i in range(n)]})
    T = Carrier(PT, {"pt": [f"t{i}" for i in range(m)]})
    for p in all_maps(T, A):
        B = fibres(p)
        assert sum(len(B.at("pt", a)) for a in A.at("pt")) == m
    assert len(all_maps(T, A)) == n ** m
