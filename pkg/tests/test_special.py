import pytest

from descentlab.cat import FinCat
from descentlab.cubdescent import DEngine, enumerate_delements
from descentlab.groupoid import FinGroupoid, GpdFunctor, GpdPresheaf, PresheafMap
from descentlab.registry import builtin_presheaves
from descentlab.special import (exp_truncation_patch, monoid_descent, monoid_violations,
                                perturbations, retract_equivalence, strict1_check, thicken)

PRESHEAVES = builtin_presheaves()


@pytest.fixture(scope="module")
def idempotent():
    A = PRESHEAVES["walking-idempotent-total"]
    eng = DEngine(A)
    return A, eng, enumerate_delements(A, "pt", 2, engine=eng)


def test_monoid_form_agrees_on_all_elements(idempotent):
    A, eng, us = idempotent
    assert len(us) == 20480
    for u in us[::7]:
        assert monoid_descent(A.base, A, u, eng).ok


def test_monoid_form_agrees_on_perturbed_candidates(idempotent):
    A, eng, us = idempotent
    rejected = 0
    for u in us[:25]:
        for n in (1, 2):
            for _, _, v in perturbations(eng, u, n):
                rep = monoid_descent(A.base, A, v, eng)
                assert rep.ok, rep.violations[:2]
                rejected += bool(monoid_violations(A.base, A, v, first=True))
    assert rejected > 0


def test_last_slot_condition_restricts_along_last_element(idempotent):
    # at n = 1 the vertex (1, 0) lies only on the face i_1 = 0, read through u(s_1 i)(x0) x1
    A, eng, us = idempotent
    hits = 0
    for u in us[:50]:
        for ch, p, v in perturbations(eng, u, 1):
            if p != 1:
                continue
            bad = monoid_violations(A.base, A, v, first=True)
            if bad:
                n, k, xs, vertex = bad[0]
                assert (n, k, vertex) == (1, 1, (1, 0))
                hits += 1
    assert hits > 0


def test_trivial_monoid_matches_terminal_base():
    A = PRESHEAVES["constant"]
    eng = DEngine(A)
    for u in enumerate_delements(A, "pt", 2, engine=eng):
        assert monoid_violations(A.base, A, u) == []
        assert monoid_descent(A.base, A, u, eng).ok


def test_non_monoid_base_is_rejected():
    A = PRESHEAVES["poset-bot-01"]
    G = A.level["0"]
    u = DEngine(A).eta("0", (G.identity[G.objects[0]],), 1)
    with pytest.raises(ValueError):
        monoid_violations(A.base, A, u)


def test_exp_singleton_is_strict():
    p = exp_truncation_patch(["r"], FinGroupoid.chaotic(["a", "b"]), "r")
    assert p.report.ok and p.strict
    assert p.elements == 8


def test_exp_two_points_left_inverse():
    p = exp_truncation_patch(["r", "s"], FinGroupoid.chaotic(["a", "b"]), "s", top=1)
    assert p.report.ok
    assert not p.strict  # u(r) and u(s) may be different but isomorphic objects
    assert p.report.counts["p after η is the identity"] == 6


def test_exp_empty_is_an_error():
    with pytest.raises(ValueError):
        exp_truncation_patch([], FinGroupoid.chaotic(["a"]), "r")


@pytest.mark.parametrize("name", sorted(PRESHEAVES))
def test_strict1_for_thickened_presheaves(name):
    A = PRESHEAVES[name]
    B, sigma = thicken(A)
    assert strict1_check(sigma).ok


def test_strict1_rejects_non_equivalence():
    base = FinCat.terminal()
    A = GpdPresheaf.constant(base, FinGroupoid.discrete(["a"]))
    B = GpdPresheaf.constant(base, FinGroupoid.discrete(["a", "b"]))
    s = PresheafMap(A, B, {"pt": GpdFunctor(A.level["pt"], B.level["pt"], {"a": "a"},
                                            {"id_a": "id_a"})})
    assert not strict1_check(s).ok


def test_walking_retract_splitting():
    ok, F = retract_equivalence()
    assert ok
    assert len(F.source.objects) > 0
