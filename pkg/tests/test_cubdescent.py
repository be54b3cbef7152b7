import pytest

from descentlab.cubdescent import (DEngine, chains, cross_engine, d2_violations, edges,
                                   enumerate_delements, expansion_violations, is_constant_homotopy,
                                   key1_data, key2_data, plant_defect, section_element,
                                   to_descent_datum, validate_delement, vshape)
from descentlab.cubical import all_maps, nerve
from descentlab.descent import descent_groupoid
from descentlab.registry import builtin_presheaves
from descentlab.special import perturbations

PRESHEAVES = builtin_presheaves()


def engine(name):
    A = PRESHEAVES[name]
    return A, DEngine(A)


def test_vertex_shapes():
    # P_n has 2^(n+1) - 1 vertices
    assert [len(vshape(0, n)) for n in range(4)] == [1, 3, 7, 15]
    assert len(vshape(2, 1)) == 4 * 3


def test_chain_counts():
    C = PRESHEAVES["poset-bot-01"].base
    # a chain into 0 of length 2 picks f into 0 and g into dom f
    oracle = sum(len(C.into(C.dom(f))) for f in C.into("0"))
    assert len(chains(C, "0", 2)) == oracle


@pytest.mark.parametrize("name", ["z2-swap", "poset-bot-01", "walking-idempotent"])
def test_eta_images_are_valid(name):
    A, eng = engine(name)
    for x in A.base.objects:
        S = nerve(A.level[x], 1)
        for m in range(2):
            for cell in S.cells[m]:
                u = eng.eta(x, cell, 2, m)
                assert validate_delement(A, u, eng).ok
                assert eng.G(u) == cell


def test_perturbed_element_reports_witness():
    A, eng = engine("z2-swap")
    u = eng.eta("pt", ("id_a",), 2)
    found = False
    for ch, p, v in perturbations(eng, u, 1):
        rep = validate_delement(A, v, eng)
        if not rep.ok:
            n, k, chain, vertex = rep.violations[0].witness
            # the defect shows up on its own chain or on a chain one level up reading it
            assert n in (1, 2) and 0 <= k <= n and vertex in vshape(0, n)
            if n == 1:
                assert chain == ch
            found = True
    assert found


def test_missing_cells_are_rejected():
    A, eng = engine("z2-swap")
    u = eng.eta("pt", ("id_a",), 2)
    from descentlab.cubdescent import DElement
    with pytest.raises(ValueError):
        validate_delement(A, DElement("pt", 0, 2, u.body[:2]), eng)


@pytest.mark.parametrize("name", ["poset-bot-01", "walking-idempotent-total"])
def test_expansion_oracle_agrees(name):
    A, eng = engine(name)
    x = A.base.objects[0]
    us = enumerate_delements(A, x, 2, engine=eng)[:40]
    for u in us:
        assert expansion_violations(A, u, 2, eng) == []
        for _, _, v in perturbations(eng, u, 1, limit=6) + perturbations(eng, u, 2, limit=6):
            assert bool(expansion_violations(A, v, 2, eng)) == bool(eng.violations(v))


def test_swap_vertex_elements_at_level_zero():
    A, eng = engine("z2-swap")
    us = enumerate_delements(A, "pt", 0, engine=eng)
    # one object for each of the two maps into the point
    assert len(us) == 2 ** 2


@pytest.mark.parametrize("name", ["poset-bot-01", "poset-01", "constant"])
def test_cross_engine_small(name):
    A = PRESHEAVES[name]
    eng = DEngine(A)
    for x in A.base.objects:
        rep = cross_engine(A, x, engine=eng)
        assert rep.ok, rep.problems[:3]
        assert rep.classes == rep.iso_classes


def test_sections_read_back():
    A, eng = engine("z2-swap")
    DG = descent_groupoid(A, "pt")
    for d in DG.objects:
        s = section_element(A, "pt", d, 2, eng)
        assert to_descent_datum(A, s, eng) == d
        assert edges(A, s, s, eng, first=True)


@pytest.mark.parametrize("name,x", [("walking-idempotent", "rho1"), ("walking-idempotent", "rho2"),
                                    ("poset-bot-01", "0")])
def test_key1_key2_on_all_elements(name, x):
    A, eng = engine(name)
    for u in enumerate_delements(A, x, 2, engine=eng):
        r1 = key1_data(A, u, eng).report
        assert r1.ok, r1.violations[:2]
        r2 = key2_data(A, u, eng).report
        assert r2.ok, r2.violations[:2]


def test_key_homotopies_of_eta_are_constant():
    A, eng = engine("z2-swap")
    for a in [("id_a",), ("id_b",)]:
        u = eng.eta("pt", a, 2)
        k1 = key1_data(A, u, eng)
        assert k1.G == a
        assert is_constant_homotopy(eng, k1.u_k) and is_constant_homotopy(eng, k1.v_k)
        k2 = key2_data(A, u, eng)
        assert k2.eta_D == k2.D_eta == k2.tilde
        assert k2.report.ok


def test_key1_rejects_invalid_input():
    A, eng = engine("z2-swap")
    u = eng.eta("pt", ("id_a",), 2)
    bad = next(v for _, _, v in perturbations(eng, u, 1) if eng.violations(v))
    with pytest.raises(ValueError):
        key1_data(A, bad, eng)


def test_planted_condition_two_defect():
    A, eng = engine("z2-swap")
    u = enumerate_delements(A, "pt", 2, engine=eng, first=True)[0]
    tilde = key2_data(A, u, eng).tilde
    assert d2_violations(eng, tilde) == []
    v = plant_defect(eng, tilde, 0, 1, cond=2)
    assert v is not None
    cond, n, p, idx, chain, vertex = d2_violations(eng, v)[0]
    assert cond == 2 and (n, p) == (0, 1)


def test_compatibility_is_stable_under_restriction():
    A, eng = engine("poset-bot-01")
    C = A.base
    for x in C.objects:
        for u in enumerate_delements(A, x, 2, engine=eng)[:20]:
            for h in C.into(x):
                assert eng.violations(eng.restrict_base(u, h)) == []
    for u in enumerate_delements(A, "0", 1, m=1, engine=eng)[:20]:
        for m2 in range(3):
            for l in all_maps(m2, 1):
                assert eng.violations(eng.act(u, l)) == []
