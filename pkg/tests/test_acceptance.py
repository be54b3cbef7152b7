"""The ten acceptance criteria, one test each, each printing a PASS/FAIL line."""

import time
from itertools import product

import pytest

from descentlab.cat import FinCat, generated_sieve, validate_site
from descentlab.cli import example_verdicts, run_command
from descentlab.cubdescent import (DEngine, cross_engine, enumerate_delements, key1_data,
                                   key2_data, vshape)
from descentlab.cubical import e_presheaf, nerve, nerve_presheaf
from descentlab.descent import check_stack, set_sheaf_oracle
from descentlab.dfill import run_d_harness
from descentlab.groupoid import pointwise_contractible
from descentlab.kan import (e_ext_lift, e_fill_lift, lw_families, lw_fill_lift, nerve_filling,
                            pointwise_extension, run_harness, run_lw_harness, as_e_partial)
from descentlab.lattice import (CubeMap, enumerate_cofibs, enumerate_cube_maps, enumerate_lw_cofibs,
                                fdl, pweight_cells)
from descentlab.lexlaws import (ExpInstance, DInstance, Planted, Universe, builtin_instances,
                                derived_eta, iso_check, key2_groupoid_check,
                                modality_condition_check, run_law_suite)
from descentlab.registry import (builtin_presheaves, builtin_sites, build_countable_choice_site,
                                 countable_choice_lattice, discrete_zoo, poset01_cat, z2)

LIMITS = {1: 5, 2: 30, 3: 60, 4: 60, 5: 30, 6: 30, 7: 10, 8: 10, 9: 10, 10: 5}


@pytest.fixture
def criterion(capsys):
    """Time a criterion and print its verdict line."""
    state = {}

    def start(n):
        state["n"], state["t"] = n, time.perf_counter()

    def finish(ok, detail=""):
        n = state["n"]
        dt = time.perf_counter() - state["t"]
        within = dt < LIMITS[n]
        verdict = "PASS" if ok and within else "FAIL"
        note = "" if within else f", over the {LIMITS[n]} s budget"
        with capsys.disabled():
            print(f"\ncriterion {n}: {verdict} ({dt:.1f} s{note}) {detail}")
        assert ok, detail
        assert within, f"took {dt:.1f} s"

    return start, finish


def test_criterion_1_counterexamples(criterion):
    start, finish = criterion
    start(1)
    want = {"pointwise contractible": True, "global points": 0,
            "descent contractible": True, "modal": False}
    bad = []
    for name in ("z2-swap", "walking-idempotent", "poset-bot-01"):
        _, got = example_verdicts(name)
        if got != want or run_command(["example", name])[0] != 0:
            bad.append((name, got))
    finish(not bad, f"3 examples, mismatches: {bad}")


def test_criterion_2_contractible_extension(criterion):
    start, finish = criterion
    start(2)
    P = builtin_presheaves()
    names = [n for n, A in P.items() if pointwise_contractible(A)[0]]
    bad, inputs = [], 0
    for name in names:
        A = P[name]
        NP = nerve_presheaf(A, 2)
        E = e_presheaf(NP)
        for label, rep in [("E ext", run_harness(e_ext_lift(pointwise_extension(NP), E), N=2)),
                           ("E fill", run_harness(e_fill_lift(nerve_filling(NP), E), N=2)),
                           ("D N=1", run_d_harness(A, top=1, N=1))]:
            inputs += rep.counts.get("inputs", 0)
            if not rep.ok:
                bad.append((name, label, rep.violations[0]))
        # D at N = 2: exhaustive where it is small, sampled otherwise
        big = name in ("z2-swap", "walking-idempotent", "poset-bot-01")
        rep = run_d_harness(A, top=1, N=2, max_inputs=30 if big else None)
        inputs += rep.counts.get("inputs", 0)
        if not rep.ok:
            bad.append((name, "D N=2", rep.violations[0]))
    finish(not bad, f"{len(names)} presheaves, {inputs} inputs, failures: {bad[:1]}")


def test_criterion_3_key_formulas(criterion):
    start, finish = criterion
    start(3)
    P = builtin_presheaves()
    count, bad = 0, []
    for name in ("z2-swap", "walking-idempotent"):
        A = P[name]
        eng = DEngine(A)
        for x in A.base.objects:
            for u in enumerate_delements(A, x, 2, engine=eng):
                count += 1
                k1 = key1_data(A, u, eng)
                if not k1.report.ok:
                    bad.append((name, x, "key1", k1.report.violations[0]))
                k2 = key2_data(A, u, eng)
                if not k2.report.ok:
                    bad.append((name, x, "key2", k2.report.violations[0]))
            S = nerve(A.level[x], 1)
            for m in range(2):
                for cell in S.cells[m]:
                    if eng.G(eng.eta(x, cell, 2, m)) != cell:
                        bad.append((name, x, "G η = id", cell))
    finish(not bad, f"{count} elements, failures: {bad[:1]}")


def test_criterion_4_cross_engine(criterion):
    start, finish = criterion
    start(4)
    bad, classes = [], 0
    for name, A in builtin_presheaves().items():
        eng = DEngine(A)
        for x in A.base.objects:
            rep = cross_engine(A, x, engine=eng)
            classes += rep.iso_classes
            if not rep.ok or rep.classes != rep.iso_classes:
                bad.append((name, x, rep.problems[:1]))
    finish(not bad, f"{classes} iso classes matched, failures: {bad}")


def test_criterion_5_sheaf_oracle(criterion):
    start, finish = criterion
    start(5)
    cases, bad = 0, []
    for sname, site in builtin_sites().items():
        for A in discrete_zoo(site.cat):
            cases += 1
            if check_stack(A, site).verdict != set_sheaf_oracle(A, site):
                bad.append((sname, A.name))
    finish(cases >= 20 and not bad, f"{cases} presheaves, disagreements: {bad}")


def test_criterion_6_lex_laws(criterion):
    start, finish = criterion
    start(6)
    bad, planted, checked = [], 0, 0
    for _, items in builtin_instances().items():
        for inst, make in items:
            U = make()
            rep = run_law_suite(inst, U)
            checked += sum(rep.counts.values())
            if not rep.ok:
                bad.append((inst.name, rep.violations[0]))
                continue
            if not derived_eta(inst, U, rep).ok:
                bad.append((inst.name, "derived η"))
            for B in U.families:
                for g in B.over.globals():
                    c = iso_check(inst, B, g)
                    if not (c.ok and c.identity):
                        bad.append((inst.name, "iso", B.name))
            for kind in Planted.KINDS:
                if not Planted.visible(inst, U, kind):
                    continue
                P = Planted(inst, kind)
                prep = run_law_suite(P, U)
                caught = not prep.ok or not derived_eta(P, U, prep).ok
                planted += 1
                if not caught:
                    bad.append((inst.name, "planted", kind))
    finish(not bad and planted >= 9,
           f"{checked} law instances, {planted} planted defects caught, failures: {bad[:2]}")


def test_criterion_7_modality_condition(criterion):
    start, finish = criterion
    start(7)
    U = Universe.generate(FinCat.terminal(), 3)
    one = modality_condition_check(ExpInstance(["r"]), U)
    two = modality_condition_check(ExpInstance(["r", "s"]), U)
    base = z2()
    d = modality_condition_check(DInstance(base, 1), Universe.generate(base, 3),
                                 groupoid_check=key2_groupoid_check(limit=6))
    strict_one = all(s for _, s, _ in one.carriers.values())
    ok = one.ok and strict_one and d.ok and not two.ok
    finish(ok, f"exp|R|=1 {one.ok}, D {d.ok}, exp|R|=2 {two.ok} "
               f"({two.report.violations[0].law if two.report.violations else ''})")


def _monotone_count(m):
    pts = list(product((0, 1), repeat=m))
    le = [(p, q) for p in pts for q in pts if all(a <= b for a, b in zip(p, q))]
    return sum(1 for vals in product((0, 1), repeat=len(pts))
               if all(vals[pts.index(p)] <= vals[pts.index(q)] for p, q in le))


def test_criterion_8_cube_combinatorics(criterion):
    start, finish = criterion
    start(8)
    counts = [len(fdl(m)) for m in (1, 2, 3)]
    oracle = [_monotone_count(m) for m in (1, 2, 3)]
    p1 = (len(vshape(0, 1)), len(pweight_cells(1, 0)))
    maps = [l for m in range(3) for n in range(3) for l in enumerate_cube_maps(m, n)]
    table = {}
    for a in maps:
        for b in maps:
            if a.n == b.m:
                table[(a, b)] = a.then(b)
    laws = all(table[(a, CubeMap.identity(a.n))] == a == table[(CubeMap.identity(a.m), a)]
               for a in maps)
    triples = 0
    for (a, b), ab in table.items():
        for c in maps:
            if c.m == b.n:
                triples += 1
                laws = laws and table[(ab, c)] == table[(a, table[(b, c)])]
    ok = counts == oracle == [3, 6, 20] and p1 == (3, 3) and laws
    finish(ok, f"FDL sizes {counts}, P_1 vertices {p1[0]}, {triples} associativity triples")


def test_criterion_9_levelwise_cofibrations(criterion):
    start, finish = criterion
    start(9)
    A = builtin_presheaves()["z2-swap"]
    NP = nerve_presheaf(A, 2)
    E = e_presheaf(NP)
    c = nerve_filling(NP)
    lw, cE = lw_fill_lift(c, E), e_fill_lift(c, E)
    constant, agree = True, 0
    for n in range(2):
        for L in enumerate_lw_cofibs(A.base, "pt", enumerate_cofibs(n)):
            constant = constant and L.is_constant()
            psi = next(iter(L.family.values()))
            for u in lw_families(NP, "pt", n, L):
                agree += 1
                if lw("pt", n, L, u) != cE("pt", n, psi, as_e_partial(E, "pt", n, u)):
                    constant = False
    z2rep = run_lw_harness(c, E)
    P01 = builtin_presheaves()["poset-01"]
    NP01 = nerve_presheaf(P01, 2)
    rep01 = run_lw_harness(nerve_filling(NP01), e_presheaf(NP01))
    nonconst = any(not L.is_constant()
                   for L in enumerate_lw_cofibs(poset01_cat(), "1", enumerate_cofibs(1)))
    ok = constant and agree > 0 and z2rep.ok and rep01.ok and rep01.nonconstant > 0 and nonconst
    finish(ok, f"{agree} ℤ/2 inputs agree, {rep01.nonconstant} non-constant families over 0 ≤ 1")


def test_criterion_10_countable_choice_site(criterion):
    start, finish = criterion
    start(10)
    site = build_countable_choice_site(3)
    valid = validate_site(site).ok
    elems, gens = countable_choice_lattice(3)
    lab = {v: k for k, v in elems.items()}
    cat = site.cat
    found = []
    for n in range(3):
        x, l, x1 = lab[gens[f"X{n}"]], lab[gens[f"L{n}"]], lab[gens[f"X{n + 1}"]]
        fs = [next(f for f in cat.into(x) if cat.dom(f) == y) for y in (l, x1)]
        found.append(generated_sieve(cat, x, fs) in site.covers[x])
    finish(valid and all(found), f"valid {valid}, covers present {found}")
