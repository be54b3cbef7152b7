from itertools import product

import pytest

from descentlab.cat import CategoryError, FinCat, Sieve, maximal_sieve, validate_site
from descentlab.descent import (DescentShape, alpha_gpd, check_cocycle, check_modal, check_stack,
                                descent_groupoid, descent_presheaf, descent_restriction, e_groupoid,
                                e_restriction, eta_descent, induced_descent_map, is_unital,
                                precompose_projection, projection, set_sheaf_oracle, sieve_descent,
                                unital_inclusion, verify_patch)
from descentlab.groupoid import (FinGroupoid, GpdFunctor, GpdPresheaf, PresheafMap,
                                 check_equivalence, is_contractible, pointwise_contractible,
                                 validate_functor, validate_groupoid, validate_presheaf)
from descentlab.registry import (builtin_presheaves, builtin_sites, discrete_presheaf,
                                 discrete_zoo, poset_bot01_cat, z2, z2_swap)
from descentlab.report import BudgetExhausted

PRESHEAVES = builtin_presheaves()
SMALL = {k: v for k, v in PRESHEAVES.items() if k != "walking-retract"}


def brute_descent_objects(A, x, members=None):
    """Every (u, φ) by raw product over all objects and morphisms, then filtered."""
    C = A.base
    fs = sorted(members if members is not None else C.into(x))
    pairs = [(f, g) for f in fs for g in sorted(C.into(C.dom(f)))]
    out = []
    for us in product(*[A.level[C.dom(f)].objects for f in fs]):
        u = dict(zip(fs, us))
        for ps in product(*[list(A.level[C.dom(g)].morphisms) for _, g in pairs]):
            phi = dict(zip(pairs, ps))
            ok = all(A.level[C.dom(g)].morphisms[phi[(f, g)]] ==
                     (u[C.compose(f, g)], A.r_obj(g, u[f])) for f, g in pairs)
            if ok:
                for f, g in pairs:
                    for h in C.into(C.dom(g)):
                        Z = A.level[C.dom(h)]
                        lhs = phi[(f, C.compose(g, h))]
                        rhs = Z.compose(A.r_mor(h, phi[(f, g)]), phi[(C.compose(f, g), h)])
                        ok = ok and lhs == rhs
            if ok:
                out.append((u, phi))
    return out


@pytest.mark.parametrize("name", sorted(SMALL))
def test_descent_objects_match_brute_force(name):
    A = SMALL[name]
    for x in A.base.objects:
        G = descent_groupoid(A, x)
        assert len(G.objects) == len(brute_descent_objects(A, x))


@pytest.mark.parametrize("name", sorted(PRESHEAVES))
def test_descent_groupoid_is_valid(name):
    A = PRESHEAVES[name]
    for x in A.base.objects:
        G = descent_groupoid(A, x)
        assert validate_groupoid(G).ok
        assert all(not check_cocycle(A, G.shape, d) for d in G.objects)


@pytest.mark.parametrize("name", sorted(PRESHEAVES))
def test_eta_is_functor_and_equivalence(name):
    A = PRESHEAVES[name]
    for x in A.base.objects:
        eta = eta_descent(A, x)
        assert validate_functor(eta).ok
        assert check_equivalence(eta)[0]


@pytest.mark.parametrize("name", sorted(PRESHEAVES))
def test_descent_presheaf_valid_and_eta_natural(name):
    A = PRESHEAVES[name]
    DA, eta = descent_presheaf(A)
    assert validate_presheaf(DA).ok
    C = A.base
    for f in C.morphisms:
        y, x = C.dom(f), C.cod(f)
        assert A.restrict[f].then(eta[y]) == eta[x].then(DA.restrict[f])


@pytest.mark.parametrize("name", sorted(PRESHEAVES))
def test_descent_contractible_when_pointwise_contractible(name):
    A = PRESHEAVES[name]
    if pointwise_contractible(A)[0]:
        for x in A.base.objects:
            assert is_contractible(descent_groupoid(A, x))[0]


@pytest.mark.parametrize("name", sorted(PRESHEAVES))
def test_unital_subgroupoid_is_everything(name):
    A = PRESHEAVES[name]
    for x in A.base.objects:
        G = descent_groupoid(A, x)
        assert all(is_unital(A, G.shape, d) for d in G.objects)
        assert check_equivalence(unital_inclusion(G))[0]


def test_e_groupoid_shapes():
    A = z2_swap()
    E = e_groupoid(A, "pt")
    assert len(E.objects) == 4 and validate_groupoid(E).ok
    assert alpha_gpd(A, "pt").obj["a"] == ("a", "b")
    B = PRESHEAVES["poset-bot-01"]
    assert len(e_groupoid(B, "0").objects) == 1 * 2
    FT = e_restriction(A, "t")
    assert FT.obj[("a", "b")] == ("b", "a")


@pytest.mark.parametrize("name", sorted(SMALL))
def test_alpha_then_identity_projection(name):
    A = SMALL[name]
    for x in A.base.objects:
        al = alpha_gpd(A, x)
        assert validate_functor(al).ok
        for a in A.level[x].objects:
            assert al.obj[a][0] == a  # identity is first in the slice
        for f in A.base.into(x):
            y = A.base.dom(f)
            R = e_restriction(A, f)
            assert A.restrict[f].then(alpha_gpd(A, y)) == al.then(R)


def test_terminal_base_descent_is_iso():
    A = PRESHEAVES["constant"]
    eta = eta_descent(A, "pt")
    assert len(eta.target.objects) == len(A.level["pt"].objects)
    assert len(eta.target.morphisms) == len(A.level["pt"].morphisms)


def test_sieve_descent_examples():
    A = PRESHEAVES["poset-bot-01"]
    C = A.base
    full = descent_groupoid(A, "0")
    assert len(sieve_descent(A, "0", maximal_sieve(C, "0")).objects) == len(full.objects)
    empty = sieve_descent(A, "0", Sieve("0", []))
    assert len(empty.objects) == 1 and len(empty.morphisms) == 1
    one = sieve_descent(A, "0", Sieve("0", ["bot_0"]))
    assert check_equivalence(GpdFunctor.to_terminal(one))[0] == is_contractible(A.level["bot"])[0]
    assert len(one.objects) == len(A.level["bot"].objects)
    with pytest.raises(CategoryError):
        sieve_descent(A, "1", Sieve("1", ["bot_0"]))


def test_non_sieve_index_rejected():
    with pytest.raises(CategoryError):
        DescentShape(z2(), "pt", ["id"])


def test_projection_examples_and_coherence():
    A = PRESHEAVES["poset-bot-01"]
    C = A.base
    top, low, none = maximal_sieve(C, "0"), Sieve("0", ["bot_0"]), Sieve("0", [])
    same = projection(A, "0", top, top)
    assert all(same.obj[d] == d for d in same.source.objects)
    to_empty = projection(A, "0", none, top)
    assert len(set(to_empty.obj.values())) == 1
    p = projection(A, "0", low, top)
    for d, e in p.obj.items():
        assert e.u == (d.u[p.source.shape.pos["bot_0"]],)
    eta_top = eta_descent(A, "0", p.source)
    eta_low = eta_descent(A, "0", p.target)
    assert eta_top.then(p) == eta_low
    with pytest.raises(CategoryError):
        projection(A, "0", top, low)


def test_budget_exhaustion_reports_sizes():
    A = PRESHEAVES["walking-retract"]
    with pytest.raises(BudgetExhausted) as exc:
        descent_groupoid(A, "1", budget=10)
    assert exc.value.sizes["index"] == 3


def test_check_modal_examples():
    for name in ["z2-swap", "walking-idempotent", "poset-bot-01"]:
        rep = check_modal(PRESHEAVES[name])
        assert rep.verdict is False
        assert rep.counterevidence[0] == "global point obstruction"
    for name in ["constant", "poset-01"]:
        rep = check_modal(PRESHEAVES[name])
        assert rep.verdict is True and rep.patch is not None


def test_check_modal_unknown_on_tiny_budget():
    rep = check_modal(PRESHEAVES["walking-idempotent-total"], budget=5)
    assert rep.verdict is None and rep.label == "unknown"


def test_total_walking_idempotent_not_modal_by_search():
    rep = check_modal(PRESHEAVES["walking-idempotent-total"])
    assert rep.verdict is False
    assert rep.counterevidence == ("no strictly natural patch exists",)


def test_patch_verifier_rejects_perturbed_patch():
    A = PRESHEAVES["poset-01"]
    rep = check_modal(A)
    DA, eta = descent_presheaf(A)
    assert verify_patch(A, DA, eta, rep.patch).ok
    p = rep.patch.functors["1"]
    obj = dict(p.obj)
    d = next(iter(obj))
    obj[d] = "x2" if obj[d] == "x1" else "x1"
    bad = GpdFunctor(p.source, p.target, obj, p.mor)
    rep.patch.functors["1"] = bad
    assert not verify_patch(A, DA, eta, rep.patch).ok


def two_point_swap_map():
    # σ : swap presheaf -> terminal presheaf over ℤ/2
    return PresheafMap.to_terminal(z2_swap())


@pytest.mark.parametrize("name", ["z2-swap", "walking-idempotent", "poset-bot-01", "poset-01"])
def test_pointwise_equivalence_induces_descent_equivalence(name):
    A = PRESHEAVES[name]
    s = PresheafMap.to_terminal(A)
    for x in A.base.objects:
        F = induced_descent_map(s, x)
        assert validate_functor(F).ok
        assert check_equivalence(F)[0]


def test_restriction_commutes_with_eta_and_validity():
    A = PRESHEAVES["walking-idempotent"]
    C = A.base
    G = {x: descent_groupoid(A, x) for x in C.objects}
    for f in C.morphisms:
        R = descent_restriction(A, f, G[C.cod(f)], G[C.dom(f)])
        assert validate_functor(R).ok
        assert eta_descent(A, C.cod(f), G[C.cod(f)]).then(R) == \
            A.restrict[f].then(eta_descent(A, C.dom(f), G[C.dom(f)]))


# -- stacks and the sheaf oracle ----------------------------------------------------

def test_sheaf_oracle_examples():
    site = builtin_sites()["poset-bot-01-cover"]
    C = site.cat
    assert validate_site(site).ok
    bad = discrete_presheaf(C, {"0": ["x", "y"], "1": ["w"], "bot": ["z"]},
                            {"bot_0": {"x": "z", "y": "z"}, "bot_1": {"w": "z"}})
    good = discrete_presheaf(C, {"0": ["x"], "1": ["w"], "bot": ["z"]},
                             {"bot_0": {"x": "z"}, "bot_1": {"w": "z"}})
    assert set_sheaf_oracle(bad, site) is False
    assert set_sheaf_oracle(good, site) is True
    assert check_stack(bad, site).verdict is False
    assert check_stack(good, site).verdict is True


def test_sheaf_oracle_rejects_groupoids():
    with pytest.raises(CategoryError):
        set_sheaf_oracle(z2_swap(), builtin_sites()["z2"])


def test_stack_over_trivial_topology():
    A = z2_swap()
    rep = check_stack(A, builtin_sites()["z2"])
    assert rep.verdict is True and not rep.failures()
    assert check_modal(A).verdict is False


def stack_cases():
    cases = []
    for sname, site in builtin_sites().items():
        for A in discrete_zoo(site.cat):
            cases.append((sname, site, A))
    return cases


def test_enough_stack_cases():
    assert len(stack_cases()) >= 20


@pytest.mark.parametrize("sname,site,A", stack_cases(),
                         ids=[f"{s}-{a.name}" for s, _, a in stack_cases()])
def test_stack_matches_sheaf_oracle(sname, site, A):
    assert check_stack(A, site).verdict == set_sheaf_oracle(A, site)


# -- filtered ordering of sieve families ---------------------------------------------

def test_filtered_ordering_on_poset():
    A = PRESHEAVES["poset-01"]
    C = A.base
    # S1(1) = all, S1(0) = all  ⊆  itself; and the empty family ⊆ maximal
    small = {"0": Sieve("0", []), "1": Sieve("1", [])}
    rep1 = check_modal(A, sieves=small)
    # D over the empty family is terminal, so A is D_∅-modal only if pointwise contractible
    assert rep1.verdict is True
    patch2, DA2, eta2 = precompose_projection(A, rep1.patch, small, {})
    assert verify_patch(A, DA2, eta2, patch2).ok


def test_sieve_family_must_be_stable():
    A = PRESHEAVES["poset-bot-01"]
    with pytest.raises(CategoryError):
        check_modal(A, sieves={"bot": Sieve("bot", [])})
    # {bot_0} at 0 with maximal sieves elsewhere is stable
    assert check_modal(A, sieves={"0": Sieve("0", ["bot_0"])}).verdict is False


@pytest.mark.parametrize("name", ["z2-swap", "walking-idempotent", "poset-bot-01"])
def test_exhaustive_patch_search_agrees_with_obstruction(name):
    rep = check_modal(PRESHEAVES[name], shortcut=False)
    assert rep.verdict is False
    assert rep.counterevidence == ("no strictly natural patch exists",)
