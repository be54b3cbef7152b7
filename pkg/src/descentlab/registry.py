"""Builtin examples: small presheaves and sites with their expected verdicts.

Expected verdicts are recorded here but never trusted: the test suite and
``descentlab example`` recompute every one of them.
"""

from dataclasses import dataclass, field
from itertools import product

from .cat import CategoryError, FinCat, Sieve, generate_topology, trivial_topology
from .groupoid import FinGroupoid, GpdFunctor, GpdPresheaf


def z2():
    return FinCat.from_monoid(["id", "t"], lambda x, y: "id" if x == y else "t", "id", name="Z/2")


def z2_swap():
    """ℤ/2 acting on a chaotic two-object groupoid by swapping the objects."""
    base = z2()
    G = FinGroupoid.chaotic(["a", "b"], name="swap")
    return GpdPresheaf.from_maps(base, {"pt": G}, {"t": {"a": "b", "b": "a"}}, name="z2-swap")


def poset_bot01_cat():
    leq = lambda x, y: x == y or x == "bot"
    return FinCat.from_poset(["bot", "0", "1"], leq, name="bot<0,1")


def poset_bot01():
    """Over ⊥ < 0, 1: points at 0 and 1 landing on two isomorphic objects at ⊥."""
    base = poset_bot01_cat()
    level = {"0": FinGroupoid.discrete(["a0"]), "1": FinGroupoid.discrete(["a1"]),
             "bot": FinGroupoid.chaotic(["x0", "x1"])}
    return GpdPresheaf.from_maps(base, level, {"bot_0": {"a0": "x0"}, "bot_1": {"a1": "x1"}},
                                 name="poset-bot-01")


def idempotent_elements_cat():
    """Category of elements of ρ1 e = ρ2 e = ρ over the walking idempotent."""
    objs = ["rho", "rho1", "rho2"]
    mors = {"id_rho": ("rho", "rho"), "id_rho1": ("rho1", "rho1"), "id_rho2": ("rho2", "rho2"),
            "e1": ("rho", "rho1"), "e2": ("rho", "rho2"), "e_rho": ("rho", "rho")}
    ident = {x: f"id_{x}" for x in objs}
    comp = {}
    for f, (d, c) in mors.items():
        comp[(ident[c], f)] = f
        comp[(f, ident[d])] = f
    comp[("e_rho", "e_rho")] = "e_rho"
    comp[("e1", "e_rho")] = "e1"
    comp[("e2", "e_rho")] = "e2"
    return FinCat(objs, mors, ident, comp, name="el(walking idempotent)")


def walking_idempotent():
    base = idempotent_elements_cat()
    level = {"rho1": FinGroupoid.discrete(["a1"]), "rho2": FinGroupoid.discrete(["a2"]),
             "rho": FinGroupoid.chaotic(["u1", "u2"])}
    maps = {"e1": {"a1": "u1"}, "e2": {"a2": "u2"}, "e_rho": {"u1": "u1", "u2": "u2"}}
    return GpdPresheaf.from_maps(base, level, maps, name="walking-idempotent")


def walking_idempotent_monoid():
    return FinCat.from_monoid(["id", "e"], lambda x, y: "id" if x == y == "id" else "e", "id",
                              name="walking idempotent")


def idempotent_total_groupoid():
    return FinGroupoid.from_components([["a1"], ["a2"], ["u1", "u2"]], name="total")


def walking_idempotent_total():
    """The same family as one presheaf over the monoid {id, e}."""
    base = walking_idempotent_monoid()
    G = idempotent_total_groupoid()
    return GpdPresheaf.from_maps(base, {"pt": G}, {"e": {"a1": "u1", "a2": "u2", "u1": "u1",
                                                         "u2": "u2"}},
                                 name="walking-idempotent-total")


def walking_retract_cat():
    """Objects 0, 1; f: 0 -> 1, g: 1 -> 0 with g∘f = id0 and f∘g = e."""
    mors = {"id0": ("0", "0"), "id1": ("1", "1"), "f": ("0", "1"), "g": ("1", "0"),
            "e": ("1", "1")}
    ident = {"0": "id0", "1": "id1"}
    comp = {}
    for h, (d, c) in mors.items():
        comp[(ident[c], h)] = h
        comp[(h, ident[d])] = h
    comp.update({("g", "f"): "id0", ("f", "g"): "e", ("e", "e"): "e", ("e", "f"): "f",
                 ("g", "e"): "g"})
    return FinCat(["0", "1"], mors, ident, comp, name="walking retract")


def walking_retract():
    """Splitting of the monoid presheaf: A(1) the total groupoid, A(0) its e-fixpoints."""
    base = walking_retract_cat()
    total = idempotent_total_groupoid()
    fixed = FinGroupoid.chaotic(["u1", "u2"], name="fixpoints")
    level = {"1": total, "0": fixed}
    inc = {"u1": "u1", "u2": "u2"}
    maps = {"g": inc, "f": {"a1": "u1", "a2": "u2", "u1": "u1", "u2": "u2"},
            "e": {"a1": "u1", "a2": "u2", "u1": "u1", "u2": "u2"}}
    return GpdPresheaf.from_maps(base, level, maps, name="walking-retract")


def poset01_cat():
    return FinCat.from_poset(["0", "1"], lambda x, y: x <= y, name="0<=1")


def poset01():
    """Over 0 ≤ 1: two isomorphic objects at 1 restricting to the point at 0."""
    base = poset01_cat()
    level = {"1": FinGroupoid.chaotic(["x1", "x2"]), "0": FinGroupoid.discrete(["y"])}
    return GpdPresheaf.from_maps(base, level, {"0_1": {"x1": "y", "x2": "y"}}, name="poset-01")


def trivial_constant(g=None):
    base = FinCat.terminal()
    g = g or FinGroupoid.chaotic(["a", "b"])
    return GpdPresheaf.constant(base, g, name="constant")


# -- the countable-choice site ---------------------------------------------------

def countable_choice_points(n_max):
    """0/1 models of X0 = 1, Xn = Ln ∨ Xn+1, Ln+1 = Ln ∧ Xn+1 (n < n_max)."""
    names = [f"X{n}" for n in range(n_max + 1)] + [f"L{n}" for n in range(n_max + 1)]
    pts = []
    for bits in product((0, 1), repeat=len(names)):
        v = dict(zip(names, bits))
        if v["X0"] != 1:
            continue
        if all(v[f"X{n}"] == (v[f"L{n}"] | v[f"X{n + 1}"]) and
               v[f"L{n + 1}"] == (v[f"L{n}"] & v[f"X{n + 1}"]) for n in range(n_max)):
            pts.append(v)
    return names, pts


def countable_choice_lattice(n_max):
    """Elements of the generated bounded lattice as sets of points, with names."""
    if n_max < 1:
        raise CategoryError("the countable-choice site needs n_max >= 1")
    names, pts = countable_choice_points(n_max)
    gens = {g: frozenset(i for i, p in enumerate(pts) if p[g]) for g in names}
    top, bot = frozenset(range(len(pts))), frozenset()
    elems = {top, bot} | set(gens.values())
    changed = True
    while changed:
        changed = False
        for a, b in product(list(elems), repeat=2):
            for c in (a | b, a & b):
                if c not in elems:
                    elems.add(c)
                    changed = True
    label = {}
    for g in names:  # generator names win over composite labels
        label.setdefault(gens[g], g)
    label.setdefault(top, "top")
    label.setdefault(bot, "bot")
    rest = sorted((e for e in elems if e not in label), key=lambda e: (len(e), sorted(e)))
    for i, e in enumerate(rest):
        label[e] = f"e{i}"
    return {label[e]: e for e in elems}, gens


def build_countable_choice_site(n_max):
    """Poset site of the lattice, covered by {Ln -> Xn, Xn+1 -> Xn} for n < n_max."""
    elems, gens = countable_choice_lattice(n_max)
    cat = FinCat.from_poset(sorted(elems), lambda a, b: elems[a] <= elems[b],
                            name=f"cc-{n_max}", names=lambda a, b: f"id_{a}" if a == b else f"{a}<{b}")
    lab = {v: k for k, v in elems.items()}
    gens_sieves = []
    for n in range(n_max):
        x, l, x1 = lab[gens[f"X{n}"]], lab[gens[f"L{n}"]], lab[gens[f"X{n + 1}"]]
        fs = [h for h in (f"{l}<{x}", f"{x1}<{x}") if h in cat.morphisms]
        members = set()
        for h in fs:
            members.update(cat.compose(h, g) for g in cat.into(cat.dom(h)))
        if l == x:
            members.update(cat.into(x))
        if x1 == x:
            members.update(cat.into(x))
        gens_sieves.append(Sieve(x, members))
    site = generate_topology(cat, gens_sieves, name=f"cc-site-{n_max}")
    site.generators = gens_sieves
    return site


# -- registry ------------------------------------------------------------------------

@dataclass
class Example:
    name: str
    build: object
    expected: dict = field(default_factory=dict)
    kind: str = "presheaf"
    note: str = ""


COUNTEREXAMPLE = {"pointwise contractible": True, "global points": 0,
                  "descent contractible": True, "modal": False}

REGISTRY = {
    "z2-swap": Example("z2-swap", z2_swap, dict(COUNTEREXAMPLE),
                       note="ℤ/2 swapping two isomorphic objects"),
    "poset-bot-01": Example("poset-bot-01", poset_bot01, dict(COUNTEREXAMPLE),
                            note="levelwise contractible over ⊥ < 0, 1 without a global point"),
    "walking-idempotent": Example("walking-idempotent", walking_idempotent, dict(COUNTEREXAMPLE),
                                  note="family over ρ1 e = ρ2 e = ρ for the walking idempotent"),
    "walking-retract": Example("walking-retract", walking_retract,
                               {"splitting equivalence": True},
                               note="idempotent splitting: descent over the retract vs the monoid"),
    "poset-01": Example("poset-01", poset01,
                        {"pointwise contractible": True, "global points": 2,
                         "descent contractible": True, "modal": True},
                        note="every type over 0 ≤ 1 is modal"),
    "cc-site-3": Example("cc-site-3", lambda: build_countable_choice_site(3),
                         {"site valid": True, "generators covered": True,
                          "refines trivial": True}, kind="site",
                         note="countable-choice lattice truncated at n = 3"),
}


def get_example(name):
    if name in REGISTRY:
        return REGISTRY[name]
    if name.startswith("cc-site-"):
        try:
            n = int(name.rsplit("-", 1)[1])
        except ValueError:
            raise KeyError(name) from None
        return Example(name, lambda: build_countable_choice_site(n),
                       dict(REGISTRY["cc-site-3"].expected), kind="site")
    raise KeyError(name)


def builtin_presheaves():
    """Every presheaf entry, including auxiliary ones used by tests."""
    out = {name: ex.build() for name, ex in REGISTRY.items() if ex.kind == "presheaf"}
    out["walking-idempotent-total"] = walking_idempotent_total()
    out["constant"] = trivial_constant()
    return out


def builtin_sites():
    pb = poset_bot01_cat()
    return {"poset-bot-01": trivial_topology(pb),
            "poset-bot-01-cover": generate_topology(pb, [Sieve("0", ["bot_0"])],
                                                    name="poset-bot-01-cover"),
            "z2": trivial_topology(z2()),
            "cc-site-3": build_countable_choice_site(3)}


# -- discrete presheaves -------------------------------------------------------------

def discrete_presheaf(base, sets, maps, name=None):
    """Set-valued presheaf; ``maps[f]`` sends ``sets[cod f]`` to ``sets[dom f]``."""
    level = {x: FinGroupoid.discrete(sets[x]) for x in base.objects}
    return GpdPresheaf.from_maps(base, level, maps, name=name)


def representable(base, c):
    """``hom(-, c)`` with restriction by precomposition."""
    sets = {x: base.hom(x, c) for x in base.objects}
    maps = {f: {g: base.compose(g, f) for g in sets[base.cod(f)]} for f in base.morphisms}
    return discrete_presheaf(base, sets, maps, name=f"y({c})")


def constant_set(base, elems):
    return discrete_presheaf(base, {x: list(elems) for x in base.objects},
                             {f: {a: a for a in elems} for f in base.morphisms},
                             name=f"const{len(elems)}")


def coproduct(A, B):
    base = A.base
    sets = {x: [f"l.{a}" for a in A.level[x].objects] + [f"r.{b}" for b in B.level[x].objects]
            for x in base.objects}
    maps = {}
    for f in base.morphisms:
        m = {f"l.{a}": f"l.{A.r_obj(f, a)}" for a in A.level[base.cod(f)].objects}
        m.update({f"r.{b}": f"r.{B.r_obj(f, b)}" for b in B.level[base.cod(f)].objects})
        maps[f] = m
    return discrete_presheaf(base, sets, maps, name=f"{A.name}+{B.name}")


def discrete_zoo(base):
    """A deterministic family of discrete presheaves over ``base``."""
    zoo = [constant_set(base, ["p"]), constant_set(base, ["p", "q"])]
    reps = [representable(base, c) for c in base.objects]
    zoo += reps
    zoo += [coproduct(a, b) for a, b in zip(reps, reps[1:])]
    return zoo
