"""Groupoid-level descent data: the operations E and D, modality, stacks.

For a groupoid-valued presheaf ``A`` and an object ``X``, ``E A(X)`` is the
product of ``A(dom f)`` over all ``f`` into ``X``.  A descent datum is a point
``u`` of ``E A(X)`` together with isomorphisms

    φ[f, g] : u(f∘g) -> g*(u(f))          in A(dom g)

satisfying the cocycle condition ``φ[f, g∘h] = h*(φ[f, g]) ∘ φ[f∘g, h]``.
This is the 1-truncated homotopy limit of the cosemisimplicial diagram built
from ``E``; data are semisimplicial, i.e. no condition is imposed on
``φ[f, id]`` (it is forced to be an identity anyway, see ``is_unital``).

Every index set may be cut down to a sieve ``S``; that is the ``E_S``/``D_S``
variant used for stacks over a Grothendieck topology.
"""

from dataclasses import dataclass, field
from itertools import product

from .cat import CategoryError, Sieve, check_sieve, maximal_sieve, pullback
from .groupoid import (FinGroupoid, GpdFunctor, GpdPresheaf, check_equivalence,
                       global_points, is_contractible)
from .report import Budget, BudgetExhausted, Report, as_budget


class DescentShape:
    """Index bookkeeping for descent data at ``X`` over the index set ``S``."""

    def __init__(self, base, x, members=None):
        base.check_object(x)
        self.base, self.x = base, x
        members = base.into(x) if members is None else members
        self.index = sorted(members, key=base.morphism_key)
        if not set(self.index) <= set(base.into(x)):
            raise CategoryError(f"index set at {x} contains morphisms with another codomain")
        self.pos = {f: i for i, f in enumerate(self.index)}
        self.pairs = [(f, g) for f in self.index for g in base.into(base.dom(f))]
        for f, g in self.pairs:
            if base.compose(f, g) not in self.pos:
                raise CategoryError(f"index set at {x} is not a sieve: {f}∘{g} missing")
        self.ppos = {p: i for i, p in enumerate(self.pairs)}
        self.triples = [(f, g, h) for f, g in self.pairs for h in base.into(base.dom(g))]

    def comp(self, f, g):
        return self.base.compose(f, g)


def _sieve_members(base, x, sieve):
    if sieve is None:
        return None
    if isinstance(sieve, Sieve):
        check_sieve(base, sieve)
        if sieve.apex != x:
            raise CategoryError(f"sieve on {sieve.apex} used at {x}")
        return sorted(sieve.members)
    return sorted(sieve)


# -- E ------------------------------------------------------------------------

def e_groupoid(A, x):
    """``E A(x)``: the product of ``A(dom f)`` over ``slice_index(x)``."""
    shape = DescentShape(A.base, x)
    levels = [A.level[A.base.dom(f)] for f in shape.index]
    objs = list(product(*[g.objects for g in levels]))
    mors, comp, inv, ident = {}, {}, {}, {}
    for ms in product(*[list(g.morphisms) for g in levels]):
        mors[ms] = (tuple(g.dom(m) for g, m in zip(levels, ms)),
                    tuple(g.cod(m) for g, m in zip(levels, ms)))
        inv[ms] = tuple(g.inv(m) for g, m in zip(levels, ms))
    for o in objs:
        ident[o] = tuple(g.identity[a] for g, a in zip(levels, o))
    for m2, (d2, _) in mors.items():
        for m1, (_, c1) in mors.items():
            if c1 == d2:
                comp[(m2, m1)] = tuple(g.compose(a, b) for g, a, b in zip(levels, m2, m1))
    return FinGroupoid(objs, mors, ident, comp, inv, name=f"E({A.name or 'A'})({x})")


def e_restriction(A, f):
    """Restriction functor ``E A(cod f) -> E A(dom f)``: ``(u f)(g) = u(f∘g)``."""
    base = A.base
    y, x = base.dom(f), base.cod(f)
    src, tgt = e_groupoid(A, x), e_groupoid(A, y)
    sx, sy = DescentShape(base, x), DescentShape(base, y)
    sel = [sx.pos[base.compose(f, g)] for g in sy.index]
    return GpdFunctor(src, tgt, {o: tuple(o[i] for i in sel) for o in src.objects},
                      {m: tuple(m[i] for i in sel) for m in src.morphisms})


def alpha_gpd(A, x):
    """``α : A(x) -> E A(x)``, ``(α a)(f) = f*(a)``."""
    shape = DescentShape(A.base, x)
    tgt = e_groupoid(A, x)
    return GpdFunctor(A.level[x], tgt,
                      {a: tuple(A.r_obj(f, a) for f in shape.index) for a in A.level[x].objects},
                      {m: tuple(A.r_mor(f, m) for f in shape.index) for m in A.level[x].morphisms})


# -- descent data -------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DescentDatum:
    u: tuple
    phi: tuple

    def __repr__(self):
        return f"DescentDatum(u={self.u}, phi={self.phi})"


@dataclass(frozen=True, order=True)
class DescentMorphism:
    src: DescentDatum
    tgt: DescentDatum
    m: tuple


def _cocycle_ok(A, shape, u, phi, f, g, h):
    base = A.base
    lhs = phi[shape.ppos[(f, base.compose(g, h))]]
    first = phi[shape.ppos[(base.compose(f, g), h)]]
    second = A.r_mor(h, phi[shape.ppos[(f, g)]])
    return lhs == A.level[base.dom(h)].compose(second, first)


def check_cocycle(A, shape, datum):
    """Every cocycle equation for ``datum``; returns the failing triples."""
    return [t for t in shape.triples if not _cocycle_ok(A, shape, datum.u, datum.phi, *t)]


def enumerate_descent_data(A, x, members=None, budget=None):
    """All descent data at ``x`` (indexed by ``members`` or the full slice)."""
    budget = as_budget(budget, f"enumerating descent data at {x}")
    base = A.base
    shape = DescentShape(base, x, members)
    n = len(shape.index)
    lv = [A.level[base.dom(f)] for f in shape.index]

    # pairs become checkable once both u(f) and u(f∘g) are chosen
    ready = [[] for _ in range(n)]
    for f, g in shape.pairs:
        ready[max(shape.pos[f], shape.pos[base.compose(f, g)])].append((f, g))
    # cocycle triples are checked when their last φ is chosen
    tri_at = [[] for _ in shape.pairs]
    for t in shape.triples:
        f, g, h = t
        ps = [shape.ppos[(f, base.compose(g, h))], shape.ppos[(base.compose(f, g), h)],
              shape.ppos[(f, g)]]
        tri_at[max(ps)].append(t)

    out = []
    u = [None] * n
    phi = [None] * len(shape.pairs)

    def homs(f, g):
        d = base.dom(g)
        return A.level[d].hom(u[shape.pos[base.compose(f, g)]], A.r_obj(g, u[shape.pos[f]]))

    def choose_phi(k):
        if k == len(shape.pairs):
            out.append(DescentDatum(tuple(u), tuple(phi)))
            return
        f, g = shape.pairs[k]
        for m in homs(f, g):
            budget.step()
            phi[k] = m
            if all(_cocycle_ok(A, shape, u, phi, *t) for t in tri_at[k]):
                choose_phi(k + 1)
        phi[k] = None

    def choose_u(i):
        if i == n:
            choose_phi(0)
            return
        for a in lv[i].objects:
            budget.step()
            u[i] = a
            if all(homs(f, g) for f, g in ready[i]):
                choose_u(i + 1)
        u[i] = None

    choose_u(0)
    return shape, out


def enumerate_descent_morphisms(A, shape, d1, d2, budget=None):
    budget = as_budget(budget, "enumerating descent morphisms")
    base = A.base
    n = len(shape.index)
    ready = [[] for _ in range(n)]
    for k, (f, g) in enumerate(shape.pairs):
        ready[max(shape.pos[f], shape.pos[base.compose(f, g)])].append(k)
    lv = [A.level[base.dom(f)] for f in shape.index]
    m = [None] * n
    out = []

    def ok(k):
        f, g = shape.pairs[k]
        G = A.level[base.dom(g)]
        i, j = shape.pos[f], shape.pos[base.compose(f, g)]
        return (G.compose(d2.phi[k], m[j]) == G.compose(A.r_mor(g, m[i]), d1.phi[k]))

    def go(i):
        if i == n:
            out.append(tuple(m))
            return
        for c in lv[i].hom(d1.u[i], d2.u[i]):
            budget.step()
            m[i] = c
            if all(ok(k) for k in ready[i]):
                go(i + 1)
        m[i] = None

    go(0)
    return out


class DescentGroupoid(FinGroupoid):
    """The groupoid of descent data at one object, with its index shape."""

    def __init__(self, A, shape, data, morphisms, name=None):
        lv = [A.level[A.base.dom(f)] for f in shape.index]
        mors, comp, inv, ident = {}, {}, {}, {}
        for mm in morphisms:
            mors[mm] = (mm.src, mm.tgt)
        by_src = {}
        for mm in morphisms:
            by_src.setdefault(mm.src, []).append(mm)
        lookup = {(mm.src, mm.tgt, mm.m): mm for mm in morphisms}
        for d in data:
            ident[d] = lookup[(d, d, tuple(g.identity[a] for g, a in zip(lv, d.u)))]
        for mm in morphisms:
            inv[mm] = lookup[(mm.tgt, mm.src, tuple(g.inv(c) for g, c in zip(lv, mm.m)))]
            for nn in by_src.get(mm.tgt, ()):
                comp[(nn, mm)] = lookup[(mm.src, nn.tgt,
                                         tuple(g.compose(b, a) for g, b, a in zip(lv, nn.m, mm.m)))]
        super().__init__(data, mors, ident, comp, inv, name=name)
        self.A, self.shape = A, shape
        self.objects = tuple(data)  # keep enumeration order

    def find(self, u, phi):
        d = DescentDatum(tuple(u), tuple(phi))
        if d not in self.identity:
            raise KeyError(d)
        return d

    def morphism(self, src, tgt, m):
        for mm in self.hom(src, tgt):
            if mm.m == tuple(m):
                return mm
        raise KeyError((src, tgt, m))


def _sizes(A, x, members):
    shape = DescentShape(A.base, x, members)
    return {"index": len(shape.index), "pairs": len(shape.pairs),
            "level sizes": [len(A.level[A.base.dom(f)].objects) for f in shape.index]}


def descent_groupoid(A, x, sieve=None, budget=None):
    """The groupoid of descent data of ``A`` at ``x`` (over ``sieve`` if given)."""
    members = _sieve_members(A.base, x, sieve)
    budget = as_budget(budget, f"building the descent groupoid at {x}")
    try:
        shape, data = enumerate_descent_data(A, x, members, budget)
        mors = []
        for d1, d2 in product(data, repeat=2):
            for m in enumerate_descent_morphisms(A, shape, d1, d2, budget):
                mors.append(DescentMorphism(d1, d2, m))
    except BudgetExhausted as exc:
        exc.sizes = _sizes(A, x, members)
        raise
    return DescentGroupoid(A, shape, data, mors, name=f"D({A.name or 'A'})({x})")


def sieve_descent(A, x, sieve, budget=None):
    if isinstance(sieve, Sieve):
        check_sieve(A.base, sieve)
    return descent_groupoid(A, x, sieve, budget)


def eta_descent(A, x, G=None):
    """``η : A(x) -> D A(x)``: ``u(f) = f*(a)`` with identity cocycles."""
    G = G or descent_groupoid(A, x)
    shape = G.shape
    obj, mor = {}, {}
    for a in A.level[x].objects:
        u = tuple(A.r_obj(f, a) for f in shape.index)
        phi = tuple(A.level[A.base.dom(g)].identity[A.r_obj(shape.comp(f, g), a)]
                    for f, g in shape.pairs)
        obj[a] = G.find(u, phi)
    for k, (d, c) in A.level[x].morphisms.items():
        obj_d, obj_c = obj[d], obj[c]
        mor[k] = G.morphism(obj_d, obj_c, tuple(A.r_mor(f, k) for f in shape.index))
    return GpdFunctor(A.level[x], G, obj, mor, name="eta")


def is_unital(A, shape, datum):
    base = A.base
    return all(datum.phi[shape.ppos[(f, base.identity[base.dom(f)])]]
               == A.level[base.dom(f)].identity[datum.u[shape.pos[f]]] for f in shape.index)


def unital_inclusion(G):
    """Inclusion of the full subgroupoid of unital data into ``G``."""
    A, shape = G.A, G.shape
    keep = [d for d in G.objects if is_unital(A, shape, d)]
    keep_set = set(keep)
    mors = {m: G.morphisms[m] for m in G.morphisms if m.src in keep_set and m.tgt in keep_set}
    sub = FinGroupoid(keep, mors, {d: G.identity[d] for d in keep},
                      {k: v for k, v in G.comp.items() if k[0] in mors and k[1] in mors},
                      {m: G.inverse[m] for m in mors}, name="unital")
    return GpdFunctor(sub, G, {d: d for d in keep}, {m: m for m in mors})


# -- restriction of descent data, the presheaf D A ------------------------------

def restrict_datum(A, src_shape, tgt_shape, f, datum):
    """Restriction along ``f : Y -> X``: ``(u f)(g) = u(f∘g)``, ``(φ f)[g,h] = φ[f∘g,h]``."""
    base = A.base
    u = tuple(datum.u[src_shape.pos[base.compose(f, g)]] for g in tgt_shape.index)
    phi = tuple(datum.phi[src_shape.ppos[(base.compose(f, g), h)]] for g, h in tgt_shape.pairs)
    return DescentDatum(u, phi)


def descent_restriction(A, f, Gx, Gy):
    sx, sy = Gx.shape, Gy.shape
    obj = {d: Gy.find(*_astuple(restrict_datum(A, sx, sy, f, d))) for d in Gx.objects}
    sel = [sx.pos[A.base.compose(f, g)] for g in sy.index]
    mor = {m: Gy.morphism(obj[m.src], obj[m.tgt], tuple(m.m[i] for i in sel)) for m in Gx.morphisms}
    return GpdFunctor(Gx, Gy, obj, mor)


def _astuple(d):
    return d.u, d.phi


def sieve_family(base, sieves):
    """Check ``f*S(X) = S(Y)`` for every ``f: Y -> X``; returns member lists."""
    fam = {}
    for x in base.objects:
        s = sieves.get(x, maximal_sieve(base, x))
        if not isinstance(s, Sieve):
            s = Sieve(x, s)
        check_sieve(base, s)
        fam[x] = s
    for f in base.morphisms:
        if pullback(base, fam[base.cod(f)], f) != fam[base.dom(f)]:
            raise CategoryError(f"sieve family is not stable under pullback along {f}")
    return fam


def descent_presheaf(A, sieves=None, budget=None):
    """``D A`` (or ``D_S A``) as a groupoid-valued presheaf, plus ``η``."""
    budget = as_budget(budget, "building D A")
    base = A.base
    fam = sieve_family(base, sieves or {})
    level = {x: descent_groupoid(A, x, fam[x], budget) for x in base.objects}
    restrict = {f: descent_restriction(A, f, level[base.cod(f)], level[base.dom(f)])
                for f in base.morphisms}
    DA = GpdPresheaf(base, level, restrict, name=f"D({A.name or 'A'})")
    eta = {x: eta_descent(A, x, level[x]) for x in base.objects}
    return DA, eta


def induced_descent_map(sigma, x, G_A=None, G_B=None):
    """``D σ`` at ``x`` for a presheaf map ``σ : A -> B``."""
    A, B = sigma.source, sigma.target
    G_A = G_A or descent_groupoid(A, x)
    G_B = G_B or descent_groupoid(B, x)
    shape = G_A.shape
    base = A.base
    doms = [base.dom(f) for f in shape.index]
    obj = {}
    for d in G_A.objects:
        u = tuple(sigma[y].obj[a] for y, a in zip(doms, d.u))
        phi = tuple(sigma[base.dom(g)].mor[m] for (f, g), m in zip(shape.pairs, d.phi))
        obj[d] = G_B.find(u, phi)
    mor = {m: G_B.morphism(obj[m.src], obj[m.tgt], tuple(sigma[y].mor[c] for y, c in zip(doms, m.m)))
           for m in G_A.morphisms}
    return GpdFunctor(G_A, G_B, obj, mor)


def projection(A, x, s1, s2, G1=None, G2=None):
    """Canonical projection ``D_{S2} A(x) -> D_{S1} A(x)`` for ``S1 ⊆ S2``."""
    m1 = set(_sieve_members(A.base, x, s1))
    m2 = set(_sieve_members(A.base, x, s2))
    if not m1 <= m2:
        raise CategoryError(f"projection needs S1 ⊆ S2, extra members {sorted(m1 - m2)}")
    G1 = G1 or descent_groupoid(A, x, s1)
    G2 = G2 or descent_groupoid(A, x, s2)
    a, b = G2.shape, G1.shape
    sel = [a.pos[f] for f in b.index]
    psel = [a.ppos[p] for p in b.pairs]
    obj = {d: G1.find(tuple(d.u[i] for i in sel), tuple(d.phi[i] for i in psel)) for d in G2.objects}
    mor = {m: G1.morphism(obj[m.src], obj[m.tgt], tuple(m.m[i] for i in sel)) for m in G2.morphisms}
    return GpdFunctor(G2, G1, obj, mor, name="projection")


# -- modality ---------------------------------------------------------------------

@dataclass
class Patch:
    """A strictly natural ``p : D A -> A`` with a natural iso ``θ : p∘η ≅ id``."""

    functors: dict
    theta: dict


@dataclass
class ModalReport:
    verdict: object  # True, False, or None for "unknown"
    patch: Patch = None
    counterevidence: tuple = ()
    eta_equivalence: dict = field(default_factory=dict)
    budget_used: int = 0

    @property
    def label(self):
        return {True: "modal", False: "not modal", None: "unknown"}[self.verdict]


def verify_patch(A, DA, eta, patch):
    """Check every equation a patch has to satisfy; returns a ``Report``."""
    rep = Report()
    base = A.base
    for x in base.objects:
        p = patch.functors[x]
        if p.source is not DA.level[x] and set(p.obj) != set(DA.level[x].objects):
            rep.add("patch component has the wrong source", (x,))
            return rep
        from .groupoid import validate_functor
        for v in validate_functor(p).violations:
            rep.add(f"patch at {x}: {v.law}", v.witness)
    if not rep.ok:
        return rep
    for f in base.morphisms:
        y, x = base.dom(f), base.cod(f)
        if DA.restrict[f].then(patch.functors[y]) != patch.functors[x].then(A.restrict[f]):
            rep.add("patch not natural", (f,))
    for x in base.objects:
        G, th, p, e = A.level[x], patch.theta[x], patch.functors[x], eta[x]
        for a in G.objects:
            t = th.get(a)
            if G.morphisms.get(t) != (p.obj[e.obj[a]], a):
                rep.add("theta component mistyped", (x, a))
        if not rep.ok:
            return rep
        for k, (a, b) in G.morphisms.items():
            if G.compose(k, th[a]) != G.compose(th[b], p.mor[e.mor[k]]):
                rep.add("theta not natural in A(x)", (x, k))
    for f in base.morphisms:
        y, x = base.dom(f), base.cod(f)
        for a in A.level[x].objects:
            if A.r_mor(f, patch.theta[x][a]) != patch.theta[y][A.r_obj(f, a)]:
                rep.add("theta not natural in the base", (f, a))
    return rep


class _Trail:
    """Assignment store with undo, for backtracking with propagation."""

    def __init__(self):
        self.val = {}
        self.log = []

    def set(self, k, v):
        old = self.val.get(k)
        if old is not None:
            return old == v
        self.val[k] = v
        self.log.append(k)
        return True

    def mark(self):
        return len(self.log)

    def undo(self, mark):
        while len(self.log) > mark:
            del self.val[self.log.pop()]


def _search_patch(A, DA, eta, budget):
    base = A.base
    objs = sorted(base.objects, key=lambda x: -len(base.into(x)))
    # downward closure of naturality: p_Y(d f) = f*(p_X d)
    out_maps = {x: [f for f in base.morphisms if base.cod(f) == x and not base.is_identity(f)]
                for x in base.objects}
    eta_inv = {x: {} for x in base.objects}
    for x in base.objects:
        for a, d in eta[x].obj.items():
            eta_inv[x].setdefault(d, []).append(a)

    def obj_ok(x, d, a):
        return all(A.level[x].hom(a, b) for b in eta_inv[x].get(d, ()))

    def propagate_obj(tr, x, d, a):
        stack = [(x, d, a)]
        while stack:
            x, d, a = stack.pop()
            if not obj_ok(x, d, a):
                return False
            old = tr.val.get(("o", x, d))
            if old is not None:
                if old != a:
                    return False
                continue
            tr.set(("o", x, d), a)
            for f in out_maps[x]:
                stack.append((base.dom(f), DA.r_obj(f, d), A.r_obj(f, a)))
        return True

    def propagate_mor(tr, x, m, c):
        stack = [(x, m, c)]
        while stack:
            x, m, c = stack.pop()
            G = A.level[x]
            src, tgt = DA.level[x].morphisms[m]
            if G.morphisms[c] != (tr.val[("o", x, src)], tr.val[("o", x, tgt)]):
                return False
            old = tr.val.get(("m", x, m))
            if old is not None:
                if old != c:
                    return False
                continue
            tr.set(("m", x, m), c)
            for f in out_maps[x]:
                stack.append((base.dom(f), DA.r_mor(f, m), A.r_mor(f, c)))
        return True

    def propagate_theta(tr, x, a, t):
        stack = [(x, a, t)]
        while stack:
            x, a, t = stack.pop()
            old = tr.val.get(("t", x, a))
            if old is not None:
                if old != t:
                    return False
                continue
            tr.set(("t", x, a), t)
            for f in out_maps[x]:
                stack.append((base.dom(f), A.r_obj(f, a), A.r_mor(f, t)))
        return True

    obj_vars = [(x, d) for x in objs for d in DA.level[x].objects]
    mor_vars = [(x, m) for x in objs for m in DA.level[x].morphisms]
    theta_vars = [(x, a) for x in objs for a in A.level[x].objects]
    tr = _Trail()
    result = {}

    def functorial(x):
        DG, G = DA.level[x], A.level[x]
        for (n, m), k in DG.comp.items():
            a, b, c = (tr.val.get(("m", x, n)), tr.val.get(("m", x, m)), tr.val.get(("m", x, k)))
            if a is not None and b is not None and c is not None and G.compose(a, b) != c:
                return False
        return True

    def theta_natural(x):
        G, e = A.level[x], eta[x]
        for k, (a, b) in G.morphisms.items():
            ta, tb = tr.val.get(("t", x, a)), tr.val.get(("t", x, b))
            if ta is not None and tb is not None:
                if G.compose(k, ta) != G.compose(tb, tr.val[("m", x, e.mor[k])]):
                    return False
        return True

    def go_theta(i):
        if i == len(theta_vars):
            result["patch"] = dict(tr.val)
            return True
        x, a = theta_vars[i]
        if ("t", x, a) in tr.val:
            return go_theta(i + 1)
        src = tr.val[("o", x, eta[x].obj[a])]
        for t in A.level[x].hom(src, a):
            budget.step()
            mk = tr.mark()
            if propagate_theta(tr, x, a, t) and all(theta_natural(y) for y in base.objects):
                if go_theta(i + 1):
                    return True
            tr.undo(mk)
        return False

    def go_mor(i):
        if i == len(mor_vars):
            return go_theta(0)
        x, m = mor_vars[i]
        if ("m", x, m) in tr.val:
            return go_mor(i + 1)
        src, tgt = DA.level[x].morphisms[m]
        if DA.level[x].is_identity(m):
            cands = [A.level[x].identity[tr.val[("o", x, src)]]]
        else:
            cands = A.level[x].hom(tr.val[("o", x, src)], tr.val[("o", x, tgt)])
        for c in cands:
            budget.step()
            mk = tr.mark()
            if propagate_mor(tr, x, m, c) and all(functorial(y) for y in base.objects):
                if go_mor(i + 1):
                    return True
            tr.undo(mk)
        return False

    def go_obj(i):
        if i == len(obj_vars):
            return go_mor(0)
        x, d = obj_vars[i]
        if ("o", x, d) in tr.val:
            return go_obj(i + 1)
        for a in A.level[x].objects:
            budget.step()
            mk = tr.mark()
            if propagate_obj(tr, x, d, a):
                if go_obj(i + 1):
                    return True
            tr.undo(mk)
        return False

    if not go_obj(0):
        return None
    val = result["patch"]
    functors = {}
    for x in base.objects:
        DG = DA.level[x]
        functors[x] = GpdFunctor(DG, A.level[x], {d: val[("o", x, d)] for d in DG.objects},
                                 {m: val[("m", x, m)] for m in DG.morphisms}, name="patch")
    theta = {x: {a: val[("t", x, a)] for a in A.level[x].objects} for x in base.objects}
    return Patch(functors, theta)


def check_modal(A, budget=10**6, sieves=None, shortcut=True):
    """Decide modality of ``A`` by the patch criterion.

    Verdict ``True`` carries a verified patch; ``False`` carries
    counterevidence; ``None`` means the budget ran out first.  With
    ``shortcut=False`` the global point obstruction is not used and the
    patch search has to run to the end.
    """
    budget = as_budget(budget, "checking modality")
    try:
        DA, eta = descent_presheaf(A, sieves, budget)
    except BudgetExhausted:
        return ModalReport(None, counterevidence=("budget exhausted building D A",),
                           budget_used=budget.used)
    eq = {x: check_equivalence(eta[x]) for x in A.base.objects}
    rep = ModalReport(None, eta_equivalence={x: v for x, (v, _) in eq.items()})
    for x, (ok, wit) in eq.items():
        if not ok:
            rep.verdict, rep.counterevidence = False, (x, "eta is not an equivalence", wit)
            rep.budget_used = budget.used
            return rep
    pts_da = global_points(DA)
    if shortcut and pts_da and not global_points(A):
        rep.verdict = False
        rep.counterevidence = ("global point obstruction",
                               "D A has a strict global point, A has none", pts_da[0])
        rep.budget_used = budget.used
        return rep
    try:
        patch = _search_patch(A, DA, eta, budget)
    except BudgetExhausted:
        rep.budget_used = budget.used
        rep.counterevidence = ("budget exhausted during patch search",)
        return rep
    rep.budget_used = budget.used
    if patch is None:
        rep.verdict, rep.counterevidence = False, ("no strictly natural patch exists",)
        return rep
    check = verify_patch(A, DA, eta, patch)
    if not check.ok:  # pragma: no cover - the search only returns consistent patches
        raise AssertionError(f"patch search returned an invalid patch: {check.violations}")
    rep.verdict, rep.patch = True, patch
    return rep


def precompose_projection(A, patch1, sieves1, sieves2, budget=None):
    """Turn a ``D_{S1}`` patch into a ``D_{S2}`` patch through the projection."""
    base = A.base
    f1, f2 = sieve_family(base, sieves1), sieve_family(base, sieves2)
    DA2, eta2 = descent_presheaf(A, sieves2, budget)
    DA1 = GpdPresheaf(base, {x: patch1.functors[x].source for x in base.objects}, {})
    functors = {}
    for x in base.objects:
        proj = projection(A, x, f1[x], f2[x], DA1.level[x], DA2.level[x])
        functors[x] = proj.then(patch1.functors[x])
    return Patch(functors, dict(patch1.theta)), DA2, eta2


# -- stacks and sheaves -------------------------------------------------------------

def eta_sieve(A, x, G):
    """``η_S : A(x) -> D_S A(x)``."""
    return eta_descent(A, x, G)


@dataclass
class StackReport:
    entries: list
    verdict: object

    def failures(self):
        return [e for e in self.entries if not e["equivalence"]]


def check_stack(A, site, budget=10**6):
    """For each object and covering sieve, is ``η_S`` an equivalence?"""
    if site.cat != A.base:
        raise CategoryError("site and presheaf live over different categories")
    budget = as_budget(budget, "checking the stack condition")
    entries = []
    for x in site.cat.objects:
        for s in site.sorted_covers(x):
            G = sieve_descent(A, x, s, budget)
            ok, wit = check_equivalence(eta_sieve(A, x, G))
            entries.append({"object": x, "sieve": sorted(s.members), "equivalence": ok,
                            "witness": None if ok else wit, "descent objects": len(G.objects)})
    return StackReport(entries, all(e["equivalence"] for e in entries))


def set_sheaf_oracle(A, site):
    """Classical sheaf condition by direct enumeration of compatible families."""
    if not A.is_discrete():
        raise CategoryError("set_sheaf_oracle needs a discrete presheaf")
    cat = site.cat
    for x in cat.objects:
        for s in site.sorted_covers(x):
            members = sorted(s.members)
            fams = []
            for vals in product(*[A.level[cat.dom(f)].objects for f in members]):
                fam = dict(zip(members, vals))
                if all(fam[cat.compose(f, g)] == A.r_obj(g, fam[f])
                       for f in members for g in cat.into(cat.dom(f))):
                    fams.append(fam)
            image = [{f: A.r_obj(f, a) for f in members} for a in A.level[x].objects]
            if len(fams) != len(image) or any(fam not in image for fam in fams):
                return False
            if len({tuple(sorted(i.items())) for i in image}) != len(image):
                return False
    return True


def descent_contractible(A, x, budget=None):
    return is_contractible(descent_groupoid(A, x, budget=budget))[0]


__all__ = [
    "DescentShape", "DescentDatum", "DescentGroupoid", "ModalReport", "Patch", "StackReport",
    "e_groupoid", "e_restriction", "alpha_gpd", "descent_groupoid", "eta_descent",
    "sieve_descent", "projection", "check_modal", "check_stack", "set_sheaf_oracle",
    "descent_presheaf", "induced_descent_map", "verify_patch", "precompose_projection",
    "check_cocycle", "is_unital", "unital_inclusion", "sieve_family", "restrict_datum",
    "Budget", "descent_contractible",
]
