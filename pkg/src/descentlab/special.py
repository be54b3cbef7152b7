"""Special bases for ``D``: monoids, exponentiation, and equivalence checks.

Over a one-object base the chains into the point are sequences of monoid
elements, and the compatibility conditions read

* ``u(i)(x) = u(s_k i)(t_k x)`` on ``i_k = 0`` for ``k < n``, where ``t_k`` omits
  ``x_k`` and replaces ``x_(k+1)`` by ``x_k x_(k+1)``;
* ``u(i)(x) = u(s_n i)(t_n x) x_n`` on ``i_n = 0``.

:func:`monoid_violations` checks this form directly, indexing bodies by
sequences through their own mixed-radix position, and :func:`monoid_descent`
compares it with the generic checker.

The exponential ``E A = A^R`` of a groupoid by a finite set ``R`` is the lex
operation whose ``D`` is the generic one over the chaotic category on ``R``:
a chain into any apex is a sequence in ``R``, merging two of its arrows omits a
point, and restriction is constant.
"""

from dataclasses import dataclass, field
from itertools import product

from .cubdescent import (DEngine, DElement, edges, enumerate_delements, vshape)
from .descent import descent_groupoid, induced_descent_map
from .groupoid import (FinGroupoid, GpdFunctor, GpdPresheaf, PresheafMap, check_equivalence,
                       is_pointwise_equivalence, validate_presheaf_map)
from .report import Report


# -- monoids ----------------------------------------------------------------------------

def _normalised(G, arrows, idx):
    back = G.inv(arrows[idx[0]])
    return tuple(G.compose(arrows[t], back) for t in idx)


def monoid_violations(M, A, u, first=False):
    """Failures of the monoid form of compatibility as ``(n, k, x, vertex)``."""
    if not M.is_monoid():
        raise ValueError("base is not a monoid")
    (pt,) = M.objects
    elems = list(M.into(pt))
    rank = {x: t for t, x in enumerate(elems)}
    G = A.level[pt]
    m = u.m

    def index(xs):
        t = 0
        for x in xs:
            t = t * len(elems) + rank[x]
        return t

    bad = []
    for n in range(1, u.top + 1):
        verts = vshape(m, n)
        lower_verts = {v: t for t, v in enumerate(vshape(m, n - 1))}
        for xs in product(elems, repeat=n + 1):
            val = u.body[n][index(xs)]
            for k in range(n + 1):
                face = [t for t, v in enumerate(verts) if v[m + k] == 0]
                below = [lower_verts[verts[t][:m + k] + verts[t][m + k + 1:]] for t in face]
                if k < n:
                    src = xs[:k] + (M.compose(xs[k], xs[k + 1]),) + xs[k + 2:]
                    want = u.body[n - 1][index(src)]
                else:
                    src = xs[:n]
                    want = tuple(A.r_mor(xs[n], g) for g in u.body[n - 1][index(src)])
                got, exp = _normalised(G, val, face), _normalised(G, want, below)
                if got != exp:
                    t = next(t for t in range(len(face)) if got[t] != exp[t])
                    bad.append((n, k, xs, verts[face[t]]))
                    if first:
                        return bad
    return bad


def monoid_action(M, A, u, x):
    """``(u x)(i)(x0, ..., xn) = u(i)(x x0, ..., xn)``, written out on sequences."""
    (pt,) = M.objects
    elems = list(M.into(pt))
    rank = {y: t for t, y in enumerate(elems)}
    body = []
    for n, level in enumerate(u.body):
        row = []
        for xs in product(elems, repeat=n + 1):
            ys = (M.compose(x, xs[0]),) + xs[1:]
            t = 0
            for y in ys:
                t = t * len(elems) + rank[y]
            row.append(level[t])
        body.append(tuple(row))
    return DElement(u.x, u.m, u.top, tuple(body))


def monoid_descent(M, A, u, engine=None):
    """Compare the monoid form with the generic checker and test the action on ``u``."""
    if A.base is not M and A.base != M:
        raise ValueError("presheaf is not over this monoid")
    eng = engine or DEngine(A)
    rep = Report()
    mono = {(n, k, tuple(xs), v) for n, k, xs, v in monoid_violations(M, A, u)}
    generic = set(eng.violations(u, first=False))
    rep.tick("formulations agree")
    if {w[:3] for w in mono} != {w[:3] for w in generic}:
        rep.add("formulations agree", (sorted(mono)[:1], sorted(generic)[:1]))
    valid = not generic
    (pt,) = M.objects
    for x in M.into(pt):
        ux = monoid_action(M, A, u, x)
        rep.tick("action formula")
        if ux != eng.restrict_base(u, x):
            rep.add("action formula", (x,))
        if valid:
            rep.tick("action preserves compatibility")
            if eng.violations(ux):
                rep.add("action preserves compatibility", (x,))
        for y in M.into(pt):
            rep.tick("action is associative")
            if monoid_action(M, A, ux, y) != monoid_action(M, A, u, M.compose(x, y)):
                rep.add("action is associative", (x, y))
    rep.tick("unit acts trivially")
    if monoid_action(M, A, u, M.identity[pt]) != u:
        rep.add("unit acts trivially", ())
    return rep


def perturbations(eng, u, n, limit=None):
    """Copies of ``u`` with one non-base arrow at level ``n`` replaced."""
    out = []
    for t, (ch, val) in enumerate(zip(eng.chains(u.x, n + 1), u.body[n])):
        G = eng.level(u.x, ch)
        c0 = G.dom(val[0])
        for p in range(1, len(val)):
            for g in G.morphisms:
                if G.dom(g) == c0 and g != val[p]:
                    new = val[:p] + (g,) + val[p + 1:]
                    row = u.body[n][:t] + (new,) + u.body[n][t + 1:]
                    out.append((ch, p, DElement(u.x, u.m, u.top,
                                                u.body[:n] + (row,) + u.body[n + 1:])))
                    if limit and len(out) >= limit:
                        return out
    return out


# -- exponentiation ----------------------------------------------------------------------

@dataclass
class ExpPatch:
    """``p u = u(1)(r)`` for ``D`` of ``E A = A^R``, with its checks."""

    R: tuple
    r: str
    A: object
    engine: object
    apex: str
    report: Report = field(default_factory=Report)
    elements: int = 0
    strict: bool = False

    def __call__(self, u):
        C = self.engine.C
        (f,) = C.hom(self.r, self.apex)
        pos = {ch: t for t, ch in enumerate(self.engine.chains(self.apex, 1))}
        return u.body[0][pos[(f,)]]

    def eta(self, cell, top):
        return self.engine.eta(self.apex, cell, top)


def exp_presheaf(R, G):
    """``G`` as a constant presheaf over the chaotic category on ``R``."""
    base = FinGroupoid.chaotic(list(R), name=f"chaotic({','.join(R)})")
    return GpdPresheaf.constant(base, G, name="exp")


def exp_truncation_patch(R, G, r, top=2, budget=None):
    """The left inverse ``p`` of ``η`` for ``A^R`` and its verification.

    Checked: ``p(η a) = a`` for all vertices and edges ``a`` of the nerve of ``G``;
    every enumerated vertex element ``u`` is joined to ``η(p u)`` by an edge.
    ``strict`` records whether ``u`` and ``η(p u)`` agree at ``n = 0`` for every
    ``u``.  Higher levels always have free top vertices, so together with the
    edges this is the truncated form of ``η`` being an isomorphism.
    """
    R = tuple(R)
    if not R:
        raise ValueError("R is empty: there is no point to evaluate at")
    if r not in R:
        raise ValueError(f"{r} is not an element of R")
    A = exp_presheaf(R, G)
    eng = DEngine(A)
    p = ExpPatch(R, r, A, eng, R[0])
    rep = p.report
    cells = [(g,) for g in G.identity.values()] + [(G.identity[G.dom(g)], g) for g in G.morphisms]
    for a in cells:
        rep.tick("p after η is the identity")
        if p(p.eta(a, top)) != a:
            rep.add("p after η is the identity", (a,))
    us = enumerate_delements(A, p.apex, top, engine=eng, budget=budget)
    p.elements = len(us)
    strict = True
    for u in us:
        back = p.eta(p(u), top)
        if back.body[0] != u.body[0]:
            strict = False
        rep.tick("η after p is joined to the identity")
        if not edges(A, u, back, eng, first=True):
            rep.add("η after p is joined to the identity", (u.body[0],))
    p.strict = strict
    return p


# -- equivalences --------------------------------------------------------------------------

def thicken(A, extra=("p", "q")):
    """``A × chaotic(extra)`` with the inclusion at the first point, a pointwise equivalence."""
    base = A.base
    K = FinGroupoid.chaotic(list(extra))
    level, restrict, comps = {}, {}, {}
    for x in base.objects:
        G = A.level[x]
        objs = [(a, s) for a in G.objects for s in K.objects]
        mors = {(g, k): ((G.dom(g), K.dom(k)), (G.cod(g), K.cod(k)))
                for g in G.morphisms for k in K.morphisms}
        ident = {(a, s): (G.identity[a], K.identity[s]) for a, s in objs}
        comp = {((g, k), (g2, k2)): (G.compose(g, g2), K.compose(k, k2))
                for (g, k) in mors for (g2, k2) in mors
                if mors[(g2, k2)][1] == mors[(g, k)][0]}
        inv = {(g, k): (G.inv(g), K.inv(k)) for g, k in mors}
        level[x] = FinGroupoid(objs, mors, ident, comp, inv, name=f"{G.name or x}×K")
    for f in base.morphisms:
        F = A.restrict[f]
        src, tgt = level[base.cod(f)], level[base.dom(f)]
        restrict[f] = GpdFunctor(src, tgt, {(a, s): (F.obj[a], s) for a, s in src.objects},
                                 {(g, k): (F.mor[g], k) for g, k in src.morphisms})
    B = GpdPresheaf(base, level, restrict, name=f"{A.name or 'A'}×K")
    s0 = K.objects[0]
    k0 = K.identity[s0]
    for x in base.objects:
        G = A.level[x]
        comps[x] = GpdFunctor(G, level[x], {a: (a, s0) for a in G.objects},
                              {g: (g, k0) for g in G.morphisms})
    return B, PresheafMap(A, B, comps, name="inclusion")


def strict1_check(sigma, objects=None):
    """A pointwise equivalence ``σ`` induces an equivalence of descent groupoids at each object."""
    rep = Report()
    for v in validate_presheaf_map(sigma).violations:
        rep.add(v.law, v.witness)
    if not is_pointwise_equivalence(sigma):
        rep.add("not a pointwise equivalence", ())
        return rep
    for x in objects or sigma.source.base.objects:
        rep.tick("induced equivalence")
        ok, why = check_equivalence(induced_descent_map(sigma, x))
        if not ok:
            rep.add("induced equivalence", (x, why))
    return rep


def splitting_functor(A_split, A_monoid, x, rename):
    """Forget the components of a descent datum over the splitting whose domain is not ``x``.

    ``rename`` sends the endomorphisms of ``x`` to the monoid elements.
    """
    G1 = descent_groupoid(A_split, x)
    G2 = descent_groupoid(A_monoid, A_monoid.base.objects[0])
    s1, s2 = G1.shape, G2.shape
    sel = [s1.pos[f] for f in (next(g for g in s1.index if rename.get(g) == h) for h in s2.index)]
    back = {v: k for k, v in rename.items()}
    psel = [s1.ppos[(back[f], back[g])] for f, g in s2.pairs]
    obj = {d: G2.find(tuple(d.u[i] for i in sel), tuple(d.phi[i] for i in psel))
           for d in G1.objects}
    mor = {m: G2.morphism(obj[m.src], obj[m.tgt], tuple(m.m[i] for i in sel)) for m in G1.morphisms}
    return GpdFunctor(G1, G2, obj, mor, name="forget")


def retract_equivalence():
    """The walking-retract splitting: descent at ``1`` against descent over ``{id, e}``."""
    from .registry import walking_idempotent_total, walking_retract
    F = splitting_functor(walking_retract(), walking_idempotent_total(), "1",
                          {"id1": "id", "e": "e"})
    return check_equivalence(F)[0], F
