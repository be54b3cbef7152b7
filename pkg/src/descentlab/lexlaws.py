"""A law harness for lex operations on finite presheaves of sets.

Carriers are finite presheaves of sets over a small base category (the terminal
category for plain sets), maps are natural transformations, and a family over
``A`` assigns a set ``B(X, a)`` to each element ``a`` of ``A(X)`` with
restrictions.  Every instance acts at a chosen object ``X`` of the base, so the
laws are pointwise equations between finite sets of elements.

Three operations are provided: ``A^R``, ``E`` over a finite category, and the
vertex-level truncation of ``D``.  Each instance supplies a notion of path for
the modality condition; on discrete carriers this is equality.
"""

from dataclasses import dataclass, field
from itertools import product

from .cat import FinCat
from .cubdescent import DEngine, chain_pos, chains, enumerate_delements
from .registry import discrete_presheaf
from .report import Report

STAR = "*"


# -- finite carriers ----------------------------------------------------------------------

class Carrier:
    """A presheaf of finite sets: ``sets[X]`` and ``res[f][a] = a f``."""

    def __init__(self, base, sets, res=None, name=None):
        self.base = base
        self.sets = {x: tuple(sets[x]) for x in base.objects}
        if res is None:
            res = {f: {a: a for a in self.sets[base.cod(f)]} for f in base.morphisms}
        self.res = res
        self.name = name or "A"

    def at(self, x):
        return self.sets[x]

    def r(self, f, a):
        return self.res[f][a]

    def size(self):
        return sum(len(s) for s in self.sets.values())

    def key(self):
        """Structural identity, so that equal carriers share cached computations."""
        if getattr(self, "_key", None) is None:
            self._key = (tuple(self.sets.items()),
                         tuple((f, tuple(m.items())) for f, m in sorted(self.res.items())))
        return self._key

    def globals(self):
        """Natural elements ``x -> a_x``, as dicts."""
        C = self.base
        out = []
        for pick in product(*(self.sets[x] for x in C.objects)):
            g = dict(zip(C.objects, pick))
            if all(self.res[f][g[C.cod(f)]] == g[C.dom(f)] for f in C.morphisms):
                out.append(g)
        return out

    def violations(self):
        C = self.base
        bad = []
        for f in C.morphisms:
            if set(self.res[f]) != set(self.sets[C.cod(f)]):
                bad.append(("restriction domain", f))
                continue
            if any(b not in self.sets[C.dom(f)] for b in self.res[f].values()):
                bad.append(("restriction codomain", f))
        if bad:
            return bad
        for (g, f), h in C.comp.items():
            for a in self.sets[C.cod(g)]:
                if self.r(f, self.r(g, a)) != self.r(h, a):
                    bad.append(("functoriality", g, f, a))
        for x, i in C.identity.items():
            if any(self.r(i, a) != a for a in self.sets[x]):
                bad.append(("identity", x))
        return bad

    def __repr__(self):
        return f"<Carrier {self.name}: {dict(self.sets)}>"


def terminal(base):
    return Carrier(base, {x: [STAR] for x in base.objects}, name="1")


class Map:
    """A natural transformation ``comp[X][a]``."""

    def __init__(self, src, tgt, comp, name=None):
        self.src, self.tgt, self.comp = src, tgt, comp
        self.name = name or "f"

    def __call__(self, x, a):
        return self.comp[x][a]

    def violations(self):
        C = self.src.base
        bad = []
        for x in C.objects:
            for a in self.src.at(x):
                if self.comp[x].get(a) not in self.tgt.at(x):
                    bad.append(("component", x, a))
        if bad:
            return bad
        for f in C.morphisms:
            for a in self.src.at(C.cod(f)):
                if self(C.dom(f), self.src.r(f, a)) != self.tgt.r(f, self(C.cod(f), a)):
                    bad.append(("naturality", f, a))
        return bad

    def is_bijection(self):
        return all(sorted(map(repr, self.comp[x].values())) == sorted(map(repr, self.tgt.at(x)))
                   for x in self.src.base.objects)


def compose(g, f):
    C = f.src.base
    return Map(f.src, g.tgt, {x: {a: g(x, f(x, a)) for a in f.src.at(x)} for x in C.objects},
               name=f"{g.name}∘{f.name}")


def identity(A):
    return Map(A, A, {x: {a: a for a in A.at(x)} for x in A.base.objects}, name=f"id_{A.name}")


class Family:
    """``fib[(X, a)]`` with ``res[(f, a)][b]`` in ``fib[(dom f, a f)]``."""

    def __init__(self, over, fib, res, name=None):
        self.over, self.fib, self.res = over, fib, res
        self.name = name or "B"

    def at(self, x, a):
        return self.fib[(x, a)]

    def r(self, f, a, b):
        return self.res[(f, a)][b]


def fibres(p):
    """The family ``a -> p^{-1}(a)`` of a map ``p : T -> A``."""
    A, T, C = p.tgt, p.src, p.src.base
    fib = {(x, a): tuple(t for t in T.at(x) if p(x, t) == a) for x in C.objects for a in A.at(x)}
    res = {(f, a): {t: T.r(f, t) for t in fib[(C.cod(f), a)]}
           for f in C.morphisms for a in A.at(C.cod(f))}
    return Family(A, fib, res, name=f"fib({p.name})")


def reindex(B, f):
    """``B ∘ f`` for ``f : A' -> A``."""
    A2, C = f.src, f.src.base
    fib = {(x, a): B.at(x, f(x, a)) for x in C.objects for a in A2.at(x)}
    res = {(h, a): B.res[(h, f(C.cod(h), a))] for h in C.morphisms for a in A2.at(C.cod(h))}
    return Family(A2, fib, res, name=f"{B.name}∘{f.name}")


def sigma(B):
    """``Σ A B`` with its projection ``π1`` and the section ``π2`` of ``B ∘ π1``."""
    A, C = B.over, B.over.base
    sets = {x: [(a, b) for a in A.at(x) for b in B.at(x, a)] for x in C.objects}
    res = {f: {(a, b): (A.r(f, a), B.r(f, a, b)) for a, b in sets[C.cod(f)]} for f in C.morphisms}
    S = Carrier(C, sets, res, name=f"Σ{B.name}")
    p1 = Map(S, A, {x: {ab: ab[0] for ab in sets[x]} for x in C.objects}, name="π1")
    p2 = {(x, ab): ab[1] for x in C.objects for ab in sets[x]}
    return S, p1, p2


def sections(B):
    """All natural sections of ``B`` as dicts ``(X, a) -> b``."""
    A, C = B.over, B.over.base
    keys = [(x, a) for x in C.objects for a in A.at(x)]
    out = []
    for pick in product(*(B.at(x, a) for x, a in keys)):
        s = dict(zip(keys, pick))
        if all(B.r(f, a, s[(C.cod(f), a)]) == s[(C.dom(f), A.r(f, a))]
               for f in C.morphisms for a in A.at(C.cod(f))):
            out.append(s)
    return out


def fibre_carrier(B, g):
    """``B a`` for a global element ``g`` of the base carrier."""
    C = B.over.base
    sets = {x: B.at(x, g[x]) for x in C.objects}
    res = {f: dict(B.res[(f, g[C.cod(f)])]) for f in C.morphisms}
    return Carrier(C, sets, res, name=f"{B.name}(a)")


def all_maps(A, B):
    """Every natural transformation ``A -> B``."""
    C = A.base
    per = {}
    for x in C.objects:
        per[x] = [dict(zip(A.at(x), vals)) for vals in product(B.at(x), repeat=len(A.at(x)))]
    out = []
    for pick in product(*(per[x] for x in C.objects)):
        m = Map(A, B, dict(zip(C.objects, pick)), name=f"{A.name}->{B.name}")
        if not m.violations():
            out.append(m)
    return out


def enumerate_carriers(base, max_size=3):
    """Presheaves of sets over ``base`` with at most ``max_size`` elements in total.

    Elements are named ``x.k``; every restriction system is enumerated, so
    isomorphic copies are kept.
    """
    C = base
    out = []
    objs = C.objects
    for sizes in product(range(max_size + 1), repeat=len(objs)):
        if sum(sizes) > max_size:
            continue
        sets = {x: [f"{x}.{k}" if len(objs) > 1 else f"e{k}" for k in range(s)]
                for x, s in zip(objs, sizes)}
        gens = [f for f in C.morphisms if f != C.identity[C.dom(f)]]
        choices = [[dict(zip(sets[C.cod(f)], v))
                    for v in product(sets[C.dom(f)], repeat=len(sets[C.cod(f)]))] for f in gens]
        for pick in product(*choices):
            res = dict(zip(gens, pick))
            for x in objs:
                res[C.identity[x]] = {a: a for a in sets[x]}
            A = Carrier(C, sets, res, name=f"A{len(out)}")
            if not A.violations():
                out.append(A)
    return out


@dataclass
class Universe:
    """A finite set of carriers with all maps between them and their fibre families."""

    carriers: list
    maps: list = field(default_factory=list)
    families: list = field(default_factory=list)

    @classmethod
    def generate(cls, base, max_size=3, family_size=None):
        cs = enumerate_carriers(base, max_size)
        maps = [m for A in cs for B in cs for m in all_maps(A, B)]
        fs = family_size if family_size is not None else max_size
        fams = [fibres(p) for p in maps if p.src.size() <= fs]
        return cls(cs, maps, fams)

    def check(self):
        ids = {id(A) for A in self.carriers}
        for A in self.carriers:
            if A.violations():
                raise ValueError(f"carrier {A.name} is not a presheaf: {A.violations()[0]}")
        for f in self.maps:
            if id(f.src) not in ids or id(f.tgt) not in ids:
                raise ValueError(f"map {f.name} mentions a carrier outside the universe")
            if f.violations():
                raise ValueError(f"map {f.name} is not natural: {f.violations()[0]}")
        for B in self.families:
            if id(B.over) not in ids:
                raise ValueError(f"family {B.name} is over a carrier outside the universe")


# -- instances ---------------------------------------------------------------------------

class LexOpInstance:
    """The data of a lex operation acting on carriers at each object of the base.

    Subclasses implement ``_D``, ``D_res``, ``Dmap``, ``Dfam``, ``dsec``, ``unit``,
    ``pair`` and ``eta``; elements of ``D A (X)`` are hashable values.
    ``path(DDA, x, v, w)`` is the instance's path relation, or None.
    """

    name = "lex"

    def __init__(self, base):
        self.base = base
        self._cache = {}
        self._carriers = {}
        self._sigmas = {}

    # cached derived structure
    def D(self, A, x):
        key = (A.key(), x)
        if key not in self._cache:
            self._cache[key] = tuple(self._D(A, x))
        return self._cache[key]

    def carrier(self, A):
        """``D A`` as a carrier (needed to apply ``D`` twice)."""
        key = id(A)
        if key not in self._carriers:
            C = self.base
            sets = {x: self.D(A, x) for x in C.objects}
            res = {f: {u: self.D_res(A, f, u) for u in sets[C.cod(f)]} for f in C.morphisms}
            self._carriers[key] = (A, Carrier(C, sets, res, name=f"D{A.name}"))
        return self._carriers[key][1]

    def sigma(self, B):
        key = id(B)
        if key not in self._sigmas:
            self._sigmas[key] = (B, sigma(B))
        return self._sigmas[key][1]

    def eta_map(self, A):
        DA = self.carrier(A)
        return Map(A, DA, {x: {a: self.eta(A, x, a) for a in A.at(x)} for x in self.base.objects},
                   name=f"η_{A.name}")

    def D_of_map(self, f):
        Df, Dg = self.carrier(f.src), self.carrier(f.tgt)
        return Map(Df, Dg, {x: {u: self.Dmap(f, x, u) for u in Df.at(x)} for x in self.base.objects},
                   name=f"D{f.name}")

    def twist(self, x, u):
        """A fixed permutation of positions of ``u`` in ``D A (x)``, used to plant defects."""
        return tuple(reversed(u))

    path = None

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _discrete_path(DDA, x, v, w):
    return v == w


class ExpInstance(LexOpInstance):
    """``A^R`` on finite sets: ``(Ď B) u = Π_r B(u r)``, ``⟨u, v⟩ = λr.(u r, v r)``."""

    def __init__(self, R):
        super().__init__(FinCat.terminal())
        self.R = tuple(R)
        self.name = f"exp(|R|={len(self.R)})"
        self.path = _discrete_path

    def _D(self, A, x):
        return product(A.at(x), repeat=len(self.R))

    def D_res(self, A, f, u):
        return u

    def Dmap(self, f, x, u):
        return tuple(f(x, a) for a in u)

    def Dfam(self, B, x, u):
        return tuple(product(*(B.at(x, a) for a in u)))

    def dsec(self, B, s, x, u):
        return tuple(s[(x, a)] for a in u)

    def unit(self, x):
        return (STAR,) * len(self.R)

    def pair(self, B, x, u, v):
        return tuple(zip(u, v))

    def eta(self, A, x, a):
        return (a,) * len(self.R)


class EInstance(LexOpInstance):
    """``(E A)(X) = Π_{f : Y -> X} A(Y)`` with ``(u h)(g) = u(h g)``."""

    def __init__(self, base, name=None):
        super().__init__(base)
        self.name = name or f"E({base.name or 'C'})"
        self.path = _discrete_path

    def _into(self, x):
        return self.base.into(x)

    def _D(self, A, x):
        C = self.base
        return product(*(A.at(C.dom(f)) for f in self._into(x)))

    def D_res(self, A, h, u):
        C = self.base
        pos = {f: t for t, f in enumerate(self._into(C.cod(h)))}
        return tuple(u[pos[C.compose(h, g)]] for g in self._into(C.dom(h)))

    def Dmap(self, f, x, u):
        C = self.base
        return tuple(f(C.dom(g), a) for g, a in zip(self._into(x), u))

    def Dfam(self, B, x, u):
        C = self.base
        return tuple(product(*(B.at(C.dom(g), a) for g, a in zip(self._into(x), u))))

    def dsec(self, B, s, x, u):
        C = self.base
        return tuple(s[(C.dom(g), a)] for g, a in zip(self._into(x), u))

    def unit(self, x):
        return (STAR,) * len(self._into(x))

    def pair(self, B, x, u, v):
        return tuple(zip(u, v))

    def eta(self, A, x, a):
        C = self.base
        return tuple(A.r(g, a) for g in self._into(x))

    def twist(self, x, u):
        return _reverse_within(u, [self.base.dom(g) for g in self._into(x)])


def _reverse_within(values, labels):
    """Reverse the order of the entries of ``values`` that share a label."""
    groups = {}
    for t, lab in enumerate(labels):
        groups.setdefault(lab, []).append(t)
    out = list(values)
    for ts in groups.values():
        for t, s in zip(ts, reversed(ts)):
            out[t] = values[s]
    return tuple(out)


class DInstance(LexOpInstance):
    """Vertex-level ``D`` of discrete presheaves, enumerated by :class:`DEngine`.

    An element is one object per chain, ``rows[n][t]`` at the ``t``-th chain of
    length ``n + 1``.  ``Ď B`` is read off ``D (Σ A B)`` as the fibre of ``D π1``.
    """

    def __init__(self, base, top=1, name=None):
        super().__init__(base)
        self.top = top
        self.name = name or f"D({base.name or 'C'}, top={top})"
        self.path = _discrete_path
        self._fam = {}

    def _rows(self, x):
        C = self.base
        return [chains(C, x, n + 1) for n in range(self.top + 1)]

    def _end(self, x, ch):
        return self.base.dom(ch[-1])

    def _D(self, A, x):
        P = discrete_presheaf(self.base, A.sets, A.res, name=A.name)
        eng = DEngine(P)
        out = []
        for w in enumerate_delements(P, x, self.top, engine=eng):
            out.append(tuple(tuple(eng.level(x, ch).dom(val[0]) for ch, val in zip(rows, level))
                             for rows, level in zip(self._rows(x), w.body)))
        return out

    def D_res(self, A, h, u):
        C, y = self.base, self.base.dom(h)
        body = []
        for n, level in enumerate(u):
            pos = chain_pos(C, C.cod(h), n + 1)
            body.append(tuple(level[pos[(C.compose(h, ch[0]),) + ch[1:]]]
                              for ch in chains(C, y, n + 1)))
        return tuple(body)

    def _map_rows(self, x, u, fn):
        return tuple(tuple(fn(self._end(x, ch), a) for ch, a in zip(rows, level))
                     for rows, level in zip(self._rows(x), u))

    def Dmap(self, f, x, u):
        return self._map_rows(x, u, f)

    def Dfam(self, B, x, u):
        S, p1, _ = self.sigma(B)
        key = (S.key(), B.over.key(), x)
        if key not in self._fam:
            groups = {}
            for w in self.D(S, x):
                v = self._map_rows(x, w, lambda y, ab: ab[1])
                groups.setdefault(self.Dmap(p1, x, w), []).append(v)
            self._fam[key] = {k: tuple(vs) for k, vs in groups.items()}
        return self._fam[key].get(u, ())

    def dsec(self, B, s, x, u):
        return self._map_rows(x, u, lambda y, a: s[(y, a)])

    def unit(self, x):
        return tuple((STAR,) * len(rows) for rows in self._rows(x))

    def pair(self, B, x, u, v):
        return tuple(tuple(zip(a, b)) for a, b in zip(u, v))

    def eta(self, A, x, a):
        C = self.base
        return tuple(tuple(A.r(C.compose_chain(ch), a) for ch in rows) for rows in self._rows(x))

    def twist(self, x, u):
        # reverse among chains ending at the same object, so values stay well typed
        out = []
        for rows, level in zip(self._rows(x), u):
            out.append(_reverse_within(level, [self._end(x, ch) for ch in rows]))
        return tuple(out)


class Planted(LexOpInstance):
    """``inst`` with one deliberate defect: ``pair-swap``, ``eta-twist`` or ``sec-twist``."""

    KINDS = ("pair-swap", "eta-twist", "sec-twist")

    def __init__(self, inst, kind):
        if kind not in self.KINDS:
            raise ValueError(f"unknown defect {kind!r}")
        super().__init__(inst.base)
        self.inner, self.kind = inst, kind
        self.name = f"{inst.name}+{kind}"
        self.path = inst.path

    def _D(self, A, x):
        return self.inner.D(A, x)

    def D_res(self, A, f, u):
        return self.inner.D_res(A, f, u)

    def Dmap(self, f, x, u):
        return self.inner.Dmap(f, x, u)

    def Dfam(self, B, x, u):
        return self.inner.Dfam(B, x, u)

    def dsec(self, B, s, x, u):
        v = self.inner.dsec(B, s, x, u)
        return self.inner.twist(x, v) if self.kind == "sec-twist" else v

    def unit(self, x):
        return self.inner.unit(x)

    def pair(self, B, x, u, v):
        w = self.inner.pair(B, x, u, v)
        return self.inner.twist(x, w) if self.kind == "pair-swap" else w

    def eta(self, A, x, a):
        u = self.inner.eta(A, x, a)
        if self.kind == "eta-twist":
            us = self.inner.D(A, x)
            return us[(us.index(u) + 1) % len(us)]
        return u

    @staticmethod
    def visible(inst, universe, kind):
        """Whether the defect changes any value on ``universe`` at all.

        With ``|R| <= 1`` the twist is the identity and with one-element ``D A``
        there is nothing else to point at, so no defect can be planted there.
        """
        xs = inst.base.objects
        if kind == "eta-twist":
            return any(len(inst.D(A, x)) > 1 for A in universe.carriers for x in xs)
        return any(inst.twist(x, w) != w for B in universe.families for x in xs
                   for w in inst.D(inst.sigma(B)[0], x))


# -- checks -------------------------------------------------------------------------------

LAWS = ("D preserves identities", "D preserves composition", "D1 has one element",
        "Ď is natural", "ď is natural", "first projection of a pair",
        "second projection of a pair", "pair of projections")


def run_law_suite(inst, universe):
    """Every law of a lex operation over every element of ``universe``.

    ``report.counts`` holds the number of instances checked per law.
    """
    universe.check()
    rep = Report()
    C = inst.base
    if any(A.base != C for A in universe.carriers):
        raise ValueError("universe and instance are over different bases")
    xs = C.objects
    into = {}
    for f in universe.maps:
        into.setdefault(id(f.tgt), []).append(f)
    for A in universe.carriers:
        idA = identity(A)
        for x in xs:
            for u in inst.D(A, x):
                rep.tick(LAWS[0])
                if inst.Dmap(idA, x, u) != u:
                    rep.add(LAWS[0], (A.name, x, u))
    for f in universe.maps:
        for g in universe.maps:
            if g.src is not f.tgt:
                continue
            gf = compose(g, f)
            for x in xs:
                for u in inst.D(f.src, x):
                    rep.tick(LAWS[1])
                    if inst.Dmap(gf, x, u) != inst.Dmap(g, x, inst.Dmap(f, x, u)):
                        rep.add(LAWS[1], (f.name, g.name, x, u))
    one = terminal(C)
    for x in xs:
        rep.tick(LAWS[2])
        if list(inst.D(one, x)) != [inst.unit(x)]:
            rep.add(LAWS[2], (x, inst.D(one, x)))
    for B in universe.families:
        A = B.over
        secs = sections(B)
        for f in into.get(id(A), []):
            Bf = reindex(B, f)
            for x in xs:
                for u in inst.D(f.src, x):
                    Du = inst.Dmap(f, x, u)
                    rep.tick(LAWS[3])
                    if set(inst.Dfam(Bf, x, u)) != set(inst.Dfam(B, x, Du)):
                        rep.add(LAWS[3], (B.name, f.name, x, u))
                    for s in secs:
                        sf = {(y, a): s[(y, f(y, a))] for y in xs for a in f.src.at(y)}
                        rep.tick(LAWS[4])
                        if inst.dsec(Bf, sf, x, u) != inst.dsec(B, s, x, Du):
                            rep.add(LAWS[4], (B.name, f.name, x, u))
        _pairing_laws(inst, B, rep)
    return rep


def _pairing_laws(inst, B, rep):
    S, p1, p2 = inst.sigma(B)
    B1 = reindex(B, p1)
    for x in inst.base.objects:
        for u in inst.D(B.over, x):
            for v in inst.Dfam(B, x, u):
                w = inst.pair(B, x, u, v)
                rep.tick(LAWS[5])
                if inst.Dmap(p1, x, w) != u:
                    rep.add(LAWS[5], (B.name, x, u, v))
                rep.tick(LAWS[6])
                if inst.dsec(B1, p2, x, w) != v:
                    rep.add(LAWS[6], (B.name, x, u, v))
        for w in inst.D(S, x):
            rep.tick(LAWS[7])
            back = inst.pair(B, x, inst.Dmap(p1, x, w), inst.dsec(B1, p2, x, w))
            if back != w:
                rep.add(LAWS[7], (B.name, x, w))


def _point(A, g):
    one = terminal(A.base)
    return one, Map(one, A, {x: {STAR: g[x]} for x in A.base.objects}, name="ε")


@dataclass
class EtaCertificate:
    """``η`` recomputed as ``(D ε_a)⟨⟩`` and the argument that it is the only choice."""

    report: Report
    derived: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.report.ok


def derived_eta(inst, universe, laws=None):
    """Recompute ``η`` on global elements and certify it.

    The certificate checks that ``D 1`` is ``{⟨⟩}``, that the declared ``η`` is
    natural for every map of the universe and sends ``⋆`` to ``⟨⟩``, and that it
    agrees with ``(D ε_a)⟨⟩``.  Naturality along ``ε_a`` then forces any pointing
    with ``η_1 ⋆ = ⟨⟩`` to be this one.
    """
    laws = laws if laws is not None else run_law_suite(inst, universe)
    if not laws.ok:
        raise ValueError(f"law suite failed: {laws.violations[0]}")
    rep = Report()
    cert = EtaCertificate(rep)
    C = inst.base
    for x in C.objects:
        rep.tick("η of the point is ⟨⟩")
        one = terminal(C)
        if inst.eta(one, x, STAR) != inst.unit(x):
            rep.add("η of the point is ⟨⟩", (x,))
    for f in universe.maps:
        for x in C.objects:
            for a in f.src.at(x):
                rep.tick("η is natural")
                if inst.Dmap(f, x, inst.eta(f.src, x, a)) != inst.eta(f.tgt, x, f(x, a)):
                    rep.add("η is natural", (f.name, x, a))
    for k, A in enumerate(universe.carriers):
        for g in A.globals():
            _, eps = _point(A, g)
            for x in C.objects:
                d = inst.Dmap(eps, x, inst.unit(x))
                cert.derived[(k, x, g[x])] = d
                rep.tick("declared η is (D ε_a)⟨⟩")
                if d != inst.eta(A, x, g[x]):
                    rep.add("declared η is (D ε_a)⟨⟩", (A.name, x, g[x], d))
    return cert


@dataclass
class IsoCertificate:
    report: Report
    size: int = 0
    identity: bool = True

    @property
    def ok(self):
        return self.report.ok


def iso_check(inst, B, g, x=None):
    """``(Ď B)(η a) -> D(B a)``, ``v -> (D π2)⟨⟨⟩, v⟩``, is a bijection.

    ``g`` is a global element of ``B.over``.  ``identity`` records whether the map
    is the identity on the underlying values.
    """
    A, C = B.over, B.over.base
    _, eps = _point(A, g)
    Ba = fibre_carrier(B, g)
    B1 = reindex(B, eps)
    S, _, _ = inst.sigma(B1)
    p2 = Map(S, Ba, {y: {ab: ab[1] for ab in S.at(y)} for y in C.objects}, name="π2")
    rep = Report()
    cert = IsoCertificate(rep)
    for y in [x] if x is not None else C.objects:
        src = inst.Dfam(B, y, inst.eta(A, y, g[y]))
        rep.tick("fibre over η a is the fibre over ⟨⟩")
        if set(src) != set(inst.Dfam(B1, y, inst.unit(y))):
            rep.add("fibre over η a is the fibre over ⟨⟩", (y,))
        image = [inst.Dmap(p2, y, inst.pair(B1, y, inst.unit(y), v)) for v in src]
        tgt = set(inst.D(Ba, y))
        cert.size += len(src)
        rep.tick("bijection")
        if len(set(image)) != len(image) or set(image) != tgt:
            rep.add("bijection", (y, len(image), len(tgt)))
        if any(w != v for v, w in zip(src, image)):
            cert.identity = False
    return cert


def is_modal(inst, A):
    """``η_A`` is a bijection at every object."""
    return inst.eta_map(A).is_bijection()


@dataclass
class ModalityReport:
    report: Report
    carriers: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.report.ok


def modality_condition_check(inst, universe, groupoid_check=None):
    """For each carrier: is ``D η_A`` invertible, and is it path-equal to ``η_(D A)``?

    ``carriers[name] = (invertible, strict, connected)``.  ``groupoid_check`` is
    an optional callable returning a :class:`Report` for a groupoid-level
    witness (the truncated ``D`` uses the homotopy chain of ``key2_data``).
    """
    if inst.path is None:
        raise ValueError(f"{inst.name} supplies no path relation")
    rep = Report()
    out = ModalityReport(rep)
    C = inst.base
    for A in universe.carriers:
        DA = inst.carrier(A)
        Deta = inst.D_of_map(inst.eta_map(A))
        etaD = inst.eta_map(DA)
        DDA = Deta.tgt
        strict = all(Deta(x, u) == etaD(x, u) for x in C.objects for u in DA.at(x))
        connected = all(inst.path(DDA, x, Deta(x, u), etaD(x, u))
                        for x in C.objects for u in DA.at(x))
        invertible = Deta.is_bijection()
        out.carriers[A.name] = (invertible, strict, connected)
        rep.tick("D η invertible")
        if not invertible:
            rep.add("D η invertible", (A.name,))
        rep.tick("D η path-equal to η_D")
        if not connected:
            u = next(u for x in C.objects for u in DA.at(x)
                     if not inst.path(DDA, x, Deta(x, u), etaD(x, u)))
            rep.add("D η path-equal to η_D", (A.name, u))
    if groupoid_check is not None:
        g = groupoid_check()
        out.extra = dict(g.counts)
        for v in g.violations:
            rep.add(v.law, v.witness)
    return out


def key2_groupoid_check(name="z2-swap", limit=None, top=2):
    """The ``key2`` homotopy chain for vertex elements of a builtin nerve example."""
    from .cubdescent import key2_data
    from .registry import builtin_presheaves

    def run():
        A = builtin_presheaves()[name]
        eng = DEngine(A)
        rep = Report()
        for x in A.base.objects:
            us = enumerate_delements(A, x, top, engine=eng)
            for u in us[:limit] if limit else us:
                rep.tick("key2 chain")
                k = key2_data(A, u, eng)
                for v in k.report.violations:
                    rep.add(v.law, (x,) + tuple(v.witness))
        return rep
    return run


# -- finite forms of the structural results -------------------------------------------------

def sum_closure_check(inst, universe):
    """Over the terminal base: for modal ``A``, ``B`` is pointwise modal iff ``Σ A B`` is."""
    if len(inst.base.objects) != 1:
        raise ValueError("pointwise fibres are computed over a one-object base only")
    (x,) = inst.base.objects
    rep = Report()
    for B in universe.families:
        A = B.over
        if not is_modal(inst, A):
            continue
        fibs = [Carrier(inst.base, {x: B.at(x, a)}, name=f"{B.name}({a})") for a in A.at(x)]
        point = all(is_modal(inst, F) for F in fibs)
        total = is_modal(inst, inst.sigma(B)[0])
        rep.tick("Σ of modal")
        if point != total:
            rep.add("Σ of modal", (B.name, point, total))
    return rep


def equivalence_preservation_check(inst, universe):
    """``D`` sends bijections to bijections."""
    rep = Report()
    for f in universe.maps:
        if f.is_bijection():
            rep.tick("D preserves bijections")
            if not inst.D_of_map(f).is_bijection():
                rep.add("D preserves bijections", (f.name,))
    return rep


def dependent_modal_check(inst, universe):
    """Over the terminal base: every ``(Ď B) u`` is modal."""
    (x,) = inst.base.objects
    rep = Report()
    for B in universe.families:
        for u in inst.D(B.over, x):
            F = Carrier(inst.base, {x: inst.Dfam(B, x, u)}, name="ĎB(u)")
            rep.tick("Ď B u modal")
            if not is_modal(inst, F):
                rep.add("Ď B u modal", (B.name, u))
    return rep


# -- registry -------------------------------------------------------------------------------

def builtin_instances():
    """Instances by name with the universes used to test them."""
    from .registry import poset_bot01_cat, z2
    zb, pb = z2(), poset_bot01_cat()
    return {
        "exp": [(ExpInstance(["r", "s"][:k]), lambda: Universe.generate(FinCat.terminal(), 3))
                for k in (0, 1, 2)],
        "E": [(EInstance(zb, "E(ℤ/2)"), lambda: Universe.generate(zb, 3)),
              (EInstance(pb, "E(⊥<0,1)"), lambda: Universe.generate(pb, 3))],
        "D": [(DInstance(zb, 1, "D(ℤ/2, top=1)"), lambda: Universe.generate(zb, 3))],
    }
