"""Finite groupoids, functors between them and groupoid-valued presheaves."""

from itertools import product

from .cat import CategoryError, FinCat, validate_category
from .report import Report


class FinGroupoid(FinCat):
    """A finite category together with an inverse for every morphism."""

    def __init__(self, objects, morphisms, identity, comp, inverse, name=None):
        super().__init__(objects, morphisms, identity, comp, name=name)
        self.inverse = dict(inverse)
        self._hom = {}
        for f, (d, c) in self.morphisms.items():
            self._hom.setdefault((d, c), []).append(f)

    def hom(self, x, y):
        return list(self._hom.get((x, y), ()))

    def inv(self, f):
        return self.inverse[f]

    def _key(self):
        return super()._key() + (tuple(sorted(self.inverse.items())),)

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FinGroupoid{label}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_components(cls, components, name=None):
        """Disjoint union of chaotic groupoids: one iso between any two objects of a block."""
        mors, ident, comp, inv = {}, {}, {}, {}

        def mname(a, b):
            return f"id_{a}" if a == b else f"{a}_{b}"

        for block in components:
            for a, b in product(block, repeat=2):
                mors[mname(a, b)] = (a, b)
                inv[mname(a, b)] = mname(b, a)
            for a in block:
                ident[a] = mname(a, a)
            for a, b, c in product(block, repeat=3):
                comp[(mname(b, c), mname(a, b))] = mname(a, c)
        objs = [a for block in components for a in block]
        return cls(objs, mors, ident, comp, inv, name=name)

    @classmethod
    def discrete(cls, objs, name=None):
        return cls.from_components([[x] for x in objs], name=name)

    @classmethod
    def chaotic(cls, objs, name=None):
        return cls.from_components([list(objs)], name=name)

    @classmethod
    def terminal(cls):
        return cls.from_components([["pt"]], name="terminal")

    @classmethod
    def empty(cls):
        return cls([], {}, {}, {}, {}, name="empty")

    @classmethod
    def from_group(cls, elements, mult, unit, obj="pt", name=None):
        """One-object groupoid of a finite group; ``mult(x, y) = x∘y``."""
        inv = {x: next(y for y in elements if mult(x, y) == unit) for x in elements}
        return cls([obj], {x: (obj, obj) for x in elements}, {obj: unit},
                   {(x, y): mult(x, y) for x in elements for y in elements}, inv, name=name)

    @classmethod
    def of_category(cls, cat, inverse):
        return cls(cat.objects, cat.morphisms, cat.identity, cat.comp, inverse, name=cat.name)


def validate_groupoid(g):
    rep = validate_category(g)
    if not rep.ok:
        return rep
    for f, (d, c) in g.morphisms.items():
        fi = g.inverse.get(f)
        if fi is None or g.morphisms.get(fi) != (c, d):
            rep.add("inverse missing or mistyped", (f, fi))
            continue
        if g.comp[(fi, f)] != g.identity[d]:
            rep.add("left inverse law", (f, fi))
        if g.comp[(f, fi)] != g.identity[c]:
            rep.add("right inverse law", (f, fi))
    return rep


class GpdFunctor:
    """A functor between finite groupoids given by object and morphism maps."""

    def __init__(self, source, target, obj, mor, name=None):
        self.source, self.target = source, target
        self.obj = dict(obj)
        self.mor = dict(mor)
        self.name = name

    def __call__(self, x):
        return self.obj[x]

    def on_mor(self, f):
        return self.mor[f]

    def then(self, other):
        """``other∘self``."""
        return GpdFunctor(self.source, other.target,
                          {x: other.obj[y] for x, y in self.obj.items()},
                          {f: other.mor[g] for f, g in self.mor.items()})

    @classmethod
    def identity(cls, g):
        return cls(g, g, {x: x for x in g.objects}, {f: f for f in g.morphisms}, name="id")

    @classmethod
    def to_terminal(cls, g, t=None):
        t = t or FinGroupoid.terminal()
        (pt,) = t.objects
        return cls(g, t, {x: pt for x in g.objects}, {f: t.identity[pt] for f in g.morphisms})

    def __eq__(self, other):
        return (isinstance(other, GpdFunctor) and self.obj == other.obj and self.mor == other.mor)

    def __repr__(self):
        return f"<GpdFunctor {self.name or ''} {len(self.obj)} objects>"


def validate_functor(F):
    rep = Report()
    s, t = F.source, F.target
    if set(F.obj) != set(s.objects) or set(F.mor) != set(s.morphisms):
        rep.add("functor not total", ())
        return rep
    for x in s.objects:
        if F.obj[x] not in t.identity:
            rep.add("object image outside target", (x, F.obj[x]))
        elif F.mor[s.identity[x]] != t.identity[F.obj[x]]:
            rep.add("identity not preserved", (x,))
    for f, (d, c) in s.morphisms.items():
        if t.morphisms.get(F.mor[f]) != (F.obj.get(d), F.obj.get(c)):
            rep.add("dom/cod not preserved", (f,))
    if not rep.ok:
        return rep
    for g, f in s.composable_pairs():
        if F.mor[s.compose(g, f)] != t.compose(F.mor[g], F.mor[f]):
            rep.add("composition not preserved", (g, f))
    return rep


def is_contractible(g):
    """``(True, centre)`` or ``(False, witness)`` where the witness is
    ``()`` for the empty groupoid or a pair with hom-set size != 1."""
    if not g.objects:
        return False, ()
    for a, b in product(g.objects, repeat=2):
        if len(g.hom(a, b)) != 1:
            return False, (a, b)
    return True, g.objects[0]


def check_equivalence(F):
    """Decide whether ``F`` is fully faithful and essentially surjective.

    Returns ``(True, section)`` with ``section[b] = (a, iso F(a) -> b)`` for
    each target object, or ``(False, witness)``.
    """
    s, t = F.source, F.target
    for a, b in product(s.objects, repeat=2):
        image = [F.mor[f] for f in s.hom(a, b)]
        tgt = t.hom(F.obj[a], F.obj[b])
        if len(set(image)) != len(image):
            return False, ("not faithful", a, b)
        if set(image) != set(tgt):
            return False, ("not full", a, b)
    section = {}
    for b in t.objects:
        for a in s.objects:
            isos = t.hom(F.obj[a], b)
            if isos:
                section[b] = (a, isos[0])
                break
        else:
            return False, ("not essentially surjective", b)
    return True, section


class GpdPresheaf:
    """A strict functor from ``base``ᵒᵖ to finite groupoids.

    ``restrict[f]`` is the functor ``level[cod f] -> level[dom f]``.
    """

    def __init__(self, base, level, restrict, name=None):
        self.base = base
        self.level = dict(level)
        self.restrict = dict(restrict)
        self.name = name

    def r_obj(self, f, a):
        return self.restrict[f].obj[a]

    def r_mor(self, f, m):
        return self.restrict[f].mor[m]

    def is_discrete(self):
        return all(len(g.morphisms) == len(g.objects) for g in self.level.values())

    def __eq__(self, other):
        return (isinstance(other, GpdPresheaf) and self.base == other.base
                and self.level == other.level and self.restrict == other.restrict)

    def __repr__(self):
        return f"<GpdPresheaf {self.name or ''} over {self.base!r}>"

    @classmethod
    def constant(cls, base, g, name=None):
        return cls(base, {x: g for x in base.objects},
                   {f: GpdFunctor.identity(g) for f in base.morphisms}, name=name)

    @classmethod
    def from_maps(cls, base, level, obj_maps, name=None):
        """Build a presheaf whose levels have at most one morphism between two
        objects, so each restriction functor is determined on objects."""
        restrict = {}
        for f, om in obj_maps.items():
            src, tgt = level[base.cod(f)], level[base.dom(f)]
            mor = {}
            for m, (d, c) in src.morphisms.items():
                (mor[m],) = tgt.hom(om[d], om[c])
            restrict[f] = GpdFunctor(src, tgt, om, mor)
        for x in base.objects:
            restrict.setdefault(base.identity[x], GpdFunctor.identity(level[x]))
        return cls(base, level, restrict, name=name)


def validate_presheaf(A):
    rep = Report()
    base = A.base
    for x in base.objects:
        if x not in A.level:
            rep.add("missing level", (x,))
            continue
        sub = validate_groupoid(A.level[x])
        for v in sub.violations:
            rep.add(f"level {x}: {v.law}", v.witness)
    for f, (d, c) in base.morphisms.items():
        F = A.restrict.get(f)
        if F is None:
            rep.add("missing restriction", (f,))
            continue
        if F.source is not A.level[c] and F.source != A.level[c]:
            rep.add("restriction has wrong source", (f,))
        if F.target is not A.level[d] and F.target != A.level[d]:
            rep.add("restriction has wrong target", (f,))
        for v in validate_functor(F).violations:
            rep.add(f"restriction {f}: {v.law}", v.witness)
    if not rep.ok:
        return rep
    for x in base.objects:
        if A.restrict[base.identity[x]] != GpdFunctor.identity(A.level[x]):
            rep.add("restriction along identity is not the identity", (x,))
    for g, f in base.composable_pairs():
        # restrict(g∘f) = restrict(f) after restrict(g)
        if A.restrict[base.compose(g, f)] != A.restrict[g].then(A.restrict[f]):
            rep.add("restriction not functorial", (g, f))
    return rep


def global_points(A):
    """All strict natural families of objects, in lexicographic order."""
    base = A.base
    objs = base.objects
    found = []

    def extend(i, chosen):
        if i == len(objs):
            found.append(dict(chosen))
            return
        x = objs[i]
        for a in A.level[x].objects:
            chosen[x] = a
            ok = True
            for f in base.into(x):
                y = base.dom(f)
                if y in chosen and A.r_obj(f, a) != chosen[y]:
                    ok = False
                    break
            if ok:
                for f, (d, c) in base.morphisms.items():
                    if d == x and c in chosen and A.r_obj(f, chosen[c]) != a:
                        ok = False
                        break
            if ok:
                extend(i + 1, chosen)
            del chosen[x]

    extend(0, {})
    return found


def pointwise_contractible(A):
    witnesses = {x: is_contractible(A.level[x]) for x in A.base.objects}
    return all(v for v, _ in witnesses.values()), witnesses


class PresheafMap:
    """A strictly natural transformation between groupoid presheaves."""

    def __init__(self, source, target, components, name=None):
        self.source, self.target = source, target
        self.components = dict(components)
        self.name = name

    def __getitem__(self, x):
        return self.components[x]

    @classmethod
    def to_terminal(cls, A):
        t = FinGroupoid.terminal()
        T = GpdPresheaf.constant(A.base, t, name="terminal")
        return cls(A, T, {x: GpdFunctor.to_terminal(A.level[x], t) for x in A.base.objects})


def validate_presheaf_map(s):
    rep = Report()
    A, B, base = s.source, s.target, s.source.base
    for x in base.objects:
        for v in validate_functor(s[x]).violations:
            rep.add(f"component {x}: {v.law}", v.witness)
    if not rep.ok:
        return rep
    for f in base.morphisms:
        y, x = base.dom(f), base.cod(f)
        if A.restrict[f].then(s[y]) != s[x].then(B.restrict[f]):
            rep.add("naturality", (f,))
    return rep


def is_pointwise_equivalence(s):
    return all(check_equivalence(s[x])[0] for x in s.source.base.objects)


def require(rep, what):
    if not rep.ok:
        raise CategoryError(f"invalid {what}: " + "; ".join(map(str, rep.violations[:3])))
