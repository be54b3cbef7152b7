"""Finite categories, sieves and Grothendieck sites.

Morphisms are named by identifiers and composition is an explicit table
``comp[(g, f)] = g∘f`` (defined when ``cod f == dom g``).  Nothing is ever
completed from relations: inputs are validated, never repaired.
"""

from dataclasses import dataclass
from itertools import product

from .report import Report


class CategoryError(ValueError):
    pass


class FinCat:
    """A finite category given by an explicit composition table."""

    def __init__(self, objects, morphisms, identity, comp, name=None):
        self.objects = tuple(sorted(objects))
        self.morphisms = {m: (d, c) for m, (d, c) in sorted(morphisms.items())}
        self.identity = dict(sorted(identity.items()))
        self.comp = dict(comp)
        self.name = name
        self._ids = frozenset(self.identity.values())
        self._slices = {}

    # -- basic structure -------------------------------------------------
    def dom(self, f):
        return self.morphisms[f][0]

    def cod(self, f):
        return self.morphisms[f][1]

    def is_identity(self, f):
        return f in self._ids

    def compose(self, g, f):
        """``g∘f``: first ``f`` then ``g``."""
        try:
            return self.comp[(g, f)]
        except KeyError:
            raise CategoryError(f"composite {g}∘{f} is not in the table") from None

    def compose_chain(self, chain):
        """Composite ``f0∘f1∘…∘fn`` of a chain listed outermost first."""
        result = chain[0]
        for f in chain[1:]:
            result = self.compose(result, f)
        return result

    def hom(self, x, y):
        return [f for f, (d, c) in self.morphisms.items() if d == x and c == y]

    def check_object(self, x):
        if x not in self.identity:
            raise CategoryError(f"unknown object {x!r}")

    def morphism_key(self, f):
        return (not self.is_identity(f), f)

    def slice_index(self, x):
        """Every morphism into ``x`` as ``(dom, f)``, identity first, then by name."""
        self.check_object(x)
        if x not in self._slices:
            fs = sorted((f for f, (_, c) in self.morphisms.items() if c == x), key=self.morphism_key)
            self._slices[x] = [(self.dom(f), f) for f in fs]
        return list(self._slices[x])

    def into(self, x):
        return [f for _, f in self.slice_index(x)]

    def composable_pairs(self):
        for g, (dg, _) in self.morphisms.items():
            for f, (_, cf) in self.morphisms.items():
                if cf == dg:
                    yield g, f

    def is_groupoid_like(self):
        """True when every morphism has a two-sided inverse."""
        for f, (d, c) in self.morphisms.items():
            if not any(
                self.comp.get((g, f)) == self.identity[d] and self.comp.get((f, g)) == self.identity[c]
                for g in self.hom(c, d)
            ):
                return False
        return True

    def is_monoid(self):
        return len(self.objects) == 1

    # -- equality / printing ----------------------------------------------
    def _key(self):
        return (self.objects, tuple(self.morphisms.items()), tuple(self.identity.items()),
                tuple(sorted(self.comp.items())))

    def __eq__(self, other):
        return isinstance(other, FinCat) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FinCat{label}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"

    # -- constructors -----------------------------------------------------
    @classmethod
    def terminal(cls, obj="pt"):
        return cls([obj], {"id": (obj, obj)}, {obj: "id"}, {("id", "id"): "id"}, name="terminal")

    @classmethod
    def discrete(cls, objs):
        ids = {x: f"id_{x}" for x in objs}
        return cls(objs, {ids[x]: (x, x) for x in objs}, ids,
                   {(ids[x], ids[x]): ids[x] for x in objs}, name="discrete")

    @classmethod
    def from_monoid(cls, elements, mult, unit, obj="pt", name=None):
        """One-object category; ``mult(x, y)`` is the composite ``x∘y``."""
        return cls([obj], {x: (obj, obj) for x in elements}, {obj: unit},
                   {(x, y): mult(x, y) for x in elements for y in elements}, name=name)

    @classmethod
    def from_poset(cls, elements, leq, name=None, names=None):
        """Thin category with a morphism ``a -> b`` iff ``leq(a, b)``."""
        names = names or (lambda a, b: f"id_{a}" if a == b else f"{a}_{b}")
        mors, comp = {}, {}
        for a, b in product(elements, repeat=2):
            if leq(a, b):
                mors[names(a, b)] = (a, b)
        for a, b, c in product(elements, repeat=3):
            if leq(a, b) and leq(b, c):
                comp[(names(b, c), names(a, b))] = names(a, c)
        return cls(elements, mors, {a: names(a, a) for a in elements}, comp, name=name)


def validate_category(cat):
    """Check totality, typing, unit laws and associativity of ``cat``."""
    rep = Report()
    for x, i in cat.identity.items():
        if cat.morphisms.get(i) != (x, x):
            rep.add("identity has wrong type", (x, i))
    for f, (d, c) in cat.morphisms.items():
        if d not in cat.identity or c not in cat.identity:
            rep.add("morphism references unknown object", (f, d, c))
    if not rep.ok:
        return rep
    for g, f in cat.composable_pairs():
        rep.tick("composable pairs")
        h = cat.comp.get((g, f))
        if h is None:
            rep.add("composite missing", (g, f))
        elif cat.morphisms.get(h) != (cat.dom(f), cat.cod(g)):
            rep.add("composite has wrong type", (g, f, h))
    for (g, f) in cat.comp:
        if g not in cat.morphisms or f not in cat.morphisms or cat.cod(f) != cat.dom(g):
            rep.add("composite of non-composable pair", (g, f))
    if not rep.ok:
        return rep
    for f, (d, c) in cat.morphisms.items():
        if cat.comp[(cat.identity[c], f)] != f:
            rep.add("left identity law", (cat.identity[c], f))
        if cat.comp[(f, cat.identity[d])] != f:
            rep.add("right identity law", (f, cat.identity[d]))
    for g, f in cat.composable_pairs():
        for h in cat.morphisms:
            if cat.dom(h) == cat.cod(g):
                rep.tick("composable triples")
                if cat.comp[(h, cat.comp[(g, f)])] != cat.comp[(cat.comp[(h, g)], f)]:
                    rep.add("associativity", (h, g, f))
    return rep


def slice_index(cat, x):
    return cat.slice_index(x)


@dataclass(frozen=True)
class Sieve:
    apex: str
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def __contains__(self, f):
        return f in self.members

    def __len__(self):
        return len(self.members)

    def sorted_members(self, cat):
        return sorted(self.members, key=cat.morphism_key)

    def __repr__(self):
        return f"Sieve({self.apex}: {{{', '.join(sorted(self.members))}}})"


def is_sieve(cat, x, members):
    for f in members:
        if f not in cat.morphisms or cat.cod(f) != x:
            return False
        for g in cat.into(cat.dom(f)):
            if cat.compose(f, g) not in members:
                return False
    return True


def check_sieve(cat, sieve):
    for f in sieve.members:
        if f not in cat.morphisms or cat.cod(f) != sieve.apex:
            raise CategoryError(f"sieve on {sieve.apex} contains {f!r} with the wrong codomain")
    if not is_sieve(cat, sieve.apex, sieve.members):
        raise CategoryError(f"{sieve!r} is not closed under precomposition")


def generated_sieve(cat, x, fs):
    """Smallest sieve on ``x`` containing the morphisms ``fs``."""
    members = set()
    for f in fs:
        if cat.cod(f) != x:
            raise CategoryError(f"{f!r} does not have codomain {x!r}")
        members.update(cat.compose(f, g) for g in cat.into(cat.dom(f)))
    return Sieve(x, members)


def maximal_sieve(cat, x):
    return Sieve(x, cat.into(x))


def pullback(cat, sieve, f):
    """``f*S = {g : f∘g ∈ S}`` for ``f: Y -> apex``."""
    if cat.cod(f) != sieve.apex:
        raise CategoryError(f"cannot pull back a sieve on {sieve.apex} along {f!r}")
    y = cat.dom(f)
    return Sieve(y, [g for g in cat.into(y) if cat.compose(f, g) in sieve.members])


def enumerate_sieves(cat, x):
    """All sieves on ``x``, as unions of principal sieves, in canonical order."""
    principal = [generated_sieve(cat, x, [f]).members for f in cat.into(x)]
    seen = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for p in principal:
                t = s | p
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return sorted((Sieve(x, s) for s in seen),
                  key=lambda s: (len(s), sorted(s.members, key=cat.morphism_key)))


class Site:
    """A finite category with a set of covering sieves on each object."""

    def __init__(self, cat, covers, name=None):
        self.cat = cat
        self.covers = {x: frozenset(covers.get(x, ())) for x in cat.objects}
        self.name = name
        for x, ss in self.covers.items():
            for s in ss:
                if s.apex != x:
                    raise CategoryError(f"cover {s!r} listed under object {x!r}")
                check_sieve(cat, s)

    def sorted_covers(self, x):
        return sorted(self.covers[x], key=lambda s: (len(s), sorted(s.members)))

    def __eq__(self, other):
        return isinstance(other, Site) and self.cat == other.cat and self.covers == other.covers

    def __repr__(self):
        n = sum(len(v) for v in self.covers.values())
        return f"<Site {self.name or ''}: {len(self.cat.objects)} objects, {n} covering sieves>"


def trivial_topology(cat, name=None):
    return Site(cat, {x: [maximal_sieve(cat, x)] for x in cat.objects}, name=name or "trivial")


def validate_site(site):
    """Check maximality, pullback stability and transitivity of the covers."""
    cat, rep = site.cat, Report()
    for x in cat.objects:
        if maximal_sieve(cat, x) not in site.covers[x]:
            rep.add(f"maximal sieve absent at {x}", (x,))
    for x in cat.objects:
        for s in site.sorted_covers(x):
            for f in cat.into(x):
                rep.tick("stability checks")
                if pullback(cat, s, f) not in site.covers[cat.dom(f)]:
                    rep.add("pullback stability", (x, s, f))
    for x in cat.objects:
        candidates = enumerate_sieves(cat, x)
        for s in site.sorted_covers(x):
            for r in candidates:
                if r in site.covers[x]:
                    continue
                rep.tick("transitivity checks")
                if all(pullback(cat, r, f) in site.covers[cat.dom(f)] for f in s.members):
                    rep.add("transitivity", (x, s, r))
    return rep


def generate_topology(cat, generators, name=None):
    """Coarsest Grothendieck topology containing the given sieves."""
    covers = {x: {maximal_sieve(cat, x)} for x in cat.objects}
    for s in generators:
        check_sieve(cat, s)
        covers[s.apex].add(s)
    all_sieves = {x: enumerate_sieves(cat, x) for x in cat.objects}
    changed = True
    while changed:
        changed = False
        for x in cat.objects:
            for s in list(covers[x]):
                for f in cat.into(x):
                    t = pullback(cat, s, f)
                    if t not in covers[t.apex]:
                        covers[t.apex].add(t)
                        changed = True
        for x in cat.objects:
            for s in list(covers[x]):
                for r in all_sieves[x]:
                    if r not in covers[x] and all(
                        pullback(cat, r, f) in covers[cat.dom(f)] for f in s.members
                    ):
                        covers[x].add(r)
                        changed = True
    return Site(cat, covers, name=name)
