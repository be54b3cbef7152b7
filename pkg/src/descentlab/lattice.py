"""Free bounded distributive lattices, cube maps and face cofibrations.

A ``DLExpr`` over ``m`` generators is stored in canonical monotone DNF: an
antichain of monomials, each monomial a frozenset of generator indices.  The
empty antichain is 0 and the antichain ``{∅}`` is 1.  A ``CubeMap`` m -> n is
an n-tuple of such expressions; composition is substitution.

A ``FaceCofib`` is an antichain of faces, each face a consistent set of
atoms ``(k, ε)``.  Monomials that contain both ``(k, 0)`` and ``(k, 1)`` are
the empty face and are dropped, so ``(i=0) ∧ (i=1) = ⊥`` while
``(i=0) ∨ (i=1)`` stays a proper formula.
"""

import re
from functools import lru_cache
from itertools import combinations, product

DEFAULT_NAMES = ("i", "j", "k", "l")
MAX_LEVEL = 4


class LatticeError(ValueError):
    pass


def gen_names(m):
    return list(DEFAULT_NAMES[:m]) if m <= len(DEFAULT_NAMES) else [f"i{t}" for t in range(m)]


def _antichain(monomials, ordered=frozenset.issubset):
    ms = set(frozenset(x) for x in monomials)
    return frozenset(a for a in ms if not any(b != a and ordered(b, a) for b in ms))


class DLExpr:
    """Element of the free bounded distributive lattice, canonical form."""

    __slots__ = ("mons", "_hash")

    def __init__(self, monomials):
        self.mons = _antichain(monomials)
        self._hash = hash(self.mons)

    @classmethod
    def zero(cls):
        return cls([])

    @classmethod
    def one(cls):
        return cls([()])

    @classmethod
    def gen(cls, k):
        return cls([(k,)])

    def is_one(self):
        return frozenset() in self.mons

    def is_zero(self):
        return not self.mons

    def join(self, other):
        return DLExpr(self.mons | other.mons)

    def meet(self, other):
        return DLExpr(a | b for a in self.mons for b in other.mons)

    __or__, __and__ = join, meet

    def support(self):
        return frozenset().union(*self.mons) if self.mons else frozenset()

    def subst(self, comps):
        """Replace generator ``k`` by ``comps[k]``."""
        out = DLExpr.zero()
        for mono in self.mons:
            term = DLExpr.one()
            for k in mono:
                term = term & comps[k]
            out = out | term
        return out

    def evaluate(self, bits):
        return any(all(bits[k] for k in mono) for mono in self.mons)

    def leq(self, other):
        return self | other == other

    def sort_key(self):
        return (len(self.mons), sorted(sorted(m) for m in self.mons))

    def show(self, names=None):
        if self.is_zero():
            return "0"
        if self.is_one():
            return "1"
        top = max(self.support()) + 1
        names = names or gen_names(top)
        monos = sorted(tuple(sorted(names[k] for k in mono)) for mono in self.mons)
        return "\\/".join("/\\".join(m) for m in monos)

    def __eq__(self, other):
        return isinstance(other, DLExpr) and self.mons == other.mons

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"DLExpr({self.show()})"


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\(|\))|(/\\|∧)|(\\/|∨)|([A-Za-z_][A-Za-z0-9_]*|[01]))")


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise LatticeError(f"unexpected character at column {pos + 1}: {text[pos]!r}")
        paren, meet, join, word = m.groups()
        out.append(("paren", paren) if paren else ("meet", None) if meet else
                   ("join", None) if join else ("word", word))
        pos = m.end()
    return out


def dl_normalize(text, names=None):
    """Parse a lattice term over ``names`` and return its canonical form.

    ``∧``/``/\\`` binds tighter than ``∨``/``\\/``.  Without ``names`` the
    generators are collected from the term in order of first appearance
    after sorting.
    """
    toks = _tokenize(text)
    if names is None:
        names = sorted({w for kind, w in toks if kind == "word" and w not in ("0", "1")})
    index = {n: k for k, n in enumerate(names)}
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else (None, None)

    def atom():
        kind, val = peek()
        pos[0] += 1
        if kind == "paren" and val == "(":
            e = disj()
            if peek() != ("paren", ")"):
                raise LatticeError("missing closing parenthesis")
            pos[0] += 1
            return e
        if kind == "word":
            if val == "0":
                return DLExpr.zero()
            if val == "1":
                return DLExpr.one()
            if val not in index:
                raise LatticeError(f"unknown generator {val!r}")
            return DLExpr.gen(index[val])
        raise LatticeError(f"unexpected token {val or kind!r}")

    def conj():
        e = atom()
        while peek()[0] == "meet":
            pos[0] += 1
            e = e & atom()
        return e

    def disj():
        e = conj()
        while peek()[0] == "join":
            pos[0] += 1
            e = e | conj()
        return e

    if not toks:
        raise LatticeError("empty expression")
    e = disj()
    if pos[0] != len(toks):
        raise LatticeError(f"trailing input after token {pos[0]}")
    return e


# -- enumeration ------------------------------------------------------------------

def check_level(m, max_dim=MAX_LEVEL):
    if m < 0 or m > max_dim:
        raise LatticeError(f"level {m} exceeds the truncation bound {max_dim}")


@lru_cache(maxsize=None)
def fdl(m):
    """All elements of FDL(m), as antichains of subsets of range(m)."""
    check_level(m)
    subsets = [frozenset(c) for r in range(m + 1) for c in combinations(range(m), r)]
    found = []

    def grow(i, chosen):
        if i == len(subsets):
            found.append(DLExpr(chosen))
            return
        grow(i + 1, chosen)
        s = subsets[i]
        if all(not (a <= s or s <= a) for a in chosen):
            grow(i + 1, chosen + [s])

    grow(0, [])
    return tuple(sorted(found))


@lru_cache(maxsize=None)
def fdl_index(m):
    return {e: t for t, e in enumerate(fdl(m))}


class CubeMap:
    """A map ``I^m -> I^n``: ``n`` expressions over ``m`` generators."""

    __slots__ = ("m", "n", "comps", "_hash")

    def __init__(self, m, comps):
        self.m = m
        self.comps = tuple(comps)
        self.n = len(self.comps)
        for c in self.comps:
            if c.mons and max(c.support(), default=-1) >= m:
                raise LatticeError(f"component {c!r} uses a generator outside level {m}")
        self._hash = hash((m, self.comps))

    @classmethod
    def identity(cls, n):
        return cls(n, [DLExpr.gen(k) for k in range(n)])

    def then(self, other):
        """``other∘self`` for ``self: m -> n``, ``other: n -> p``."""
        if other.m != self.n:
            raise LatticeError("cube maps are not composable")
        return CubeMap(self.m, [c.subst(self.comps) for c in other.comps])

    def compose(self, inner):
        """``self∘inner``."""
        return inner.then(self)

    def omit(self, k):
        return CubeMap(self.m, self.comps[:k] + self.comps[k + 1:])

    def __eq__(self, other):
        return self is other or (isinstance(other, CubeMap) and self.m == other.m
                                 and self.comps == other.comps)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"CubeMap({self.m}->{self.n}: ({', '.join(c.show(gen_names(self.m)) for c in self.comps)}))"


def endpoint(eps, m):
    return DLExpr.one() if eps else DLExpr.zero()


def enumerate_cube_maps(m, n, max_dim=2):
    check_level(m, max_dim)
    check_level(n, max_dim)
    return [CubeMap(m, comps) for comps in product(fdl(m), repeat=n)]


def face_map(m, k, eps):
    """The face inclusion ``I^(m-1) -> I^m`` setting coordinate ``k`` to ``eps``."""
    comps = [DLExpr.gen(t if t < k else t - 1) for t in range(m)]
    comps[k] = DLExpr.one() if eps else DLExpr.zero()
    return CubeMap(m - 1, comps)


# -- face cofibrations ---------------------------------------------------------------

def _consistent(mono):
    return not any((k, 1 - e) in mono for k, e in mono)


class FaceCofib:
    """Face formula: antichain of consistent monomials over atoms ``(k, ε)``."""

    __slots__ = ("mons", "_hash")

    def __init__(self, monomials):
        self.mons = _antichain(m for m in (frozenset(x) for x in monomials) if _consistent(m))
        self._hash = hash(self.mons)

    @classmethod
    def top(cls):
        return cls([()])

    @classmethod
    def bot(cls):
        return cls([])

    @classmethod
    def atom(cls, k, eps):
        return cls([((k, eps),)])

    def is_top(self):
        return frozenset() in self.mons

    def is_bot(self):
        return not self.mons

    def join(self, other):
        return FaceCofib(self.mons | other.mons)

    def meet(self, other):
        return FaceCofib(a | b for a in self.mons for b in other.mons)

    def meet_dependent(self, other):
        """``ψ ∧ ψ'`` where ``ψ'`` is only meaningful under ``ψ``."""
        return self.meet(other)

    __or__, __and__ = join, meet

    def mentions(self):
        return frozenset(k for mono in self.mons for k, _ in mono)

    def substitute(self, l):
        """``ψ[l]`` for ``ψ`` over ``l.n`` generators, result over ``l.m``."""
        return _cofib_subst(self, l)

    def _substitute(self, l):
        out = FaceCofib.bot()
        for mono in self.mons:
            term = FaceCofib.top()
            for k, e in mono:
                term = term & atom_subst(l.comps[k], e)
            out = out | term
        return out

    def holds_on(self, l):
        return self.substitute(l).is_top()

    def leq(self, other):
        return self | other == other

    def forall(self, i):
        """Universal quantification over generator ``i``: faces free in ``i``."""
        return FaceCofib(m for m in self.mons if all(k != i for k, _ in m))

    def show(self, names=None):
        if self.is_bot():
            return "0"
        if self.is_top():
            return "1"
        top = max(self.mentions()) + 1
        names = names or gen_names(top)
        monos = sorted(tuple(sorted(f"({names[k]}={e})" for k, e in mono)) for mono in self.mons)
        return "\\/".join("/\\".join(m) for m in monos)

    def sort_key(self):
        return (len(self.mons), sorted(sorted(m) for m in self.mons))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __eq__(self, other):
        return self is other or (isinstance(other, FaceCofib) and self.mons == other.mons)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FaceCofib({self.show()})"


@lru_cache(maxsize=None)
def _cofib_subst(psi, l):
    return psi._substitute(l)


def atom_subst(expr, eps):
    """The face formula ``expr = eps``."""
    if eps:
        # a join is 1 iff some monomial is 1 iff all its generators are 1
        return FaceCofib([[(k, 1) for k in mono] for mono in expr.mons])
    out = FaceCofib.top()
    for mono in expr.mons:
        out = out & FaceCofib([[(k, 0)] for k in mono])
    return out


def parse_cofib(text, names):
    """Parse a face formula such as ``(i=0) \\/ (j=1) /\\ (k=0)``."""
    index = {n: k for k, n in enumerate(names)}
    body = text.strip()
    if body in ("0", "1"):
        return FaceCofib.top() if body == "1" else FaceCofib.bot()
    out = FaceCofib.bot()
    for part in re.split(r"\\/|∨", body):
        term = FaceCofib.top()
        for atom_text in re.split(r"/\\|∧", part):
            m = re.fullmatch(r"\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([01])\s*\)\s*", atom_text)
            if not m:
                raise LatticeError(f"malformed face atom {atom_text.strip()!r}")
            if m.group(1) not in index:
                raise LatticeError(f"unknown generator {m.group(1)!r}")
            term = term & FaceCofib.atom(index[m.group(1)], int(m.group(2)))
        out = out | term
    return out


def face_of(mono, m):
    """The face ``I^d -> I^m`` of a consistent monomial, with its free coordinates."""
    fixed = dict(mono)
    free = [k for k in range(m) if k not in fixed]
    comps = []
    for k in range(m):
        if k in fixed:
            comps.append(DLExpr.one() if fixed[k] else DLExpr.zero())
        else:
            comps.append(DLExpr.gen(free.index(k)))
    return CubeMap(len(free), comps), free


@lru_cache(maxsize=None)
def enumerate_cofibs(m):
    """Every face formula over ``m`` generators (antichains of faces)."""
    faces = [frozenset(zip(ks, es)) for r in range(m + 1) for ks in combinations(range(m), r)
             for es in product((0, 1), repeat=r)]
    found = []

    def grow(i, chosen):
        if i == len(faces):
            found.append(FaceCofib(chosen))
            return
        grow(i + 1, chosen)
        f = faces[i]
        if all(not (a <= f or f <= a) for a in chosen):
            grow(i + 1, chosen + [f])

    grow(0, [])
    return tuple(sorted(found))


# -- the weight P_n -----------------------------------------------------------------

def pweight_formula(n):
    return FaceCofib([[(k, 1)] for k in range(n + 1)])


@lru_cache(maxsize=None)
def pweight_cells(n, m):
    """Cells of ``P_n`` at level ``m``: (n+1)-tuples with some component equal to 1."""
    if n < 0:
        raise LatticeError("P_n needs n >= 0")
    check_level(m)
    phi = pweight_formula(n)
    out = []
    for comps in product(fdl(m), repeat=n + 1):
        if phi.holds_on(CubeMap(m, comps)):
            out.append(comps)
    return tuple(out)


def s_k(cell, k):
    """Omit component ``k``."""
    if not 0 <= k < len(cell):
        raise LatticeError(f"index {k} out of range for a P_{len(cell) - 1} cell")
    return tuple(cell[:k]) + tuple(cell[k + 1:])


# -- levelwise cofibrations -----------------------------------------------------------

class LwCofib:
    """A family ``ψ_f`` over the slice of ``apex`` with ``ψ_f ≤ ψ_(f∘g)``."""

    def __init__(self, base, apex, family):
        self.base, self.apex = base, apex
        self.family = dict(family)
        if set(self.family) != set(base.into(apex)):
            raise LatticeError(f"levelwise cofibration must be given on every map into {apex}")
        bad = self.violation()
        if bad:
            raise LatticeError(f"levelwise cofibration not monotone at {bad}")

    def violation(self):
        C = self.base
        for f, psi in self.family.items():
            for g in C.into(C.dom(f)):
                if not psi.leq(self.family[C.compose(f, g)]):
                    return (f, g)
        return None

    def restrict(self, f):
        C = self.base
        return LwCofib(C, C.dom(f), {g: self.family[C.compose(f, g)] for g in C.into(C.dom(f))})

    def is_constant(self):
        return len(set(self.family.values())) <= 1

    def __eq__(self, other):
        return isinstance(other, LwCofib) and (self.apex, self.family) == (other.apex, other.family)

    def __hash__(self):
        return hash((self.apex, tuple(sorted(self.family.items(), key=lambda kv: kv[0]))))

    def __repr__(self):
        return f"LwCofib({self.apex}: {self.family})"


def enumerate_lw_cofibs(base, apex, universe):
    """All monotone families with values in ``universe``."""
    fs = base.into(apex)
    out = []
    for vals in product(universe, repeat=len(fs)):
        fam = dict(zip(fs, vals))
        if all(fam[f].leq(fam[base.compose(f, g)]) for f in fs for g in base.into(base.dom(f))):
            out.append(LwCofib(base, apex, fam))
    return out


def constant_lw(base, apex, psi):
    return LwCofib(base, apex, {f: psi for f in base.into(apex)})
