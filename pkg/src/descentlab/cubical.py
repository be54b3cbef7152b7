"""Truncated cubical sets, presheaves of them over a finite category, nerves.

Cells are numbered per level.  ``act(n, x, l)`` restricts the level-``n``
cell ``x`` along a cube map ``l : m -> n`` and returns a level-``m`` cell.
The convention is contravariant: ``act(act(x, l), l2) = act(x, l2.then(l))``.
"""

from functools import lru_cache
from itertools import product

from .lattice import (CubeMap, DLExpr, FaceCofib, LatticeError, enumerate_cube_maps, face_of)
from .report import Report


@lru_cache(maxsize=None)
def vertices(n):
    return tuple(product((0, 1), repeat=n))


@lru_cache(maxsize=None)
def vertex_index(n):
    return {v: t for t, v in enumerate(vertices(n))}


def apply_to_vertex(l, w):
    return tuple(int(c.evaluate(w)) for c in l.comps)


@lru_cache(maxsize=None)
def vertex_map(n, v):
    """The 0-dimensional cube map picking the vertex ``v`` of ``I^n``."""
    return CubeMap(0, [DLExpr.one() if b else DLExpr.zero() for b in v])


@lru_cache(maxsize=None)
def all_maps(m, n):
    return tuple(enumerate_cube_maps(m, n, max_dim=max(m, n)))


class CubSet:
    """Cubical set truncated at level ``N``; cells are numbered per level."""

    def __init__(self, N, cells, action, name=None):
        self.N = N
        self.cells = [tuple(c) for c in cells]
        self.index = [{v: t for t, v in enumerate(c)} for c in self.cells]
        self._action = action
        self._tab = {}
        self.name = name

    def count(self, n):
        return len(self.cells[n])

    def table(self, n, l):
        key = (n, l)
        tab = self._tab.get(key)
        if tab is None:
            if l.n != n:
                raise LatticeError(f"cube map with target {l.n} applied to a level-{n} cell")
            idx = self.index[l.m]
            tab = [idx[self._action(v, n, l)] for v in self.cells[n]]
            self._tab[key] = tab
        return tab

    def act(self, n, x, l):
        return self.table(n, l)[x]

    def __repr__(self):
        return f"<CubSet {self.name or ''} {[len(c) for c in self.cells]}>"


def validate_cubset(S, max_maps=None):
    """Identity and composition laws of the action, exhaustively up to ``S.N``."""
    rep = Report()
    N = S.N
    for n in range(N + 1):
        ident = S.table(n, CubeMap.identity(n))
        if ident != list(range(S.count(n))):
            rep.add("identity action", (n,))
    for n, m, k in product(range(N + 1), repeat=3):
        for l in all_maps(m, n)[:max_maps]:
            tl = S.table(n, l)
            for l2 in all_maps(k, m)[:max_maps]:
                rep.tick("composition checks")
                t2, tc = S.table(m, l2), S.table(n, l2.then(l))
                if any(t2[tl[x]] != tc[x] for x in range(S.count(n))):
                    rep.add("action not functorial", (n, l, l2))
    return rep


# -- nerves -------------------------------------------------------------------------

def nerve(G, N=2):
    """Nerve of a finite groupoid: an ``n``-cell is ``(g_v)_v`` with ``g_v : c_0 -> c_v``."""
    cells = []
    for n in range(N + 1):
        level = []
        vs = vertices(n)
        for c0 in G.objects:
            outs = [f for f, (d, _) in G.morphisms.items() if d == c0]
            for rest in product(outs, repeat=len(vs) - 1):
                level.append((G.identity[c0],) + rest)
        cells.append(level)

    def action(x, n, l):
        vi = vertex_index(n)
        base = vi[apply_to_vertex(l, (0,) * l.m)]
        back = G.inv(x[base])
        return tuple(G.compose(x[vi[apply_to_vertex(l, w)]], back) for w in vertices(l.m))

    S = CubSet(N, cells, action, name=f"N({G.name or 'G'})")
    S.groupoid = G
    return S


def nerve_vertex_object(G, cell, v=0):
    return G.cod(cell[v])


class CubPresheaf:
    """Presheaf over ``C × ℬ``: a ``CubSet`` per object, restriction per morphism.

    ``res[f][n][x]`` is the level-``n`` cell of ``obj[dom f]`` obtained by
    restricting the cell ``x`` of ``obj[cod f]``.
    """

    def __init__(self, base, obj, res, name=None):
        self.base, self.obj, self.res = base, dict(obj), dict(res)
        self.N = min(S.N for S in self.obj.values())
        self.name = name

    def restrict(self, f, n, x):
        return self.res[f][n][x]


def nerve_presheaf(A, N=2):
    """Levelwise nerve of a groupoid-valued presheaf."""
    base = A.base
    obj = {x: nerve(A.level[x], N) for x in base.objects}
    res = {}
    for f in base.morphisms:
        src, tgt = obj[base.cod(f)], obj[base.dom(f)]
        F = A.restrict[f]
        res[f] = [[tgt.index[n][tuple(F.mor[g] for g in cell)] for cell in src.cells[n]]
                  for n in range(N + 1)]
    P = CubPresheaf(base, obj, res, name=f"N({A.name or 'A'})")
    P.groupoids = A
    return P


def validate_cubpresheaf(P, max_maps=None):
    rep = Report()
    C = P.base
    for x, S in P.obj.items():
        for v in validate_cubset(S, max_maps).violations:
            rep.add(f"{x}: {v.law}", v.witness)
    for x in C.objects:
        i = C.identity[x]
        for n in range(P.N + 1):
            if P.res[i][n] != list(range(P.obj[x].count(n))):
                rep.add("restriction along identity", (x, n))
    for g, f in C.composable_pairs():
        gf = C.compose(g, f)
        for n in range(P.N + 1):
            rg, rf, rgf = P.res[g][n], P.res[f][n], P.res[gf][n]
            if any(rf[rg[x]] != rgf[x] for x in range(len(rg))):
                rep.add("restriction not functorial", (g, f, n))
    for f in C.morphisms:
        src, tgt = P.obj[C.cod(f)], P.obj[C.dom(f)]
        for n, m in product(range(P.N + 1), repeat=2):
            for l in all_maps(m, n)[:max_maps]:
                rep.tick("mixed checks")
                a, b = src.table(n, l), tgt.table(n, l)
                rn, rm = P.res[f][n], P.res[f][m]
                if any(rm[a[x]] != b[rn[x]] for x in range(src.count(n))):
                    rep.add("restriction does not commute with the cube action", (f, l))
    return rep


def e_presheaf(P):
    """``E P``: families ``u(f)`` over the slice, with ``(u f)(g) = u(f∘g)``."""
    C = P.base
    N = P.N
    obj, res = {}, {}
    for x in C.objects:
        fs = C.into(x)
        comps = [P.obj[C.dom(f)] for f in fs]
        cells = [list(product(*[range(S.count(n)) for S in comps])) for n in range(N + 1)]

        def action(v, n, l, comps=comps):
            return tuple(S.act(n, c, l) for S, c in zip(comps, v))

        S = CubSet(N, cells, action, name=f"E({x})")
        S.components = fs
        obj[x] = S
    for f in C.morphisms:
        y, x = C.dom(f), C.cod(f)
        pos = {h: t for t, h in enumerate(C.into(x))}
        sel = [pos[C.compose(f, g)] for g in C.into(y)]
        src, tgt = obj[x], obj[y]
        res[f] = [[tgt.index[n][tuple(v[t] for t in sel)] for v in src.cells[n]]
                  for n in range(N + 1)]
    E = CubPresheaf(C, obj, res, name=f"E({P.name or 'P'})")
    E.inner = P
    return E


def alpha_cells(P, E, x, n, a):
    """``α a`` as an ``E P`` cell: ``(α a)(f) = a f``."""
    C = P.base
    return E.obj[x].index[n][tuple(P.restrict(f, n, a) for f in C.into(x))]


# -- partial elements -------------------------------------------------------------------

class ExtentShape:
    """Faces of an extent at level ``n`` with their inclusions and overlaps."""

    def __init__(self, n, psi):
        self.n, self.psi = n, psi
        self.faces = sorted(psi.mons, key=lambda mo: (len(mo), sorted(mo)))
        self.incl = [face_of(mo, n)[0] for mo in self.faces]
        self.overlaps = []
        for a in range(len(self.faces)):
            for b in range(a):
                meet = self.faces[a] | self.faces[b]
                if any((k, 1 - e) in meet for k, e in meet):
                    continue
                j = face_of(meet, n)[0]
                self.overlaps.append((a, b, self.factor(a, j), self.factor(b, j)))

    def factor(self, a, l):
        """``l`` as a map into face ``a`` (``l`` must land in that face)."""
        fixed = dict(self.faces[a])
        return CubeMap(l.m, [c for k, c in enumerate(l.comps) if k not in fixed])

    def face_containing(self, l):
        memo = self.__dict__.setdefault("_containing", {})
        if l not in memo:
            memo[l] = self._face_containing(l)
        return memo[l]

    def _face_containing(self, l):
        for a, mo in enumerate(self.faces):
            if all(l.comps[k] == (DLExpr.one() if e else DLExpr.zero()) for k, e in mo):
                return a
        return None


@lru_cache(maxsize=None)
def extent_shape(n, psi):
    return ExtentShape(n, psi)


class Partial:
    """A partial element of a cubical set at level ``n`` on the extent ``psi``."""

    __slots__ = ("n", "psi", "cells", "_hash")

    def __init__(self, n, psi, cells):
        self.n, self.psi, self.cells = n, psi, tuple(cells)
        self._hash = hash((n, psi, self.cells))

    @property
    def shape(self):
        return extent_shape(self.n, self.psi)

    def value(self, S, l):
        sh = self.shape
        a = sh.face_containing(l)
        if a is None:
            raise LatticeError("map does not land in the extent")
        return S.act(sh.incl[a].m, self.cells[a], sh.factor(a, l))

    def restrict(self, S, l):
        """Restriction along ``l : m -> n``; the extent becomes ``psi[l]``."""
        psi2, plan = restriction_plan(self.n, self.psi, l)
        cells = self.cells
        return Partial(l.m, psi2, [S.table(d, fl)[cells[a]] for a, d, fl in plan])

    def map_cells(self, fn):
        """Apply a level-preserving cell map (e.g. a C-restriction)."""
        sh = self.shape
        return Partial(self.n, self.psi, [fn(inc.m, c) for inc, c in zip(sh.incl, self.cells)])

    def __eq__(self, other):
        return isinstance(other, Partial) and (self.n, self.psi, self.cells) == \
            (other.n, other.psi, other.cells)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Partial(n={self.n}, {self.psi.show()}, {self.cells})"


@lru_cache(maxsize=None)
def restriction_plan(n, psi, l):
    """For each face of ``psi[l]``: the old face it lands in and the factor map."""
    sh = extent_shape(n, psi)
    psi2 = psi.substitute(l)
    sh2 = extent_shape(l.m, psi2)
    plan = []
    for j in sh2.incl:
        jl = j.then(l)
        a = sh.face_containing(jl)
        if a is None:
            raise LatticeError("restricted face leaves the extent")
        plan.append((a, sh.incl[a].m, sh.factor(a, jl)))
    return psi2, tuple(plan)


def is_compatible(S, p):
    sh = p.shape
    return all(S.act(sh.incl[a].m, p.cells[a], fa) == S.act(sh.incl[b].m, p.cells[b], fb)
               for a, b, fa, fb in sh.overlaps)


def enumerate_partials(S, n, psi):
    """Every compatible partial element of ``S`` at level ``n`` on ``psi``."""
    sh = extent_shape(n, psi)
    k = len(sh.faces)
    by_last = [[] for _ in range(k)]
    for a, b, fa, fb in sh.overlaps:
        by_last[a].append((a, b, fa, fb))
    out = []
    cur = [None] * k

    def go(a):
        if a == k:
            out.append(Partial(n, psi, cur))
            return
        d = sh.incl[a].m
        for c in range(S.count(d)):
            cur[a] = c
            if all(S.act(d, c, fa) == S.act(sh.incl[b].m, cur[b], fb) for _, b, fa, fb in by_last[a]):
                go(a + 1)
        cur[a] = None

    go(0)
    return out


def total_partial(S, n, x):
    return Partial(n, FaceCofib.top(), [x])


def open_box(psi, n):
    """``psi ∨ (i = 0)`` for the filling direction ``i = n`` at level ``n + 1``."""
    return psi | FaceCofib.atom(n, 0)


@lru_cache(maxsize=None)
def lift_map(l):
    """``l⁺ : I^(m+1) -> I^(n+1)`` keeping the last coordinate."""
    return CubeMap(l.m + 1, list(l.comps) + [DLExpr.gen(l.m)])
