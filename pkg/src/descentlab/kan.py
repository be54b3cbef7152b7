"""Filling and extension operations with exhaustive verification harnesses.

A filling operation takes, at an object ``x`` and level ``n``, a face formula
``psi`` over ``n`` generators and a partial element on ``psi ∨ (i=0)`` at
level ``n+1`` (``i`` is the last coordinate), and returns a level-``n+1``
cell.  An extension operation takes a partial element on ``psi`` at level
``n`` and returns a level-``n`` cell.

The harness checks three families of equations:

* agreement: the result restricts to the given data on the extent;
* uniformity in ℬ: ``c(psi, u) l⁺ = c(psi l, u l⁺)`` for every cube map ``l``;
* naturality in C: ``c_x(psi, u) f = c_y(psi, u f)`` for every ``f : y -> x``.

Pointwise operations are only expected to satisfy the first two.
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .cubical import (Partial, all_maps, enumerate_partials, lift_map, open_box, restriction_plan,
                      vertex_index, vertex_map, vertices)
from .groupoid import is_contractible
from .lattice import CubeMap, DLExpr, enumerate_cofibs
from .report import Report


@dataclass
class FillingOp:
    """``fn(x, n, psi, u) -> cell``; ``kind`` is ``"fill"`` or ``"ext"``."""

    P: object
    fn: object
    kind: str = "fill"
    name: str = ""
    natural: bool = True

    def __call__(self, x, n, psi, u):
        return self.fn(x, n, psi, u)


ExtensionOp = FillingOp


# -- nerves ------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _edge_map(n, v, k):
    comps = [DLExpr.one() if b else DLExpr.zero() for b in v]
    comps[k] = DLExpr.gen(0)
    return CubeMap(1, comps)


def _extent_vertices(S, u, level):
    sh = u.shape
    objs = {}
    G = S.groupoid
    for v in vertices(level):
        if sh.face_containing(vertex_map(level, v)) is not None:
            (g,) = S.cells[0][u.value(S, vertex_map(level, v))]
            objs[v] = G.cod(g)
    return objs


def nerve_fill_cell(S, level, u):
    """Canonical filler in a groupoid nerve: compose edges along the extent."""
    G = S.groupoid
    sh = u.shape
    objs = _extent_vertices(S, u, level)
    zero = (0,) * level
    g = {zero: G.identity[objs[zero]]}
    queue = deque([zero])
    while queue:
        v = queue.popleft()
        for k in range(level):
            w = v[:k] + (1 - v[k],) + v[k + 1:]
            if w in g or w not in objs:
                continue
            lo, hi = (v, w) if v[k] == 0 else (w, v)
            e = _edge_map(level, lo, k)
            if sh.face_containing(e) is None:
                continue
            edge = S.cells[1][u.value(S, e)][1]  # lo -> hi
            step = edge if v[k] == 0 else G.inv(edge)
            g[w] = G.compose(step, g[v])
            queue.append(w)
    out = []
    for v in vertices(level):
        if v not in g:  # outside the open box the last coordinate is 1
            g[v] = g[v[:-1] + (0,)]
        out.append(g[v])
    return S.index[level][tuple(out)]


def nerve_extend_cell(S, level, u, centre):
    """Extension in the nerve of a contractible groupoid: centre off the extent."""
    G = S.groupoid
    objs = _extent_vertices(S, u, level)
    vs = vertices(level)
    obs = [objs.get(v, centre) for v in vs]
    out = [G.hom(obs[0], o)[0] for o in obs]
    return S.index[level][tuple(out)]


def nerve_filling(P):
    """The canonical filling of a levelwise nerve, object by object."""
    def fn(x, n, psi, u):
        return nerve_fill_cell(P.obj[x], n + 1, u)
    return FillingOp(P, fn, "fill", "nerve filling")


def pointwise_extension(P):
    """Extension at each object from a chosen centre of a contractible level.

    Uniform in ℬ but in general not natural in C.
    """
    centres = {}
    for x, S in P.obj.items():
        ok, c = is_contractible(S.groupoid)
        if not ok:
            raise ValueError(f"level at {x} is not contractible")
        centres[x] = c

    def fn(x, n, psi, u):
        return nerve_extend_cell(P.obj[x], n, u, centres[x])
    return FillingOp(P, fn, "ext", "pointwise extension", natural=False)


# -- lifting to E ----------------------------------------------------------------------------

def _component(E, x, u, t):
    """The ``t``-th slice component of a partial element of ``E P`` at ``x``."""
    S = E.obj[x]
    sh = u.shape
    from .cubical import Partial
    return Partial(u.n, u.psi, [S.cells[inc.m][c][t] for inc, c in zip(sh.incl, u.cells)])


def e_lift(op, E):
    """Lift a pointwise operation on ``P`` to ``E P``:
    ``c_E(x, psi, u)(f) = c(dom f, psi, u(f))``."""
    C = E.base
    level_shift = 1 if op.kind == "fill" else 0

    def fn(x, n, psi, u):
        fs = C.into(x)
        comps = tuple(op(C.dom(f), n, psi, _component(E, x, u, t)) for t, f in enumerate(fs))
        return E.obj[x].index[n + level_shift][comps]

    return FillingOp(E, fn, op.kind, f"E({op.name})", natural=True)


def e_fill_lift(c, E):
    return e_lift(c, E)


def e_ext_lift(e, E):
    return e_lift(e, E)


# -- harness ---------------------------------------------------------------------------------

def run_harness(op, N=None, natural=None, objects=None, max_cofibs=None):
    """Check agreement, ℬ-uniformity and (optionally) C-naturality exhaustively."""
    P = op.P
    C = P.base
    N = P.N if N is None else N
    natural = op.natural if natural is None else natural
    rep = Report()
    memo = {}
    fill = op.kind == "fill"
    top = N - 1 if fill else N

    def call(x, n, psi, u):
        key = (x, n, psi, u.cells)
        r = memo.get(key)
        if r is None:
            r = memo[key] = op(x, n, psi, u)
        return r

    for x in objects or C.objects:
        S = P.obj[x]
        for n in range(top + 1):
            level = n + 1 if fill else n
            for psi in enumerate_cofibs(n)[:max_cofibs]:
                ext = open_box(psi, n) if fill else psi
                # every restriction of this extent, with the cell tables it needs
                moves = []
                for m in range(top + 1):
                    for l in all_maps(m, n):
                        lp = lift_map(l) if fill else l
                        psi_l = psi.substitute(l)
                        ext2, plan = restriction_plan(level, ext, lp)
                        moves.append((l, m, psi_l, ext2, S.table(level, lp),
                                      [(a, S.table(d, fl)) for a, d, fl in plan]))
                nat = [(f, C.dom(f), P.res[f]) for f in C.into(x)] if natural else []
                for u in enumerate_partials(S, level, ext):
                    c = call(x, n, psi, u)
                    cells = u.cells
                    rep.tick("inputs")
                    sh = u.shape
                    for a, inc in enumerate(sh.incl):
                        rep.tick("agreement")
                        if S.act(level, c, inc) != cells[a]:
                            rep.add("agreement on the extent", (x, n, psi.show(), cells, a))
                    for l, m, psi_l, ext2, tab, plan in moves:
                        rep.tick("uniformity")
                        cells2 = tuple(t[cells[a]] for a, t in plan)
                        key = (x, m, psi_l, cells2)
                        rhs = memo.get(key)
                        if rhs is None:
                            rhs = memo[key] = op(x, m, psi_l, Partial(level - n + m, ext2, cells2))
                        if tab[c] != rhs:
                            rep.add("uniformity in the cube category", (x, n, psi.show(), l))
                    for f, y, res in nat:
                        rep.tick("naturality")
                        uf = Partial(level, ext, [res[inc.m][cell] for inc, cell in zip(sh.incl, cells)])
                        if res[level][c] != call(y, n, psi, uf):
                            rep.add("naturality in the base", (x, f, n, psi.show(), cells))
    return rep


def naturality_failures(op, N=None):
    """Run the harness with naturality switched on regardless of ``op.natural``."""
    rep = run_harness(op, N=N, natural=True)
    return [v for v in rep.violations if v.law == "naturality in the base"]


def global_element_partial(P, x, n, psi, a_cells):
    """The partial element on ``psi`` whose faces restrict the total cell ``a_cells``."""
    from .cubical import Partial, extent_shape
    S = P.obj[x]
    sh = extent_shape(n, psi)
    return Partial(n, psi, [S.act(n, a_cells, inc) for inc in sh.incl])


# -- levelwise cofibrations ------------------------------------------------------------------

def _sub_partial(S, u, level, ext):
    """``u`` restricted to a smaller extent ``ext`` at the same level."""
    from .cubical import extent_shape
    return Partial(level, ext, [u.value(S, inc) for inc in extent_shape(level, ext).incl])


def lw_compatibility(P, lw, u):
    """First ``(f, g)`` with ``u_f g != u_(fg)`` on ``psi_f ∨ (i=0)``, or ``None``."""
    C = P.base
    for f, uf in u.items():
        y = C.dom(f)
        n = uf.n - 1
        for g in C.into(y):
            fg = C.compose(f, g)
            S = P.obj[C.dom(g)]
            res = P.res[g]
            lhs = uf.map_cells(lambda d, c, res=res: res[d][c])
            if lhs != _sub_partial(S, u[fg], uf.n, open_box(lw.family[f], n)):
                return f, g
    return None


def lw_fill_lift(c, E):
    """Filling for ``E P`` under levelwise cofibrations:
    ``v(f) = c(dom f, psi_f, u_f)``.

    The returned function takes ``(x, n, lw, u)`` with ``lw`` a levelwise
    cofibration at ``x`` and ``u`` a map ``f -> Partial`` on ``psi_f ∨ (i=0)``.
    """
    C = E.base
    P = E.inner

    def fn(x, n, lw, u, check=True):
        if check:
            bad = lw.violation()
            if bad:
                raise ValueError(f"levelwise cofibration not monotone at {bad}")
            bad = lw_compatibility(P, lw, u)
            if bad:
                raise ValueError(f"partial family not compatible at {bad}")
        comps = tuple(c(C.dom(f), n, lw.family[f], u[f]) for f in C.into(x))
        return E.obj[x].index[n + 1][comps]

    return fn


def lw_families(P, x, n, lw):
    """Every compatible partial family for ``lw`` at level ``n + 1``."""
    C = P.base
    fs = C.into(x)
    opts = [enumerate_partials(P.obj[C.dom(f)], n + 1, open_box(lw.family[f], n)) for f in fs]
    out = []
    for pick in product(*opts):
        u = dict(zip(fs, pick))
        if lw_compatibility(P, lw, u) is None:
            out.append(u)
    return out


def run_lw_harness(c, E, N=None, objects=None):
    """Check the two levelwise filling conditions and ℬ-uniformity exhaustively."""
    from .lattice import enumerate_lw_cofibs
    P = E.inner
    C = E.base
    N = E.N if N is None else N
    op = lw_fill_lift(c, E)
    rep = Report()
    rep.nonconstant = 0
    for x in objects or C.objects:
        T = E.obj[x]
        fs = C.into(x)
        for n in range(N):
            level = n + 1
            for lw in enumerate_lw_cofibs(C, x, enumerate_cofibs(n)):
                if not lw.is_constant():
                    rep.nonconstant += 1
                for u in lw_families(P, x, n, lw):
                    v = op(x, n, lw, u, check=False)
                    rep.tick("inputs")
                    cell = T.cells[level][v]
                    for t, f in enumerate(fs):
                        S = P.obj[C.dom(f)]
                        sh = u[f].shape
                        for a, inc in enumerate(sh.incl):
                            rep.tick("agreement")
                            if S.act(level, cell[t], inc) != u[f].cells[a]:
                                rep.add("agreement on psi_f ∨ i=0", (x, n, lw, f))
                    for h in C.into(x):
                        y = C.dom(h)
                        lw_h = lw.restrict(h)
                        u_h = {g: u[C.compose(h, g)] for g in C.into(y)}
                        rep.tick("substitution")
                        if E.res[h][level][v] != op(y, n, lw_h, u_h, check=False):
                            rep.add("substitution along the base", (x, n, lw, h))
                    for m in range(n + 1):
                        for l in all_maps(m, n):
                            lp = lift_map(l)
                            lw_l = type(lw)(C, x, {f: p.substitute(l) for f, p in lw.family.items()})
                            u_l = {f: u[f].restrict(P.obj[C.dom(f)], lp) for f in fs}
                            rep.tick("uniformity")
                            if T.act(level, v, lp) != op(x, m, lw_l, u_l, check=False):
                                rep.add("uniformity in the cube category", (x, n, lw, l))
    return rep


def as_e_partial(E, x, n, u):
    """A constant-extent family as a partial element of ``E P``."""
    C = E.base
    fs = C.into(x)
    first = u[fs[0]]
    T = E.obj[x]
    cells = [T.index[inc.m][tuple(u[f].cells[a] for f in fs)]
             for a, inc in enumerate(first.shape.incl)]
    return Partial(first.n, first.psi, cells)


# -- uniform extension on a sieve --------------------------------------------------------

def natural_centres(A, sieve):
    """Objects ``c(f)`` for ``f`` in the sieve with ``c(f) g = c(f∘g)``, or ``None``."""
    C = A.base
    fs = sieve.sorted_members(C)
    chosen = {}

    def ok(f):
        for g in C.into(C.dom(f)):
            fg = C.compose(f, g)
            if fg in chosen and A.r_obj(g, chosen[f]) != chosen[fg]:
                return False
        for h in fs:
            if h in chosen:
                for g in C.into(C.dom(h)):
                    if C.compose(h, g) == f and A.r_obj(g, chosen[h]) != chosen[f]:
                        return False
        return True

    def go(i):
        if i == len(fs):
            return True
        f = fs[i]
        for a in A.level[C.dom(f)].objects:
            chosen[f] = a
            if ok(f) and go(i + 1):
                return True
            del chosen[f]
        return False

    return dict(chosen) if go(0) else None


def sieve_extension(P, sieve, centres):
    """``e(f, n, psi, u)``: off the extent use ``centres[f]``; needs contractible levels."""
    C = P.base
    for f in sieve.members:
        ok, _ = is_contractible(P.groupoids.level[C.dom(f)])
        if not ok:
            raise ValueError(f"level at {C.dom(f)} is not contractible")

    def fn(f, n, psi, u):
        return nerve_extend_cell(P.obj[C.dom(f)], n, u, centres[f])
    return fn


def gcontr_harness(P, sieve, e, N=None):
    """Agreement, ℬ-uniformity and ``e(f, psi, u) g = e(f∘g, psi, u g)`` on the sieve."""
    C = P.base
    N = P.N if N is None else N
    rep = Report()
    for f in sieve.sorted_members(C):
        y = C.dom(f)
        S = P.obj[y]
        for n in range(N + 1):
            for psi in enumerate_cofibs(n):
                for u in enumerate_partials(S, n, psi):
                    v = e(f, n, psi, u)
                    rep.tick("inputs")
                    for a, inc in enumerate(u.shape.incl):
                        rep.tick("agreement")
                        if S.act(n, v, inc) != u.cells[a]:
                            rep.add("agreement on the extent", (f, n, psi.show()))
                    for m in range(n + 1):
                        for l in all_maps(m, n):
                            rep.tick("uniformity")
                            if S.act(n, v, l) != e(f, m, psi.substitute(l), u.restrict(S, l)):
                                rep.add("uniformity in the cube category", (f, n, psi.show(), l))
                    for g in C.into(y):
                        res = P.res[g]
                        ug = u.map_cells(lambda d, c, res=res: res[d][c])
                        rep.tick("uniformity along the sieve")
                        if res[n][v] != e(C.compose(f, g), n, psi, ug):
                            rep.add("uniformity along the sieve", (f, g, n, psi.show()))
    return rep
