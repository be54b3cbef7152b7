"""Homotopy descent data ``D A`` for nerves of groupoid-valued presheaves.

An element of ``D A`` at ``X`` and cube level ``m`` is a family of maps
``I^m × P_n -> E^(n+1) A`` with ``u(i) = E^k(α) u(s_k i)`` on ``i_k = 0``.
Unfolding ``E``, the value at a chain ``f = (f0, ..., fn)`` of arrows
(``f0`` into ``X``, each next one into the domain of the previous) lies in
``A(dom fn)``.

``P_n`` is a union of faces of ``I^(n+1)`` that all meet at the top vertex,
so a map from ``I^m × P_n`` into the nerve of a groupoid is exactly a functor
from the chaotic groupoid on its vertices.  That is how bodies are stored:
for every ``n`` up to a truncation ``top`` and every chain, a tuple of arrows
``g_v : c_base -> c_v`` over the vertex list ``vshape(m, n)`` (lex order, the
first vertex is the base).  Restriction along cube maps is reindexing of
vertices, exactly as for nerve cells.

The same encoding handles ``D²``-style families indexed by ``P_n × P_p``.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .cubical import apply_to_vertex, vertices
from .lattice import pweight_cells, s_k
from .report import Report, as_budget


# -- vertex shapes -------------------------------------------------------------------------

@lru_cache(maxsize=None)
def vshape(m, n):
    """Vertices of ``I^m × P_n``: ``m`` cube bits then ``n+1`` bits with some 1."""
    return tuple(v for v in vertices(m + n + 1) if any(v[m:]))


@lru_cache(maxsize=None)
def vshape2(m, n, p):
    """Vertices of ``I^m × P_n × P_p``."""
    return tuple(v for v in vertices(m + n + p + 2) if any(v[m:m + n + 1]) and any(v[m + n + 1:]))


@lru_cache(maxsize=None)
def _vpos(verts):
    return {v: t for t, v in enumerate(verts)}


def reindex(G, arrows, positions):
    """Restrict a vertex functor along a vertex map given by source positions."""
    b = arrows[positions[0]]
    if b in G._ids:
        return tuple([arrows[p] for p in positions])
    back = G.inverse[b]
    comp = G.comp
    return tuple([comp[(arrows[p], back)] for p in positions])


def positions(src, dst, fn, memo=None, key=None):
    """Source positions of ``fn(w)`` for ``w`` in ``dst`` (both vertex lists).

    With ``memo`` and ``key`` the result is cached under ``key``.
    """
    if memo is not None and key in memo:
        return memo[key]
    pos = _vpos(src)
    out = tuple(pos[fn(w)] for w in dst)
    if memo is not None:
        memo[key] = out
    return out


def arrow_between(G, arrows, a, b):
    """The arrow from vertex position ``a`` to ``b``."""
    return G.compose(arrows[b], G.inv(arrows[a]))


# -- chains --------------------------------------------------------------------------------

def chains(C, x, length):
    """Composable chains ``(f0, ..., f_{length-1})`` with ``f0`` into ``x``."""
    cache = C.__dict__.setdefault("_chains", {})
    key = (x, length)
    if key not in cache:
        if length == 0:
            out = [()]
        else:
            out = [ch + (f,) for ch in chains(C, x, length - 1)
                   for f in C.into(C.dom(ch[-1]) if ch else x)]
        cache[key] = tuple(out)
        C.__dict__.setdefault("_chain_pos", {})[key] = {ch: t for t, ch in enumerate(out)}
    return cache[key]


def chain_pos(C, x, length):
    try:
        return C._chain_pos[(x, length)]
    except (AttributeError, KeyError):
        chains(C, x, length)
        return C._chain_pos[(x, length)]


def chain_end(C, x, ch):
    return C.dom(ch[-1]) if ch else x


def alpha_source(C, ch, k):
    """Where ``E^k(α)`` reads a chain of length ``len(ch)`` from.

    Returns ``(source chain, arrow to restrict along or None)``: for ``k`` before the
    last slot the arrows ``f_k, f_(k+1)`` are merged, at the last slot ``f_k`` is dropped
    and the value is restricted along it.
    """
    cache = C.__dict__.setdefault("_alpha_source", {})
    key = (ch, k)
    if key not in cache:
        if k < len(ch) - 1:
            cache[key] = ch[:k] + (C.compose(ch[k], ch[k + 1]),) + ch[k + 2:], None
        else:
            cache[key] = ch[:-1], ch[-1]
    return cache[key]


# -- elements ------------------------------------------------------------------------------

@dataclass(frozen=True)
class DElement:
    """``body[n][t]`` is the vertex functor at the ``t``-th chain of length ``n+1``."""

    x: str
    m: int
    top: int
    body: tuple

    def truncate(self, top):
        return DElement(self.x, self.m, top, self.body[:top + 1])


class DEngine:
    """Enumeration and checks of ``D A`` for one groupoid-valued presheaf ``A``."""

    def __init__(self, A):
        self.A = A
        self.C = A.base
        self._levels = {}

    def level(self, x, ch):
        key = (x, ch)
        try:
            return self._levels[key]
        except KeyError:
            G = self._levels[key] = self.A.level[chain_end(self.C, x, ch)]
            return G

    def restrict_arrows(self, f, arrows):
        r = self.A.r_mor
        return tuple([r(f, g) for g in arrows])

    def chains(self, x, length):
        return chains(self.C, x, length)

    # -- compatibility ---------------------------------------------------------------------

    def lower_value(self, x, lower, ch, k):
        """``(E^k α) w`` at ``ch`` for ``w`` given by ``lower`` (chain -> arrows)."""
        src, f = alpha_source(self.C, ch, k)
        val = lower[chain_pos(self.C, x, len(src))[src]]
        return val if f is None else self.restrict_arrows(f, val)

    def face_pieces(self, u_lower, x, m, n, ch):
        """For each ``k``: the data that ``E^k(α)`` forces on the face ``i_k = 0``."""
        out = []
        for k in range(n + 1):
            sub, low = _face_plan(m, n, k)
            out.append((k, sub, reindex(self.level(x, ch), self.lower_value(x, u_lower, ch, k), low)))
        return out

    def compat_plan(self, x, m, n):
        """Per chain at level ``n``: its groupoid and, for each ``k``, the face positions,
        the positions below, the source chain index and the arrow to restrict along."""
        key = ("compat", x, m, n)
        plan = self._levels.get(key)
        if plan is None:
            C = self.C
            plan = []
            for ch in self.chains(x, n + 1):
                items = []
                for k in range(n + 1):
                    sub, low = _face_plan(m, n, k)
                    src, f = alpha_source(C, ch, k)
                    items.append((k, sub, low, chain_pos(C, x, n)[src], f))
                plan.append((ch, self.level(x, ch), items))
            self._levels[key] = plan
        return plan

    def violations(self, u, first=True):
        """Compatibility failures of ``u`` as ``(n, k, chain, vertex)``."""
        bad = []
        self.check_shape(u)
        r = self.A.r_mor
        for n in range(1, u.top + 1):
            lower = u.body[n - 1]
            for (ch, G, items), val in zip(self.compat_plan(u.x, u.m, n), u.body[n]):
                for k, sub, low, st, f in items:
                    want = lower[st]
                    if f is not None:
                        want = tuple([r(f, g) for g in want])
                    want = reindex(G, want, low)
                    got = reindex(G, val, sub)
                    if got != want:
                        t = next(t for t in range(len(sub)) if got[t] != want[t])
                        bad.append((n, k, ch, vshape(u.m, n)[sub[t]]))
                        if first:
                            return bad
        return bad

    def check_shape(self, u):
        if len(u.body) != u.top + 1:
            raise ValueError(f"body has {len(u.body)} levels, expected {u.top + 1}")
        for n, level in enumerate(u.body):
            if len(level) != len(self.chains(u.x, n + 1)):
                raise ValueError(f"body at n={n} misses chains")
            if any(len(v) != len(vshape(u.m, n)) for v in level):
                raise ValueError(f"body at n={n} misses vertices")

    # -- structure -------------------------------------------------------------------------

    def eta(self, x, cell, top, m=None):
        """``η a``: ``(η a)(i)(f) = a[f]`` for a nerve cell ``a`` of ``A(x)``."""
        m = len(cell).bit_length() - 1 if m is None else m
        body = []
        for n in range(top + 1):
            proj = positions(vertices(m), vshape(m, n), lambda w: w[:m])
            G = None
            row = []
            for ch in self.chains(x, n + 1):
                G = self.level(x, ch)
                a = self.restrict_arrows(self.C.compose_chain(ch), cell)
                row.append(reindex(G, a, proj))
            body.append(tuple(row))
        return DElement(x, m, top, tuple(body))

    def G(self, u):
        """``G u = u(1)(id_X)``, a nerve cell at level ``m``."""
        return u.body[0][chain_pos(self.C, u.x, 1)[(self.C.identity[u.x],)]]

    def restrict_cube(self, u, vmap, m2):
        """Reindex the cube part along ``vmap : {0,1}^m2 -> {0,1}^m``."""
        m = u.m
        body = []
        for n, level in enumerate(u.body):
            pos = positions(vshape(m, n), vshape(m2, n), lambda w: vmap(w[:m2]) + w[m2:])
            body.append(tuple(reindex(self.level(u.x, ch), val, pos)
                              for ch, val in zip(self.chains(u.x, n + 1), level)))
        return DElement(u.x, m2, u.top, tuple(body))

    def act(self, u, l):
        """Cube action along ``l : I^m2 -> I^m``."""
        return self.restrict_cube(u, lambda w: apply_to_vertex(l, w), l.m)

    def restrict_base(self, u, h):
        """``u h`` for ``h : Y -> X``: ``(u h)(f0, ...) = u(h f0, ...)``."""
        C = self.C
        y = C.dom(h)
        body = []
        for n, level in enumerate(u.body):
            pos = chain_pos(C, u.x, n + 1)
            body.append(tuple(level[pos[(C.compose(h, ch[0]),) + ch[1:]]]
                              for ch in self.chains(y, n + 1)))
        return DElement(y, u.m, u.top, tuple(body))

    def degenerate(self, u):
        """``u`` pulled back along the projection ``I^(m+1) -> I^m``."""
        m = u.m
        return self.restrict_cube(u, lambda w: w[:m], m + 1)


def glue(G, size, pieces):
    """Every functor from the chaotic groupoid on ``size`` vertices extending ``pieces``.

    ``pieces`` are ``(positions, arrows)`` pairs, each a functor on the listed
    vertices (based at the first one).  Vertices joined through pieces are forced;
    every other component is attached to vertex 0 by a free choice of arrow.
    The result is memoised per groupoid and must not be mutated.
    """
    memo = G.__dict__.setdefault("_glue_memo", {})
    key = (size, tuple((tuple(pos), tuple(arr)) for pos, arr in pieces))
    out = memo.get(key)
    if out is None:
        out = memo[key] = tuple(_glue(G, size, pieces))
    return out


def _glue(G, size, pieces):
    rel, root = {}, {}
    by_vertex = {}
    for pc in pieces:
        for i, t in enumerate(pc[0]):
            by_vertex.setdefault(t, []).append((i, pc))
    used = set()
    compose, inv = G.compose, G.inv
    for start in sorted(by_vertex):
        if start in rel:
            continue
        i0, (_, arr0) = by_vertex[start][0]
        rel[start] = G.identity[G.cod(arr0[i0])]
        root[start] = start
        stack = [start]
        while stack:
            v = stack.pop()
            for i, pc in by_vertex[v]:
                if id(pc) in used:
                    continue
                used.add(id(pc))
                pos, arr = pc
                back = inv(arr[i])
                for w, a in zip(pos, arr):
                    g = compose(compose(a, back), rel[v])
                    if w in rel:
                        if rel[w] != g:
                            return []
                    else:
                        rel[w], root[w] = g, start
                        stack.append(w)
    if 0 in rel:
        starts = [G.identity[G.cod(rel[0])]]
    else:
        starts = [G.identity[c] for c in G.objects]
    out = []
    for g0 in starts:
        c0 = G.cod(g0)
        roots = sorted({root[t] for t in rel} - ({root[0]} if 0 in rel else set()))
        free = [t for t in range(1, size) if t not in rel]
        opts = [G.hom(c0, G.cod(rel[r])) for r in roots]
        opts += [[f for f, (d, _) in G.morphisms.items() if d == c0] for _ in free]
        for pick in product(*opts):
            attach = dict(zip(roots, pick))
            g = [None] * size
            for t in range(size):
                if t in rel:
                    r = root[t]
                    g[t] = rel[t] if r == root.get(0) else G.compose(rel[t], attach[r])
                else:
                    g[t] = g0 if t == 0 else pick[len(roots) + free.index(t)]
            if 0 in rel:
                back = G.inv(g[0])
                g = [G.compose(a, back) for a in g]
            out.append(tuple(g))
    return out


@lru_cache(maxsize=None)
def _face_plan(m, n, k):
    """Positions of the face ``i_k = 0`` in ``vshape(m, n)`` and of ``s_k`` of it below."""
    verts = vshape(m, n)
    sub = tuple(t for t, v in enumerate(verts) if v[m + k] == 0)
    low = positions(vshape(m, n - 1), [verts[t] for t in sub], lambda w: w[:m + k] + w[m + k + 1:])
    return sub, low


def validate_delement(A, u, engine=None):
    """Report of the compatibility conditions; the first failure names ``(n, k, chain, vertex)``."""
    eng = engine or DEngine(A)
    rep = Report()
    rep.tick("compatibility", sum(len(eng.chains(u.x, n + 1)) * (n + 1) for n in range(1, u.top + 1)))
    for n, k, ch, v in eng.violations(u):
        rep.add("compatibility", (n, k, ch, v), "E^k(α) condition on i_k = 0")
    return rep


# -- enumeration ---------------------------------------------------------------------------

def _cube_face_pieces(eng, x, m, n, ch, cube_faces):
    out = []
    for j, eps, w in cube_faces:
        verts = vshape(m, n)
        sub = tuple(t for t, v in enumerate(verts) if v[j] == eps)
        out.append((sub, w.body[n][chain_pos(eng.C, x, n + 1)[ch]]))
    return out


def enumerate_delements(A, x, top=2, m=0, cube_faces=(), budget=None, engine=None, first=False):
    """All elements of ``D A(x)`` at cube level ``m``, truncated at ``n <= top``.

    ``cube_faces`` fixes faces ``w_j = eps`` of the cube part to given elements of
    level ``m - 1`` (used to find edges between two vertices).  Chains of the next
    level are tested for extendability as soon as the values they read are chosen.
    """
    eng = engine or DEngine(A)
    C = eng.C
    budget = as_budget(budget, f"enumerating descent elements at {x}")
    results = []

    def options(n, lower, ch):
        pieces = _cube_face_pieces(eng, x, m, n, ch, cube_faces)
        if n:
            pieces += [(sub, want) for _, sub, want in eng.face_pieces(lower, x, m, n, ch)]
        return glue(eng.level(x, ch), len(vshape(m, n)), pieces)

    # ready[n][t]: chains of length n+2 whose sources are all among the first t+1 of length n+1
    ready = []
    for n in range(top):
        pos = chain_pos(C, x, n + 1)
        buckets = [[] for _ in eng.chains(x, n + 1)]
        for ch in eng.chains(x, n + 2):
            last = max(pos[alpha_source(C, ch, k)[0]] for k in range(n + 2))
            buckets[last].append(ch)
        ready.append(buckets)

    def feasible(n, row, ch):
        lower = list(row) + [None] * (len(eng.chains(x, n + 1)) - len(row))
        return bool(options(n + 1, lower, ch))

    def go(n, body):
        if n > top:
            results.append(DElement(x, m, top, tuple(body)))
            return first
        lower = body[-1] if body else None
        chs = eng.chains(x, n + 1)
        row = []

        def pick(t):
            if t == len(chs):
                return go(n + 1, body + [tuple(row)])
            for val in options(n, lower, chs[t]):
                budget.step()
                row.append(val)
                if n == top or all(feasible(n, row, ch) for ch in ready[n][t]):
                    if pick(t + 1):
                        return True
                row.pop()
            return False

        return pick(0)

    go(0, [])
    return results


def edges(A, u, v, engine=None, first=False):
    """Level-1 elements with ends ``u`` (at 0) and ``v`` (at 1); ``first`` stops at one."""
    if (u.x, u.m, u.top) != (v.x, v.m, v.top) or u.m:
        raise ValueError("edges join two vertex elements of the same shape")
    return enumerate_delements(A, u.x, u.top, 1, [(0, 0, u), (0, 1, v)], engine=engine, first=first)


def section_element(A, x, datum, top=2, engine=None):
    """A vertex element realising a groupoid descent datum.

    At ``n = 1`` the free vertex ``(1,1)`` copies ``(1,0)``; higher free vertices take
    the first completion.  Raises ``ValueError`` if ``datum`` is not a cocycle.
    """
    from .descent import DescentShape
    eng = engine or DEngine(A)
    C = eng.C
    shape = DescentShape(C, x)
    body = [tuple((A.level[C.dom(f)].identity[datum.u[shape.pos[f]]],) for (f,) in eng.chains(x, 1))]
    for n in range(1, top + 1):
        row = []
        for ch in eng.chains(x, n + 1):
            G = eng.level(x, ch)
            pieces = [(sub, want) for _, sub, want in eng.face_pieces(body[-1], x, 0, n, ch)]
            if n == 1:
                phi = datum.phi[shape.ppos[ch]]
                # vertices (0,1), (1,0), (1,1) in that order
                pieces.append(((0, 1, 2), (G.identity[G.dom(phi)], phi, phi)))
            opts = glue(G, len(vshape(0, n)), pieces)
            if not opts:
                raise ValueError(f"datum is not a cocycle at {ch}")
            row.append(opts[0])
        body.append(tuple(row))
    return DElement(x, 0, top, tuple(body))


def to_descent_datum(A, u, engine=None):
    """``(u(f) objects, φ[f, g])`` read off a vertex element with ``top >= 1``.

    ``φ[f, g]`` is the arrow from the vertex ``(0,1)`` (holding ``u(f∘g)``) to
    ``(1,0)`` (holding ``g*(u(f))``).
    """
    from .descent import DescentDatum, DescentShape
    eng = engine or DEngine(A)
    C = eng.C
    shape = DescentShape(C, u.x)
    pos1 = chain_pos(C, u.x, 1)
    pos2 = chain_pos(C, u.x, 2)
    objs = tuple(A.level[C.dom(f)].cod(u.body[0][pos1[(f,)]][0]) for f in shape.index)
    phi = []
    for f, g in shape.pairs:
        G = A.level[C.dom(g)]
        phi.append(arrow_between(G, u.body[1][pos2[(f, g)]], 0, 1))
    return DescentDatum(objs, tuple(phi))


def edge_morphism(A, e, engine=None):
    """The family ``m_f`` carried by an edge element at ``n = 0``."""
    eng = engine or DEngine(A)
    C = eng.C
    from .descent import DescentShape
    shape = DescentShape(C, e.x)
    pos1 = chain_pos(C, e.x, 1)
    return tuple(arrow_between(A.level[C.dom(f)], e.body[0][pos1[(f,)]], 0, 1) for f in shape.index)


def completions(A, prefix, engine=None):
    """Per-chain options for the next level ``n = prefix.top + 1`` (empty row: none)."""
    eng = engine or DEngine(A)
    x, m, n = prefix.x, prefix.m, prefix.top + 1
    return [glue(eng.level(x, ch), len(vshape(m, n)),
                 [(sub, want) for _, sub, want in eng.face_pieces(prefix.body[-1], x, m, n, ch)])
            for ch in eng.chains(x, n + 1)]


@dataclass
class CrossReport:
    """Vertex elements modulo edges against iso classes of groupoid descent data."""

    x: str
    elements: int
    prefixes: int
    classes: int
    iso_classes: int
    ok: bool
    problems: list


def cross_engine(A, x, top=2, exhaustive_limit=20000, engine=None):
    """Compare ``D A(x)`` at cube level 0 with ``descent_groupoid(A, x)``.

    Checked: every vertex element reads off to a descent datum ``F u`` and is joined
    by an edge to the section ``s(F u)``; sections ``s d`` and ``s e`` are joined iff
    ``d ≅ e``; every iso class is hit.  Since edges compose, this makes the edge
    classes correspond to iso classes.  Elements sharing their data below ``top``
    differ only in free top vertices; each such prefix is represented by its first
    completion unless the element count is at most ``exhaustive_limit``.
    """
    from .descent import descent_groupoid
    eng = engine or DEngine(A)
    DG = descent_groupoid(A, x)
    objs = list(DG.objects)
    iso = {d: frozenset(e for e in objs if DG.hom(d, e)) for d in objs}
    sections = {d: section_element(A, x, d, top, eng) for d in objs}
    problems = []
    for d in objs:
        if to_descent_datum(A, sections[d], eng) != d or eng.violations(sections[d]):
            problems.append(("section fails", d))
        linked = frozenset(e for e in objs if edges(A, sections[d], sections[e], eng, first=True))
        if linked != iso[d]:
            problems.append(("section edges disagree with isomorphism", d))
    reps, total = [], 0
    for p in enumerate_delements(A, x, top - 1, engine=eng):
        rows = completions(A, p, eng)
        count = 1
        for r in rows:
            count *= len(r)
        if count:
            total += count
            reps.append((p, rows))
    exhaustive = total <= exhaustive_limit
    seen = set()
    for p, rows in reps:
        members = ([DElement(x, 0, top, p.body + (row,)) for row in product(*rows)]
                   if exhaustive else [DElement(x, 0, top, p.body + (tuple(r[0] for r in rows),))])
        for u in members:
            d = to_descent_datum(A, u, eng)
            if d not in DG.identity:
                problems.append(("not a descent datum", u))
            elif not edges(A, u, sections[d], eng, first=True):
                problems.append(("no edge to the section", d))
            else:
                seen.add(iso[d])
    classes = set(iso.values())
    if seen != classes:
        problems.append(("iso classes missed", len(classes - seen)))
    return CrossReport(x, total, len(reps), len(seen), len(classes), not problems, problems)


# -- full expansion oracle -----------------------------------------------------------------

def expansion_violations(A, u, N=2, engine=None):
    """Compatibility checked cell by cell on every ``P_n`` cell up to cube level ``N``."""
    eng = engine or DEngine(A)
    if u.m:
        raise ValueError("the expansion oracle handles cube level 0")
    bad = []
    for n in range(1, u.top + 1):
        for q in range(N + 1):
            for e in pweight_cells(n, q):
                for k in range(n + 1):
                    if not e[k].is_zero():
                        continue
                    got = _expand_at(eng, u, n, e, q)
                    low = _expand_at(eng, u, n - 1, s_k(e, k), q)
                    for ch, val in zip(eng.chains(u.x, n + 1), got):
                        src, f = alpha_source(eng.C, ch, k)
                        want = low[chain_pos(eng.C, u.x, n)[src]]
                        if f is not None:
                            want = eng.restrict_arrows(f, want)
                        if val != want:
                            bad.append((n, k, e, ch))
    return bad


def _expand_at(eng, u, n, e, q):
    """``u(e)`` for a ``P_n`` cell ``e`` at cube level ``q``: nerve ``q``-cells per chain."""
    pos = positions(vshape(0, n), vertices(q), lambda w: tuple(int(c.evaluate(w)) for c in e))
    return tuple(reindex(eng.level(u.x, ch), val, pos)
                 for ch, val in zip(eng.chains(u.x, n + 1), u.body[n]))


# -- key1: η is pointwise an equivalence ---------------------------------------------------

def _lift_body(eng, u, m2, fn, prefix=None, tag=None):
    """Body at cube level ``m2`` and truncation ``u.top - 1`` read from ``u.body[n+1]``.

    ``fn(w)`` maps a vertex of ``vshape(m2, n)`` to one of ``vshape(u.m, n+1)``; the
    chain read is ``prefix + f`` (``prefix`` defaults to ``(id_X,)``).
    """
    C = eng.C
    prefix = (C.identity[u.x],) if prefix is None else prefix
    body = []
    for n in range(u.top):
        pos = positions(vshape(u.m, n + 1), vshape(m2, n), fn, eng._levels,
                        tag and ("lift", tag, u.m, m2, n))
        cp = chain_pos(C, u.x, n + 2)
        body.append(tuple(reindex(eng.level(u.x, ch), u.body[n + 1][cp[prefix + ch]], pos)
                          for ch in eng.chains(u.x, n + 1)))
    return DElement(u.x, m2, u.top - 1, tuple(body))


def face(eng, u, eps):
    """The end ``k = eps`` of a homotopy (its last cube coordinate)."""
    return eng.restrict_cube(u, lambda w: w + (eps,), u.m - 1)


@dataclass
class Key1Data:
    G: tuple
    tilde: DElement
    u_k: DElement
    v_k: DElement
    report: Report


def key1_data(A, u, engine=None):
    """``G u``, ``ũ`` and the homotopies ``u_k`` (from ``η(G u)`` to ``ũ``) and ``v_k``
    (from ``u`` to ``ũ``), with every endpoint and compatibility equation checked."""
    eng = engine or DEngine(A)
    if eng.violations(u):
        raise ValueError("input is not a descent element")
    if u.top < 1:
        raise ValueError("key1 needs truncation at least 1")
    m = u.m
    Gu = eng.G(u)
    tilde = _lift_body(eng, u, m, lambda w: w[:m] + (1,) + w[m:], tag="tilde")
    u_k = _lift_body(eng, u, m + 1, lambda w: w[:m] + (1,) + tuple(w[m] & b for b in w[m + 1:]),
                     tag="u_k")
    v_k = _lift_body(eng, u, m + 1, lambda w: w, tag="v_k")
    rep = Report()
    low = u.truncate(u.top - 1)
    eta_Gu = eng.eta(u.x, Gu, u.top - 1, m)
    checks = [
        ("G∘η = id", eng.G(eng.eta(u.x, Gu, u.top, m)) == Gu),
        ("u_k at k=0 is η(G u)", face(eng, u_k, 0) == eta_Gu),
        ("u_k at k=1 is ũ", face(eng, u_k, 1) == tilde),
        ("v_k at k=0 is u", face(eng, v_k, 0) == low),
        ("v_k at k=1 is ũ", face(eng, v_k, 1) == tilde),
    ]
    for name, ok in checks:
        rep.tick("endpoint")
        if not ok:
            rep.add(name, (u.x,))
    for name, w in (("ũ", tilde), ("u_k", u_k), ("v_k", v_k)):
        rep.tick("compatibility")
        bad = eng.violations(w)
        if bad:
            rep.add(f"{name} compatibility", bad[0])
    return Key1Data(Gu, tilde, u_k, v_k, rep)


def is_constant_homotopy(eng, h):
    return h == eng.degenerate(face(eng, h, 0))


# -- key2: η_(D A) and D η_A are joined ----------------------------------------------------

@dataclass(frozen=True)
class D2Element:
    """``body[(n, p)][t]``: vertex functor on ``vshape2(m, n, p)`` at the ``t``-th chain
    of length ``n + p + 2``; defined for ``n + p + 1 <= top``."""

    x: str
    m: int
    top: int
    body: tuple  # sorted ((n, p), row) pairs

    def row(self, n, p):
        return dict(self.body)[(n, p)]


def d2_keys(top):
    return [(n, p) for n in range(top) for p in range(top - n)]


def _d2_from(eng, u, m2, fn_for, chain_for=lambda ch, n, p: (ch, None), tag=None):
    """Build a ``D²`` family from ``u``: for ``(n, p)``, ``fn_for(n, p)`` returns
    ``(source level, vertex map)``; ``chain_for`` picks the source chain and an
    optional arrow to restrict along."""
    C = eng.C
    body = []
    for n, p in d2_keys(u.top):
        src_n, fn = fn_for(n, p)
        pos = positions(vshape(u.m, src_n), vshape2(m2, n, p), fn, eng._levels,
                        tag and ("d2", tag, u.m, m2, n, p))
        row = []
        for ch in eng.chains(u.x, n + p + 2):
            sch, f = chain_for(ch, n, p)
            val = u.body[src_n][chain_pos(C, u.x, len(sch))[sch]]
            if f is not None:
                val = eng.restrict_arrows(f, val)
            row.append(reindex(eng.level(u.x, ch), val, pos))
        body.append(((n, p), tuple(row)))
    return D2Element(u.x, m2, u.top, tuple(body))


def _d2_plan(eng, x, m, n, p):
    key = ("d2", x, m, n, p)
    plan = eng._levels.get(key)
    if plan is None:
        C = eng.C
        verts = vshape2(m, n, p)
        conds = [(1, k, m + k, k, (n - 1, p)) for k in range(n + 1) if n]
        conds += [(2, l, m + n + 1 + l, n + 1 + l, (n, p - 1)) for l in range(p + 1) if p]
        plan = []
        for cond, idx, coord, slot, lower_key in conds:
            sub = tuple(t for t, w in enumerate(verts) if w[coord] == 0)
            low = positions(vshape2(m, *lower_key), [verts[t] for t in sub],
                            lambda w: w[:coord] + w[coord + 1:])
            per_chain = []
            for ch in eng.chains(x, n + p + 2):
                src, f = alpha_source(C, ch, slot)
                per_chain.append((ch, eng.level(x, ch), chain_pos(C, x, len(src))[src], f))
            plan.append((cond, idx, lower_key, sub, low, per_chain))
        eng._levels[key] = plan
    return plan


def d2_violations(eng, v):
    """Both families of ``D²`` conditions; witnesses ``(condition, n, p, index, chain, vertex)``."""
    rows = dict(v.body)
    r = eng.A.r_mor
    bad = []
    for (n, p), row in v.body:
        for cond, idx, lower_key, sub, low, per_chain in _d2_plan(eng, v.x, v.m, n, p):
            lower = rows[lower_key]
            for (ch, G, st, f), val in zip(per_chain, row):
                want = lower[st]
                if f is not None:
                    want = tuple([r(f, g) for g in want])
                want = reindex(G, want, low)
                got = reindex(G, val, sub)
                if got != want:
                    t = next(t for t in range(len(sub)) if got[t] != want[t])
                    bad.append((cond, n, p, idx, ch, vshape2(v.m, n, p)[sub[t]]))
                    break
    return bad


def d2_face(eng, v, eps):
    m = v.m - 1
    body = []
    for (n, p), row in v.body:
        pos = positions(vshape2(v.m, n, p), vshape2(m, n, p), lambda w: w[:m] + (eps,) + w[m:],
                        eng._levels, ("d2face", v.m, n, p, eps))
        body.append(((n, p), tuple(reindex(eng.level(v.x, ch), val, pos)
                                   for ch, val in zip(eng.chains(v.x, n + p + 2), row))))
    return D2Element(v.x, m, v.top, tuple(body))


@dataclass
class Key2Data:
    tilde: D2Element
    eta_D: D2Element
    D_eta: D2Element
    v_k: D2Element
    w_k: D2Element
    report: Report


def key2_data(A, u, engine=None):
    """``ũ(i)(j) = u(i, j)`` with ``v_k`` from the ``η_(D A)`` pattern and ``w_k`` from
    the ``D η_A`` pattern to it; every endpoint and ``D²`` condition is checked."""
    eng = engine or DEngine(A)
    if u.top < 1:
        raise ValueError("key2 needs truncation at least 1 to form the grid")
    if eng.violations(u):
        raise ValueError("input is not a descent element")
    C, m = eng.C, u.m
    def grid(fn):
        return lambda n, p: (n + p + 1, fn(n, p))

    tilde = _d2_from(eng, u, m, grid(lambda n, p: lambda w: w), tag="tilde")
    zero_i = _d2_from(eng, u, m, grid(lambda n, p: lambda w: w[:m] + (0,) * (n + 1) + w[m + n + 1:]),
                      tag="zero_i")
    zero_j = _d2_from(eng, u, m, grid(lambda n, p: lambda w: w[:m + n + 1] + (0,) * (p + 1)),
                      tag="zero_j")
    # α^(n+1) u(j) merges f0..f(n+1); E^(n+1)(α^(p+1)) u(i) restricts along f(n+1)..f(n+p+1)
    eta_D = _d2_from(eng, u, m, lambda n, p: (p, lambda w: w[:m] + w[m + n + 1:]),
                     lambda ch, n, p: ((C.compose_chain(ch[:n + 2]),) + ch[n + 2:], None),
                     tag="eta_D")
    D_eta = _d2_from(eng, u, m, lambda n, p: (n, lambda w: w[:m + n + 1]),
                     lambda ch, n, p: (ch[:n + 1], C.compose_chain(ch[n + 1:])), tag="D_eta")

    def meet_i(n, p):  # (ρ, k, i, j) -> (ρ, k∧i, j)
        return lambda w: w[:m] + tuple(w[m] & b for b in w[m + 1:m + n + 2]) + w[m + n + 2:]

    def meet_j(n, p):  # (ρ, k, i, j) -> (ρ, i, k∧j)
        return lambda w: w[:m] + w[m + 1:m + n + 2] + tuple(w[m] & b for b in w[m + n + 2:])

    v_k = _d2_from(eng, u, m + 1, grid(meet_i), tag="v_k")
    w_k = _d2_from(eng, u, m + 1, grid(meet_j), tag="w_k")
    rep = Report()
    checks = [
        ("η_(D A) u = u(0, j)", eta_D == zero_i),
        ("(D η_A) u = u(i, 0)", D_eta == zero_j),
        ("v_k at k=0 is η_(D A) u", d2_face(eng, v_k, 0) == eta_D),
        ("v_k at k=1 is ũ", d2_face(eng, v_k, 1) == tilde),
        ("w_k at k=0 is (D η_A) u", d2_face(eng, w_k, 0) == D_eta),
        ("w_k at k=1 is ũ", d2_face(eng, w_k, 1) == tilde),
    ]
    for name, ok in checks:
        rep.tick("endpoint")
        if not ok:
            rep.add(name, (u.x,))
    for name, w in (("ũ", tilde), ("η_(D A) u", eta_D), ("(D η_A) u", D_eta),
                    ("v_k", v_k), ("w_k", w_k)):
        rep.tick("D² conditions")
        bad = d2_violations(eng, w)
        if bad:
            rep.add(f"{name} D² condition {bad[0][0]}", bad[0])
    return Key2Data(tilde, eta_D, D_eta, v_k, w_k, rep)


def plant_defect(eng, v, n, p, cond=2):
    """Perturb ``v`` on a vertex lying in a face that condition ``cond`` constrains."""
    m = v.m
    verts = vshape2(m, n, p)
    rows = dict(v.body)
    coords = range(m + n + 1, m + n + p + 2) if cond == 2 else range(m, m + n + 1)
    for t, ch in enumerate(eng.chains(v.x, n + p + 2)):
        G = eng.level(v.x, ch)
        val = list(rows[(n, p)][t])
        for s, w in enumerate(verts):
            if s == 0 or all(w[c] for c in coords):
                continue
            c0 = G.cod(val[0])
            alts = [f for f, (d, _) in G.morphisms.items() if d == c0 and f != val[s]]
            if alts:
                val[s] = alts[0]
                new = rows[(n, p)][:t] + (tuple(val),) + rows[(n, p)][t + 1:]
                body = tuple(((k, new if k == (n, p) else r)) for k, r in v.body)
                return D2Element(v.x, v.m, v.top, body)
    return None
