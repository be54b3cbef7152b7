"""Filling for ``D A`` built from a pointwise filling of ``A``.

A filler at cube level ``q`` (filling direction: the last cube coordinate ``j``)
is built by induction on ``n``.  At a chain, the vertices of ``I^q × P_n`` that
are already known are those in the extent ``psi ∨ (j = 0)`` and those on a face
``i_k = 0``, where ``E^k(α)`` of the filler one level down dictates the value.
Each face ``i_l = 1`` of ``P_n`` is a cube of dimension ``q + n``, and it is
filled with the pointwise filling operation on that cube, for the extent
``psi ∨ (∨_(k≠l) i_k = 0)`` in direction ``j``.  Faces meet in smaller cubes
and uniformity of the pointwise filling makes them agree there.

Partial elements are stored like :class:`~descentlab.cubdescent.DElement`
bodies, restricted to the vertices whose cube part lies in the extent.
"""

import random
from dataclasses import dataclass
from functools import lru_cache

from .cubdescent import (DElement, DEngine, chain_end, chain_pos, glue, positions, reindex, vshape)
from .cubical import (Partial, all_maps, apply_to_vertex, lift_map, nerve_presheaf, open_box,
                      vertex_map, vertices)
from .kan import nerve_fill_cell, nerve_filling
from .lattice import FaceCofib, enumerate_cofibs
from .report import Report, as_budget


@lru_cache(maxsize=None)
def ext_vertices(q, ext, n):
    """Vertices of ``I^q × P_n`` whose cube part satisfies ``ext``."""
    return tuple(v for v in vshape(q, n) if ext.holds_on(vertex_map(q, v[:q])))


@lru_cache(maxsize=None)
def _ext_face_plan(q, ext, n, k):
    verts = ext_vertices(q, ext, n)
    sub = tuple(t for t, v in enumerate(verts) if v[q + k] == 0)
    low = positions(ext_vertices(q, ext, n - 1), [verts[t] for t in sub],
                    lambda w: w[:q + k] + w[q + k + 1:])
    return sub, low


@dataclass(frozen=True)
class DPartial:
    """A partial element of ``D A``: ``body[n][t]`` lives on ``ext_vertices(m, ext, n)``."""

    x: str
    m: int
    top: int
    ext: FaceCofib
    body: tuple


def restrict_to_extent(u, ext):
    """The partial element of a total element ``u`` on ``ext``."""
    body = []
    for n, level in enumerate(u.body):
        pos = positions(vshape(u.m, n), ext_vertices(u.m, ext, n), lambda w: w)
        body.append(tuple(reindex_plain(val, pos) for val in level))
    return DPartial(u.x, u.m, u.top, ext, tuple(body))


def reindex_plain(arrows, pos):
    return tuple(arrows[p] for p in pos)


def _normalise(eng, x, part):
    """Rebase every vertex functor at its first vertex."""
    body = []
    for n, level in enumerate(part.body):
        body.append(tuple(reindex(eng.level(x, ch), val, range(len(val)))
                          for ch, val in zip(eng.chains(x, n + 1), level)))
    return DPartial(part.x, part.m, part.top, part.ext, tuple(body))


def partial_restrict_cube(eng, part, l, ext2):
    """Restriction along ``l : I^(l.m) -> I^m``; ``ext2`` is the pulled back extent."""
    body = []
    for n, level in enumerate(part.body):
        pos = positions(ext_vertices(part.m, part.ext, n), ext_vertices(l.m, ext2, n),
                        lambda w: apply_to_vertex(l, w[:l.m]) + w[l.m:])
        body.append(tuple(reindex(eng.level(part.x, ch), val, pos)
                          for ch, val in zip(eng.chains(part.x, n + 1), level)))
    return DPartial(part.x, l.m, part.top, ext2, tuple(body))


def partial_restrict_base(eng, part, h):
    C = eng.C
    y = C.dom(h)
    body = []
    for n, level in enumerate(part.body):
        pos = chain_pos(C, part.x, n + 1)
        body.append(tuple(level[pos[(C.compose(h, ch[0]),) + ch[1:]]]
                          for ch in eng.chains(y, n + 1)))
    return DPartial(y, part.m, part.top, part.ext, tuple(body))


# -- the filling -----------------------------------------------------------------------------

class DFilling:
    """``D``-filling from the pointwise filling ``c`` of the levelwise nerve ``NP``."""

    def __init__(self, c, A, NP, top=1, engine=None):
        self.c, self.A, self.NP, self.top = c, A, NP, top
        self.eng = engine or DEngine(A)
        self._memo, self._cmemo = {}, {}

    def __call__(self, x, q, psi, part):
        """Fill ``part`` (on ``psi ∨ (j = 0)`` at cube level ``q``) to a ``DElement``."""
        key = (x, q, psi, part)
        out = self._memo.get(key)
        if out is None:
            out = self._memo[key] = self._fill(x, q, psi, part)
        return out

    def _fill(self, x, q, psi, part):
        eng = self.eng
        if part.ext != open_box(psi, q - 1):
            raise ValueError("partial element is not on the open box of psi")
        if q + part.top > self.NP.N:
            raise ValueError(f"nerve truncated at {self.NP.N}, filling needs level {q + part.top}")
        body = []
        for n in range(part.top + 1):
            row = []
            for t, ch in enumerate(eng.chains(x, n + 1)):
                row.append(self._fill_chain(x, q, psi, part, n, t, ch, body))
            body.append(tuple(row))
        return DElement(x, q, part.top, tuple(body))

    def _known(self, x, q, part, n, t, ch, body):
        """Arrows from the base at every vertex in the extent or on a face ``i_k = 0``."""
        eng = self.eng
        G = eng.level(x, ch)
        verts = vshape(q, n)
        ext_pos = positions(verts, ext_vertices(q, part.ext, n), lambda w: w)
        pieces = [(ext_pos, part.body[n][t])]
        if n:
            pieces += [(sub, want) for _, sub, want in eng.face_pieces(body[n - 1], x, q, n, ch)]
        det = sorted({p for pos, _ in pieces for p in pos})
        remap = {p: s for s, p in enumerate(det)}
        opts = glue(G, len(det), [(tuple(remap[p] for p in pos), arr) for pos, arr in pieces])
        if len(opts) != 1:
            raise ValueError(f"known vertices at {ch} do not determine a frame ({len(opts)} options)")
        return {verts[p]: a for p, a in zip(det, opts[0])}

    def _fill_chain(self, x, q, psi, part, n, t, ch, body):
        eng = self.eng
        G = eng.level(x, ch)
        y = chain_end(eng.C, x, ch)
        S = self.NP.obj[y]
        known = self._known(x, q, part, n, t, ch, body)
        out = dict(known)
        dim = q + n
        for l in range(n + 1):
            psi2, ext, faces, fulls = _face_fill_plan(q, n, l, psi)
            cells = []
            for d, vs in faces:
                back = G.inv(known[vs[0]])
                cells.append(S.index[d][tuple([G.compose(known[v], back) for v in vs])])
            ckey = (y, dim, psi2, tuple(cells))
            cell = self._cmemo.get(ckey)
            if cell is None:
                cell = self._cmemo[ckey] = self.c(y, dim - 1, psi2, Partial(dim, ext, cells))
            base = known[fulls[0]]
            for v, a in zip(fulls, S.cells[dim][cell]):
                g = G.compose(a, base)
                if out.setdefault(v, g) != g:
                    raise ValueError(f"face fillers disagree at {ch}, vertex {v}")
        return tuple(out[v] for v in vshape(q, n))


@lru_cache(maxsize=None)
def _face_fill_plan(q, n, l, psi):
    """The face ``i_l = 1`` as a cube: its extent, the vertices of each extent face
    and of the whole cube, written as vertices of ``I^q × P_n``."""
    dim = q + n

    def full(w):
        i = list(w[q - 1:q - 1 + n])
        i.insert(l, 1)
        return tuple(w[:q - 1]) + (w[-1],) + tuple(i)

    psi2 = psi.substitute(_embed(q - 1, dim - 1))
    for s in range(n):
        psi2 = psi2 | FaceCofib.atom(q - 1 + s, 0)
    ext = open_box(psi2, dim - 1)
    faces = tuple((inc.m, tuple(full(apply_to_vertex(inc, w)) for w in vertices(inc.m)))
                  for inc in Partial(dim, ext, ()).shape.incl)
    return psi2, ext, faces, tuple(full(w) for w in vertices(dim))


@lru_cache(maxsize=None)
def _embed(k, n):
    """The inclusion ``I^n -> I^k`` reading the first ``k`` coordinates."""
    from .lattice import CubeMap, DLExpr
    return CubeMap(n, [DLExpr.gen(i) for i in range(k)])


def d_fill_lift(c, A, top=1, N=2, engine=None):
    """The ``D A`` filling from a pointwise filling factory ``c`` (``c(NP)`` gives the op).

    ``c`` may also be a ready filling operation on a nerve of level at least ``N + top``.
    """
    if callable(c) and not hasattr(c, "P"):
        NP = nerve_presheaf(A, N + top)
        op = c(NP)
    else:
        op, NP = c, c.P
    return DFilling(op, A, NP, top, engine)


# -- inputs ----------------------------------------------------------------------------------

def _partial_options(eng, x, q, ext, n, lower, ch):
    pieces = []
    if n:
        G = eng.level(x, ch)
        for k in range(n + 1):
            sub, low = _ext_face_plan(q, ext, n, k)
            pieces.append((sub, reindex(G, eng.lower_value(x, lower, ch, k), low)))
    return glue(eng.level(x, ch), len(ext_vertices(q, ext, n)), pieces)


def enumerate_dpartials(eng, x, top, q, ext, budget=None):
    """Every partial element of ``D A(x)`` on ``ext`` at cube level ``q``."""
    budget = as_budget(budget, f"enumerating partial descent elements at {x}")
    out = []

    def go(n, body):
        if n > top:
            out.append(DPartial(x, q, top, ext, tuple(body)))
            return
        chs = eng.chains(x, n + 1)
        lower = body[-1] if body else None
        row = []

        def pick(t):
            if t == len(chs):
                go(n + 1, body + [tuple(row)])
                return
            for val in _partial_options(eng, x, q, ext, n, lower, chs[t]):
                budget.step()
                row.append(val)
                pick(t + 1)
                row.pop()

        pick(0)

    go(0, [])
    return out


def random_dpartials(eng, x, top, q, ext, count, seed=0, tries=100):
    """Up to ``count`` distinct random partial elements (restarting on dead ends)."""
    rng = random.Random(seed)
    seen = {}
    for _ in range(count * tries):
        if len(seen) >= count:
            break
        body = []
        for n in range(top + 1):
            row = []
            for ch in eng.chains(x, n + 1):
                opts = _partial_options(eng, x, q, ext, n, body[-1] if body else None, ch)
                if not opts:
                    break
                row.append(rng.choice(opts))
            else:
                body.append(tuple(row))
                continue
            break
        if len(body) == top + 1:
            p = DPartial(x, q, top, ext, tuple(body))
            seen.setdefault(p, None)
    return list(seen)


# -- harness ---------------------------------------------------------------------------------

def run_d_harness(A, top=1, N=2, max_inputs=None, seed=0, objects=None, fill=None):
    """Fill every partial element (or a random sample of ``max_inputs`` per extent).

    Checks: the filler is a descent element, it agrees with the data on the
    extent, it is uniform along cube maps and natural along the base, and a box
    of ``η``-images is filled by the ``η``-image of the pointwise filler.
    """
    F = fill or d_fill_lift(nerve_filling, A, top, N)
    eng = F.eng
    C = eng.C
    rep = Report()
    rep.sampled = False
    for x in objects or C.objects:
        for q in range(1, N + 1):
            for psi in enumerate_cofibs(q - 1):
                ext = open_box(psi, q - 1)
                if max_inputs is None:
                    parts = enumerate_dpartials(eng, x, top, q, ext)
                else:
                    parts = random_dpartials(eng, x, top, q, ext, max_inputs, seed)
                    rep.sampled = True
                moves = []
                for m2 in range(q):
                    for l in all_maps(m2, q - 1):
                        psi_l = psi.substitute(l)
                        moves.append((lift_map(l), psi_l, open_box(psi_l, m2)))
                for part in parts:
                    v = F(x, q, psi, part)
                    rep.tick("inputs")
                    rep.tick("descent element")
                    bad = eng.violations(v)
                    if bad:
                        rep.add("filler is a descent element", (x, q, psi.show(), bad[0]))
                    rep.tick("agreement")
                    if _normalise(eng, x, restrict_to_extent(v, ext)) != _normalise(eng, x, part):
                        rep.add("agreement on the extent", (x, q, psi.show()))
                    for lp, psi_l, ext_l in moves:
                        rep.tick("uniformity")
                        rhs = F(x, lp.m, psi_l, partial_restrict_cube(eng, part, lp, ext_l))
                        if eng.act(v, lp) != rhs:
                            rep.add("uniformity in the cube category", (x, q, psi.show(), lp))
                    for h in C.into(x):
                        rep.tick("naturality")
                        rhs = F(C.dom(h), q, psi, partial_restrict_base(eng, part, h))
                        if eng.restrict_base(v, h) != rhs:
                            rep.add("naturality in the base", (x, q, psi.show(), h))
                _eta_boxes(F, rep, x, q, psi, ext)
    return rep


def _eta_boxes(F, rep, x, q, psi, ext):
    eng, S = F.eng, F.NP.obj[x]
    for a in range(S.count(q)):
        cell = S.cells[q][a]
        box = restrict_to_extent(eng.eta(x, cell, F.top, q), ext)
        sh = Partial(q, ext, ()).shape
        pa = Partial(q, ext, [S.act(q, a, inc) for inc in sh.incl])
        want = eng.eta(x, S.cells[q][F.c(x, q - 1, psi, pa)], F.top, q)
        rep.tick("η boxes")
        if F(x, q, psi, box) != want:
            rep.add("η box filled by η of the pointwise filler", (x, q, psi.show(), cell))
