"""A line-oriented text format for categories, groupoid presheaves and sites.

::

    name z2-swap
    [objects]
    pt
    [morphisms]
    id : pt            # identity of pt
    t : pt -> pt
    [compose]
    t t = id           # g f = g∘f; composites with identities are filled in
    [groupoid pt]
    chaotic a b        # or explicit: objects / m : a -> b / id_a : a / compose / inverse
    [restrict t]
    a -> b
    b -> a
    [site]
    cover pt : id t    # generating covering sieves; "trivial" for the trivial topology

Restrictions along identities may be omitted, and so may the morphism part of
a restriction when the groupoids have at most one arrow between two objects.
"""

import re
from dataclasses import dataclass

from .cat import CategoryError, FinCat, Sieve, generate_topology, trivial_topology, validate_category
from .cat import validate_site
from .groupoid import FinGroupoid, GpdFunctor, GpdPresheaf, validate_groupoid, validate_presheaf

IDENT = re.compile(r"[^\s:=#\[\]]+$")
SECTIONS = ("objects", "morphisms", "compose", "groupoid", "restrict", "site")


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None, path=None):
        self.msg, self.line, self.col, self.path = msg, line, col, path
        where = f"{path or '<input>'}:{line}:{col}: " if line is not None else ""
        super().__init__(where + msg)


class ValidationError(ValueError):
    def __init__(self, what, report):
        self.report = report
        v = report.violations[0]
        super().__init__(f"{what} is invalid: {v}")


@dataclass
class Model:
    """What a file defines; ``presheaf`` and ``site`` may be absent."""

    cat: FinCat
    presheaf: GpdPresheaf = None
    site: object = None
    name: str = None


class _Tok(str):
    def __new__(cls, text, line, col):
        s = super().__new__(cls, text)
        s.line, s.col = line, col
        return s


def _tokens(line, lineno):
    body = line.split("#", 1)[0]
    return [_Tok(m.group(), lineno, m.start() + 1) for m in re.finditer(r"\S+", body)]


class _Parser:
    def __init__(self, text, path=None):
        self.path = path
        self.blocks = []  # (kind, arg token, header token, [lines])
        self.name = None
        self._split(text)

    def err(self, msg, tok=None):
        if tok is None:
            raise ParseError(msg, path=self.path)
        raise ParseError(msg, tok.line, tok.col, self.path)

    def ident(self, tok):
        if not IDENT.match(tok) or tok == "->":
            self.err(f"bad identifier {tok!r}", tok)
        return str(tok)

    def _split(self, text):
        current = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            toks = _tokens(raw, lineno)
            if not toks:
                continue
            head = toks[0]
            if head.startswith("["):
                inner = " ".join(toks)
                m = re.match(r"\[(\w+)(?:\s+(\S+))?\]$", inner)
                if not m or m.group(1) not in SECTIONS:
                    self.err(f"unknown section header {inner!r}", head)
                kind, arg = m.group(1), m.group(2)
                if kind in ("groupoid", "restrict") and arg is None:
                    self.err(f"[{kind}] needs a name", head)
                if kind not in ("groupoid", "restrict") and arg is not None:
                    self.err(f"[{kind}] takes no argument", head)
                argtok = _Tok(arg, lineno, head.col + len(kind) + 2) if arg else None
                current = (kind, argtok, head, [])
                self.blocks.append(current)
            elif current is None:
                if head == "name" and len(toks) == 2:
                    self.name = str(toks[1])
                else:
                    self.err("text before the first section", head)
            else:
                current[3].append(toks)

    def sections(self, kind):
        return [b for b in self.blocks if b[0] == kind]

    # -- category -------------------------------------------------------------------
    def category(self):
        objs = {}
        for _, _, _, lines in self.sections("objects"):
            for toks in lines:
                for t in toks:
                    if self.ident(t) in objs:
                        self.err(f"object {t} declared twice", t)
                    objs[str(t)] = t
        if not self.sections("objects"):
            self.err("missing [objects] section")
        mors, ident = {}, {}
        for _, _, _, lines in self.sections("morphisms"):
            for toks in lines:
                f, d, c = self._arrow(toks, objs)
                if f in mors:
                    self.err(f"morphism {f} declared twice", toks[0])
                mors[f] = (d, c)
                if c is None:
                    if d in ident:
                        self.err(f"object {d} has two identities", toks[0])
                    ident[d] = f
                    mors[f] = (d, d)
        for x, t in objs.items():
            if x not in ident:
                if f"id_{x}" in mors:
                    self.err(f"no identity declared for {x}", t)
                ident[x] = f"id_{x}"
                mors[ident[x]] = (x, x)
        comp = self._compose(self.sections("compose"), mors, ident)
        cat = FinCat(list(objs), mors, ident, comp, name=self.name)
        rep = validate_category(cat)
        if not rep.ok:
            raise ValidationError("category", rep)
        return cat

    def _arrow(self, toks, objs):
        """``f : a -> b`` or the identity form ``f : a``."""
        if len(toks) == 3 and toks[1] == ":":
            d = self._ref(toks[2], objs, "object")
            return self.ident(toks[0]), d, None
        if len(toks) != 5 or toks[1] != ":" or toks[3] != "->":
            self.err("expected 'name : source -> target' or 'name : object'", toks[0])
        return (self.ident(toks[0]), self._ref(toks[2], objs, "object"),
                self._ref(toks[4], objs, "object"))

    def _ref(self, tok, known, what):
        if str(tok) not in known:
            self.err(f"unknown {what} {tok!r}", tok)
        return str(tok)

    def _compose(self, blocks, mors, ident, keyword=False):
        comp = {}
        for block in blocks:
            for toks in block[3]:
                if keyword:
                    toks = toks[1:]
                if len(toks) != 4 or toks[2] != "=":
                    self.err("expected 'g f = h'", toks[0])
                g, f, h = (self._ref(t, mors, "morphism") for t in (toks[0], toks[1], toks[3]))
                if mors[f][1] != mors[g][0]:
                    self.err(f"{g} and {f} are not composable", toks[0])
                comp[(g, f)] = h
        ids = set(ident.values())
        for f, (d, c) in mors.items():
            comp.setdefault((ident[c], f), f)
            comp.setdefault((f, ident[d]), f)
        for i in ids:
            comp[(i, i)] = i
        return comp

    # -- groupoids -------------------------------------------------------------------
    def groupoid(self, block):
        _, arg, head, lines = block
        short = [t for t in lines if t[0] in ("chaotic", "discrete")]
        if short:
            if len(short) != len(lines):
                self.err("shorthand and explicit groupoid lines cannot be mixed", head)
            comps = []
            for toks in short:
                names = [self.ident(t) for t in toks[1:]]
                comps.extend([names] if toks[0] == "chaotic" else [[n] for n in names])
            flat = [n for c in comps for n in c]
            if len(set(flat)) != len(flat):
                self.err("an object appears twice in the groupoid", head)
            return FinGroupoid.from_components(comps)
        objs, mors, ident, inv = {}, {}, {}, {}
        comp_lines, inv_lines = [], []
        for toks in lines:
            if toks[0] == "objects":
                for t in toks[1:]:
                    objs[self.ident(t)] = t
            elif toks[0] == "compose":
                comp_lines.append(toks)
            elif toks[0] == "inverse":
                inv_lines.append(toks)
            else:
                f, d, c = self._arrow(toks, objs)
                mors[f] = (d, d) if c is None else (d, c)
                if c is None:
                    ident[d] = f
        for x, t in objs.items():
            if x not in ident:
                self.err(f"no identity declared for {x}", t)
        comp = self._compose([(None, None, None, comp_lines)], mors, ident, keyword=True)
        for toks in inv_lines:
            if len(toks) != 4 or toks[2] != "=":
                self.err("expected 'inverse f = g'", toks[0])
            f, g = self._ref(toks[1], mors, "morphism"), self._ref(toks[3], mors, "morphism")
            inv[f], inv[g] = g, f
        for i in ident.values():
            inv[i] = i
        G = FinGroupoid(list(objs), mors, ident, comp, inv, name=str(arg))
        rep = validate_groupoid(G)
        if not rep.ok:
            raise ValidationError(f"groupoid {arg}", rep)
        return G

    def restriction(self, block, cat, level):
        _, arg, head, lines = block
        f = self._ref(arg, cat.morphisms, "morphism")
        src, tgt = level[cat.cod(f)], level[cat.dom(f)]
        obj, mor = {}, {}
        for toks in lines:
            if len(toks) != 3 or toks[1] != "->":
                self.err("expected 'a -> b'", toks[0])
            a, b = toks[0], toks[2]
            if str(a) in src.objects:
                obj[str(a)] = self._ref(b, tgt.objects, "object")
            elif str(a) in src.morphisms:
                mor[str(a)] = self._ref(b, tgt.morphisms, "morphism")
            else:
                self.err(f"unknown object or morphism {a!r}", a)
        for a in src.objects:
            if a not in obj:
                self.err(f"restriction along {f} does not say where {a} goes", head)
        for m, (d, c) in src.morphisms.items():
            if m not in mor and src.is_identity(m):
                mor[m] = tgt.identity[obj[d]]
            elif m not in mor:
                cands = tgt.hom(obj[d], obj[c])
                if len(cands) != 1:
                    self.err(f"restriction along {f} must give the image of {m}", head)
                mor[m] = cands[0]
        return f, GpdFunctor(src, tgt, obj, mor)

    def model(self):
        cat = self.category()
        gblocks = self.sections("groupoid")
        presheaf = None
        if gblocks:
            level = {}
            for block in gblocks:
                x = self._ref(block[1], cat.objects, "object")
                if x in level:
                    self.err(f"groupoid {x} given twice", block[2])
                level[x] = self.groupoid(block)
            for x in cat.objects:
                if x not in level:
                    self.err(f"no [groupoid {x}] section")
            restrict = {}
            for block in self.sections("restrict"):
                f, F = self.restriction(block, cat, level)
                if f in restrict:
                    self.err(f"restriction along {f} given twice", block[2])
                restrict[f] = F
            for f in cat.morphisms:
                if f not in restrict:
                    if cat.is_identity(f):
                        restrict[f] = GpdFunctor.identity(level[cat.cod(f)])
                    else:
                        self.err(f"no [restrict {f}] section")
            presheaf = GpdPresheaf(cat, level, restrict, name=self.name)
            rep = validate_presheaf(presheaf)
            if not rep.ok:
                raise ValidationError("presheaf", rep)
        elif self.sections("restrict"):
            block = self.sections("restrict")[0]
            self.err("[restrict] without any [groupoid] section", block[2])
        site = None
        sblocks = self.sections("site")
        if sblocks:
            site = self.site(sblocks, cat)
        return Model(cat, presheaf, site, self.name)

    def site(self, blocks, cat):
        gens, trivial = [], False
        for block in blocks:
            for toks in block[3]:
                if toks[0] == "trivial" and len(toks) == 1:
                    trivial = True
                    continue
                if toks[0] != "cover" or len(toks) < 3 or toks[2] != ":":
                    self.err("expected 'cover X : f g ...' or 'trivial'", toks[0])
                x = self._ref(toks[1], cat.objects, "object")
                fs = [self._ref(t, cat.morphisms, "morphism") for t in toks[3:]]
                for t, f in zip(toks[3:], fs):
                    if cat.cod(f) != x:
                        self.err(f"{f} does not land in {x}", t)
                try:
                    gens.append(Sieve(x, fs))
                except CategoryError as e:
                    self.err(str(e), toks[0])
        if trivial and gens:
            self.err("a site is either trivial or given by covers", blocks[0][2])
        try:
            site = trivial_topology(cat) if trivial else generate_topology(cat, gens, name=self.name)
        except CategoryError as e:
            self.err(f"covers do not form sieves: {e}", blocks[0][2])
        rep = validate_site(site)
        if not rep.ok:
            raise ValidationError("site", rep)
        return site


def parse_text(text, path=None):
    return _Parser(text, path).model()


def parse_input(path):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), path=str(path))


# -- printing -------------------------------------------------------------------------

def _print_groupoid(G):
    blocks = []
    seen = set()
    for a in G.objects:
        if a in seen:
            continue
        block = [b for b in G.objects if G.hom(a, b)]
        seen.update(block)
        blocks.append(block)
    if FinGroupoid.from_components(blocks) == G:
        lines = []
        singles = [b[0] for b in blocks if len(b) == 1]
        for b in blocks:
            if len(b) > 1:
                lines.append("chaotic " + " ".join(b))
        if singles:
            lines.append("discrete " + " ".join(singles))
        return lines
    lines = ["objects " + " ".join(G.objects)]
    for f, (d, c) in G.morphisms.items():
        lines.append(f"{f} : {d}" if G.identity[d] == f else f"{f} : {d} -> {c}")
    for (g, f), h in sorted(G.comp.items()):
        if not (G.is_identity(g) or G.is_identity(f)):
            lines.append(f"compose {g} {f} = {h}")
    done = set()
    for f, g in sorted(G.inverse.items()):
        if f not in done and not G.is_identity(f):
            lines.append(f"inverse {f} = {g}")
            done.update((f, g))
    return lines


def print_model(cat, presheaf=None, site=None, name=None):
    out = []
    if name:
        out.append(f"name {name}")
    out += ["[objects]", " ".join(cat.objects), "[morphisms]"]
    for f, (d, c) in cat.morphisms.items():
        out.append(f"{f} : {d}" if cat.identity[d] == f else f"{f} : {d} -> {c}")
    comps = [(g, f, h) for (g, f), h in sorted(cat.comp.items())
             if not (cat.is_identity(g) or cat.is_identity(f))]
    if comps:
        out.append("[compose]")
        out += [f"{g} {f} = {h}" for g, f, h in comps]
    if presheaf is not None:
        for x in cat.objects:
            out.append(f"[groupoid {x}]")
            out += _print_groupoid(presheaf.level[x])
        for f in cat.morphisms:
            F = presheaf.restrict[f]
            if cat.is_identity(f) and F == GpdFunctor.identity(presheaf.level[cat.cod(f)]):
                continue
            out.append(f"[restrict {f}]")
            out += [f"{a} -> {b}" for a, b in F.obj.items()]
            out += [f"{m} -> {n}" for m, n in F.mor.items() if not F.source.is_identity(m)]
    if site is not None:
        out.append("[site]")
        covers = [(x, s) for x in cat.objects for s in site.sorted_covers(x)]
        if all(len(s) == len(cat.into(x)) for x, s in covers):
            out.append("trivial")
        for x, s in covers:
            if len(s) != len(cat.into(x)):
                out.append(f"cover {x} : " + " ".join(s.sorted_members(cat)))
    return "\n".join(out) + "\n"
