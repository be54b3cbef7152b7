"""Command-line front end.

Exit status: 0 when every check passes, 1 when a check fails, 2 for usage
and parse errors, 3 when an exhaustive search runs out of budget.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field

from .cat import generated_sieve, maximal_sieve, trivial_topology, validate_site
from .cubdescent import DEngine, enumerate_delements, key1_data, key2_data
from .descent import check_modal, check_stack, descent_groupoid, eta_descent, sieve_descent
from .fileformat import ParseError, ValidationError, parse_input
from .groupoid import check_equivalence, global_points, is_contractible, pointwise_contractible
from .lattice import LatticeError, enumerate_cube_maps
from .registry import REGISTRY, get_example
from .report import Budget, BudgetExhausted

OK, FAIL, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class Result:
    command: str
    verdict: object = True  # True, False, or None when the budget ran out
    lines: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)

    def say(self, text):
        self.lines.append(text)

    def check(self, label, ok, witness=None):
        self.say(f"{'✓' if ok else '✗'} {label}")
        if not ok:
            self.verdict = False if self.verdict is not None else None
            if witness is not None:
                self.witnesses.append({"check": label, "witness": str(witness)})

    @property
    def status(self):
        return {True: OK, False: FAIL, None: BUDGET}[self.verdict]

    def as_json(self):
        return {"command": self.command, "verdict": self.verdict, "witnesses": self.witnesses,
                "counts": self.counts, "budget": self.budget}


def _load(path, want="presheaf"):
    model = parse_input(path)
    if want == "presheaf" and model.presheaf is None:
        raise UsageError(f"{path} defines no presheaf")
    if want == "site" and model.site is None:
        raise UsageError(f"{path} defines no [site]")
    return model


# -- commands ----------------------------------------------------------------------------

def cmd_validate(args):
    model = _load(args.file, want=None)
    res = Result("validate")
    res.say(f"category: {len(model.cat.objects)} objects, {len(model.cat.morphisms)} morphisms")
    if model.presheaf is not None:
        res.say("presheaf: " + ", ".join(f"{x}: {len(g.objects)} objects"
                                          for x, g in model.presheaf.level.items()))
    if model.site is not None:
        res.say(f"site: {sum(len(v) for v in model.site.covers.values())} covering sieves")
    res.check("all validators pass", True)
    return res


def cmd_descent(args):
    A = _load(args.file).presheaf
    C, x = A.base, args.object
    if x not in C.objects:
        raise UsageError(f"unknown object {x!r}")
    res = Result("descent")
    budget = Budget(args.budget, "building descent data")
    if args.sieve:
        fs = args.sieve.split(",")
        for f in fs:
            if f not in C.morphisms or C.cod(f) != x:
                raise UsageError(f"{f!r} is not a morphism into {x}")
        S = generated_sieve(C, x, fs)
        G = sieve_descent(A, x, S, budget)
    else:
        S = maximal_sieve(C, x)
        G = descent_groupoid(A, x, budget=budget)
    res.counts = {"descent objects": len(G.objects), "descent morphisms": len(G.morphisms),
                  "sieve size": len(S)}
    res.budget = {"limit": budget.limit, "used": budget.used}
    res.say(f"sieve {sorted(S.members)}: {len(G.objects)} descent data, "
            f"{len(G.morphisms)} morphisms")
    con, _ = is_contractible(G)
    res.say(f"descent groupoid contractible: {con}")
    ok, wit = check_equivalence(eta_descent(A, x, G))
    res.check(f"η into descent data at {x} is an equivalence", ok, wit)
    return res


def cmd_check_modal(args):
    A = _load(args.file).presheaf
    rep = check_modal(A, budget=args.budget)
    res = Result("check-modal")
    res.budget = {"limit": args.budget, "used": rep.budget_used}
    res.say(f"verdict: {rep.label}")
    if rep.verdict is None:
        res.verdict = None
        res.witnesses.append({"check": "modal", "witness": str(rep.counterevidence)})
    else:
        res.check("modal", rep.verdict, rep.counterevidence)
    return res


def cmd_check_stack(args):
    A = _load(args.file).presheaf
    site = _load(args.site, want="site").site
    if site.cat != A.base:
        raise UsageError("site and presheaf are over different categories")
    rep = check_stack(A, site, budget=args.budget)
    res = Result("check-stack")
    res.counts = {"covering sieves": len(rep.entries)}
    for e in rep.entries:
        res.check(f"η_S at {e['object']} for {e['sieve']}", e["equivalence"], e["witness"])
    return res


def cmd_laws(args):
    from .lexlaws import Planted, builtin_instances, derived_eta, iso_check, run_law_suite
    insts = builtin_instances()
    if args.instance not in insts:
        raise UsageError(f"unknown instance {args.instance!r}; choose from {sorted(insts)}")
    res = Result("laws")
    for inst, make in insts[args.instance]:
        U = make()
        rep = run_law_suite(inst, U)
        res.counts[inst.name] = dict(rep.counts)
        res.check(f"{inst.name}: lex-operation laws", rep.ok, rep.violations[:1])
        if not rep.ok:
            continue
        cert = derived_eta(inst, U, rep)
        res.check(f"{inst.name}: η = (D ε_a)⟨⟩ and unique", cert.ok, cert.report.violations[:1])
        bad = [(B.name, g) for B in U.families for g in B.over.globals()
               if not iso_check(inst, B, g).ok]
        res.check(f"{inst.name}: the fibre map over η a is a bijection", not bad, bad[:1])
        for kind in Planted.KINDS:
            if not Planted.visible(inst, U, kind):
                res.say(f"- {inst.name}: planted {kind} changes nothing here")
                continue
            P = Planted(inst, kind)
            prep = run_law_suite(P, U)
            caught = not prep.ok or not derived_eta(P, U, prep).ok
            res.check(f"{inst.name}: planted {kind} is detected", caught)
    return res


def cmd_cube_maps(args):
    res = Result("cube-maps")
    try:
        maps = enumerate_cube_maps(args.m, args.n, max_dim=args.max_dim)
    except LatticeError as e:
        raise UsageError(f"{e} (raise --max-dim)") from None
    res.counts = {"maps": len(maps)}
    res.say(f"maps I^{args.m} -> I^{args.n}: {len(maps)}")
    return res


def _key_command(args, which):
    A = _load(args.file).presheaf
    res = Result(which)
    eng = DEngine(A)
    budget = Budget(args.budget, f"enumerating descent elements for {which}")
    fn = key1_data if which == "key1" else key2_data
    total = 0
    for x in A.base.objects:
        us = enumerate_delements(A, x, 2, engine=eng, budget=budget)
        bad = []
        for u in us:
            rep = fn(A, u, eng).report
            if not rep.ok:
                bad.append((u.body[0], rep.violations[0]))
        total += len(us)
        res.check(f"{which} formulas at {x} on {len(us)} elements", not bad, bad[:1])
    res.counts = {"elements": total}
    res.budget = {"limit": budget.limit, "used": budget.used}
    return res


def example_verdicts(name, budget=10**6):
    """Freshly computed verdicts for the keys an example records."""
    ex = get_example(name)
    obj = ex.build()
    out = {}
    if ex.kind == "site":
        out["site valid"] = validate_site(obj).ok
        gens = getattr(obj, "generators", [])
        out["generators covered"] = all(s in obj.covers[s.apex] for s in gens)
        triv = trivial_topology(obj.cat)
        out["refines trivial"] = (all(triv.covers[x] <= obj.covers[x] for x in obj.cat.objects)
                                  and obj.covers != triv.covers)
        return ex, out
    if "splitting equivalence" in ex.expected:
        from .special import retract_equivalence
        out["splitting equivalence"] = retract_equivalence()[0]
    if "pointwise contractible" in ex.expected:
        out["pointwise contractible"] = pointwise_contractible(obj)[0]
    if "global points" in ex.expected:
        out["global points"] = len(global_points(obj))
    if "descent contractible" in ex.expected:
        out["descent contractible"] = all(
            is_contractible(descent_groupoid(obj, x, budget=budget))[0] for x in obj.base.objects)
    if "modal" in ex.expected:
        out["modal"] = check_modal(obj, budget=budget).verdict
    return ex, out


def cmd_example(args):
    try:
        ex, got = example_verdicts(args.name, args.budget)
    except KeyError:
        raise UsageError(f"unknown example {args.name!r}; see list-examples") from None
    res = Result("example")
    res.say(f"{ex.name}: {ex.note}" if ex.note else ex.name)
    res.counts = {k: v for k, v in got.items() if not isinstance(v, bool)}
    for key, want in ex.expected.items():
        have = got[key]
        if have is None:
            res.verdict = None
            res.say(f"? {key}: budget exhausted")
            continue
        shown = have if not isinstance(have, bool) else ("yes" if have else "no")
        res.check(f"{key}: {shown} (expected {want})", have == want, (key, have, want))
    return res


def cmd_list_examples(args):
    res = Result("list-examples")
    for name, ex in REGISTRY.items():
        res.say(f"{name:20s} {ex.kind:9s} {ex.note}")
    res.say(f"{'cc-site-<n>':20s} {'site':9s} countable-choice lattice truncated at n")
    return res


# -- entry point ----------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="descentlab", description=__doc__.splitlines()[0])
    p.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *args):
        q = sub.add_parser(name)
        q.set_defaults(fn=fn)
        q.add_argument("--json", metavar="PATH", default=argparse.SUPPRESS,
                       help="also write the report as JSON")
        for a in args:
            a(q)
        return q

    file_arg = lambda q: q.add_argument("file")
    budget_arg = lambda q: q.add_argument("--budget", type=int, default=10**6,
                                          help="enumeration steps before giving up")
    add("validate", cmd_validate, file_arg)
    q = add("descent", cmd_descent, file_arg, budget_arg)
    q.add_argument("--object", required=True)
    q.add_argument("--sieve", help="comma-separated generating morphisms")
    add("check-modal", cmd_check_modal, file_arg, budget_arg)
    q = add("check-stack", cmd_check_stack, file_arg, budget_arg)
    q.add_argument("--site", required=True)
    q = add("laws", cmd_laws)
    q.add_argument("instance")
    q = add("cube-maps", cmd_cube_maps)
    q.add_argument("m", type=int)
    q.add_argument("n", type=int)
    q.add_argument("--max-dim", type=int, default=2)
    add("key1", lambda a: _key_command(a, "key1"), file_arg, budget_arg)
    add("key2", lambda a: _key_command(a, "key2"), file_arg, budget_arg)
    q = add("example", cmd_example, budget_arg)
    q.add_argument("name")
    add("list-examples", cmd_list_examples)
    return p


def run_command(argv):
    """Parse ``argv`` and run it; returns ``(status, Result or None)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (USAGE if e.code else OK), None
    try:
        res = args.fn(args)
    except (ParseError, ValidationError, UsageError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE, None
    except BudgetExhausted as e:
        res = Result(args.command, verdict=None)
        res.say(f"budget exhausted: {e}")
        res.budget = {"limit": e.budget}
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(res.as_json(), fh, indent=2, default=str)
    return res.status, res


def main(argv=None):
    status, res = run_command(sys.argv[1:] if argv is None else argv)
    if res is not None:
        print("\n".join(res.lines))
    return status


if __name__ == "__main__":
    sys.exit(main())
