"""Validation reports shared by every checker in the package."""

from dataclasses import dataclass, field


@dataclass
class Violation:
    law: str
    witness: tuple = ()
    detail: str = ""

    def __str__(self):
        text = f"{self.law}: {self.witness!r}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass
class Report:
    """Outcome of a validator.  Truthy iff no violation was recorded."""

    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, law, witness=(), detail=""):
        self.violations.append(Violation(law, tuple(witness), detail))

    def tick(self, key, n=1):
        self.counts[key] = self.counts.get(key, 0) + n

    def laws(self):
        return [v.law for v in self.violations]

    def as_dict(self):
        return {
            "ok": self.ok,
            "violations": [
                {"law": v.law, "witness": [str(w) for w in v.witness], "detail": v.detail}
                for v in self.violations
            ],
            "counts": dict(self.counts),
        }


class BudgetExhausted(Exception):
    """An exhaustive search ran out of its step budget before finishing."""

    def __init__(self, what, budget, sizes=None):
        self.what = what
        self.budget = budget
        self.sizes = sizes or {}
        super().__init__(f"budget of {budget} steps exhausted while {what} (sizes: {self.sizes})")


class Budget:
    """Step counter handed down to exhaustive searches."""

    def __init__(self, limit=10**6, what="searching"):
        self.limit = limit
        self.used = 0
        self.what = what

    def step(self, n=1):
        self.used += n
        if self.used > self.limit:
            raise BudgetExhausted(self.what, self.limit)


def as_budget(budget, what="searching"):
    if budget is None:
        return Budget(what=what)
    if isinstance(budget, Budget):
        return budget
    return Budget(int(budget), what)
