# %% [markdown]
# Lex operations on finite presheaves of sets: the law suite, the derived
# unit, and the modality condition that separates D from exponentials.

# %%
from descentlab.cat import FinCat
from descentlab.lexlaws import (ExpInstance, Planted, Universe, derived_eta,
                                modality_condition_check, run_law_suite)

# %%
U = Universe.generate(FinCat.terminal(), 3)
print(len(U.carriers), "carriers,", len(U.maps), "maps,", len(U.families), "families")

for R in (["r"], ["r", "s"]):
    inst = ExpInstance(R)
    rep = run_law_suite(inst, U)
    cert = derived_eta(inst, U, rep)
    mod = modality_condition_check(inst, U)
    print(f"{inst.name}: laws {rep.ok}, η derived {cert.ok}, modality condition {mod.ok}")

# %% [markdown]
# A planted defect is caught with a witness.

# %%
rep = run_law_suite(Planted(ExpInstance(["r", "s"]), "pair-swap"), U)
v = rep.violations[0]
print(v.law, "->", v.witness)
