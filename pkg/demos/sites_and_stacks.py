# %% [markdown]
# Stacks on small sites, compared with the classical amalgamation test for
# presheaves of sets.

# %%
from descentlab.descent import check_stack, set_sheaf_oracle
from descentlab.registry import build_countable_choice_site, builtin_sites, discrete_zoo

# %%
site = builtin_sites()["poset-bot-01-cover"]
for A in discrete_zoo(site.cat):
    rep = check_stack(A, site)
    print(f"{A.name:28s} stack {rep.verdict!s:5s} sheaf oracle {set_sheaf_oracle(A, site)}")

# %% [markdown]
# The countable-choice site: a finite lattice covered by L_n -> X_n and
# X_(n+1) -> X_n.

# %%
cc = build_countable_choice_site(3)
print(len(cc.cat.objects), "lattice elements")
for s in cc.generators:
    print(f"cover of {s.apex}: {sorted(s.members)}")
