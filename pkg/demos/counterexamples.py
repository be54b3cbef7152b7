# %% [markdown]
# Three presheaves of groupoids that are contractible at every object yet
# have no global point, so their unit into descent data cannot be split.

# %%
from descentlab.descent import check_modal, descent_groupoid
from descentlab.groupoid import global_points, is_contractible, pointwise_contractible
from descentlab.registry import get_example

# %%
for name in ("z2-swap", "walking-idempotent", "poset-bot-01"):
    A = get_example(name).build()
    print(f"== {name}")
    print("  contractible at each object:", pointwise_contractible(A)[0])
    print("  strict global points:", len(global_points(A)))
    for x in A.base.objects:
        G = descent_groupoid(A, x)
        print(f"  descent data at {x}: {len(G.objects)} objects, contractible {is_contractible(G)[0]}")
    rep = check_modal(A)
    print("  modal:", rep.label)

# %% [markdown]
# The descent groupoids are contractible, so every object of descent data is
# reachable, but η has no natural strict left inverse that would turn it
# into an equivalence.
