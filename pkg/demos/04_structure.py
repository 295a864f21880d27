# %% [markdown]
# # Structural audit
#
# Thresholds, small cycles, tree-regular vertices and the exploration tree.

# %%
from localmajority import (
    RandomnessTape, check_typicality, count_tree_regular, degree_profile, find_small_cycles,
    gen_regular, t_build, thresholds,
)

g = gen_regular(5000, 5, RandomnessTape(2))
t = thresholds(g.n, 5, 5.0)
print(f"omega={t.omega:.3f} ({t.omega_hops} hops)  h={t.h:.3f}  A={t.A:.3f}")

# %%
cycles = find_small_cycles(g, t.omega_hops)
print(len(cycles), "cycles with at most", 2 * t.omega_hops + 1, "vertices")

# %% [markdown]
# At desk scale random regular graphs carry many short cycles, so (a) and (b) usually fail.
# The report keeps witnesses that can be re-checked one by one.

# %%
rep = check_typicality(g, t, degree_profile(g))
print(rep.verdicts)
print(rep.witnesses["b"][:1])

# %%
count, _ = count_tree_regular(g, 5, t.h_hops, t.omega_hops, t.ell)
print(f"{count} tree-regular vertices ({count / g.n:.2f} n)")

# %%
tree = t_build(g, 0, depth=3, d=5, tape=RandomnessTape(9))
print(len(tree.vertices), "explored vertices,", tree.cycle_count, "revisits,", tree.parent_returns, "of them parents")
