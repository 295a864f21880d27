# %% [markdown]
# # Analytical bounds
#
# The bias condition, the red-probability recursion and its closed-form bound.

# %%
from localmajority import check_condition, complete_graph_chain, recursion_trace, tree_population

c = check_condition(0.05, 5, 0.9)
print(f"lhs={c.lhs:.3f} satisfied={c.satisfied} alpha_max={c.alpha_max:.4f}")

# %%
tr = recursion_trace(0.05, 2, 8)
for t, p, b, ok in tr.rows():
    print(f"t={t}  p={p:.3e}  bound={b:.3e}  dominated={ok}")

# %% [markdown]
# On the complete graph the red count is an exact Markov chain.

# %%
chain = complete_graph_chain(25, 5, 0.3)
print("Pr(blue wins) =", round(chain.blue_probability, 6), " mean time =", round(chain.mean_time, 3))

# %%
print("a planted red 5-ary tree of depth 3 holds", tree_population(5, 3), "vertices")
