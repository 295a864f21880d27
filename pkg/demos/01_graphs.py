# %% [markdown]
# # Graph families
#
# Sample the three families, read their degree profile and look at a local ball.

# %%
import numpy as np

from localmajority import GenSpec, ball, degree_profile, generate, is_tree_like

reg = generate(GenSpec("regular", seed=1, n=5000, d=5))
gnp = generate(GenSpec("gnp", seed=1, n=5000, p=3 * np.log(5000) / 5000))
seq = generate(GenSpec("degree-sequence", seed=1, degrees=(3,) * 60 + (4,) * 40))
for name, g in [("regular", reg), ("gnp", gnp), ("degree sequence", seq)]:
    print(f"{name:16s} n={g.n} m={g.m} degrees {g.degrees.min()}..{g.degrees.max()}")

# %% [markdown]
# The profile reports the effective minimum degree and the measured degree conditions.
# G(n, p) at this density spreads its degrees too thin for any class to hold a quarter
# of the vertices, so the profile refuses it; the mixed sequence has a clear class.

# %%
try:
    degree_profile(gnp)
except ValueError as exc:
    print("gnp:", exc)
prof = degree_profile(seq)
print("effective degree", prof.effective_degree, "average", prof.average_degree)
for key, (measured, threshold, ok) in prof.conditions.items():
    print(f"  ({key}) measured={measured:.3g} threshold={threshold:.3g} holds={ok}")

# %% [markdown]
# A radius-2 ball holds 26 vertices whether or not it is a tree; an edge between two
# boundary vertices is enough to spoil it.

# %%
b = ball(reg, 0, 2)
print(len(b), "vertices, tree-like:", is_tree_like(b, 5, 2))
share = np.mean([is_tree_like(ball(reg, v, 2), 5, 2) for v in range(500)])
print(f"tree-like share over the first 500 vertices: {share:.2f}")
