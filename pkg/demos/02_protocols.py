# %% [markdown]
# # Running MP and MMP
#
# Every random choice comes from a keyed tape, so a run is a pure function of its seed.

# %%
from localmajority import MMP, MP, RandomnessTape, ball, coupled_run, gen_regular, is_tree_like, mmp_scope, run

g = gen_regular(10_000, 5, RandomnessTape(3))
r = run(g, MP(5), 0.05, RandomnessTape(11))
print("consensus", r.consensus_colour, "at round", r.consensus_time)
print("red counts", r.red_counts)

# %%
again = run(g, MP(5), 0.05, RandomnessTape(11))
assert again.red_counts == r.red_counts

# %% [markdown]
# MMP inside a tree ball treats the sampled parent as red.  Coupled on one
# tape it is never bluer than MP.

# %%
root = next(v for v in range(g.n) if is_tree_like(ball(g, v, 2), 5, 2))
scope = mmp_scope(g, root, 2)
c = coupled_run(g, 5, scope, RandomnessTape(4), T=10, alpha=0.2)
print("dominated:", c.dominated)
print("MMP run:", run(g, MMP(5, scope), 0.05, RandomnessTape(11)).consensus_colour)
