# %% [markdown]
# # Campaigns and sweeps
#
# A campaign is fixed by its config; its CSV is plot-ready.

# %%
from localmajority import ExperimentConfig, run_campaign, sweep_alpha
from localmajority.harness import report_csv

cfg = ExperimentConfig(family="regular", n_values=(500, 2000), d=5, k=5, alphas=(0.05,), seeds=tuple(range(5)))
report = run_campaign(cfg)
print(report_csv(report))
for row in report.aggregates:
    print(row)

# %% [markdown]
# Sweeping alpha past the analytical threshold.

# %%
sweep = ExperimentConfig(family="regular", n_values=(300,), d=5, alphas=(0.05, 0.2, 0.35, 0.45), seeds=tuple(range(20)))
curve = sweep_alpha(sweep)
print("alpha_max =", round(curve.alpha_max, 4))
for a, f, r in curve.rows():
    print(f"alpha={a:<5} correct={f:.2f} over {r} runs")
