# %% [markdown]
# Chebyshev fitting by linear programming, then Byzantine filtering
#
# A random degree-4 truth, samples with +-0.05 uniform noise.  The LP finds the
# smallest band containing every sample while keeping the expansion bounded.

# %%
from byzfit.aggregate import Adversarial, Generator, UniformBand, generate
from byzfit.calibration import calibration_truth
from byzfit.lpfit import (FilterConfig, boundedness_audit, derivative_bound_audit, fit_lp, fit_robust,
                          sample_size, sup_error)

d, delta = 4, 0.05
f = calibration_truth(0, d, delta)
n = sample_size(d, delta)
S = generate(Generator(f, UniformBand(delta), seed=0), n)
model, inst = fit_lp(S, (d, d), None, d)
print(f"{n} samples, {inst.n_rows} LP rows: band {model.delta:.4f}, sup error {sup_error(model, f):.4f}")
print("boundedness:", boundedness_audit(model, inst.grid_per_axis))
print("derivative ratio:", round(derivative_bound_audit(model)["ratio"], 3))

# %% [markdown]
# Now 20% of the readings are adversarial, each at least 3*delta off.  Readings
# come from sensor sites (10 readings within a tiny square), so the filter's
# squares hold enough points to take a median.

# %%
h = delta / d**3
S = generate(Generator(f, UniformBand(delta), 0.2, Adversarial(3 * delta), seed=0, layout="clustered",
                       cluster_size=10, cluster_spread=h / 2), 2000)
rep = fit_robust(S, FilterConfig(d, delta, 0.8, target_count=n), truth=f)
print("kept", rep.extra["filtered_size"], "of", len(S), "points;", rep.extra["kept_corrupt"], "corrupt kept")
print(f"sup error {rep.sup_vs_truth:.4f} = {rep.sup_vs_truth / delta:.2f} delta")

# %% [markdown]
# Without the filter the corrupt values drag the band wide open.

# %%
raw = fit_robust(S, FilterConfig(d, delta), filter=False, truth=f)
print(f"unfiltered band {raw.delta_achieved:.3f}, sup error {raw.sup_vs_truth:.3f}")
