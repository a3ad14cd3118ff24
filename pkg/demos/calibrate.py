"""Re-measure the regression constants frozen in byzfit.calibration.

    python3 demos/calibrate.py [--seeds 40]

For each seed: an LP fit on clean uniform data of the sample_size(d, delta)
size, and a filtered fit on clustered data with 20% adversarial corruption.
Prints the largest sup-error ratio of each, the largest K the boundedness
audit needed and the largest derivative ratio.
"""

import argparse
import time

from byzfit.aggregate import Adversarial, Generator, UniformBand, generate
from byzfit.calibration import C_STAR, MEASURED, calibration_truth
from byzfit.lpfit import (FilterConfig, boundedness_audit, derivative_bound_audit, fit_lp, fit_robust,
                          sample_size, sup_error)

d, delta = 4, 0.05
h = delta / d**3

ap = argparse.ArgumentParser()
ap.add_argument("--seeds", type=int, default=40)
args = ap.parse_args()

clean, byz, K, D, kept = [], [], [], [], []
t0 = time.perf_counter()
for seed in range(args.seeds):
    f = calibration_truth(seed, d, delta)
    S = generate(Generator(f, UniformBand(delta), seed=seed), sample_size(d, delta))
    m, inst = fit_lp(S, (d, d), None, d)
    clean.append(sup_error(m, f) / delta)
    K.append(boundedness_audit(m, inst.grid_per_axis)["K_needed"])
    D.append(derivative_bound_audit(m)["ratio"])

    S = generate(Generator(f, UniformBand(delta), 0.2, Adversarial(3 * delta), seed=seed, layout="clustered",
                           cluster_size=10, cluster_spread=h / 2), 2000)
    rep = fit_robust(S, FilterConfig(d, delta, 0.8, target_count=sample_size(d, delta)), truth=f)
    byz.append(rep.sup_vs_truth / delta)
    kept.append(rep.extra["kept_corrupt"])
    K.append(boundedness_audit(rep.model, rep.config["grid_per_axis"])["K_needed"])
    D.append(derivative_bound_audit(rep.model)["ratio"])

print(f"{args.seeds} seeds in {time.perf_counter() - t0:.1f} s")
print(f"clean sup/delta max      {max(clean):.4f}")
print(f"byzantine sup/delta max  {max(byz):.4f}   corrupt points kept: {sum(kept)}")
print(f"K needed max             {max(K):.4f}")
print(f"derivative ratio max     {max(D):.4f}")
print(f"frozen: c* = {C_STAR[(d, 2)]}, previously measured {MEASURED}")
