# %% [markdown]
# Local fits merged up a tree
#
# Four cells each fit their own data; sibling models are resampled on Halton
# points and refit over the union of their cells until one model remains.

# %%
from byzfit.aggregate import FitterConfig, Generator, MergePlan, Partition, UniformBand, aggregate, generate
from byzfit.expr import parse_poly
from byzfit.fields import RR

truth = parse_poly("1/2*x - 1/4*x*y + 1/4*y^2", 2, RR)
S = generate(Generator(truth, UniformBand(0.05), seed=3), 1200)
part = Partition.regular(4, [(-1.0, 1.0), (-1.0, 1.0)])
plan = MergePlan.balanced(4, 200, FitterConfig("lp", {"d": 2, "delta": 0.05, "filter": False}))
summary, root = aggregate(S, part, plan, jobs=4, truth=truth)

for c in summary["cells"]:
    print("cell", c["cell"], "sup error", round(c["sup_vs_truth"], 4))
for rec in summary["drift"]:
    print("level", rec["level"], "child", rec["child"], "drift", f"{rec['sup']:.2e}")
print("root sup error", round(summary["sup_vs_truth"], 4))
