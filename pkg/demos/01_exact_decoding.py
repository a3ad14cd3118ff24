# %% [markdown]
# Exact decoding with an error locator
#
# Seven samples of z = x + y, one of them wrong.  Over the rationals the
# decoder finds q and a monic e with q(x_i, y_i) = z_i e(x_i) at every sample,
# and q / e is the answer.

# %%
from fractions import Fraction

from byzfit import QQ, PrimeField, DataSet, NoiseAlphabet, MultiPoly
from byzfit.mvwb import MVProblem, mv_wb_decode, required_sample_size
from byzfit.wb import noise_enumerate_fit

triples = [(1, 1, 2), (2, 2, 4), (6, 1, 7), (4, 3, 7), (8, 2, 0), (9, 1, 10), (3, 7, 10)]
points = [((QQ(x), QQ(y)), QQ(z)) for x, y, z in triples]
print("samples needed for d=1, t=1:", required_sample_size(1, 2, 1))

res = mv_wb_decode(MVProblem(points, vars=2, degree=1, t=1, field=QQ))
print("q =", res.q)
print("e =", res.error_locator)
print("p =", res.poly, " flagged rows:", res.flagged)

# %% [markdown]
# e vanishes at x = 8, the first coordinate of the bad row, and q is exactly p * e.

# %%
assert res.q == res.poly * res.error_locator

# %% [markdown]
# Bounded noise on top of corruption: every sample may be off by -1, 0 or +1
# and one sample is arbitrary.  Enumerating the noise on a 6-point subset and
# checking each candidate against all 11 samples recovers 2x over GF(11).

# %%
F = PrimeField(11)
noise = [0, 1, -1, 0, 1, 0, -1, 1, 0, 0, -1]
z = [F(2 * x + noise[x]) for x in range(11)]
z[5] = z[5] + F(6)
S = DataSet([[x] for x in range(11)], z, F)
rep = noise_enumerate_fit(S, Fraction(10, 11), 1, NoiseAlphabet.symmetric(1, F), subset_size=6)
print(rep.model, "flagged", rep.flagged, "after", rep.counters["wb_calls"], "decodes")
