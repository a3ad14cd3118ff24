"""Welch-Berlekamp decoding over exact fields, and noise enumeration on top of it.

Throughout, ``rho_clean`` is the fraction of samples that are *not*
corrupted.  The corruption budget for a block of ``n`` samples is always
``t = ceil((1 - rho_clean) * n)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .dataset import DataSet
from .errors import BudgetExceeded, Exhausted, FitFailure, NoDegreeFits, NotDivisible, TooManyErrors
from .fields import Field, PrimeField
from .linsolve import solve
from .poly import MultiPoly, divide_by_univariate, evaluate, monomials
from .report import FitReport

DEFAULT_BUDGET = 10**7


def as_fraction(rho) -> Fraction:
    if isinstance(rho, float):
        rho = repr(rho)
    rho = Fraction(rho)
    if not 0 < rho <= 1:
        raise ValueError(f"rho_clean must lie in (0, 1], got {rho}")
    return rho


def corruption_budget(rho_clean, n: int) -> int:
    rho = as_fraction(rho_clean)
    return math.ceil((1 - rho) * n)


@dataclass(frozen=True)
class NoiseAlphabet:
    """Candidate per-sample noise values, tried in the listed order."""

    offsets: tuple
    delta: object

    def __post_init__(self):
        if not self.offsets:
            raise ValueError("noise alphabet is empty")
        if len(set(self.offsets)) != len(self.offsets):
            raise ValueError("noise alphabet has duplicates")
        if not any(v == 0 for v in self.offsets):
            raise ValueError("noise alphabet must contain 0")

    @classmethod
    def symmetric(cls, delta: int, field: Field) -> "NoiseAlphabet":
        """Field images of the integers -delta..delta, in increasing integer order."""
        delta = int(delta)
        if delta < 0:
            raise ValueError("delta must be >= 0")
        if isinstance(field, PrimeField) and 2 * delta + 1 > field.q:
            raise ValueError(f"2*delta+1 exceeds the field size {field.q}")
        return cls(tuple(field(v) for v in range(-delta, delta + 1)), field(delta))

    def within(self, y, value) -> bool:
        """Is ``y`` within the noise band around ``value``?"""
        diff = y - value
        if isinstance(diff, Fraction) or isinstance(diff, int):
            return abs(diff) <= self.delta
        return diff in self.offsets


@dataclass
class WBProblem:
    points: list
    degree_bound: int
    error_bound: int
    field: Field

    def __post_init__(self):
        if not self.field.exact:
            raise ValueError("Welch-Berlekamp needs an exact field")
        self.points = [(self.field.check(x), self.field.check(y)) for x, y in self.points]
        xs = [x for x, _ in self.points]
        if len(set(xs)) != len(xs):
            raise ValueError("x coordinates must be distinct")
        if self.degree_bound < 0 or self.error_bound < 0:
            raise ValueError("degree and error bounds must be >= 0")
        need = 2 * self.error_bound + self.degree_bound + 1
        if len(self.points) < need:
            raise ValueError(f"need at least 2t+d+1 = {need} points, got {len(self.points)}")


@dataclass
class WBResult:
    poly: MultiPoly
    error_locator: MultiPoly
    q: MultiPoly
    flagged: tuple = field(default_factory=tuple)


def locator_system(xs, zs, vars: int, degree: int, t: int, axis: int, field: Field):
    """Rows of ``q(x_i) - z_i * e(x_i) = z_i * x_i[axis]**t`` with monic ``e`` of degree t.

    Columns: coefficients of ``q`` over all monomials of total degree <= degree+t
    (graded lex, highest first), then ``e_0 .. e_{t-1}``.
    """
    qmons = monomials(vars, degree + t)
    A, b = [], []
    for x, z in zip(xs, zs):
        row = []
        for exp in qmons:
            v = field.one
            for xi, e in zip(x, exp):
                if e:
                    v = v * xi ** e
            row.append(v)
        xa = x[axis]
        pw = field.one
        for _ in range(t):
            row.append(-z * pw)
            pw = pw * xa
        A.append(row)
        b.append(z * pw)
    return A, b, qmons


def assemble(solution, qmons, vars: int, t: int, axis: int, field: Field):
    nq = len(qmons)
    q = MultiPoly(dict(zip(qmons, solution[:nq])), vars, field)
    e = MultiPoly.univariate(list(solution[nq:nq + t]) + [field.one], axis, vars, field)
    return q, e


def decode_points(xs, zs, vars: int, degree: int, t: int, field: Field, axis: int = 0) -> WBResult:
    """Shared decoding core: solve for (q, e), divide, then check the Hamming distance."""
    A, b, qmons = locator_system(xs, zs, vars, degree, t, axis, field)
    sol = solve(A, b, field)
    q, e = assemble(sol, qmons, vars, t, axis, field)
    p, r = divide_by_univariate(q, e, axis)
    if not r.is_zero():
        raise NotDivisible(f"error locator {e} does not divide {q}", q=q, e=e)
    flagged = tuple(i for i, (x, z) in enumerate(zip(xs, zs)) if evaluate(p, x) != z)
    if len(flagged) > t:
        raise TooManyErrors(f"{len(flagged)} disagreements exceed t={t}", poly=p, flagged=flagged)
    return WBResult(p, e, q, flagged)


def wb_decode(prob: WBProblem) -> WBResult:
    """Univariate Welch-Berlekamp: the degree <= d polynomial within t errors of the points."""
    xs = [(x,) for x, _ in prob.points]
    zs = [y for _, y in prob.points]
    return decode_points(xs, zs, 1, prob.degree_bound, prob.error_bound, prob.field)


def minimal_subset(rho_clean, degree: int, n_available: int, required) -> tuple[int, int]:
    """Smallest s with s >= required(degree, t') where t' = ceil((1-rho)*s)."""
    for s in range(1, n_available + 1):
        t = corruption_budget(rho_clean, s)
        if s >= required(degree, t):
            return s, t
    raise ValueError(f"{n_available} samples are too few for degree {degree} at rho_clean={rho_clean}")


def choose_subset(n: int, s: int, select: str = "first", seed: int | None = None) -> list[int]:
    if select == "first":
        return list(range(s))
    if select == "random":
        rng = np.random.default_rng(seed)
        return sorted(int(i) for i in rng.choice(n, size=s, replace=False))
    raise ValueError(f"unknown subset selection {select!r}")


def enumerate_fit(data: DataSet, rho_clean, degree: int, alphabet: NoiseAlphabet, decoder, required, *,
                  algorithm: str, subset_size=None, select="first", seed=None, budget=DEFAULT_BUDGET,
                  extra_config=None) -> FitReport:
    """Try every noise vector on a decoding subset; return the first candidate passing validation.

    A candidate passes when ``alphabet.within(z_j, p(x_j))`` holds for at least a
    ``rho_clean`` fraction of the whole sample.
    """
    start = time.perf_counter()
    if not data.field.exact:
        raise ValueError("noise enumeration needs an exact field")
    rho = as_fraction(rho_clean)
    n = len(data)
    if subset_size is None:
        s, t = minimal_subset(rho, degree, n, required)
    else:
        s = int(subset_size)
        t = corruption_budget(rho, s)
        if s > n or s < required(degree, t):
            raise ValueError(f"subset size {s} is infeasible (need >= {required(degree, t)}, have {n})")
    pos = choose_subset(n, s, select, seed)
    xs = [tuple(data.X[i]) for i in pos]
    zs = [data.z[i] for i in pos]
    all_x = [tuple(x) for x in data.X]
    need = math.ceil(rho * n)
    calls = 0
    for v in product(alphabet.offsets, repeat=s):
        if calls >= budget:
            raise BudgetExceeded(f"enumeration budget of {budget} decoder calls exhausted", wb_calls=calls)
        calls += 1
        shifted = [z + dv for z, dv in zip(zs, v)]
        try:
            res = decoder(xs, shifted, t)
        except FitFailure:
            continue
        ok = [alphabet.within(z, evaluate(res.poly, x)) for x, z in zip(all_x, data.z)]
        if sum(ok) >= need:
            cfg = {"rho_clean": str(rho), "d": degree, "delta": data.field.to_json(alphabet.delta),
                   "alphabet": [data.field.to_json(a) for a in alphabet.offsets], "subset_size": s,
                   "t_subset": t, "select": select, "seed": seed, "budget": budget,
                   "field": data.field.name, "modulus": data.field.modulus}
            cfg.update(extra_config or {})
            return FitReport(
                algorithm=algorithm,
                model=res.poly,
                flagged=[int(data.index[j]) for j, good in enumerate(ok) if not good],
                counters={"wb_calls": calls},
                elapsed_ms=(time.perf_counter() - start) * 1e3,
                config=cfg,
                noise_vector=[data.field.to_json(dv) for dv in v],
                locator=res.error_locator,
                q=res.q,
                extra={"subset": [int(data.index[i]) for i in pos], "agreements": int(sum(ok)),
                       "required_agreements": need},
            )
    raise Exhausted(f"no noise vector among {calls} produced a valid polynomial", wb_calls=calls)


def _wb_required(d, t):
    return 2 * t + d + 1


def noise_enumerate_fit(S: DataSet, rho_clean, d: int, alphabet: NoiseAlphabet, **kw) -> FitReport:
    """Algorithm-1 style fit of 1-D data with discrete noise and Byzantine points."""
    if S.k != 1:
        raise ValueError("noise_enumerate_fit works on 1-D data; use mv_noise_enumerate_fit")
    xcol = list(S.X[:, 0])
    if len(set(xcol)) != len(xcol):
        raise ValueError("x coordinates must be distinct")

    def decoder(xs, zs, t):
        return decode_points(xs, zs, 1, d, t, S.field)

    return enumerate_fit(S, rho_clean, d, alphabet, decoder, _wb_required, algorithm="wb1d", **kw)


def max_feasible_degree(n: int, rho_clean, required) -> int:
    d = -1
    while True:
        try:
            minimal_subset(rho_clean, d + 1, n, required)
        except ValueError:
            return d
        d += 1


def degree_search(S: DataSet, rho_clean, delta=None, alphabet: NoiseAlphabet | None = None, d_max: int = 8,
                  strategy: str = "binary", fit=None, **kw) -> FitReport:
    """Smallest degree in [0, d_max] at which the enumeration fit succeeds.

    Binary search assumes success is monotone in the degree; ``strategy="linear"``
    scans upward instead.
    """
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    if alphabet is None:
        if delta is None:
            raise ValueError("give either delta or an alphabet")
        alphabet = NoiseAlphabet.symmetric(delta, S.field)
    fit = fit or noise_enumerate_fit
    hi = min(d_max, max_feasible_degree(len(S), rho_clean, _wb_required if S.k == 1 else _mv_required(S.k)))
    if hi < 0:
        raise NoDegreeFits("too few samples for any degree")
    cache: dict = {}

    def attempt(d):
        if d not in cache:
            try:
                cache[d] = fit(S, rho_clean, d, alphabet, **kw)
            except (Exhausted, NotDivisible, TooManyErrors) as exc:
                cache[d] = exc
        return cache[d]

    if strategy == "linear":
        for d in range(hi + 1):
            if isinstance(attempt(d), FitReport):
                return _tag(attempt(d), d, cache)
        raise NoDegreeFits(f"no degree <= {hi} fits", tried=sorted(cache))
    if strategy != "binary":
        raise ValueError(f"unknown strategy {strategy!r}")
    if not isinstance(attempt(hi), FitReport):
        raise NoDegreeFits(f"no degree <= {hi} fits", tried=sorted(cache))
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if isinstance(attempt(mid), FitReport):
            hi = mid
        else:
            lo = mid + 1
    return _tag(attempt(lo), lo, cache)


def _mv_required(m):
    from .mvwb import required_sample_size

    return lambda d, t: required_sample_size(d, m, t)


def _tag(report: FitReport, d: int, cache) -> FitReport:
    report.extra["degree"] = d
    report.extra["degrees_tried"] = sorted(cache)
    return report
