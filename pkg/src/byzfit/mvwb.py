"""Multivariate Welch-Berlekamp with a univariate error locator.

The locator ``e`` lives in one designated coordinate (``axis``, default the
first), which is why that coordinate must be distinct across samples.  ``q``
ranges over every monomial of total degree <= d+t in all m variables.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .dataset import DataSet
from .fields import Field
from .poly import MultiPoly, count_monomials
from .report import FitReport
from .wb import NoiseAlphabet, decode_points, enumerate_fit


def required_sample_size(d: int, m: int, t: int) -> int:
    """t + C(d+t+m, m): unknown coefficients of q plus the t free ones of monic e."""
    if d < 0 or m < 1 or t < 0:
        raise ValueError("need d >= 0, m >= 1, t >= 0")
    return t + count_monomials(d + t, m)


def _check_distinct(xs, axis):
    col = [x[axis] for x in xs]
    if len(set(col)) == len(col):
        return
    counts = [len({x[a] for x in xs}) for a in range(len(xs[0]))]
    best = max(range(len(counts)), key=lambda a: counts[a])
    raise ValueError(f"coordinate {axis} has repeated values; axis {best} has the most distinct "
                     f"values ({counts[best]} of {len(xs)})")


@dataclass
class MVProblem:
    points: list
    vars: int
    degree: int
    t: int
    field: Field
    axis: int = 0

    def __post_init__(self):
        if not self.field.exact:
            raise ValueError("multivariate Welch-Berlekamp needs an exact field")
        pts = []
        for x, z in self.points:
            x = tuple(self.field.check(v) for v in x)
            if len(x) != self.vars:
                raise ValueError(f"point {x} does not have {self.vars} coordinates")
            pts.append((x, self.field.check(z)))
        self.points = pts
        if not 0 <= self.axis < self.vars:
            raise ValueError("axis out of range")
        _check_distinct([x for x, _ in pts], self.axis)
        need = required_sample_size(self.degree, self.vars, self.t)
        if len(pts) < need:
            raise ValueError(f"need at least {need} points, got {len(pts)}")


@dataclass
class MVResult:
    poly: MultiPoly
    error_locator: MultiPoly
    q: MultiPoly
    flagged: tuple = field(default_factory=tuple)


def mv_wb_decode(prob: MVProblem) -> MVResult:
    """Recover the total-degree <= d polynomial agreeing with all but <= t points.

    Raises Infeasible (no (q, e) solves the system), NotDivisible (e does not
    divide q) or TooManyErrors (the quotient disagrees with more than t points).
    """
    xs = [x for x, _ in prob.points]
    zs = [z for _, z in prob.points]
    r = decode_points(xs, zs, prob.vars, prob.degree, prob.t, prob.field, prob.axis)
    return MVResult(r.poly, r.error_locator, r.q, r.flagged)


def mv_report(prob: MVProblem, indices=None) -> FitReport:
    """Run :func:`mv_wb_decode` and wrap the outcome in a FitReport."""
    start = time.perf_counter()
    res = mv_wb_decode(prob)
    idx = list(range(len(prob.points))) if indices is None else list(indices)
    return FitReport(
        algorithm="wbmv",
        model=res.poly,
        flagged=[int(idx[i]) for i in res.flagged],
        counters={"wb_calls": 1, "unknowns": required_sample_size(prob.degree, prob.vars, prob.t)},
        elapsed_ms=(time.perf_counter() - start) * 1e3,
        config={"d": prob.degree, "t": prob.t, "m": prob.vars, "axis": prob.axis, "field": prob.field.name,
                "modulus": prob.field.modulus, "delta": 0, "rho_clean": None},
        locator=res.error_locator,
        q=res.q,
    )


def mv_noise_enumerate_fit(S: DataSet, rho_clean, d: int, alphabet: NoiseAlphabet, axis: int = 0,
                           **kw) -> FitReport:
    """Noise enumeration with :func:`mv_wb_decode` as the inner decoder."""
    m = S.k
    _check_distinct([tuple(x) for x in S.X], axis)

    def decoder(xs, zs, t):
        return decode_points(xs, zs, m, d, t, S.field, axis)

    def required(deg, t):
        return required_sample_size(deg, m, t)

    cfg = dict(kw.pop("extra_config", None) or {})
    cfg.update({"m": m, "axis": axis})
    return enumerate_fit(S, rho_clean, d, alphabet, decoder, required, algorithm="wbmv-noise",
                         extra_config=cfg, **kw)

