"""Synthetic data with controlled noise and corruption, and hierarchical local-fit/merge.

The merge step never averages coefficients.  Each internal node of the merge
tree redraws ``M`` Halton points inside each child's cell, evaluates the
child model there and refits on the union, so merging reduces to the same
fitters used for the leaves.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chebyshev import ChebModel, evaluate_model, grid_points
from .dataset import CLEAN, CORRUPT, NOISY, DataSet
from .errors import FitFailure
from .fields import RR, Field, PrimeField
from .poly import MultiPoly, count_monomials, evaluate, evaluate_many
from .report import FitReport

# ---------------------------------------------------------------- value rules


@dataclass(frozen=True)
class UniformBand:
    delta: float


@dataclass(frozen=True)
class DiscreteAlphabet:
    offsets: tuple


@dataclass(frozen=True)
class UniformInBox:
    lo: float = -1.0
    hi: float = 1.0


@dataclass(frozen=True)
class Constant:
    value: object


@dataclass(frozen=True)
class Adversarial:
    """Corrupt values at least ``offset`` away from the truth."""

    offset: float


def parse_noise(text: str | None):
    """``none``, ``uniform:0.05`` or ``alphabet:-1,0,1``."""
    if text is None or text == "none":
        return None
    kind, _, arg = text.partition(":")
    if kind == "uniform":
        return UniformBand(float(Fraction(arg)) if "/" in arg else float(arg))
    if kind == "alphabet":
        return DiscreteAlphabet(tuple(Fraction(a) for a in arg.split(",")))
    raise ValueError(f"unknown noise spec {text!r}")


def parse_corruption(text: str | None):
    """``box``, ``box:lo,hi``, ``const:v`` or ``adversarial:offset``."""
    if text is None or text == "box":
        return UniformInBox()
    kind, _, arg = text.partition(":")
    if kind == "box":
        lo, hi = (float(v) for v in arg.split(","))
        return UniformInBox(lo, hi)
    if kind == "const":
        return Constant(Fraction(arg))
    if kind == "adversarial":
        return Adversarial(float(arg))
    raise ValueError(f"unknown corruption spec {text!r}")


# ---------------------------------------------------------------- generator


@dataclass
class Generator:
    """Recipe for a labeled synthetic sample.

    ``layout`` is ``"uniform"`` (independent points in the box),
    ``"clustered"`` (sensor sites of ``cluster_size`` readings each, spread
    ``cluster_spread`` per axis around a uniform site) or, for exact fields,
    ``"grid"`` (distinct integer first coordinates).
    """

    truth: MultiPoly | ChebModel
    noise: UniformBand | DiscreteAlphabet | None = None
    beta: float = 0.0
    corruption: UniformInBox | Constant | Adversarial = field(default_factory=UniformInBox)
    seed: int = 0
    box: list | None = None
    field: Field = RR
    layout: str | None = None
    cluster_size: int = 10
    cluster_spread: float = 1e-4

    def __post_init__(self):
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.layout is None:
            self.layout = "grid" if self.field.exact else "uniform"
        if self.layout not in ("uniform", "clustered", "grid"):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.field.exact != (self.layout == "grid"):
            raise ValueError("exact fields use the grid layout; float data uses uniform or clustered")
        if isinstance(self.truth, ChebModel) and self.field.exact:
            raise ValueError("Chebyshev truths generate float data only")
        if isinstance(self.corruption, Adversarial) and self.corruption.offset <= 0:
            raise ValueError("adversarial offset must be positive")
        if isinstance(self.noise, UniformBand) and self.noise.delta < 0:
            raise ValueError("noise delta must be >= 0")
        if self.cluster_size < 1:
            raise ValueError("cluster_size must be >= 1")

    @property
    def k(self) -> int:
        return self.truth.vars

    def resolved_box(self, n: int):
        if self.box is not None:
            return [tuple(b) for b in self.box]
        if not self.field.exact:
            return [(-1.0, 1.0)] * self.k
        if isinstance(self.field, PrimeField):
            return [(0, self.field.q - 1)] * self.k
        return [(0, max(2 * n, 10))] * self.k

    def config(self) -> dict:
        return {"noise": _rule_json(self.noise), "beta": self.beta, "corruption": _rule_json(self.corruption),
                "seed": int(self.seed), "box": self.box, "layout": self.layout,
                "cluster_size": self.cluster_size, "cluster_spread": self.cluster_spread}


def _rule_json(rule):
    if rule is None:
        return None
    doc = {"rule": type(rule).__name__}
    for k, v in vars(rule).items():
        doc[k] = [str(a) for a in v] if isinstance(v, tuple) else (str(v) if isinstance(v, Fraction) else v)
    return doc


def _truth_values(truth, X, fld):
    if isinstance(truth, ChebModel):
        return evaluate_model(truth, X)
    if fld.exact:
        return np.array([evaluate(truth, tuple(x)) for x in X], dtype=object)
    return evaluate_many(truth, X)


def _float_points(gen: Generator, n: int, rng) -> np.ndarray:
    box = np.array(gen.resolved_box(n), dtype=float)
    lo, hi = box[:, 0], box[:, 1]
    if gen.layout == "uniform":
        return lo + (hi - lo) * rng.random((n, gen.k))
    sites = math.ceil(n / gen.cluster_size)
    s = gen.cluster_spread
    centers = (lo + s) + (hi - lo - 2 * s) * rng.random((sites, gen.k))
    X = np.repeat(centers, gen.cluster_size, axis=0)[:n]
    X = X + rng.uniform(-s, s, X.shape)
    return X[rng.permutation(n)]


def _exact_points(gen: Generator, n: int, rng) -> np.ndarray:
    fld = gen.field
    box = gen.resolved_box(n)
    lo0, hi0 = (int(v) for v in box[0])
    if hi0 - lo0 + 1 < n:
        raise ValueError(f"first-axis range [{lo0}, {hi0}] holds fewer than {n} distinct values")
    first = rng.choice(np.arange(lo0, hi0 + 1), size=n, replace=False)
    cols = [first]
    for lo, hi in box[1:]:
        cols.append(rng.integers(int(lo), int(hi) + 1, size=n))
    X = np.empty((n, gen.k), dtype=object)
    for a, col in enumerate(cols):
        for i, v in enumerate(col):
            X[i, a] = fld(int(v))
    return X


def _float_corrupt(rule, f, delta, rng):
    if isinstance(rule, UniformInBox):
        return rng.uniform(rule.lo, rule.hi)
    if isinstance(rule, Constant):
        return float(rule.value)
    off = rule.offset
    up, down = 1.0 - f, f + 1.0
    sides = [s for s, room in ((1.0, up), (-1.0, down)) if room >= off]
    if not sides:
        raise ValueError(f"adversarial offset {off} leaves no room inside [-1, 1]")
    sign = sides[rng.integers(len(sides))]
    room = up if sign > 0 else down
    return f + sign * rng.uniform(off, room)


def _exact_corrupt(rule, f, fld, noise_offsets, rng):
    if isinstance(rule, Constant):
        return fld(rule.value)
    if isinstance(rule, Adversarial):
        off = int(math.ceil(rule.offset))
        return f + fld(off if rng.integers(2) else -off)
    bad = {f + fld(o) for o in noise_offsets}
    for _ in range(1000):
        if isinstance(fld, PrimeField):
            v = fld(int(rng.integers(fld.q)))
        else:
            v = fld(int(rng.integers(int(rule.lo * 10), int(rule.hi * 10) + 1)))
        if v not in bad:
            return v
    raise ValueError("could not draw a corrupt value outside the noise band")


def generate(gen: Generator, n: int) -> DataSet:
    """``n`` labeled samples; exactly ``ceil(beta*n)`` of them are corrupt."""
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(int(gen.seed))
    fld = gen.field
    X = _exact_points(gen, n, rng) if fld.exact else _float_points(gen, n, rng)
    f = _truth_values(gen.truth, X, fld)
    z = f.copy()
    labels = [CLEAN] * n
    noise = gen.noise
    if isinstance(noise, UniformBand) and fld.exact:
        w = int(noise.delta)
        noise = DiscreteAlphabet(tuple(range(-w, w + 1)))
    offsets = (0,)
    if isinstance(noise, UniformBand):
        z = z + rng.uniform(-noise.delta, noise.delta, n)
        labels = [NOISY] * n if noise.delta > 0 else labels
    elif isinstance(noise, DiscreteAlphabet):
        offsets = noise.offsets
        picks = rng.integers(len(offsets), size=n)
        for i, j in enumerate(picks):
            o = offsets[j]
            if fld.exact:
                z[i] = z[i] + fld(o)
            else:
                z[i] = z[i] + float(o)
            if o != 0:
                labels[i] = NOISY
    n_bad = math.ceil(gen.beta * n)
    bad = sorted(int(i) for i in rng.choice(n, size=n_bad, replace=False)) if n_bad else []
    delta = noise.delta if isinstance(noise, UniformBand) else 0.0
    for i in bad:
        if fld.exact:
            z[i] = _exact_corrupt(gen.corruption, f[i], fld, offsets, rng)
        else:
            z[i] = _float_corrupt(gen.corruption, float(f[i]), delta, rng)
        labels[i] = CORRUPT
    meta = {"generator": gen.config()}
    return DataSet(X, z, fld, labels, gen.truth, int(gen.seed), None, meta)


# ---------------------------------------------------------------- partition


@dataclass
class Partition:
    """Axis-aligned cells tiling a box; a point on a shared face goes to the upper cell."""

    cells: list  # each cell: list of (lo, hi) per axis

    @classmethod
    def grid(cls, box, shape) -> "Partition":
        edges = [np.linspace(lo, hi, s + 1) for (lo, hi), s in zip(box, shape)]
        cells = []
        for idx in np.ndindex(*shape):
            cells.append([(float(edges[a][i]), float(edges[a][i + 1])) for a, i in enumerate(idx)])
        return cls(cells)

    @classmethod
    def regular(cls, n_cells: int, box) -> "Partition":
        """Near-square grid with ``n_cells`` cells, splitting the first axes first."""
        if n_cells < 1:
            raise ValueError("need at least one cell")
        k = len(box)
        shape = [1] * k
        rest = n_cells
        for a in range(k - 1):
            s = int(round(rest ** (1 / (k - a))))
            while rest % s:
                s -= 1
            shape[a] = s
            rest //= s
        shape[-1] = rest
        return cls.grid(box, shape)

    @property
    def box(self):
        k = len(self.cells[0])
        return [(min(c[a][0] for c in self.cells), max(c[a][1] for c in self.cells)) for a in range(k)]

    def assign(self, X) -> np.ndarray:
        """Cell number of each row of ``X``; raises if a point lies outside every cell."""
        X = np.asarray(X, dtype=float)
        out = np.full(len(X), -1)
        hi_box = [b[1] for b in self.box]
        for c, cell in enumerate(self.cells):
            inside = np.ones(len(X), dtype=bool)
            for a, (lo, hi) in enumerate(cell):
                upper = X[:, a] <= hi if hi == hi_box[a] else X[:, a] < hi
                inside &= (X[:, a] >= lo) & upper
            out[inside & (out < 0)] = c
        if np.any(out < 0):
            raise ValueError(f"{int(np.sum(out < 0))} points fall outside the partition")
        return out

    def to_json(self):
        return {"cells": [[list(b) for b in c] for c in self.cells]}

    @classmethod
    def from_json(cls, doc):
        return cls([[tuple(b) for b in c] for c in doc["cells"]])


# ---------------------------------------------------------------- fitters


@dataclass
class FitterConfig:
    """``kind`` is ``"lp"`` or ``"wb"``; ``params`` mirror the fitter's own options.

    lp: d, delta, rho_clean, filter (bool), target_count, square_halfwidth, grid
    wb: d, rho_clean, delta (integer noise width)
    """

    kind: str = "lp"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("lp", "wb"):
            raise ValueError(f"unknown fitter {self.kind!r}")
        self.params.setdefault("d", 2)
        self.params.setdefault("rho_clean", 1.0 if self.kind == "lp" else 0.8)
        self.params.setdefault("delta", 0.05 if self.kind == "lp" else 0)

    def minimum(self, k: int) -> int:
        """Fewest samples the fitter accepts."""
        d = self.params["d"]
        if self.kind == "lp":
            return count_monomials(d, k)
        from .mvwb import required_sample_size
        from .wb import minimal_subset

        # t grows linearly in the subset size and the unknown count quadratically, so
        # a rho too small for (d, k) has no feasible size at all; search a bounded range
        return minimal_subset(self.params["rho_clean"], d, MAX_SUBSET,
                              lambda dd, t: required_sample_size(dd, k, t))[0]

    def to_json(self):
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["kind"], dict(doc.get("params", {})))


@dataclass
class BoxModel:
    """A fitted model expressed in the local coordinates of ``box``."""

    model: ChebModel | MultiPoly
    box: list
    rescaled: bool = True

    def local(self, X):
        X = np.asarray(X, dtype=float)
        lo = np.array([b[0] for b in self.box], dtype=float)
        hi = np.array([b[1] for b in self.box], dtype=float)
        return 2 * (X - lo) / (hi - lo) - 1

    def __call__(self, X):
        if isinstance(self.model, ChebModel):
            return evaluate_model(self.model, self.local(X))
        return evaluate_many(self.model, np.asarray(X, dtype=float))

    def exact(self, points):
        return [evaluate(self.model, tuple(x)) for x in points]

    def to_json(self):
        return {"box": [list(map(_num, b)) for b in self.box], "model": self.model.to_json()}


def _num(v):
    return float(v) if not isinstance(v, Fraction) else str(v)


def _fit_cell(S: DataSet, box, cfg: FitterConfig, truth=None):
    p = cfg.params
    if cfg.kind == "lp":
        from .lpfit import FilterConfig, fit_robust

        local = DataSet(BoxModel(None, box).local(S.X), S.z, RR, S.labels, None, S.seed, S.index, dict(S.meta))
        fc = FilterConfig(p["d"], p["delta"], p["rho_clean"], p.get("square_halfwidth"), p.get("target_count"))
        rep = fit_robust(local, fc, grid_per_axis=p.get("grid"), filter=p.get("filter", True))
        model = BoxModel(rep.model, box)
    else:
        from .mvwb import mv_noise_enumerate_fit
        from .wb import NoiseAlphabet

        alpha = NoiseAlphabet.symmetric(int(p["delta"]), S.field)
        rep = mv_noise_enumerate_fit(S, p["rho_clean"], p["d"], alpha)
        model = BoxModel(rep.model, box, rescaled=False)
    if truth is not None and not S.field.exact:
        P = grid_points(33, S.k, box)
        rep.sup_vs_truth = float(np.max(np.abs(model(P) - _truth_values(truth, P, RR))))
    return model, rep


@dataclass
class LocalFit:
    cell: int
    box: list
    model: BoxModel | None
    report: FitReport

    @property
    def ok(self):
        return self.model is not None


def default_jobs() -> int:
    return max(1, int(os.environ.get("BYZFIT_JOBS", "1")))


def fit_local(S: DataSet, part: Partition, cfg: FitterConfig, jobs: int | None = None, truth=None) -> list:
    """Fit every cell independently; a failing cell yields a report with status "error"."""
    where = part.assign(float_coords(S))
    need = cfg.minimum(S.k)

    def one(c):
        pos = np.flatnonzero(where == c)
        box = part.cells[c]
        start = time.perf_counter()
        try:
            if len(pos) < need:
                raise _TooFew(f"cell {c} holds {len(pos)} points, fitter needs {need}")
            model, rep = _fit_cell(S.subset(pos), box, cfg, truth)
        except (FitFailure, _TooFew) as exc:
            rep = FitReport(algorithm=cfg.kind, status="error", config=cfg.to_json(),
                            extra={"kind": getattr(exc, "kind", "TooFewPoints"), "message": str(exc)})
            model = None
        rep.extra["cell"] = c
        rep.extra["cell_size"] = int(len(pos))
        rep.elapsed_ms = (time.perf_counter() - start) * 1e3
        return LocalFit(c, box, model, rep)

    jobs = jobs or default_jobs()
    cells = range(len(part.cells))
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            out = list(pool.map(one, cells))
    else:
        out = [one(c) for c in cells]
    if not any(r.ok for r in out):
        raise FitFailure("every cell failed to fit", kinds=[r.report.extra["kind"] for r in out])
    return out


def float_coords(S: DataSet) -> np.ndarray:
    if not S.field.exact:
        return np.asarray(S.X, dtype=float)
    return np.array([[float(int(v)) if isinstance(S.field, PrimeField) else float(v) for v in row] for row in S.X],
                    dtype=float).reshape(len(S), S.k)


class _TooFew(Exception):
    kind = "TooFewPoints"


# ---------------------------------------------------------------- merging


def radical_inverse(i: int, base: int) -> Fraction:
    f, r, denom = Fraction(0), i, 1
    while r:
        denom *= base
        r, digit = divmod(r, base)
        f += Fraction(digit, denom)
    return f


MAX_SUBSET = 10_000
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def halton(n: int, k: int, exact: bool = False, skip: int = 1):
    """First ``n`` points of the k-dimensional Halton sequence (index 0 skipped by default)."""
    if k > len(PRIMES):
        raise ValueError("Halton sequence supported up to 10 dimensions")
    pts = [[radical_inverse(i, PRIMES[a]) for a in range(k)] for i in range(skip, skip + n)]
    if exact:
        return pts
    return np.array(pts, dtype=float).reshape(n, k)


@dataclass
class MergePlan:
    """Binary merge tree over cell numbers, e.g. ``[[0, 1], [2, 3]]``."""

    tree: object
    resample_per_node: int
    fitter: FitterConfig

    def __post_init__(self):
        def check(node):
            if isinstance(node, int):
                return [node]
            if len(node) != 2:
                raise ValueError("every internal node merges exactly two children")
            return check(node[0]) + check(node[1])

        self._leaves = check(self.tree)
        if self.resample_per_node < 1:
            raise ValueError("resample_per_node must be >= 1")

    @property
    def leaves(self):
        return list(self._leaves)

    @classmethod
    def balanced(cls, n_cells: int, M: int, fitter: FitterConfig) -> "MergePlan":
        level = list(range(n_cells))
        while len(level) > 1:
            nxt = [[level[i], level[i + 1]] for i in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return cls(level[0], M, fitter)

    def to_json(self):
        return {"tree": self.tree, "resample_per_node": self.resample_per_node, "fitter": self.fitter.to_json()}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["tree"], int(doc["resample_per_node"]), FitterConfig.from_json(doc["fitter"]))


def _union_box(a, b):
    return [(min(x[0], y[0]), max(x[1], y[1])) for x, y in zip(a, b)]


def _resample(model: BoxModel, box, M, fld):
    k = len(box)
    if fld.exact:
        if isinstance(fld, PrimeField):
            raise ValueError("merge resampling is not defined over prime fields")
        H = halton(M, k, exact=True)
        pts = [tuple(fld(Fraction(lo) + (Fraction(hi) - Fraction(lo)) * h) for h, (lo, hi) in zip(row, box))
               for row in H]
        return pts, model.exact(pts)
    H = halton(M, k)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    P = lo + (hi - lo) * H
    return P, model(P)


def merge_hierarchical(locals_, plan: MergePlan, field_: Field = RR, drift_grid: int = 33):
    """Merge local models bottom-up along ``plan``; returns ``(root model, drift records)``.

    Each drift record is ``{"level", "node", "child", "sup"}`` with ``sup`` the
    largest |child - parent| over a grid on the child's cell (float data only).
    Cells whose local fit failed are left out: a node with one surviving child
    passes that child up unchanged, and a ``{"skipped": cell}`` record is added.
    """
    by_cell = {lf.cell: lf for lf in locals_}
    if sorted(by_cell) != sorted(plan.leaves):
        raise ValueError("merge plan leaves do not match the local fits")
    if not any(lf.ok for lf in locals_):
        raise ValueError("no cell has a model to merge")
    cfg = plan.fitter
    M = plan.resample_per_node
    drift = []

    def walk(node, depth):
        if isinstance(node, int):
            lf = by_cell[node]
            if not lf.ok:
                drift.append({"level": depth, "skipped": node})
                return None
            return lf.model, lf.box
        a, b = walk(node[0], depth + 1), walk(node[1], depth + 1)
        if a is None or b is None:
            return a if b is None else b
        (ma, ba), (mb, bb) = a, b
        box = _union_box(ba, bb)
        need = cfg.minimum(len(box))
        if 2 * M < need:
            raise ValueError(f"{2 * M} resampled points per node are below the fitter minimum {need}")
        pa, za = _resample(ma, ba, M, field_)
        pb, zb = _resample(mb, bb, M, field_)
        if field_.exact:
            X = np.empty((2 * M, len(box)), dtype=object)
            X[:] = [list(p) for p in pa + pb]
            S = DataSet(X, za + zb, field_)
        else:
            S = DataSet(np.vstack([pa, pb]), np.clip(np.concatenate([za, zb]), -1, 1))
        merge_cfg = FitterConfig(cfg.kind, {**cfg.params, "filter": False, "rho_clean": 1.0, "delta": 0})
        if cfg.kind == "lp":
            merge_cfg.params["delta"] = cfg.params.get("delta", 0.05)
        model, _ = _fit_cell(S, box, merge_cfg)
        if not field_.exact:
            for child, (cm, cb) in enumerate(((ma, ba), (mb, bb))):
                P = grid_points(drift_grid, len(cb), cb)
                drift.append({"level": depth, "node": str(node), "child": child,
                              "sup": float(np.max(np.abs(cm(P) - model(P))))})
        return model, box

    root, _ = walk(plan.tree, 0)
    return root, drift


def aggregate(S: DataSet, part: Partition, plan: MergePlan, jobs=None, truth=None):
    """fit_local followed by merge_hierarchical; returns ``(summary, root model)``."""
    start = time.perf_counter()
    locals_ = fit_local(S, part, plan.fitter, jobs, truth)
    root, drift = merge_hierarchical(locals_, plan, S.field)
    out = {"root": root.to_json(), "drift": drift,
           "cells": [{"cell": lf.cell, "status": lf.report.status, "sup_vs_truth": lf.report.sup_vs_truth,
                      **({"error": lf.report.extra.get("kind")} if not lf.ok else {})} for lf in locals_],
           "partition": part.to_json(), "plan": plan.to_json()}
    if truth is not None and not S.field.exact:
        P = grid_points(101, S.k, part.box)
        out["sup_vs_truth"] = float(np.max(np.abs(root(P) - _truth_values(truth, P, RR))))
    out["elapsed_ms"] = (time.perf_counter() - start) * 1e3
    return out, root
