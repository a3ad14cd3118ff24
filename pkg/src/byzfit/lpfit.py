"""Chebyshev l-infinity fitting by linear programming, with Byzantine filtering.

The fit minimizes the band half-width ``delta`` such that every sample lies
within ``delta`` of ``sum c_ij T_i(x) T_j(y)``, while each coefficient stays in
``[-sqrt(2), sqrt(2)]`` and the expansion stays in ``[-1, 1]`` on an
equispaced tensor grid.  Data must be rescaled into ``[-1, 1]`` first.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.spatial import cKDTree

from .chebyshev import ChebModel, cheb_vander, evaluate_model, grid_points
from .dataset import DataSet
from .errors import InsufficientCleanData
from .fields import RR
from .report import FitReport, residual_stats
from .simplex import minimize

SQRT2 = math.sqrt(2.0)
RANGE_TOL = 1e-12
MAX_GRID = 64

SAMPLE_BAND, COEFF_BOX, GRID_BOUND = "SampleBand", "CoeffBox", "GridBound"


def default_grid(d: int) -> int:
    """Per-axis grid size: d**5 nodes, capped at 64."""
    return max(2, min(d**5, MAX_GRID))


def sample_size(d: int, delta: float, C: float = 1.0) -> int:
    """ceil(C * d^2/delta * ln(d/delta)), floored at the (d+1)^2 interpolation count."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if C <= 0:
        raise ValueError("C must be > 0")
    n = C * d * d / delta * math.log(d / delta) if delta < d else 0.0
    return max(math.ceil(n), (d + 1) ** 2)


def byzantine_sample_size(d: int, delta: float) -> int:
    """ceil(d^4 * ln(1/delta) / delta), the density preset for square filtering."""
    if d < 1 or not 0 < delta < 1:
        raise ValueError("need d >= 1 and 0 < delta < 1")
    return math.ceil(d**4 * math.log(1 / delta) / delta)


def basis_indices(degrees, total_degree=None):
    """Multi-indices of the tensor basis, in C order, optionally capped in total degree."""
    idx = list(product(*(range(d + 1) for d in degrees)))
    if total_degree is not None:
        idx = [i for i in idx if sum(i) <= total_degree]
    return idx


def design_matrix(X, degrees, indices) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Vs = [cheb_vander(X[:, a], d) for a, d in enumerate(degrees)]
    out = np.ones((len(X), len(indices)))
    for col, idx in enumerate(indices):
        for a, i in enumerate(idx):
            if i:
                out[:, col] *= Vs[a][:, i]
    return out


@dataclass
class LPInstance:
    degrees: tuple
    indices: list
    samples: np.ndarray          # design matrix, one row per sample
    values: np.ndarray
    grid: np.ndarray             # design matrix at the grid nodes
    grid_per_axis: int
    sample_index: np.ndarray
    coef_bound: float = SQRT2
    grid_bound: float = 1.0

    @property
    def n_vars(self) -> int:
        return len(self.indices) + 1

    def families(self) -> dict:
        return {SAMPLE_BAND: 2 * len(self.samples), COEFF_BOX: 2 * len(self.indices),
                GRID_BOUND: 2 * len(self.grid)}

    @property
    def n_rows(self) -> int:
        return sum(self.families().values())

    def matrix(self):
        """(cost, G, h, kinds) for ``min cost.x  s.t.  G x <= h`` with x = (coeffs..., delta)."""
        nc = len(self.indices)
        S, z, P = self.samples, self.values, self.grid
        ones = np.ones((len(S), 1))
        I = np.eye(nc)
        blocks = [
            (np.hstack([S, -ones]), z, SAMPLE_BAND),
            (np.hstack([-S, -ones]), -z, SAMPLE_BAND),
            (np.hstack([I, np.zeros((nc, 1))]), np.full(nc, self.coef_bound), COEFF_BOX),
            (np.hstack([-I, np.zeros((nc, 1))]), np.full(nc, self.coef_bound), COEFF_BOX),
            (np.hstack([P, np.zeros((len(P), 1))]), np.full(len(P), self.grid_bound), GRID_BOUND),
            (np.hstack([-P, np.zeros((len(P), 1))]), np.full(len(P), self.grid_bound), GRID_BOUND),
        ]
        G = np.vstack([g for g, _, _ in blocks])
        h = np.concatenate([v for _, v, _ in blocks])
        kinds = np.concatenate([[k] * len(v) for _, v, k in blocks])
        cost = np.zeros(nc + 1)
        cost[-1] = 1.0
        return cost, G, h, kinds


def build_lp(S: DataSet, degrees=(3, 3), grid_per_axis: int | None = None, total_degree=None) -> LPInstance:
    """Assemble the band / coefficient-box / grid-bound LP for the samples in ``S``.

    ``grid_per_axis=0`` drops the grid constraints; otherwise it must be >= 2.
    """
    if len(S) == 0:
        raise ValueError("empty sample")
    degrees = tuple(int(d) for d in degrees)
    if len(degrees) != S.k:
        raise ValueError(f"{len(degrees)} degrees for {S.k}-dimensional data")
    X = np.asarray(S.X, dtype=float)
    z = np.asarray(S.z, dtype=float)
    if np.any(np.abs(X) > 1 + RANGE_TOL) or np.any(np.abs(z) > 1 + RANGE_TOL):
        raise ValueError("coordinates and values must lie in [-1, 1]; rescale first")
    if grid_per_axis is None:
        grid_per_axis = default_grid(total_degree if total_degree is not None else sum(degrees))
    if grid_per_axis == 1 or grid_per_axis < 0:
        raise ValueError("grid_per_axis must be 0 or >= 2")
    indices = basis_indices(degrees, total_degree)
    nodes = grid_points(grid_per_axis, S.k) if grid_per_axis else np.zeros((0, S.k))
    return LPInstance(degrees, indices, design_matrix(np.clip(X, -1, 1), degrees, indices), np.clip(z, -1, 1),
                      design_matrix(nodes, degrees, indices), grid_per_axis, np.asarray(S.index))


def solve_lp(inst: LPInstance) -> ChebModel:
    """Optimal band half-width fit; raises Infeasible (with certificate) or NumericalFailure."""
    cost, G, h, _ = inst.matrix()
    res = minimize(cost, G, h)
    coeffs = np.zeros([d + 1 for d in inst.degrees])
    for idx, v in zip(inst.indices, res.x[:-1]):
        coeffs[idx] = v
    return ChebModel(coeffs, float(res.x[-1]), {"pivots": res.pivots, "lp_rows": inst.n_rows,
                                                "grid_per_axis": inst.grid_per_axis})


# ---------------------------------------------------------------- rescaling

@dataclass(frozen=True)
class AffineMap:
    scale: float
    shift: float
    degenerate: bool = False

    def __call__(self, v):
        return np.asarray(v, dtype=float) * self.scale + self.shift

    def inverse(self, v):
        if self.scale == 0:
            raise ValueError("degenerate axis has no inverse map")
        return (np.asarray(v, dtype=float) - self.shift) / self.scale

    def to_json(self):
        return {"scale": self.scale, "shift": self.shift, "degenerate": self.degenerate}


def _fit_map(col) -> AffineMap:
    lo, hi = float(np.min(col)), float(np.max(col))
    if lo == hi:
        return AffineMap(0.0, 0.0, True)
    if lo >= -1 and hi <= 1:
        return AffineMap(1.0, 0.0)
    scale = 2.0 / (hi - lo)
    return AffineMap(scale, -1.0 - lo * scale)


def rescale(S: DataSet):
    """Map each coordinate and the value column affinely onto [-1, 1].

    Returns ``(scaled, maps)`` where ``maps`` has one entry per coordinate and
    a final entry for z.  Axes already inside [-1, 1] keep the identity map;
    constant axes collapse to 0 with ``degenerate=True`` and a warning.
    """
    if len(S) == 0:
        raise ValueError("empty sample")
    X = np.asarray(S.X, dtype=float)
    z = np.asarray(S.z, dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(z))):
        raise ValueError("non-finite data")
    maps = [_fit_map(X[:, a]) for a in range(S.k)] + [_fit_map(z)]
    for a, m in enumerate(maps):
        if m.degenerate:
            warnings.warn(f"axis {a} is constant; mapped to 0", stacklevel=2)
    Xs = np.column_stack([maps[a](X[:, a]) for a in range(S.k)])
    out = DataSet(Xs, maps[-1](z), RR, S.labels, None, S.seed, S.index, dict(S.meta))
    return out, maps


# ---------------------------------------------------------------- filtering

@dataclass
class FilterConfig:
    d: int
    delta: float
    rho_clean: float = 0.8
    square_halfwidth: float | None = None
    target_count: int | None = None
    center_rule: str = "median"
    min_square_count: int = 3
    min_agreement: float = 0.5

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.delta <= 0:
            raise ValueError("delta must be > 0")
        if not 0 < self.rho_clean <= 1:
            raise ValueError("rho_clean must lie in (0, 1]")
        if self.square_halfwidth is None:
            self.square_halfwidth = self.delta / self.d**3
        if self.square_halfwidth <= 0:
            raise ValueError("square_halfwidth must be > 0")
        if self.target_count is None:
            self.target_count = math.ceil(self.d**2 / self.delta)
        if self.center_rule not in ("median", "mean"):
            raise ValueError("center_rule must be 'median' or 'mean'")
        if self.min_square_count < 1:
            raise ValueError("min_square_count must be >= 1")

    def to_json(self):
        return {k: getattr(self, k) for k in ("d", "delta", "rho_clean", "square_halfwidth", "target_count",
                                              "center_rule", "min_square_count", "min_agreement")}


def byzantine_filter(S: DataSet, cfg: FilterConfig, centers=None) -> DataSet:
    """Collect points that agree with the local consensus of small squares.

    Seeds are visited in dataset order, skipping points already collected.
    Around each seed, the square of half-width ``cfg.square_halfwidth`` is
    examined: its center value is the median (or mean) of the z values inside,
    and points within ``2*delta`` of it are kept when they form more than a
    ``min_agreement`` share of a square holding at least ``min_square_count``
    points.  Stops once more than ``target_count`` points are collected.

    ``centers`` (an (s, k) array) replaces the seed loop with an explicit list
    of square centers, all of which are processed; passing the
    ``meta["filter"]["centers"]`` of an earlier run replays its squares.

    The result carries original indices; ``meta["filter"]`` records every
    examined square and the positions excluded from accepted squares.
    """
    X = np.asarray(S.X, dtype=float)
    z = np.asarray(S.z, dtype=float)
    if np.any(np.abs(X) > 1 + RANGE_TOL):
        raise ValueError("coordinates must lie in [-1, 1]; rescale first")
    if len(S) and 2 * cfg.delta >= float(np.ptp(z)):
        # every in-square value is within the keep band of any center
        out = S.subset(np.arange(len(S)))
        out.meta["filter"] = {"squares": [], "excluded": [], "collected": len(S), "centers": [],
                              "target_count": cfg.target_count, "bypassed": "keep band covers the value range"}
        return out
    tree = cKDTree(X) if len(S) else None
    taken = np.zeros(len(S), dtype=bool)
    excluded: set = set()
    squares, used = [], []
    band = 2 * cfg.delta
    center_fn = np.median if cfg.center_rule == "median" else np.mean
    replay = centers is not None
    seq = np.asarray(centers, dtype=float).reshape(-1, S.k) if replay else None
    done = False
    for s in range(len(seq) if replay else len(S)):
        if not replay and taken[s]:
            continue
        at = seq[s] if replay else X[s]
        used.append([float(v) for v in at])
        found = tree.query_ball_point(at, cfg.square_halfwidth, p=np.inf) if tree is not None else []
        inside = np.array(sorted(found), dtype=int)
        rec = {"seed": int(S.index[s]) if not replay else None, "count": int(len(inside))}
        if len(inside) < cfg.min_square_count:
            rec["status"] = "sparse"
            squares.append(rec)
            continue
        c = float(center_fn(z[inside]))
        keep = inside[np.abs(z[inside] - c) <= band]
        rec.update(center=c, kept=int(len(keep)))
        if len(keep) <= cfg.min_agreement * len(inside):
            rec["status"] = "no-consensus"
            squares.append(rec)
            continue
        rec["status"] = "accepted"
        squares.append(rec)
        taken[keep] = True
        excluded.update(int(i) for i in np.setdiff1d(inside, keep))
        if not replay and taken.sum() > cfg.target_count:
            done = True
            break
    done = done or (replay and taken.sum() > cfg.target_count)
    excluded -= set(np.flatnonzero(taken).tolist())
    info = {"squares": squares, "excluded": sorted(excluded), "collected": int(taken.sum()),
            "target_count": cfg.target_count, "centers": used}
    if not done:
        sparse = sum(1 for sq in squares if sq["status"] == "sparse")
        raise InsufficientCleanData(f"collected {int(taken.sum())} points, need more than {cfg.target_count} "
                                    f"({sparse} of {len(squares)} squares held fewer than "
                                    f"{cfg.min_square_count} points)", info=info)
    out = S.subset(np.flatnonzero(taken))
    out.meta["filter"] = info
    return out


# ---------------------------------------------------------------- end to end

def fit_lp(S: DataSet, degrees, grid_per_axis=None, total_degree=None) -> tuple[ChebModel, LPInstance]:
    inst = build_lp(S, degrees, grid_per_axis, total_degree)
    return solve_lp(inst), inst


def sup_error(model: ChebModel, truth, g: int = 101, box=None) -> float:
    """Sup-norm distance between ``model`` and ``truth`` on a g-per-axis grid."""
    from .poly import MultiPoly, evaluate_many

    P = grid_points(g, model.vars, box)
    ref = evaluate_model(truth, P) if isinstance(truth, ChebModel) else evaluate_many(truth, P)
    return float(np.max(np.abs(evaluate_model(model, P) - ref)))


def fit_robust(S: DataSet, cfg: FilterConfig, degrees=None, grid_per_axis=None, truth=None,
               total_degree="auto", filter=True) -> FitReport:
    """Filter Byzantine points, then run the LP fit on the survivors.

    ``degrees`` defaults to ``cfg.d`` per axis with the basis capped at total
    degree ``cfg.d``; pass ``total_degree=None`` for the full tensor basis.
    """
    start = time.perf_counter()
    degrees = tuple(degrees) if degrees is not None else (cfg.d,) * S.k
    if total_degree == "auto":
        total_degree = cfg.d
    filt = byzantine_filter(S, cfg) if filter else S
    model, inst = fit_lp(filt, degrees, grid_per_axis, total_degree)
    info = filt.meta.get("filter", {})
    pos_of = {int(ix): p for p, ix in enumerate(S.index)}
    flagged = sorted(int(S.index[p]) for p in info.get("excluded", []))
    report = FitReport(
        algorithm="lp",
        model=model,
        flagged=flagged,
        delta_achieved=model.delta,
        residuals=residual_stats(model, S),
        counters={"lp_rows": inst.n_rows, "pivots": model.meta["pivots"], "lp_vars": inst.n_vars},
        config={"filter": cfg.to_json() if filter else None, "degrees": list(degrees),
                "total_degree": total_degree, "grid_per_axis": inst.grid_per_axis,
                "delta": cfg.delta, "rho_clean": cfg.rho_clean},
        extra={"filtered_size": len(filt), "input_size": len(S),
               "squares": _square_summary(info),
               "notes": [f"grid uses {inst.grid_per_axis} nodes per axis (d^5 = {cfg.d**5})"]},
    )
    warn = dense_sampling_warning(filt, cfg)
    if warn:
        report.extra["warnings"] = [warn]
    if truth is not None:
        report.sup_vs_truth = sup_error(model, truth)
    if S.labels is not None and filter:
        kept_pos = [pos_of[int(i)] for i in filt.index]
        report.extra["kept_corrupt"] = int(sum(S.labels[p] == "corrupt" for p in kept_pos))
    report.elapsed_ms = (time.perf_counter() - start) * 1e3
    return report


def _square_summary(info):
    out = {}
    for sq in info.get("squares", []):
        out[sq["status"]] = out.get(sq["status"], 0) + 1
    return out


def dense_sampling_warning(S: DataSet, cfg: FilterConfig) -> str | None:
    """Warn when neighbouring samples sit closer than delta/d^2 (slopes become unconstrained)."""
    if len(S) < 2:
        return None
    X = np.asarray(S.X, dtype=float)
    dist, _ = cKDTree(X).query(X, k=2)
    nn = dist[:, 1]
    scale = cfg.delta / cfg.d**2
    frac = float(np.mean(nn < scale))
    if frac > 0.5:
        return f"{frac:.0%} of samples have a neighbour closer than delta/d^2 = {scale:.3g}"
    return None


# ---------------------------------------------------------------- audits

def derivative_bound_audit(model: ChebModel, g: int = 201) -> dict:
    """Grid sup of each partial derivative against (total degree)^2 * sup|p|."""
    P = grid_points(g, model.vars)
    sup_p = float(np.max(np.abs(evaluate_model(model, P))))
    sups = [float(np.max(np.abs(evaluate_model(model.derivative(a), P)))) for a in range(model.vars)]
    deg = model.total_degree
    top = max(sups) if sups else 0.0
    ratio = 0.0 if top == 0 else top / (deg * deg * sup_p)
    return {"sup_p": sup_p, "sup_grad": sups, "degree": deg, "ratio": ratio, "grid": g}


def boundedness_audit(model: ChebModel, grid_per_axis: int) -> dict:
    """Sup of |p| on a grid 10x finer than the LP grid, with the slack term of the bound."""
    fine = 10 * (grid_per_axis - 1) + 1
    sup_p = float(np.max(np.abs(evaluate_model(model, grid_points(fine, model.vars)))))
    degs = model.degrees
    prod_all = float(np.prod(degs))
    term = sum(d * d * prod_all for d in degs) / grid_per_axis
    k_needed = 0.0 if sup_p <= 1 else (sup_p - 1) / term if term else math.inf
    return {"sup_p": sup_p, "term": term, "K_needed": k_needed, "fine_grid": fine}
