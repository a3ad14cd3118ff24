"""Dense revised simplex for ``min c.x  s.t.  G x <= h`` with free ``x``.

The fitting LPs have few variables (tens) and many inequality rows
(thousands), so the solver works on the dual standard-form problem

    min h.y   s.t.   G^T y = -c,  y >= 0

whose basis matrices are only ``n_vars x n_vars``.  At a dual optimum the
simplex multipliers are exactly an optimal primal ``x`` (complementary
slackness), so no second solve is needed.

The entering column is the most negative reduced cost (lowest index on
ties); if the objective fails to improve for ``STALL_LIMIT`` pivots the phase
switches to Bland's rule, which cannot cycle.  Pivot elements below a relative
tolerance are never used, since near-duplicate sample rows otherwise drive the
basis towards singularity.  Degeneracy is broken by a fixed perturbation of the
right-hand side, so every step is a deterministic function of the input.
The basis inverse is rebuilt from scratch every iteration, which at these
sizes costs less than the pricing pass and keeps round-off from accumulating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible, NumericalFailure

TOL = 1e-9
PIVOT_TOL = 1e-9
PERTURB = 1e-7
STALL_LIMIT = 100


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    pivots: int
    active: np.ndarray
    max_violation: float


def _revised_simplex(A, b, cost, basis, allowed, max_iter, target=None):
    """Phase routine on ``A y = b, y >= 0``; ``basis`` is modified in place.

    With ``target`` set, stops as soon as the objective drops to it (phase 1
    only needs the artificials at zero, not a certified optimum).
    Returns ("optimal" | "unbounded", pivots, direction_or_None).
    """
    m = A.shape[0]
    pivots = 0
    bland = False
    best_obj, stalled = np.inf, 0
    scale = 1.0 + np.abs(cost).max()
    while True:
        if pivots >= max_iter:
            raise NumericalFailure(f"simplex did not converge in {max_iter} pivots")
        B = A[:, basis]
        try:
            yB = np.linalg.solve(B, b)
            pi = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis") from exc
        obj = cost[basis] @ yB
        if target is not None and obj <= target:
            return "optimal", pivots, None
        if obj < best_obj - TOL * scale:
            best_obj, stalled = obj, 0
        else:
            stalled += 1
            bland = bland or stalled > STALL_LIMIT
        reduced = cost - A.T @ pi
        reduced[basis] = 0.0
        cand = np.flatnonzero((reduced < -TOL * scale) & allowed)
        if len(cand) == 0:
            return "optimal", pivots, None
        j = int(cand[0]) if bland else int(cand[np.argmin(reduced[cand])])
        d = np.linalg.solve(B, A[:, j])
        pos = d > PIVOT_TOL * max(1.0, np.abs(d).max())
        if not pos.any():
            ray = np.zeros(A.shape[1])
            ray[basis] = -d
            ray[j] = 1.0
            return "unbounded", pivots, ray
        ratios = np.full(m, np.inf)
        ratios[pos] = np.maximum(yB[pos], 0.0) / d[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + TOL * (1.0 + abs(best)))
        leave = min(ties, key=lambda r: basis[r])
        basis[leave] = j
        pivots += 1


def minimize(c, G, h, max_iter: int = 200_000) -> LPResult:
    """Solve ``min c.x`` subject to ``G x <= h`` (x free).

    Raises :class:`Infeasible` with a Farkas certificate ``y >= 0, G^T y = 0,
    h.y < 0`` when the inequalities admit no point.
    """
    c = np.asarray(c, dtype=float)
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    n = c.size
    rows = G.shape[0]
    if G.shape != (rows, n) or h.shape != (rows,):
        raise ValueError("shape mismatch among c, G, h")
    A = G.T.copy()
    b = -c.copy()
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign
    # b = -c is all zeros but one entry, so nearly every basis is degenerate and
    # Bland's rule crawls; a fixed tiny perturbation breaks the ties.  Reduced
    # costs do not involve b, so the final x is still feasible for G x <= h.
    b = b + PERTURB * (1.0 + np.abs(b).max()) * (1.0 + np.arange(n) / n) / n
    # phase 1: artificials appended after the real columns
    A1 = np.hstack([A, np.eye(n)])
    cost1 = np.concatenate([np.zeros(rows), np.ones(n)])
    basis = list(range(rows, rows + n))
    allowed = np.ones(rows + n, dtype=bool)
    feas_tol = 1e-9 * (1.0 + np.abs(b).max())
    status, piv1, _ = _revised_simplex(A1, b, cost1, basis, allowed, max_iter, target=feas_tol)
    yB = np.linalg.solve(A1[:, basis], b)
    if cost1[basis] @ yB > 1e-7 * (1.0 + np.abs(b).max()):
        # dual infeasible: the primal is unbounded below (or infeasible)
        raise Infeasible("objective is unbounded below on the feasible set", certificate=None)
    # drive zero-level artificials out of the basis
    for r in range(n):
        if basis[r] < rows:
            continue
        Binv_row = np.linalg.solve(A1[:, basis].T, np.eye(n)[r])
        alpha = Binv_row @ A
        alpha[[v for v in basis if v < rows]] = 0.0
        nz = np.flatnonzero(np.abs(alpha) > 1e-7)
        if len(nz) == 0:
            raise NumericalFailure("constraint matrix is rank deficient")
        basis[r] = int(nz[0])
    cost2 = h.copy()
    allowed = np.ones(rows, dtype=bool)
    status, piv2, ray = _revised_simplex(A, b, cost2, basis, allowed, max_iter)
    if status == "unbounded":
        raise Infeasible("inequalities G x <= h admit no solution", certificate=ray)
    B = A[:, basis]
    pi = np.linalg.solve(B.T, h[basis])
    x = sign * pi
    viol = float(np.max(G @ x - h)) if rows else 0.0
    if viol > 1e-7 * (1.0 + np.abs(h).max()):
        raise NumericalFailure(f"recovered primal point violates a constraint by {viol:.3g}")
    return LPResult(x=x, objective=float(c @ x), pivots=piv1 + piv2, active=np.array(sorted(basis)),
                    max_violation=max(viol, 0.0))
