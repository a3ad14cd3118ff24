"""Chebyshev basis and tensor-product Chebyshev models on [-1, 1]^k."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .fields import RR
from .poly import MultiPoly

CLAMP = 1e-12


def chebyshev_eval(i: int, x: float) -> float:
    """T_i(x) by the three-term recurrence; ``x`` must lie in [-1, 1] up to 1e-12."""
    if i < 0:
        raise ValueError("Chebyshev index must be >= 0")
    x = float(x)
    if abs(x) > 1 + CLAMP:
        raise ValueError(f"x={x} outside [-1, 1]")
    x = min(1.0, max(-1.0, x))
    t0, t1 = 1.0, x
    if i == 0:
        return t0
    for _ in range(i - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1


def cheb_vander(x, n: int) -> np.ndarray:
    """Matrix V[k, i] = T_i(x[k]) for i = 0..n (recurrence, no clamping)."""
    x = np.asarray(x, dtype=float)
    V = np.empty(x.shape + (n + 1,))
    V[..., 0] = 1.0
    if n >= 1:
        V[..., 1] = x
    for i in range(2, n + 1):
        V[..., i] = 2 * x * V[..., i - 1] - V[..., i - 2]
    return V


def chebyshev_monomial_coeffs(i: int) -> list[int]:
    """Integer power-basis coefficients (low to high) of T_i."""
    t0, t1 = [1], [0, 1]
    if i == 0:
        return t0
    for _ in range(i - 1):
        nxt = [0] + [2 * c for c in t1]
        for j, c in enumerate(t0):
            nxt[j] -= c
        t0, t1 = t1, nxt
    return t1


@dataclass
class ChebModel:
    """Tensor Chebyshev expansion ``sum c[i, j, ...] T_i(x1) T_j(x2) ...``.

    ``coeffs`` has shape ``tuple(d + 1 for d in degrees)``; ``delta`` is the
    noise bound achieved by the fit that produced the model (0 if unknown).
    """

    coeffs: np.ndarray
    delta: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.array(self.coeffs, dtype=float)
        if self.coeffs.ndim < 1:
            raise ValueError("coefficient grid needs at least one axis")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("non-finite Chebyshev coefficient")

    @property
    def vars(self) -> int:
        return self.coeffs.ndim

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(s - 1 for s in self.coeffs.shape)

    @property
    def total_degree(self) -> int:
        """Largest index sum carrying a nonzero coefficient (0 for the zero model)."""
        nz = np.argwhere(self.coeffs != 0)
        return int(nz.sum(axis=1).max()) if len(nz) else 0

    def __call__(self, X) -> np.ndarray:
        return evaluate_model(self, X)

    def derivative(self, axis: int) -> "ChebModel":
        d = npcheb.chebder(self.coeffs, axis=axis)
        pad = [(0, 0)] * self.vars
        pad[axis] = (0, 1)
        return ChebModel(np.pad(d, pad), 0.0)

    def to_json(self) -> dict:
        doc = {
            "basis": "chebyshev",
            "degrees": list(self.degrees),
            "coeffs": self.coeffs.tolist(),
            "delta": float(self.delta),
        }
        if self.meta:
            doc["meta"] = self.meta
        return doc

    @classmethod
    def from_json(cls, doc) -> "ChebModel":
        if doc.get("basis") != "chebyshev":
            raise ValueError("not a Chebyshev model")
        coeffs = np.array(doc["coeffs"], dtype=float)
        if list(coeffs.shape) != [d + 1 for d in doc["degrees"]]:
            raise ValueError("coefficient grid does not match degrees")
        return cls(coeffs, float(doc.get("delta", 0.0)), dict(doc.get("meta", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def evaluate_model(model: ChebModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.vars:
        raise ValueError(f"points have {X.shape[1]} coordinates, model has {model.vars}")
    out = model.coeffs
    # contract one axis at a time, keeping the sample axis first
    V = cheb_vander(X[:, 0], model.degrees[0])
    out = np.tensordot(V, out, axes=([1], [0]))
    for a in range(1, model.vars):
        V = cheb_vander(X[:, a], model.degrees[a])
        out = np.einsum("ni,ni...->n...", V, out)
    return out


def grid_points(g: int, k: int = 2, box=None) -> np.ndarray:
    """Tensor grid of ``g`` equally spaced nodes per axis, as an (g**k, k) array."""
    axes = []
    for a in range(k):
        lo, hi = (-1.0, 1.0) if box is None else box[a]
        axes.append(np.linspace(lo, hi, g))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def sup_norm(model: ChebModel, g: int = 101, box=None) -> float:
    return float(np.max(np.abs(evaluate_model(model, grid_points(g, model.vars, box)))))


def cheb_to_monomial(model: ChebModel) -> MultiPoly:
    """Expand the tensor Chebyshev series into a float monomial-basis polynomial."""
    k = model.vars
    basis = [chebyshev_monomial_coeffs(i) for i in range(max(model.degrees) + 1)]
    terms: dict = {}
    for idx in product(*(range(d + 1) for d in model.degrees)):
        c = model.coeffs[idx]
        if c == 0:
            continue
        for powers in product(*(enumerate(basis[i]) for i in idx)):
            w = 1
            for _, b in powers:
                w *= b
            if w == 0:
                continue
            exp = tuple(p for p, _ in powers)
            terms[exp] = terms.get(exp, 0.0) + float(c) * w
    return MultiPoly(terms, k, RR)


def monomial_to_cheb(p: MultiPoly, degrees=None) -> ChebModel:
    """Chebyshev coefficients of a (float-convertible) polynomial."""
    k = p.vars
    if degrees is None:
        degrees = [max(0, p.degree_in(a)) if not p.is_zero() else 0 for a in range(k)]
    coeffs = np.zeros([d + 1 for d in degrees])
    for exp, c in p.terms.items():
        if any(e > d for e, d in zip(exp, degrees)):
            raise ValueError(f"term {exp} exceeds degrees {degrees}")
        block = np.array(1.0)
        for e in exp:
            v = npcheb.poly2cheb([0] * e + [1])
            block = np.multiply.outer(block, v)
        sl = tuple(slice(0, e + 1) for e in exp)
        coeffs[sl] += float(c) * block
    return ChebModel(coeffs)
