"""FitReport: the uniform outcome record written by every fitter."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chebyshev import ChebModel, evaluate_model
from .dataset import DataSet, atomic_write, load_model
from .fields import PrimeField
from .poly import MultiPoly, evaluate, evaluate_many


@dataclass
class FitReport:
    algorithm: str
    status: str = "ok"
    model: MultiPoly | ChebModel | None = None
    flagged: list = field(default_factory=list)
    delta_achieved: float | None = None
    residuals: dict = field(default_factory=dict)
    sup_vs_truth: float | None = None
    counters: dict = field(default_factory=dict)
    elapsed_ms: float = 0.0
    config: dict = field(default_factory=dict)
    noise_vector: list | None = None
    locator: MultiPoly | None = None
    q: MultiPoly | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        doc = {
            "algorithm": self.algorithm,
            "status": self.status,
            "poly": None if self.model is None else self.model.to_json(),
            "flagged": [int(i) for i in self.flagged],
            "delta_achieved": self.delta_achieved,
            "residuals": self.residuals,
            "sup_vs_truth": self.sup_vs_truth,
            "counters": self.counters,
            "wb_calls": self.counters.get("wb_calls"),
            "elapsed_ms": self.elapsed_ms,
            "config": self.config,
            "noise_vector": self.noise_vector,
            "locator": None if self.locator is None else self.locator.to_json(),
            "q": None if self.q is None else self.q.to_json(),
            "extra": self.extra,
        }
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, default=_json_default)

    def save(self, path) -> None:
        atomic_write(path, self.dumps() + "\n")

    @classmethod
    def from_json(cls, doc) -> "FitReport":
        def poly(key):
            v = doc.get(key)
            return None if v is None else load_model(v)

        return cls(
            algorithm=doc["algorithm"],
            status=doc.get("status", "ok"),
            model=poly("poly"),
            flagged=list(doc.get("flagged", [])),
            delta_achieved=doc.get("delta_achieved"),
            residuals=dict(doc.get("residuals", {})),
            sup_vs_truth=doc.get("sup_vs_truth"),
            counters=dict(doc.get("counters", {})),
            elapsed_ms=doc.get("elapsed_ms", 0.0),
            config=dict(doc.get("config", {})),
            noise_vector=doc.get("noise_vector"),
            locator=poly("locator"),
            q=poly("q"),
            extra=dict(doc.get("extra", {})),
        )

    @classmethod
    def load(cls, path) -> "FitReport":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def __eq__(self, other):
        if not isinstance(other, FitReport):
            return NotImplemented
        return json.dumps(self.to_json(), sort_keys=True, default=_json_default) == json.dumps(
            other.to_json(), sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def residual_stats(model, data: DataSet) -> dict:
    """max / mean |z - p(x)| over every row of ``data`` (disagreement count over GF)."""
    if isinstance(model, ChebModel):
        r = np.abs(data.z.astype(float) - evaluate_model(model, data.X.astype(float)))
        return {"max": float(r.max()), "mean": float(r.mean())}
    if isinstance(data.field, PrimeField):
        bad = sum(1 for x, z in data.points() if evaluate(model, x) != z)
        return {"disagreements": bad, "n": len(data)}
    if data.field.exact:
        r = [abs(z - evaluate(model, x)) for x, z in data.points()]
        return {"max": float(max(r)), "mean": float(sum(r) / len(r)), "exact_agreements": sum(1 for v in r if v == 0)}
    r = np.abs(data.z - evaluate_many(model, data.X))
    return {"max": float(r.max()), "mean": float(r.mean())}

