"""Sample sets and their on-disk format.

A dataset is stored as a CSV with header ``x1,...,xk,z`` next to a JSON
manifest sharing its stem (``data.csv`` / ``data.json``)::

    {"k": 2, "field": "rational", "modulus": null, "seed": 0,
     "truth": {...}, "labels": ["clean", "corrupt", ...]}

Exact kinds serialize rationals as ``a/b`` and residues as plain ints; floats
use the shortest repr that parses back bit-identically.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .chebyshev import ChebModel
from .fields import RR, Field, field_from_spec
from .poly import MultiPoly

CLEAN, NOISY, CORRUPT = "clean", "noisy", "corrupt"


@dataclass
class DataSet:
    X: np.ndarray
    z: np.ndarray
    field: Field = RR
    labels: list | None = None
    truth: MultiPoly | ChebModel | None = None
    seed: int | None = None
    index: np.ndarray | None = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        dtype = float if self.field is RR else object
        X = np.asarray(self.X, dtype=dtype)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        z = np.asarray(self.z, dtype=dtype).reshape(-1)
        if len(X) != len(z):
            raise ValueError("X and z lengths differ")
        if dtype is object:
            X = np.vectorize(self.field.check, otypes=[object])(X) if X.size else X
            z = np.array([self.field.check(v) for v in z], dtype=object)
        self.X, self.z = X, z
        if self.index is None:
            self.index = np.arange(len(z))
        else:
            self.index = np.asarray(self.index, dtype=int)
        if self.labels is not None and len(self.labels) != len(z):
            raise ValueError("labels length differs from sample count")

    def __len__(self):
        return len(self.z)

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def points(self):
        for x, z in zip(self.X, self.z):
            yield tuple(x), z

    def subset(self, positions) -> "DataSet":
        """Rows at ``positions`` (positions, not original indices), indices preserved."""
        positions = np.asarray(positions, dtype=int)
        labels = None if self.labels is None else [self.labels[i] for i in positions]
        return DataSet(self.X[positions], self.z[positions], self.field, labels, self.truth,
                       self.seed, self.index[positions], dict(self.meta))

    def corrupt_mask(self) -> np.ndarray:
        if self.labels is None:
            raise ValueError("dataset carries no labels")
        return np.array([lab == CORRUPT for lab in self.labels], dtype=bool)

    # serialization
    def manifest(self) -> dict:
        doc = {"k": self.k, "field": self.field.name, "modulus": self.field.modulus, "seed": self.seed}
        if self.truth is not None:
            doc["truth"] = self.truth.to_json()
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        if not np.array_equal(self.index, np.arange(len(self))):
            doc["index"] = self.index.tolist()
        if self.meta:
            doc["meta"] = self.meta
        return doc

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.k)] + ["z"])
        fmt = self.field.format
        for x, z in zip(self.X, self.z):
            w.writerow([fmt(v) for v in x] + [fmt(z)])
        return buf.getvalue()

    def save(self, path) -> None:
        path = Path(path)
        atomic_write(path, self.to_csv_text())
        atomic_write(manifest_path(path), json.dumps(self.manifest(), indent=1) + "\n")

    @classmethod
    def load(cls, path, field: Field | None = None) -> "DataSet":
        path = Path(path)
        mpath = manifest_path(path)
        man = json.loads(mpath.read_text()) if mpath.exists() else {}
        if field is None:
            field = field_from_spec(man.get("field", "float"), man.get("modulus"))
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path} is empty")
        header, body = rows[0], [r for r in rows[1:] if r]
        if not header or header[-1].strip() != "z":
            raise ValueError(f"{path}: header must end with column 'z'")
        k = len(header) - 1
        if k < 1:
            raise ValueError(f"{path}: need at least one coordinate column")
        if not body:
            raise ValueError(f"{path} has no data rows")
        parse = field.parse
        X = [[parse(v) for v in r[:k]] for r in body]
        z = [parse(r[k]) for r in body]
        if any(len(r) != k + 1 for r in body):
            raise ValueError(f"{path}: ragged rows")
        truth = None
        if "truth" in man:
            truth = load_model(man["truth"])
        return cls(np.array(X, dtype=float if field is RR else object).reshape(len(body), k), z, field,
                   man.get("labels"), truth, man.get("seed"), man.get("index"), man.get("meta", {}))


def manifest_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def load_model(doc):
    if doc.get("basis") == "chebyshev":
        return ChebModel.from_json(doc)
    return MultiPoly.from_json(doc)


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the file the mode a plain open() would
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
