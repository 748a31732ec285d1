"""Random-forest regression built on the tree kernels."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import backend
from .frame import Encoder, FeatureFrame, SchemaMismatch


class DegenerateData(ValueError):
    """Target (or every feature) is constant, nothing to learn."""


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    mtry: Optional[int] = None  # None: max(1, floor(sqrt(p)))
    min_node_size: int = 5

    def resolved_mtry(self, p: int) -> int:
        if self.mtry is not None:
            return max(1, min(self.mtry, p))
        return max(1, int(math.floor(math.sqrt(p))))


def tree_seed(seed: int, index: int) -> int:
    h = hashlib.blake2b(f"{seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little")


@dataclass
class Forest:
    encoder: Encoder
    params: ForestParams
    seed: int
    mtry: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    catmask: np.ndarray
    roots: np.ndarray
    is_cat: np.ndarray

    @property
    def n_trees(self) -> int:
        return len(self.roots)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != len(self.is_cat):
            raise SchemaMismatch(f"expected {len(self.is_cat)} encoded columns, got {X.shape[1]}")
        return backend.core.predict_packed(self.feature, self.threshold, self.left, self.right,
                                           self.value, self.catmask, self.roots, self.is_cat,
                                           np.ascontiguousarray(X, dtype=np.float64))

    def predict_columns(self, columns: dict) -> np.ndarray:
        n = len(next(iter(columns.values()))) if columns else 0
        return self.predict_matrix(self.encoder.transform(columns, n))

    def predict(self, row: dict) -> float:
        return float(self.predict_columns({k: [v] for k, v in row.items()})[0])

    def trees(self) -> List[dict]:
        out = []
        bounds = list(self.roots) + [len(self.feature)]
        for t in range(self.n_trees):
            a, b = int(bounds[t]), int(bounds[t + 1])
            nodes = []
            for i in range(a, b):
                f = int(self.feature[i])
                node = {"id": i - a, "value": float(self.value[i])}
                if f >= 0:
                    node.update(feature=f, left=int(self.left[i]), right=int(self.right[i]))
                    if self.is_cat[f]:
                        node["left_levels"] = [int(k) for k in np.nonzero(self.catmask[i])[0]]
                    else:
                        node["threshold"] = float(self.threshold[i])
                nodes.append(node)
            out.append({"nodes": nodes})
        return out

    def to_json(self) -> str:
        return json.dumps({
            "params": {"n_trees": self.params.n_trees, "mtry": self.mtry,
                       "min_node_size": self.params.min_node_size, "seed": self.seed},
            "columns": self.encoder.to_dict(),
            "trees": self.trees(),
        })


def fit(frame: FeatureFrame, params: ForestParams = ForestParams(), seed: int = 0) -> Forest:
    if frame.n < 2:
        raise DegenerateData("need at least two rows")
    y = np.asarray(frame.target, dtype=np.float64)
    if np.all(y == y[0]):
        raise DegenerateData(f"constant target {y[0]}")
    encoder = Encoder.fit(frame)
    X = encoder.transform({c.name: c.values for c in frame.columns}, frame.n)
    if X.shape[1] == 0 or np.all(X == X[0], axis=0).all():
        raise DegenerateData("no non-constant feature")
    is_cat, n_levels = encoder.layout()
    mtry = params.resolved_mtry(X.shape[1])
    trees = [backend.core.grow_tree(X, is_cat, n_levels, y, tree_seed(seed, t), mtry,
                                    params.min_node_size)
             for t in range(params.n_trees)]
    sizes = [len(t[0]) for t in trees]
    roots = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    cat = lambda k, dt: np.ascontiguousarray(np.concatenate([t[k] for t in trees]), dtype=dt)
    return Forest(encoder, params, seed, mtry, cat(0, np.int32), cat(1, np.float64),
                  cat(2, np.int32), cat(3, np.int32), cat(4, np.float64),
                  np.ascontiguousarray(np.concatenate([t[5] for t in trees]), dtype=np.uint8),
                  roots, is_cat)


def fit_xy(columns: dict, target: Sequence[float], params: ForestParams = ForestParams(),
           seed: int = 0, kinds: Optional[dict] = None) -> Forest:
    return fit(FeatureFrame.from_columns(columns, target, kinds), params, seed)
