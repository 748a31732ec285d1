"""Feature frames and their numeric encoding for the tree kernels."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

NUMERIC = "Numeric"
CATEGORICAL = "Categorical"
BOOLEAN = "Boolean"
NA_LEVEL = "<NA>"


class SchemaMismatch(ValueError):
    pass


@dataclass
class Column:
    name: str
    kind: str
    values: list


def infer_kind(values: Sequence) -> str:
    seen = [v for v in values if v is not None]
    if seen and all(isinstance(v, bool) for v in seen):
        return BOOLEAN
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in seen):
        return NUMERIC
    return CATEGORICAL


def level_key(v) -> str:
    if v is None:
        return NA_LEVEL
    # keep 1 and "1" apart when a column mixes types
    return f"{type(v).__name__}:{v!r}"


@dataclass
class FeatureFrame:
    columns: List[Column]
    target: List[float]

    def __post_init__(self):
        n = len(self.target)
        for c in self.columns:
            if len(c.values) != n:
                raise ValueError(f"column {c.name} has {len(c.values)} values, expected {n}")

    @property
    def n(self) -> int:
        return len(self.target)

    @classmethod
    def from_columns(cls, named: dict, target, kinds: Optional[dict] = None) -> "FeatureFrame":
        kinds = kinds or {}
        cols = [Column(k, kinds.get(k) or infer_kind(v), list(v)) for k, v in named.items()]
        return cls(cols, [float(t) for t in target])


@dataclass
class ColumnCode:
    name: str
    kind: str
    median: float = 0.0
    has_missing: bool = False
    levels: List[str] = field(default_factory=list)

    def to_dict(self):
        return {"name": self.name, "kind": self.kind, "median": self.median,
                "has_missing": self.has_missing, "levels": self.levels}


class Encoder:
    """Column-wise encoding fitted on training data.

    Numeric and boolean NA are imputed with the training median and get a
    companion is-missing column; categorical NA is a level of its own.
    """

    def __init__(self, codes: List[ColumnCode]):
        self.codes = codes

    @classmethod
    def fit(cls, frame: FeatureFrame) -> "Encoder":
        codes = []
        for c in frame.columns:
            if c.kind == CATEGORICAL:
                levels = sorted({level_key(v) for v in c.values})
                codes.append(ColumnCode(c.name, c.kind, levels=levels))
            else:
                present = [float(v) for v in c.values if v is not None]
                med = float(np.median(present)) if present else 0.0
                codes.append(ColumnCode(c.name, c.kind, med, len(present) < len(c.values)))
        return cls(codes)

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.codes]

    def layout(self):
        """(is_cat, n_levels) for the encoded matrix columns."""
        is_cat, n_levels = [], []
        for c in self.codes:
            if c.kind == CATEGORICAL:
                is_cat.append(1)
                n_levels.append(len(c.levels))
            else:
                is_cat.append(0)
                n_levels.append(0)
                if c.has_missing:
                    is_cat.append(0)
                    n_levels.append(0)
        return np.array(is_cat, dtype=np.uint8), np.array(n_levels, dtype=np.int32)

    def encode_column(self, code: ColumnCode, values) -> List[np.ndarray]:
        if code.kind == CATEGORICAL:
            index = {lv: i for i, lv in enumerate(code.levels)}
            return [np.array([index.get(level_key(v), -1) for v in values], dtype=np.float64)]
        if any(v is not None and not isinstance(v, (int, float)) for v in values):
            raise SchemaMismatch(f"non-numeric value in column {code.name}")
        out = np.array([code.median if v is None else float(v) for v in values], dtype=np.float64)
        if code.has_missing:
            return [out, np.array([1.0 if v is None else 0.0 for v in values])]
        return [out]

    def transform(self, columns: dict, n: int) -> np.ndarray:
        """Encode a mapping name -> values into a C-contiguous matrix."""
        if set(columns) != set(self.names):
            missing = sorted(set(self.names) - set(columns))
            extra = sorted(set(columns) - set(self.names))
            raise SchemaMismatch(f"row schema differs: missing={missing} extra={extra}")
        parts = []
        for code in self.codes:
            vals = columns[code.name]
            if len(vals) != n:
                raise SchemaMismatch(f"column {code.name} has wrong length")
            parts.extend(self.encode_column(code, vals))
        if not parts:
            return np.zeros((n, 0))
        return np.ascontiguousarray(np.column_stack(parts), dtype=np.float64)

    def to_dict(self):
        return [c.to_dict() for c in self.codes]
