"""Random-forest regression with a compiled core and a numpy fallback."""
from . import backend
from .frame import BOOLEAN, CATEGORICAL, NUMERIC, Column, FeatureFrame, SchemaMismatch
from .model import DegenerateData, Forest, ForestParams, fit, fit_xy

__all__ = [
    "BOOLEAN",
    "CATEGORICAL",
    "NUMERIC",
    "Column",
    "DegenerateData",
    "FeatureFrame",
    "Forest",
    "ForestParams",
    "SchemaMismatch",
    "backend",
    "fit",
    "fit_xy",
]
