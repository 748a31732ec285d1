"""The MIL subject language: parser, static checks, interpreter, printer."""
from .ast import Program
from .errors import ArityMismatch, MilError, MilSyntaxError, UnresolvedVariable
from .interp import (
    ASSERTION_FAILED,
    COMPLETED,
    DEFAULT_STEP_LIMIT,
    RUNTIME_ERROR,
    ArgumentTypeError,
    ExecutionResult,
    execute,
)
from .parser import parse
from .render import render

__all__ = [
    "ASSERTION_FAILED",
    "COMPLETED",
    "DEFAULT_STEP_LIMIT",
    "RUNTIME_ERROR",
    "ArgumentTypeError",
    "ArityMismatch",
    "ExecutionResult",
    "MilError",
    "MilSyntaxError",
    "Program",
    "UnresolvedVariable",
    "execute",
    "parse",
    "render",
]
