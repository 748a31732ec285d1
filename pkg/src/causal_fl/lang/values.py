"""Runtime values.

MIL values map onto Python objects: ``int`` (wrapped to 64 bits), ``float``,
``bool``, ``str``. ``NA`` (``None``) marks a missing profile value and is
never produced by expression evaluation.
"""
from __future__ import annotations

NA = None

_MIN = -(2**63)
_SPAN = 2**64


def wrap_int(v: int) -> int:
    if _MIN <= v < -_MIN:
        return v
    return (v - _MIN) % _SPAN + _MIN


def type_name(v) -> str:
    if v is None:
        return "na"
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "str"
    return "void"


def to_str(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if v != v:
            return "nan"
        if v in (float("inf"), float("-inf")):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return "NA"
    return str(v)


def is_number(v) -> bool:
    return (isinstance(v, int) and not isinstance(v, bool)) or isinstance(v, float)
