"""Picks the compiled tree kernels when available.

Set ``CAUSAL_FL_PURE=1`` to force the numpy implementation.
"""
from __future__ import annotations

import logging
import os

from . import _core_py

log = logging.getLogger(__name__)

core = _core_py
NAME = "python"

if os.environ.get("CAUSAL_FL_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _compiled

        core = _compiled
        NAME = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        log.debug("compiled forest kernels unavailable, using numpy fallback")


def use(name: str) -> None:
    """Switch backend at runtime ("compiled" or "python")."""
    global core, NAME
    if name == "python":
        core, NAME = _core_py, "python"
    elif name == "compiled":
        from . import _core as _compiled

        core, NAME = _compiled, "compiled"
    else:
        raise ValueError(f"unknown backend {name!r}")
