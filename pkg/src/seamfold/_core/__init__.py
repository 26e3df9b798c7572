"""Geometry kernel core with backend selection at import time.

The compiled Cython backend is preferred; the numpy reference backend is
used when the extension was not built (source-only installs) or when
``SEAMFOLD_KERNEL_BACKEND=python`` is set.  Both backends implement the
same semantics bit-exactly; ``available_backends`` exposes every importable
one for cross-checking and benchmarks.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


def available_backends() -> dict[str, ModuleType]:
    backends: dict[str, ModuleType] = {"python": _kernels_py}
    compiled = _load_compiled()
    if compiled is not None:
        backends["cython"] = compiled
    return backends


_forced = os.environ.get("SEAMFOLD_KERNEL_BACKEND", "").strip().lower()
if _forced == "python":
    _impl = _kernels_py
    BACKEND = "python"
elif _forced in ("", "cython"):
    _compiled = _load_compiled()
    if _compiled is None:
        if _forced == "cython":
            raise ImportError("compiled kernel backend requested but not built")
        _impl = _kernels_py
        BACKEND = "python"
    else:
        _impl = _compiled
        BACKEND = "cython"
else:
    raise ImportError(f"unknown SEAMFOLD_KERNEL_BACKEND value: {_forced!r}")

fill_polygon = _impl.fill_polygon
points_in_polygon = _impl.points_in_polygon
uncovered_intervals = _impl.uncovered_intervals

__all__ = [
    "BACKEND",
    "available_backends",
    "fill_polygon",
    "points_in_polygon",
    "uncovered_intervals",
]
