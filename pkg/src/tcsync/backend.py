"""Selects the propagation core at import time.

The compiled Cython extension is preferred; the pure numpy/scipy core is
used when the extension is missing or when the environment variable
TCSYNC_FORCE_FALLBACK is set to a non-empty value.  Both expose the same
rk4_span contract and produce matching trajectories (up to floating-point
summation order).
"""
from __future__ import annotations

import os

from . import _core_py

if os.environ.get("TCSYNC_FORCE_FALLBACK"):
    _impl = _core_py
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _core_py

OK = _core_py.OK
LEAKED = _core_py.LEAKED
NONFINITE = _core_py.NONFINITE

rk4_span = _impl.rk4_span
state_reductions = _core_py.state_reductions


def backend_name() -> str:
    """'compiled' when the Cython core is active, 'python' otherwise."""
    return _impl.BACKEND_NAME


def get_span_impl(name: str):
    """Explicit core lookup ('compiled' or 'python'); for benchmarks/tests."""
    if name == "python":
        return _core_py.rk4_span
    if name == "compiled":
        from . import _core  # raises ImportError if not built
        return _core.rk4_span
    raise ValueError(f"unknown backend {name!r}")
