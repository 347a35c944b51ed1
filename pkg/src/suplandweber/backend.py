"""Kernel backend selection.

The compiled extension is picked at import time when available; otherwise
the numpy fallback takes over. Both expose the same module-level contract
(codes, elementary kernels, ``run_driver``), so callers only ever talk to
``active()`` unless they explicitly request one side, as the benchmark and
the equivalence tests do.
"""

from __future__ import annotations

from . import _kernels_py

try:
    from . import _kernels as _active_module
except ImportError:  # extension not built; numpy fallback
    _active_module = _kernels_py

COMPILED_AVAILABLE = _active_module is not _kernels_py

OP_DENSE = _kernels_py.OP_DENSE
OP_CONV = _kernels_py.OP_CONV
REG_NONE = _kernels_py.REG_NONE
REG_SQNORM = _kernels_py.REG_SQNORM
REG_L1 = _kernels_py.REG_L1
REG_TV = _kernels_py.REG_TV
STOP_FIXED = _kernels_py.STOP_FIXED
STOP_DISCREPANCY = _kernels_py.STOP_DISCREPANCY
STOP_CONVERGENCE = _kernels_py.STOP_CONVERGENCE

REG_CODES = {"squared-norm": REG_SQNORM, "l1": REG_L1, "tv-1d": REG_TV}


def active():
    """The backend module selected at import time."""
    return _active_module


def active_name() -> str:
    return "compiled" if _active_module is not _kernels_py else "python"


def get(name: str):
    """Fetch a backend by name ("compiled" or "python"); raises if the
    compiled extension was requested but is not importable."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
