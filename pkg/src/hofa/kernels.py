"""Kernel dispatch: compiled Cython loops when available, numpy otherwise.

Set HOFA_PURE_PYTHON=1 before import to force the numpy implementations.
``BACKEND`` records which one is active.
"""
import os

from . import _fallback

if os.environ.get("HOFA_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"

conv_table = _impl.conv_table
conv_mean = _impl.conv_mean
degree_violation = _impl.degree_violation
character_system_norms = _impl.character_system_norms
