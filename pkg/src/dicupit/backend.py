"""Kernel backend selection.

The compiled numba kernels are the default; setting ``DICUPIT_BACKEND=numpy``
(or running without numba installed) switches every batch operation to the
pure-Python fallbacks. ``dicupit-bench backends`` times the two side by side.
"""

from __future__ import annotations

import os

from . import _kernels_py

VALID = ("numba", "numpy")


def load_kernels(name: str | None = None):
    """Return the kernel module for `name` ('numba' or 'numpy').

    With name=None, honors the DICUPIT_BACKEND environment variable and falls
    back to numpy when numba cannot be imported.
    """
    if name is None:
        name = os.environ.get("DICUPIT_BACKEND", "").strip().lower() or None
    if name is not None and name not in VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {VALID}")
    if name == "numpy":
        return _kernels_py
    try:
        from . import _kernels_numba
        return _kernels_numba
    except ImportError:
        if name == "numba":
            raise
        return _kernels_py


def backend_name(kernels) -> str:
    return "numpy" if kernels is _kernels_py else "numba"


_active = None


def active_kernels():
    """Process-wide default kernel module (resolved once, lazily)."""
    global _active
    if _active is None:
        _active = load_kernels()
    return _active
