"""Kernel backend selection.

``TREEADAPT_BACKEND=numba`` (default) runs the learning kernels compiled with
numba; ``TREEADAPT_BACKEND=numpy`` forces the pure-numpy path. If numba cannot
be imported the numpy path is used regardless.
"""

from __future__ import annotations

import os

ENV_VAR = "TREEADAPT_BACKEND"
BACKENDS = ("numba", "numpy")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def default_backend() -> str:
    requested = os.environ.get(ENV_VAR, "numba").strip().lower() or "numba"
    if requested not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        return "numpy"
    return requested


def resolve(backend: str | None) -> str:
    if backend is None:
        return default_backend()
    backend = backend.lower()
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def kernels(backend: str | None = None):
    """Module implementing ``aggregate_subtrees`` and ``learning_step``."""
    if resolve(backend) == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod
