"""Discrete cosine, sine and Fourier transforms used by the plan metrics.

The cosine and sine transforms are the un-normalized textbook sums, e.g.
DCT-II is ``X_k = sum_n x_n cos(pi/N (n + 1/2) k)``. Each equals half of
``scipy.fft.dct``/``dst`` with ``norm=None``. Plans are short (d <= a few
hundred), so the transforms are plain matrix products against cached bases.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

KINDS = (1, 2, 3)


@lru_cache(maxsize=64)
def _cosine_basis(kind: int, size: int) -> np.ndarray:
    k = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    if kind == 1:
        basis = np.cos(np.pi * n * k / (size - 1))
        basis[:, 0] *= 0.5
        basis[:, -1] *= 0.5
    elif kind == 2:
        basis = np.cos(np.pi / size * (n + 0.5) * k)
    else:
        basis = np.cos(np.pi / size * n * (k + 0.5))
        basis[:, 0] *= 0.5
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=64)
def _sine_basis(kind: int, size: int) -> np.ndarray:
    k = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    if kind == 1:
        basis = np.sin(np.pi * (n + 1) * (k + 1) / (size + 1))
    elif kind == 2:
        basis = np.sin(np.pi / size * (n + 0.5) * (k + 1))
    else:
        basis = np.sin(np.pi / size * (n + 1) * (k + 0.5))
        # last column is (-1)^k exactly; cos/sin rounding would leave ~1e-16 noise
        basis[:, -1] = 0.5 * np.where(np.arange(size) % 2 == 0, 1.0, -1.0)
    basis.setflags(write=False)
    return basis


def _check(kind: int, x: np.ndarray, minimum: int) -> np.ndarray:
    if kind not in KINDS:
        raise ValueError(f"transform type must be 1, 2 or 3, got {kind}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < minimum:
        raise ValueError(f"type-{kind} transform needs length >= {minimum}, got {x.shape[-1]}")
    return x


def dct(kind: int, x) -> np.ndarray:
    """DCT of type 1, 2 or 3 along the last axis."""
    x = _check(kind, x, 2 if kind == 1 else 1)
    return x @ _cosine_basis(kind, x.shape[-1]).T


def dst(kind: int, x) -> np.ndarray:
    """DST of type 1, 2 or 3 along the last axis."""
    x = _check(kind, x, 1)
    return x @ _sine_basis(kind, x.shape[-1]).T


def dft(x) -> np.ndarray:
    """Complex DFT, ``F_j = sum_n x_n exp(-2 pi i j n / d)``, no 1/d factor."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 1:
        raise ValueError("DFT needs at least one value")
    return np.fft.fft(x, axis=-1)


def dft_magnitudes(x) -> np.ndarray:
    return np.abs(dft(x))
