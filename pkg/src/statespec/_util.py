"""Internal helpers shared across modules."""

from __future__ import annotations

import numpy as np


def frozen_array(values, dtype=None, ndim=None, name="array") -> np.ndarray:
    """Copy ``values`` into a read-only ndarray, optionally checking rank."""
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimension(s), got shape {arr.shape}")
    arr.setflags(write=False)
    return arr
