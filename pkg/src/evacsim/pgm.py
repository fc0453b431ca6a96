"""Minimal plain-text PGM (P2) writer for debug dumps of grid fields."""

from __future__ import annotations

import numpy as np


def format_pgm(values: np.ndarray, maxval: int) -> str:
    """Format an (h, w) array of ints in [0, maxval] as a P2 image string."""
    values = np.clip(np.asarray(values, dtype=np.int64), 0, maxval)
    h, w = values.shape
    lines = ["P2", f"{w} {h}", str(maxval)]
    lines.extend(" ".join(str(v) for v in row) for row in values)
    return "\n".join(lines) + "\n"
