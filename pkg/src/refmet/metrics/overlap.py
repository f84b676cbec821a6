"""Segmentation-overlap scoring."""

from __future__ import annotations

import numpy as np

from ..image import Mask, require_same_shape
from .score import MetricScore

__all__ = ["dice"]


def dice(a: Mask, b: Mask) -> MetricScore:
    """DICE overlap 2|A n B| / (|A| + |B|); two empty masks score 1."""
    require_same_shape(a, b)
    na, nb = int(a.data.sum()), int(b.data.sum())
    if na + nb == 0:
        return MetricScore("dice", 1.0)
    inter = int(np.logical_and(a.data, b.data).sum())
    return MetricScore("dice", 2.0 * inter / (na + nb))
