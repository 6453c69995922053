"""
Relative p-norm reconstruction errors.
"""
import logging
import math
from typing import Iterable

import numpy as np

from errors import ArgumentError

logger = logging.getLogger(__name__)

NORMS = (1, 2, math.inf)
NORM_LABELS = {1: "L1", 2: "L2", math.inf: "Linf"}


def norm_order(p) -> float:
    if p in ("inf", "Linf", "linf", np.inf):
        return math.inf
    if p in (1, 2):
        return p
    raise ArgumentError(f"unsupported norm order {p!r}; use 1, 2 or inf")


def relative_error(recon, truth, p=2) -> float:
    """||recon - truth||_p / ||truth||_p over the flattened arrays."""
    order = norm_order(p)
    recon = np.asarray(recon, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if recon.shape != truth.shape:
        raise ArgumentError(f"shape mismatch: {recon.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth.ravel(), ord=order)
    if denom == 0:
        raise ArgumentError("relative error is undefined for a zero-norm reference")
    return float(np.linalg.norm((recon - truth).ravel(), ord=order) / denom)


def mean_relative_error(pairs: Iterable[tuple[np.ndarray, np.ndarray]], p=2, label: str = "") -> float:
    """Mean of ``relative_error`` over (recon, truth) pairs.

    Pairs whose reference is all zeros (a silent stem) are left out and
    counted in a warning. NaN when every reference is silent.
    """
    errors = []
    skipped = 0
    for recon, truth in pairs:
        if not np.any(np.asarray(truth)):
            skipped += 1
            continue
        errors.append(relative_error(recon, truth, p))
    if skipped:
        where = f" for {label}" if label else ""
        logger.warning(
            f"Skipped {skipped} of {skipped + len(errors)} zero-norm references in the "
            f"{NORM_LABELS[norm_order(p)]} error{where}"
        )
    if not errors:
        return math.nan
    return float(np.mean(errors))
