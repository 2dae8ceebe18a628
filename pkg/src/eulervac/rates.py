"""Log-log slope fitting used by every rate study."""
from __future__ import annotations

import numpy as np


def fit_slope(eps, values, drop_first: bool = False) -> float:
    """Least-squares slope of log(values) against log(eps).

    Points are ordered by decreasing ``eps``; ``drop_first`` discards the
    coarsest one.  Returns ``nan`` when fewer than two positive values remain.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(-eps)
    eps, values = eps[order], values[order]
    if drop_first:
        eps, values = eps[1:], values[1:]
    ok = (eps > 0) & (values > 0) & np.isfinite(values)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(eps[ok]), np.log(values[ok]), 1)[0])


def dyadic(k_min: int, k_max: int) -> np.ndarray:
    """2^-k for k = k_min..k_max, largest first."""
    return 2.0 ** -np.arange(k_min, k_max + 1, dtype=float)
