"""Small least-squares helpers for power-law exponents on log-log axes."""

from dataclasses import dataclass

import numpy as np

__all__ = ["PowerFit", "fit_loglog"]


@dataclass
class PowerFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def fit_loglog(x, y):
    """Fit log y = slope * log x + intercept by least squares.

    Nonpositive pairs are dropped; needs at least two surviving points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if len(x) < 2:
        raise ValueError("need at least two positive points for a log-log fit")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerFit(float(slope), float(intercept), float(r2), len(x))
