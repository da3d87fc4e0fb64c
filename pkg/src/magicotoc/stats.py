"""Fits and rank statistics used by the scan reports."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    slope_err: float
    intercept_err: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.slope_err, self.intercept_err))


def fit_linear(xs, ys, y_errs=None) -> LinearFit:
    """Weighted least squares for ``y = slope * x + intercept``.

    With ``y_errs`` the weights are ``1 / y_err**2`` and the parameter errors
    treat them as absolute.  Without, all weights are one and the errors are
    scaled by the residual variance.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("xs and ys differ in length")
    if x.size < 3:
        raise ValueError("need at least three points")
    if y_errs is None:
        w = np.ones_like(x)
    else:
        e = np.asarray(y_errs, dtype=np.float64)
        if np.any(~(e > 0)):
            raise ValueError("y errors must be positive")
        w = 1.0 / e**2
    s = w.sum()
    sx = (w * x).sum()
    sy = (w * y).sum()
    sxx = (w * x * x).sum()
    sxy = (w * x * y).sum()
    det = s * sxx - sx * sx
    if det <= 1e-12 * max(1.0, s * sxx):
        raise ValueError("degenerate design: all x values are equal")
    slope = (s * sxy - sx * sy) / det
    intercept = (sxx * sy - sx * sxy) / det
    var_slope = s / det
    var_intercept = sxx / det
    if y_errs is None:
        resid = y - slope * x - intercept
        scale = (resid @ resid) / (x.size - 2)
        var_slope *= scale
        var_intercept *= scale
    return LinearFit(slope, intercept, math.sqrt(var_slope), math.sqrt(var_intercept))


def spearman(xs, ys) -> float:
    return float(stats.spearmanr(xs, ys).statistic)


def pearson(xs, ys) -> float:
    return float(np.corrcoef(np.asarray(xs, float), np.asarray(ys, float))[0, 1])
