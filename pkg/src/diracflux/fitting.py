"""Log-log power-law fitting, shared by every decay-rate check and report.

The slope definition is the plain least-squares one,
    slope = sum((lx - <lx>) (ly - <ly>)) / sum((lx - <lx>)^2),
with lx = ln x, ly = ln y.  The plot renderer annotates figures with the
same estimator, so recorded and displayed slopes agree to rounding.
"""

import numpy as np

__all__ = ["loglog_slope", "loglog_fit"]


def loglog_fit(x, y):
    """Least-squares (slope, intercept) of ln y against ln x."""
    lx = np.log(np.asarray(x, float))
    ly = np.log(np.asarray(y, float))
    if lx.size < 2:
        raise ValueError("need at least two samples to fit a slope")
    dx = lx - lx.mean()
    slope = float(np.sum(dx * (ly - ly.mean())) / np.sum(dx * dx))
    intercept = float(ly.mean() - slope * lx.mean())
    return slope, intercept


def loglog_slope(x, y):
    return loglog_fit(x, y)[0]
