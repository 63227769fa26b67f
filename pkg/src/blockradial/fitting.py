"""Slope fitting for oscillatory decay data."""

from __future__ import annotations

import numpy as np

__all__ = ["envelope_points", "envelope_slope", "loglog_slope"]


def envelope_points(z, vals, nblocks=12):
    """Per-log-block maxima of |vals|, located at their argmax abscissa.

    Points sit on the oscillation envelope, so a log-log line through them
    estimates the envelope decay rate without block-placement bias.
    """
    z = np.asarray(z, dtype=float)
    vals = np.abs(np.asarray(vals))
    edges = np.exp(np.linspace(np.log(z[0]), np.log(z[-1]), nblocks + 1))
    zs, vs = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (z >= a) & (z <= b)
        if not m.any():
            continue
        i = np.argmax(vals[m])
        zs.append(z[m][i])
        vs.append(vals[m][i])
    return np.array(zs), np.array(vs)


def envelope_slope(z, vals, nblocks=12):
    """Log-log slope of the oscillation envelope of |vals| over z."""
    zs, vs = envelope_points(z, vals, nblocks)
    keep = vs > 0
    return float(np.polyfit(np.log(zs[keep]), np.log(vs[keep]), 1)[0])


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
