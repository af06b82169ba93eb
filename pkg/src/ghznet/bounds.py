"""Closed-form rate bounds for the square-grid comparisons.

Link transmissivity is identified with link success probability, ``p = eta``.
"""
import math

import numpy as np


def ultimate_capacity(eta):
    """Four-link min-cut capacity ``-4 log2(1 - eta)`` in ebits per mode."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0) or np.any(eta >= 1):
        raise ValueError("transmissivity must lie in [0, 1)")
    out = -4.0 * np.log2(1.0 - eta)
    return float(out) if out.ndim == 0 else out


def max_flow_bound(p):
    """Rate with perfect memories: four edge-disjoint paths of rate ``p``."""
    out = 4.0 * np.asarray(p, dtype=float)
    return float(out) if out.ndim == 0 else out


def gcc_bound(F):
    """Both consumers must sit in the giant component: ``F**2``."""
    out = np.asarray(F, dtype=float) ** 2
    return float(out) if out.ndim == 0 else out


def bsm_rate_bound(F, q, d_ab):
    """Bell-measurement-only bound ``4 F^2 q^(d_AB - 1)``."""
    if np.any(np.asarray(d_ab) < 1):
        raise ValueError("consumer distance must be >= 1")
    out = 4.0 * np.asarray(F, dtype=float) ** 2 * np.asarray(q, dtype=float) ** (np.asarray(d_ab) - 1)
    return float(out) if out.ndim == 0 else out


def log_rate_slope(distances, rates, stderrs):
    """Weighted least-squares slope of ``log(rate)`` against distance.

    Returns ``(slope, slope_stderr)``. Points with zero rate are dropped.
    """
    d = np.asarray(distances, dtype=float)
    r = np.asarray(rates, dtype=float)
    s = np.asarray(stderrs, dtype=float)
    keep = r > 0
    d, r, s = d[keep], r[keep], s[keep]
    if len(d) < 2:
        raise ValueError("need at least two positive rates")
    y = np.log(r)
    w = (r / np.maximum(s, 1e-300)) ** 2  # 1 / var(log r)
    X = np.stack([np.ones_like(d), d], axis=1)
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    beta = cov @ X.T @ (w * y)
    dof = len(d) - 2
    scale = 1.0
    if dof > 0:
        resid = y - X @ beta
        scale = max(1.0, float(w @ resid**2) / dof)
    return float(beta[1]), math.sqrt(cov[1, 1] * scale)
