"""Monotone least-squares fits used to smooth Monte Carlo pass proportions.

The 1-D fit is weighted pool-adjacent-violators (via
:func:`scipy.optimize.isotonic_regression`). The 2-D fit projects onto
surfaces that are nondecreasing along both axes, using Dykstra's alternating
projections between the "rows monotone" and "columns monotone" cones; each
projection is itself a batch of 1-D fits.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import DomainError


def _weights_like(y: np.ndarray, weights) -> np.ndarray:
    if weights is None:
        return np.ones_like(y)
    w = np.broadcast_to(np.asarray(weights, dtype=float), y.shape).copy()
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise DomainError("weights must be positive and finite")
    return w


def isotonic_fit(y, weights=None) -> np.ndarray:
    """Weighted least-squares nondecreasing fit to the sequence ``y``.

    Returns the minimiser of sum w_i (f_i - y_i)^2 subject to
    f_1 <= f_2 <= ... The fit is idempotent: refitting its output returns it.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DomainError("isotonic_fit expects a 1-D sequence")
    if y.size == 0:
        return y.copy()
    w = _weights_like(y, weights)
    if np.all(np.diff(y) >= 0):
        # already feasible; returning it unchanged makes refits exactly idempotent
        return y.copy()
    return np.asarray(isotonic_regression(y, weights=w, increasing=True).x)


def _rows_monotone(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.vstack([isotonic_fit(z[i], w[i]) for i in range(z.shape[0])])


def isotonic_fit_2d(z, weights=None, tol: float = 1e-10, max_iter: int = 10_000) -> np.ndarray:
    """Weighted L2 projection of ``z`` onto nondecreasing-in-both-axes surfaces.

    ``z[i, j]`` is indexed by (first factor, second factor). Dykstra's
    algorithm converges to the projection; a final running maximum along each
    axis removes residual violations at the level of ``tol`` so the result is
    exactly monotone.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise DomainError("isotonic_fit_2d expects a 2-D array")
    if z.size == 0:
        return z.copy()
    w = _weights_like(z, weights)
    x = z.copy()
    p = np.zeros_like(z)
    q = np.zeros_like(z)
    for _ in range(max_iter):
        y = _rows_monotone(x + p, w)
        p = x + p - y
        x_new = _rows_monotone((y + q).T, w.T).T
        q = y + q - x_new
        done = np.max(np.abs(x_new - x)) < tol and np.max(np.abs(x_new - y)) < tol
        x = x_new
        if done:
            break
    x = np.maximum.accumulate(x, axis=0)
    return np.maximum.accumulate(x, axis=1)


def is_monotone(values, axis: int | None = None) -> bool:
    """True when ``values`` is nondecreasing (along every axis if 2-D)."""
    v = np.asarray(values, dtype=float)
    axes = range(v.ndim) if axis is None else (axis,)
    return all(np.all(np.diff(v, axis=a) >= 0) for a in axes)


def step_interpolate(grid, fitted, n, below: float = 0.0):
    """Value of a fitted step curve at ``n``.

    The curve takes the fitted value of the largest grid point <= ``n``;
    sizes smaller than the first grid point get ``below``.
    """
    grid = np.asarray(grid)
    fitted = np.asarray(fitted, dtype=float)
    n_arr = np.asarray(n)
    idx = np.searchsorted(grid, n_arr, side="right") - 1
    out = np.where(idx >= 0, fitted[np.clip(idx, 0, None)], below)
    return float(out) if out.ndim == 0 else out
