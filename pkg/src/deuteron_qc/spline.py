"""Natural cubic (smoothing) splines for locating landscape minima.

Noiseless data are interpolated.  Noisy data are smoothed with the Reinsch
natural smoothing spline, the penalty chosen by minimizing the unbiased risk
estimate (the per-point variances are known from the shot statistics);
the fitted curve is the natural interpolant through the smoothed values, so
both cases share the same piecewise-cubic representation.  Two-parameter
landscapes use the tensor product of two such smoothers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .errors import DomainError

MIN_POINTS = 4
_LOG_LAMBDA = np.linspace(-10.0, 4.0, 141)


@dataclass(frozen=True)
class SplineMinimum:
    location: tuple[float, ...]
    value: float
    std_error: float
    # sampling part before the goodness-of-fit inflation
    sampling_error: float
    chi2_reduced: float
    effective_dof: float


def _penalty_matrix(x: np.ndarray) -> np.ndarray:
    """``Q R^{-1} Q^T`` such that ``f^T K f`` is the integrated squared curvature."""
    m = x.size
    h = np.diff(x)
    q = np.zeros((m, m - 2))
    r = np.zeros((m - 2, m - 2))
    for j in range(1, m - 1):
        q[j - 1, j - 1] = 1.0 / h[j - 1]
        q[j, j - 1] = -1.0 / h[j - 1] - 1.0 / h[j]
        q[j + 1, j - 1] = 1.0 / h[j]
        r[j - 1, j - 1] = (h[j - 1] + h[j]) / 3.0
        if j < m - 2:
            r[j - 1, j] = r[j, j - 1] = h[j] / 3.0
    return q @ np.linalg.solve(r, q.T)


def smoother_matrix(x: np.ndarray, weights: np.ndarray, lam: float) -> np.ndarray:
    """Hat matrix ``(W + lam K)^{-1} W`` of the natural smoothing spline."""
    w = np.diag(weights)
    return np.linalg.solve(w + lam * _penalty_matrix(x), w)


def _scale(x: np.ndarray) -> float:
    return float(x[-1] - x[0]) ** 3


def _ubre_lambda_1d(x, y, sigma) -> float:
    """Penalty minimizing the unbiased risk estimate (variances known)."""
    w = 1.0 / sigma**2
    w_norm = w / w.mean()
    best, best_score = 0.0, math.inf
    for loglam in _LOG_LAMBDA:
        lam = 10.0**loglam * _scale(x)
        s = smoother_matrix(x, w_norm, lam)
        resid = y - s @ y
        score = float(np.sum(w * resid**2)) + 2.0 * float(np.trace(s))
        if score < best_score:
            best, best_score = lam, score
    return best


def _validate_axis(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < MIN_POINTS:
        raise DomainError(f"spline fit needs at least {MIN_POINTS} points per axis")
    if np.any(np.diff(x) <= 0):
        raise DomainError("spline abscissae must be strictly increasing")
    return x


def _piecewise_min(cs: CubicSpline) -> tuple[float, float]:
    xs, coef = cs.x, cs.c
    cands = [xs[0], xs[-1]]
    for i in range(xs.size - 1):
        a, b, c = 3 * coef[0, i], 2 * coef[1, i], coef[2, i]
        h = xs[i + 1] - xs[i]
        roots = np.roots([a, b, c]) if abs(a) > 0 or abs(b) > 0 else np.array([])
        for t in np.atleast_1d(roots):
            if abs(t.imag) < 1e-12 and 0.0 <= t.real <= h:
                cands.append(xs[i] + t.real)
    vals = cs(np.array(cands))
    k = int(np.argmin(vals))
    return float(cands[k]), float(vals[k])


def fit_minimum_1d(x, y, sigma=None) -> SplineMinimum:
    """Minimum of the natural cubic spline through (or smoothing) the samples."""
    x = _validate_axis(x)
    y = np.asarray(y, dtype=float)
    m = x.size
    sig = np.zeros(m) if sigma is None else np.asarray(sigma, dtype=float)
    if np.all(sig > 0):
        w = 1.0 / sig**2
        w_norm = w / w.mean()
        s = smoother_matrix(x, w_norm, _ubre_lambda_1d(x, y, sig))
    else:
        w = None
        s = np.eye(m)
    fitted = s @ y
    cs = CubicSpline(x, fitted, bc_type="natural")
    loc, val = _piecewise_min(cs)
    cardinal = CubicSpline(x, np.eye(m), bc_type="natural")(loc)
    g = s.T @ cardinal
    samp = float(math.sqrt(np.sum((g * sig) ** 2)))
    edf = float(np.trace(s))
    chi2 = 0.0
    if w is not None and m - edf > 1e-9:
        chi2 = float(np.sum(w * (y - fitted) ** 2) / (m - edf))
    err = samp * math.sqrt(max(1.0, chi2))
    return SplineMinimum((loc,), val, err, samp, chi2, edf)


def _ubre_smoothers_2d(x1, x2, y, sigma):
    m1, m2 = x1.size, x2.size
    w = 1.0 / sigma**2
    s1s = [smoother_matrix(x1, np.ones(m1), 10.0**l * _scale(x1)) for l in _LOG_LAMBDA[::4]]
    s2s = [smoother_matrix(x2, np.ones(m2), 10.0**l * _scale(x2)) for l in _LOG_LAMBDA[::4]]
    best, best_score = (np.eye(m1), np.eye(m2)), math.inf
    for s1 in s1s:
        t1 = np.trace(s1)
        left = s1 @ y
        for s2 in s2s:
            resid = y - left @ s2.T
            score = float(np.sum(w * resid**2)) + 2.0 * t1 * float(np.trace(s2))
            if score < best_score:
                best, best_score = (s1, s2), score
    return best


def fit_minimum_2d(x1, x2, y, sigma=None) -> SplineMinimum:
    """Minimum of the tensor-product natural bicubic spline over a rectangular grid.

    ``y[i, j]`` is the sample at ``(x1[i], x2[j])``.  The minimum is found on a
    dense evaluation grid and polished with a bounded quasi-Newton step.
    """
    x1, x2 = _validate_axis(x1), _validate_axis(x2)
    y = np.asarray(y, dtype=float)
    if y.shape != (x1.size, x2.size):
        raise DomainError(f"grid values have shape {y.shape}, expected {(x1.size, x2.size)}")
    sig = np.zeros_like(y) if sigma is None else np.asarray(sigma, dtype=float)
    noisy = bool(np.all(sig > 0))
    if noisy:
        s1, s2 = _ubre_smoothers_2d(x1, x2, y, sig)
    else:
        s1, s2 = np.eye(x1.size), np.eye(x2.size)
    fitted = s1 @ y @ s2.T
    card1 = CubicSpline(x1, np.eye(x1.size), bc_type="natural")
    card2 = CubicSpline(x2, np.eye(x2.size), bc_type="natural")

    def surface(p):
        return float(card1(p[0]) @ fitted @ card2(p[1]))

    f1 = np.linspace(x1[0], x1[-1], 8 * (x1.size - 1) + 1)
    f2 = np.linspace(x2[0], x2[-1], 8 * (x2.size - 1) + 1)
    dense = card1(f1) @ fitted @ card2(f2).T
    i, j = np.unravel_index(int(np.argmin(dense)), dense.shape)
    res = minimize(
        surface,
        x0=[f1[i], f2[j]],
        method="L-BFGS-B",
        bounds=[(x1[0], x1[-1]), (x2[0], x2[-1])],
        options={"ftol": 1e-15, "gtol": 1e-12},
    )
    loc = tuple(float(v) for v in res.x)
    val = surface(res.x)
    if dense[i, j] < val:
        loc, val = (float(f1[i]), float(f2[j])), float(dense[i, j])
    u = s1.T @ card1(loc[0])
    v = s2.T @ card2(loc[1])
    g = np.outer(u, v)
    samp = float(math.sqrt(np.sum((g * sig) ** 2)))
    edf = float(np.trace(s1) * np.trace(s2))
    chi2 = 0.0
    if noisy and y.size - edf > 1e-9:
        chi2 = float(np.sum(((y - fitted) / sig) ** 2) / (y.size - edf))
    err = samp * math.sqrt(max(1.0, chi2))
    return SplineMinimum(loc, val, err, samp, chi2, edf)
