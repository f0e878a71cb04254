"""Shared low-level numerics: quadrature, bisection, scalar minimization, regression."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BracketError

__all__ = ["UniformGrid", "trapezoid", "bisect", "minimize_scalar", "fit_slope"]

_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class UniformGrid:
    """Uniform 1-D grid over [left, right] with ``n_cells`` cells."""

    left: float
    right: float
    n_cells: int

    def __post_init__(self):
        if not self.left < self.right:
            raise ValueError(f"grid requires left < right, got [{self.left}, {self.right}]")
        if self.n_cells < 2:
            raise ValueError(f"grid requires n_cells >= 2, got {self.n_cells}")

    @property
    def spacing(self) -> float:
        return (self.right - self.left) / self.n_cells

    def nodes(self) -> np.ndarray:
        # left + j*spacing rather than linspace, so node positions are reproducible
        return self.left + self.spacing * np.arange(self.n_cells + 1)


def trapezoid(values: Sequence[float] | np.ndarray, grid: UniformGrid) -> float:
    """Composite trapezoid rule for node values sampled on ``grid``."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size != grid.n_cells + 1:
        raise ValueError(f"expected {grid.n_cells + 1} node values, got shape {v.shape}")
    return float(grid.spacing * (v.sum() - 0.5 * (v[0] + v[-1])))


def bisect(
    G: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_iter: int = 200,
) -> float:
    """Bisection root of a monotone increasing scalar function.

    Stops once |G(c)| <= tol or the bracket width falls below tol.  G may
    return +inf on part of the bracket; only the sign is used there.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not lo < hi:
        raise ValueError(f"bad bracket [{lo}, {hi}]")
    g_lo = G(lo)
    if abs(g_lo) <= tol:
        return lo
    g_hi = G(hi)
    if abs(g_hi) <= tol and np.isfinite(g_hi):
        return hi
    if not (g_lo < 0.0 < g_hi):
        raise BracketError(f"G does not change sign on [{lo}, {hi}]: G(lo)={g_lo}, G(hi)={g_hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        g_mid = G(mid)
        if np.isfinite(g_mid) and abs(g_mid) <= tol:
            return mid
        if g_mid < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
    return 0.5 * (lo + hi)


def minimize_scalar(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[float, float]:
    """Golden-section minimum of a unimodal function on [lo, hi].

    Returns (argmin, min).
    """
    if not lo < hi:
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    g1, g2 = g(x1), g(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if g1 <= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - _INV_GOLDEN * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + _INV_GOLDEN * (b - a)
            g2 = g(x2)
        it += 1
    x = x1 if g1 <= g2 else x2
    return float(x), float(g(x))


def fit_slope(ts: Sequence[float] | np.ndarray, xs: Sequence[float] | np.ndarray) -> float:
    """Least-squares slope of xs against ts."""
    t = np.asarray(ts, dtype=float)
    x = np.asarray(xs, dtype=float)
    if t.shape != x.shape or t.ndim != 1 or t.size < 2:
        raise ValueError("ts and xs must be equal-length 1-D sequences of length >= 2")
    if not np.all(np.diff(t) > 0):
        raise ValueError("ts must be strictly increasing")
    t0 = t - t.mean()
    return float(np.dot(t0, x - x.mean()) / np.dot(t0, t0))
