"""Composite Gauss-Legendre rules on graded panels."""
from __future__ import annotations

from typing import Callable

import numpy as np


def graded_edges(a: float, b: float, n_panels: int = 40, first: float | None = None) -> np.ndarray:
    """Panel edges on ``[a, b]`` refined geometrically towards ``a``."""
    if b <= a:
        return np.array([a, a])
    width = b - a
    first = min(first if first is not None else 1e-4 * width, width / n_panels)
    inner = a + np.geomspace(first, width, n_panels)
    return np.concatenate([[a], inner])


def composite_gl(f: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, order: int = 16):
    """Integrate ``f`` over consecutive panels.

    ``f`` takes an array of nodes and returns values with the nodes along the
    first axis.  The error estimate compares against the half-order rule on the
    same panels.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def rule(n):
        x, w = np.polynomial.legendre.leggauss(n)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        vals = np.asarray(f(nodes))
        return np.tensordot(weights, vals, axes=(0, 0))

    fine = rule(order)
    coarse = rule(max(order // 2, 2))
    return fine, np.max(np.abs(fine - coarse))
