"""Continuum Robin heat kernel as the limit of rescaled lattice kernels.

At scale ``eps`` the lattice kernel is read in macroscopic units,

    P^eps_T(X, Y) = eps^-1 p^R_{T/eps^2}(X/eps, Y/eps),

with bilinear interpolation between lattice points, and the limit is taken
by Richardson extrapolation over a halving ladder of scales.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels.halfline import HalfLineImages
from .kernels.spectral import robin_spectrum


def _bilinear_nodes(Z: np.ndarray, eps: float):
    u = np.asarray(Z, dtype=float) / eps
    lo = np.floor(u + 1e-12).astype(np.int64)
    w = np.clip(u - lo, 0.0, 1.0)
    return lo, w


@dataclass
class ContinuumKernel:
    """Ladder of scales ``eps0 * 2^-j``, ``j < levels``.

    On the interval ``eps0`` must be ``1/N0`` so every level is a lattice
    ``{0..N}`` with ``N = N0 * 2^j``.
    """

    A: float
    B: float | None = None
    geometry: str = "half-line"
    eps0: float = 0.1
    levels: int = 4
    orders: tuple = (1.0, 2.0)

    def __post_init__(self):
        if self.geometry == "interval":
            N0 = round(1.0 / self.eps0)
            if abs(N0 * self.eps0 - 1.0) > 1e-12 or self.B is None:
                raise ValueError("interval ladder needs eps0 = 1/N0 and B")

    @property
    def scales(self) -> list[float]:
        return [self.eps0 * 2.0**-j for j in range(self.levels)]

    def level(self, T: float, X, Y, eps: float) -> np.ndarray:
        """``P^eps_T`` on the outer product ``X x Y``."""
        X = np.atleast_1d(np.asarray(X, dtype=float))
        Y = np.atleast_1d(np.asarray(Y, dtype=float))
        xl, wx = _bilinear_nodes(X, eps)
        yl, wy = _bilinear_nodes(Y, eps)
        t = T / eps**2
        xs = np.unique(np.concatenate([xl, xl + 1]))
        ys = np.unique(np.concatenate([yl, yl + 1]))
        mu_A = 1.0 - self.A * eps
        if self.geometry == "interval":
            N = round(1.0 / eps)
            xs, ys = xs[xs <= N], ys[ys <= N]
            sp = robin_spectrum(N, mu_A, 1.0 - self.B * eps)
            Mat = sp.kernel(t, xs, ys)
        else:
            W = int(max(xs.max(), ys.max())) + 1
            Mat = HalfLineImages(t, mu_A, W).matrix(xs, ys)
        # at X = 1 on the interval the upper neighbour carries zero weight; clamp it
        def pick(a, b):
            ia = np.searchsorted(xs, np.minimum(a, xs[-1]))
            ib = np.searchsorted(ys, np.minimum(b, ys[-1]))
            return Mat[np.ix_(ia, ib)]

        v00, v10 = pick(xl, yl), pick(xl + 1, yl)
        v01, v11 = pick(xl, yl + 1), pick(xl + 1, yl + 1)
        wx_, wy_ = wx[:, None], wy[None, :]
        val = (1 - wx_) * (1 - wy_) * v00 + wx_ * (1 - wy_) * v10 + (1 - wx_) * wy_ * v01 + wx_ * wy_ * v11
        return val / eps

    def ladder(self, T: float, X, Y) -> np.ndarray:
        if self.eps0**2 > T / 10:
            raise ValueError(f"T={T} below the resolvable floor 10*eps0^2={10 * self.eps0**2}")
        return np.stack([self.level(T, X, Y, e) for e in self.scales])

    def __call__(self, T: float, X, Y) -> tuple[np.ndarray, np.ndarray]:
        """Extrapolated ``P_T(X, Y)`` and an error estimate from the last two levels."""
        vals = self.ladder(T, X, Y)
        return richardson(vals, self.orders)


def richardson(vals: np.ndarray, orders=(1.0, 2.0)) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate a halving ladder ``vals[j]`` (scale ``eps0 2^-j``).

    Successive error orders are eliminated as in a Romberg table, using as
    many stages as the ladder allows.  The error estimate is the change in the
    final column between its last two entries.
    """
    vals = np.asarray(vals, dtype=float)
    if len(vals) < 2:
        return vals[-1], np.full_like(vals[-1], np.inf)
    if np.isscalar(orders) or isinstance(orders, (int, float)):
        orders = (float(orders),)
    col = list(vals)
    stages = min(len(orders), len(vals) - 1)
    for k in range(stages):
        f = 2.0 ** orders[k] - 1.0
        col = [col[j + 1] + (col[j + 1] - col[j]) / f for j in range(len(col) - 1)]
    if len(col) >= 2:
        err = np.abs(col[-1] - col[-2])
    else:
        err = np.abs(col[-1] - (vals[-1] + (vals[-1] - vals[-2]) / (2.0 ** orders[0] - 1.0)))
    return col[-1], err


def gaussian(T: float, Z) -> np.ndarray:
    return np.exp(-np.asarray(Z) ** 2 / (2 * T)) / math.sqrt(2 * math.pi * T)


def robin_bc_residual(kernel: ContinuumKernel, T: float, Y, side: str = "left") -> np.ndarray:
    """Per-level one-sided boundary residual.

    Left: ``(P(eps, Y) - P(0, Y))/eps - A P(0, Y)``.  Right (interval):
    ``(P(1, Y) - P(1 - eps, Y))/eps + B P(1, Y)``, the condition the lattice
    ghost ``p(N+1) = (1 - B eps) p(N)`` produces.
    """
    out = []
    for e in kernel.scales:
        if side == "left":
            P = kernel.level(T, [0.0, e], Y, e)
            out.append((P[1] - P[0]) / e - kernel.A * P[0])
        else:
            P = kernel.level(T, [1.0 - e, 1.0], Y, e)
            out.append((P[1] - P[0]) / e + kernel.B * P[1])
    return np.array(out)


def total_mass(kernel: ContinuumKernel, T: float, X) -> tuple[np.ndarray, np.ndarray]:
    """``int_I P_T(X, Y) dY`` per level (lattice sums), then extrapolated."""
    X = np.atleast_1d(np.asarray(X, dtype=float))
    per_level = []
    for e in kernel.scales:
        if kernel.geometry == "interval":
            Y = np.arange(round(1 / e) + 1) * e
        else:
            Y = np.arange(int((X.max() + 10 * math.sqrt(T) + 5) / e) + 1) * e
        per_level.append(kernel.level(T, X, Y, e).sum(axis=1) * e)
    return richardson(np.array(per_level), kernel.orders)


def mass_bound_check(kernel: ContinuumKernel, T_grid, X: float) -> dict:
    """Fit ``C`` in ``|int P_T(X, Y) dY - 1| <= C T^{1/2}``."""
    devs = np.array([abs(total_mass(kernel, T, [X])[0][0] - 1.0) for T in T_grid])
    T_grid = np.asarray(T_grid, dtype=float)
    return {"T": T_grid, "deviation": devs, "C": float(np.max(devs / np.sqrt(T_grid)))}


def delta_initial_check(kernel: ContinuumKernel, T_grid, X: float, phi) -> dict:
    """``|int P_T(X, Y) phi(Y) dY - phi(X)|`` over a grid of small times."""
    out = []
    for T in T_grid:
        per_level = []
        for e in kernel.scales:
            top = 1.0 if kernel.geometry == "interval" else X + 10 * math.sqrt(T) + 5
            Y = np.arange(int(round(top / e)) + 1) * e
            per_level.append(kernel.level(T, [X], Y, e)[0] @ phi(Y) * e)
        val, _ = richardson(np.array(per_level), kernel.orders)
        out.append(abs(float(val) - float(phi(np.array([X]))[0])))
    T_grid = np.asarray(T_grid, dtype=float)
    devs = np.array(out)
    return {"T": T_grid, "deviation": devs, "C": float(np.max(devs / np.sqrt(T_grid)))}
