"""Robin-compatible test functions and the martingale-problem statistic."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import SheGrid
from .solver import SheTrajectory


def smooth_step(x, a: float, b: float) -> np.ndarray:
    """C-infinity function equal to 1 on ``x <= a`` and 0 on ``x >= b``."""
    x = np.asarray(x, dtype=float)
    u = np.clip((x - a) / (b - a), 0.0, 1.0)

    def bump(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    f, g = bump(1.0 - u), bump(u)
    return f / (f + g)


@dataclass
class TestFunction:
    """A test function with its closed form; derivatives are taken numerically."""

    __test__ = False  # keeps pytest from collecting it

    kind: str
    A: float
    B: float | None
    geometry: str
    f: Callable

    def __call__(self, X) -> np.ndarray:
        return self.f(np.asarray(X, dtype=float))

    def derivative(self, X, order: int = 1, h: float = 1e-3) -> np.ndarray:
        """Central differences with one Richardson step (error ``O(h^4)``)."""
        X = np.asarray(X, dtype=float)

        def d(hh):
            if order == 1:
                return (self.f(X + hh) - self.f(X - hh)) / (2 * hh)
            return (self.f(X + hh) - 2 * self.f(X) + self.f(X - hh)) / hh**2

        return (4 * d(h / 2) - d(h)) / 3

    def boundary_residuals(self) -> dict:
        """``phi'(0) - A phi(0)`` and on the interval ``phi'(1) + B phi(1)``."""
        out = {"left": float(self.derivative([0.0], h=1e-4)[0] - self.A * self([0.0])[0])}
        if self.geometry == "interval":
            out["right"] = float(self.derivative([1.0], h=1e-4)[0] + self.B * self([1.0])[0])
        return out


def test_function(kind: str, A: float, B: float | None = None, geometry: str = "half-line",
                  width: float = 0.6) -> TestFunction:
    """``phi = psi (1 + A X) chi`` near 0, with ``phi'(0) = A phi(0)``.

    ``kind`` is ``"plateau"`` (``psi = 1``, so ``phi`` is exactly linear near
    the boundary) or ``"gaussian"`` (``psi = exp(-X^2 / (2 w^2))``, even at 0).
    On the interval the mirror construction ``psi(1-X) (1 + B (1-X))`` is
    blended in with a smooth partition of unity flat near both ends, giving
    ``phi'(1) = -B phi(1)``.  The closed form extends past the ends, so
    the boundary conditions hold for central differences too.
    """
    if kind == "plateau":
        def psi(x):
            return np.ones_like(x)
    elif kind == "gaussian":
        def psi(x):
            return np.exp(-0.5 * (x / (0.5 * width)) ** 2)
    else:
        raise ValueError(f"unknown test function kind {kind!r}")

    if geometry == "half-line":
        a, b = 0.25 * width, width

        def f(x):
            return psi(x) * (1.0 + A * x) * smooth_step(x, a, b)
    elif geometry == "interval":
        if B is None:
            raise ValueError("interval test function needs B")

        def f(x):
            w = smooth_step(x, 0.3, 0.7)
            return w * psi(x) * (1.0 + A * x) + (1.0 - w) * psi(1.0 - x) * (1.0 + B * (1.0 - x))
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return TestFunction(kind, A, B, geometry, f)


def functional_rows(phis, grid: SheGrid) -> tuple[np.ndarray, np.ndarray]:
    """Per-step functional rows for the solver, two per test function.

    Linear rows: ``(1/2) phi''`` (continuum drift) and ``(P^T - I) phi / dt``
    (the scheme's exact drift).  Quadratic rows: ``phi^2`` and ``(P^T phi)^2``.

    The continuum drift uses trapezoid weights, i.e. half weight on the
    boundary sites.  With the Robin ghost the grid Laplacian of a smooth
    ``phi`` is ``phi''/4`` at the boundary site rather than ``phi''/2``: that
    site stands for half a cell.  Uniform weights would leave an ``O(dx)``
    drift bias proportional to ``phi''(0)``.
    """
    if isinstance(phis, TestFunction):
        phis = [phis]
    X = grid.X
    P = grid.one_step()
    w = np.ones_like(X)
    w[0] = 0.5
    if grid.geometry == "interval":
        w[-1] = 0.5
    lin, quad = [], []
    for phi in phis:
        ph = phi(X)
        Pt_phi = P.T @ ph
        lin += [0.5 * phi.derivative(X, 2) * w, (Pt_phi - ph) / grid.dt]
        quad += [ph**2, Pt_phi**2]
    return np.array(lin), np.array(quad)


def martingale_statistic(traj: SheTrajectory, phis) -> dict:
    """z-scores of the mean increments of ``Y_T(phi)`` and ``Q_T(phi)`` between recorded times.

    ``Y_T = (Z_T, phi) - (Z_0, phi) - int_0^T (Z_S, (1/2) phi'') dS`` and
    ``Q_T = Y_T^2 - int_0^T ||Z_S phi||^2 dS``, grid quadratures with left
    endpoint sums in time.  The ``discrete`` variant replaces the drift and
    bracket by the scheme's exact one-step conditional mean and variance,
    for which both are exact martingales.  ``traj`` must have been run with
    ``functional_rows(phis, grid)`` and start recording at ``T = 0``.
    """
    if isinstance(phis, TestFunction):
        phis = [phis]
    g = traj.grid
    if traj.lin is None or traj.lin.shape[-1] != 2 * len(phis):
        raise ValueError("trajectory lacks the functional rows of these test functions")
    if traj.T[0] != 0.0:
        raise ValueError("first recorded time must be 0")
    ok = ~traj.blown_up
    results = []
    for i, phi in enumerate(phis):
        pairing = g.dx * traj.values[ok] @ phi(g.X)              # (R, K)
        res_phi = {"kind": phi.kind}
        for name, col in (("continuum", 2 * i), ("discrete", 2 * i + 1)):
            drift = g.dt * g.dx * traj.lin[ok][:, :, col]
            bracket = g.dt * g.dx * traj.quad[ok][:, :, col]
            Y = pairing - pairing[:, :1] - drift
            Q = Y**2 - bracket
            res = {}
            for key, val in (("Y", Y), ("Q", Q)):
                inc = np.diff(val, axis=1)
                mean = inc.mean(axis=0)
                se = inc.std(axis=0, ddof=1) / math.sqrt(inc.shape[0])
                res[key] = {"mean": mean, "se": se, "z": np.divide(mean, se, out=np.zeros_like(mean), where=se > 0)}
            res_phi[name] = res
        res_phi["max_abs_z"] = float(max(np.abs(res_phi[v][k]["z"]).max()
                                         for v in ("continuum", "discrete") for k in ("Y", "Q")))
        results.append(res_phi)
    return {"T": traj.T, "replicas": int(ok.sum()), "per_phi": results,
            "max_abs_z": max(r["max_abs_z"] for r in results)}
