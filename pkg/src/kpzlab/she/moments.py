"""Deterministic moment oracles for the grid SHE."""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from ..kernels.spectral import robin_generator_bands
from .grid import SheGrid
from .solver import record_steps


def first_moment_oracle(Z0, grid: SheGrid, T: float) -> np.ndarray:
    """``P_T Z0``: the noise is mean zero and independent of the pre-step field."""
    return grid.propagator(T) @ np.asarray(Z0, dtype=float)


def second_moment_exact(Z0, grid: SheGrid, T_grid, noise: float = 1.0) -> np.ndarray:
    """``E[Z(T, X)^2]`` of the scheme itself, one row per entry of ``T_grid``.

    With ``C_n = E[Z_n Z_n^T]`` a step gives
    ``C_{n+1} = P (C_n + sigma^2 diag(diag C_n)) P^T`` exactly.
    """
    steps = record_steps(grid, T_grid)
    P = grid.one_step()
    s2 = (noise * grid.sigma) ** 2
    z0 = np.asarray(Z0, dtype=float)
    C = np.outer(z0, z0)
    out = np.empty((len(steps), grid.J + 1))
    n = 0
    for k, target in enumerate(steps):
        while n < target:
            C = P @ (C + s2 * np.diag(np.diag(C))) @ P.T
            n += 1
        out[k] = np.diag(C)
    return out


def second_moment_lyapunov(Z0, grid: SheGrid, T: float, noise: float = 1.0) -> np.ndarray:
    """``E[Z(T)^2]`` of the continuous-time grid SHE from its closed moment equation.

    ``C = E[Z Z^T]`` obeys ``C' = G C + C G + noise^2 dx^-1 diag(diag C)``, a
    linear ODE in ``(J+1)^2`` unknowns solved with a Krylov exponential.  This
    is the same limit the Volterra oracle targets, reached without any time
    quadrature, so the two check each other.
    """
    n = grid.J + 1
    d, e = robin_generator_bands(n, 1.0 - grid.A * grid.dx,
                                 None if grid.geometry == "half-line" else 1.0 - grid.B * grid.dx)
    G = sp.diags([e, d, e], [-1, 0, 1]) / grid.dx**2
    eye = sp.identity(n)
    L = sp.kron(G, eye) + sp.kron(eye, G) + sp.diags(np.eye(n).ravel() * noise**2 / grid.dx)
    z0 = np.asarray(Z0, dtype=float)
    C = expm_multiply(L.tocsr() * T, np.outer(z0, z0).ravel())
    return C.reshape(n, n).diagonal().copy()


def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


class VolterraOracle:
    """Second moment of the continuous-time grid SHE by product integration.

    Solves ``v(T) = (P_T Z0)^2 + int_0^T K(T - S) v(S) dS`` with
    ``K(tau)[i, j] = P_tau[i, j]^2 / dx`` and ``v`` piecewise linear on a
    uniform mesh of step ``h``.  The panel weights depend only on the lag,
    so they are computed once.  Near ``tau = 0`` the kernel varies on the
    scale ``dx^2``; the first panel is split geometrically (ratio 1/2, 8
    levels) before Gauss-Legendre is applied.
    """

    def __init__(self, grid: SheGrid, T_final: float, n_panels: int = 100, order: int = 8,
                 levels: int = 8, noise: float = 1.0):
        self.grid = grid
        self.h = T_final / n_panels
        self.n = n_panels
        self.noise2 = noise**2
        g, w = _gauss_legendre(order)
        h = self.h
        # a_d: weight decreasing from 1 at lag d h; b_d: increasing to 1 at lag (d+1) h
        self.a = np.empty((n_panels, grid.J + 1, grid.J + 1))
        self.b = np.empty_like(self.a)
        for d in range(n_panels):
            if d == 0:
                cuts = [0.0] + [h * 0.5**k for k in range(levels, -1, -1)]
            else:
                cuts = [d * h, (d + 1) * h]
            a = np.zeros((grid.J + 1, grid.J + 1))
            b = np.zeros_like(a)
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                for gi, wi in zip(g, w):
                    tau = lo + (hi - lo) * gi
                    u = (tau - d * h) / h
                    Kt = self._K(tau) * (wi * (hi - lo))
                    a += (1.0 - u) * Kt
                    b += u * Kt
            self.a[d], self.b[d] = a, b

    def apply(self, hist: list[np.ndarray], m: int, include_self: np.ndarray | None) -> np.ndarray:
        """``sum_l W_{m,l} v_l`` over the stored history (``include_self`` is ``v_m``)."""
        acc = np.zeros(self.grid.J + 1)
        if m == 0:
            return acc
        acc += self.b[m - 1] @ hist[0]
        for l in range(1, m):
            d = m - l
            acc += (self.b[d - 1] + self.a[d]) @ hist[l]
        if include_self is not None:
            acc += self.a[0] @ include_self
        return acc

    def solve(self, Z0) -> np.ndarray:
        """``v`` at the mesh times ``0, h, ..., n h`` (rows).

        The forcing ``f_0 = (P_S Z0)^2`` of point data changes on the time
        scale ``dx^2``, which a linear interpolant on the mesh cannot follow.
        So ``v = f_0 + u`` is solved instead, with ``u = f_1 + int K u`` and
        ``f_1 = int K f_0`` integrated directly on nodes graded at both ends.
        """
        f0 = self.forcing(Z0)
        f1 = self.first_chaos(Z0)
        lhs = np.eye(self.grid.J + 1) - self.a[0]
        hist = [f1[0]]
        for m in range(1, self.n + 1):
            rhs = f1[m] + self.apply(hist, m, None)
            hist.append(np.linalg.solve(lhs, rhs))
        return f0 + np.array(hist)

    def forcing(self, Z0) -> np.ndarray:
        Z0 = np.asarray(Z0, dtype=float)
        return np.array([self._heat(Z0, m * self.h) ** 2 for m in range(self.n + 1)])

    def _K(self, tau: float) -> np.ndarray:
        g = self.grid
        P = (g.eigenvectors * np.exp(g.eigenvalues * tau / g.dx**2)) @ g.eigenvectors.T
        return self.noise2 * P * P / g.dx

    def _heat(self, Z0, S: float) -> np.ndarray:
        g = self.grid
        V = g.eigenvectors
        return V @ (np.exp(g.eigenvalues * S / g.dx**2) * (V.T @ Z0))

    def first_chaos(self, Z0, levels: int = 10, order: int = 8) -> np.ndarray:
        """``f_1(t_m) = int_0^{t_m} K(t_m - S) (P_S Z0)^2 dS`` by graded Gauss-Legendre."""
        Z0 = np.asarray(Z0, dtype=float)
        g, w = _gauss_legendre(order)
        out = np.zeros((self.n + 1, self.grid.J + 1))
        for m in range(1, self.n + 1):
            T = m * self.h
            half = 0.5 * T
            # geometric cuts towards S = 0 and towards S = T
            left = [0.0] + [half * 0.5**k for k in range(levels, 0, -1)] + [half]
            cuts = left + [T - c for c in reversed(left[:-1])]
            acc = np.zeros(self.grid.J + 1)
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                for gi, wi in zip(g, w):
                    S = lo + (hi - lo) * gi
                    acc += (wi * (hi - lo)) * (self._K(T - S) @ self._heat(Z0, S) ** 2)
            out[m] = acc
        return out

    def chaos_terms(self, Z0, n_max: int = 4) -> np.ndarray:
        """``f_0 = (P Z0)^2`` and ``f_n = K * f_{n-1}``: second moments of the Wiener chaoses.

        Returned with shape ``(n_max + 1, n + 1, J + 1)``; their sum is the
        Neumann series of ``solve``.
        """
        f = [self.forcing(Z0)]
        for _ in range(n_max):
            prev = f[-1]
            cur = np.zeros_like(prev)
            for m in range(1, self.n + 1):
                cur[m] = self.apply(list(prev), m, prev[m])
            f.append(cur)
        return np.array(f)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.h


def volterra_ladder(Z0_fn, A: float, B, geometry: str, dx: float, X_max: float, T: float,
                    dt_list, rows=None, n_panels: int = 400) -> dict:
    """Relative gap between the exact scheme recursion and the Volterra oracle per ``dt``.

    ``Z0_fn(grid)`` builds the initial field.  The gap should shrink about
    linearly in ``dt`` since the recursion is a Riemann sum of the integral.
    """
    gaps = []
    ref = None
    for dt in dt_list:
        grid = SheGrid(A, B, geometry, dx=dx, dt=dt, X_max=X_max)
        if ref is None:
            oracle = VolterraOracle(grid, T, n_panels=n_panels)
            ref = oracle.solve(Z0_fn(grid))[-1]
        exact = second_moment_exact(Z0_fn(grid), grid, [T])[0]
        sel = slice(None) if rows is None else rows
        gaps.append(float(np.max(np.abs(exact[sel] - ref[sel]) / np.abs(ref[sel]))))
    gaps = np.array(gaps)
    lyap = second_moment_lyapunov(Z0_fn(grid), grid, T)
    sel = slice(None) if rows is None else rows
    oracle_gap = float(np.max(np.abs(lyap[sel] / ref[sel] - 1)))
    return {"dt": np.asarray(dt_list, dtype=float), "gap": gaps, "ratios": gaps[1:] / gaps[:-1],
            "oracle_vs_lyapunov": oracle_gap}


def chaos_decay(terms: np.ndarray, times: np.ndarray, site: int) -> dict:
    """Fit ``f_n(T) <= C T^{n/2} / Gamma(n/2 + 1)`` at one site for ``n >= 1``.

    Reports the constant needed per ``n`` (sup over ``T``) and the local
    log-log slope at the smallest times, which should approach ``n/2``.
    """
    out = {"n": [], "C": [], "slope": []}
    t = times[1:]
    for n in range(1, terms.shape[0]):
        fn = terms[n, 1:, site]
        scale = t ** (n / 2) / math.gamma(n / 2 + 1)
        out["n"].append(n)
        out["C"].append(float(np.max(fn / scale)))
        out["slope"].append(float(np.polyfit(np.log(t[:5]), np.log(fn[:5]), 1)[0]))
    return out
