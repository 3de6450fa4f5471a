"""Exponential-integrator Euler-Maruyama for the multiplicative SHE.

One step is ``Z <- P_dt (Z * (1 + sigma xi))`` with ``xi`` i.i.d. standard
normals per site and ``sigma^2 = dt/dx``.  Noise for replica ``r`` comes from
the counter stream ``stream_key(seed, r)``, draw ``2 (n (J+1)/2 + j/2)`` for
site ``j`` at step ``n``, so every replica is reproducible on its own.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, uint64

from ..rng import nb_normal_pair, stream_key
from .grid import SheGrid


@njit(cache=True)
def _solve(Pb, b, Z0, n_steps, sigma, keys, rec_steps, out, lin, lin_acc, quad, quad_acc, neg):
    R = keys.shape[0]
    n = Z0.shape[0]
    n_pairs = (n + 1) // 2
    z = np.empty(n)
    kicked = np.empty(n)
    for r in range(R):
        key = keys[r]
        z[:] = Z0
        k_rec = 0
        ever_neg = np.zeros(n, dtype=np.bool_)
        blown = False
        lin_run = np.zeros(lin.shape[0])
        quad_run = np.zeros(quad.shape[0])
        for step in range(n_steps + 1):
            while k_rec < rec_steps.shape[0] and rec_steps[k_rec] == step:
                out[r, k_rec, :] = z
                lin_acc[r, k_rec, :] = lin_run
                quad_acc[r, k_rec, :] = quad_run
                k_rec += 1
            if step == n_steps:
                break
            # running functionals are left-endpoint sums over the pre-step field
            for m in range(lin.shape[0]):
                s = 0.0
                for j in range(n):
                    s += lin[m, j] * z[j]
                lin_run[m] += s
            for m in range(quad.shape[0]):
                s = 0.0
                for j in range(n):
                    s += quad[m, j] * z[j] * z[j]
                quad_run[m] += s
            counter = uint64(2 * step * n_pairs)
            j = 0
            while j < n:
                g1, g2 = nb_normal_pair(key, counter)
                counter += uint64(2)
                kicked[j] = z[j] * (1.0 + sigma * g1)
                if j + 1 < n:
                    kicked[j + 1] = z[j + 1] * (1.0 + sigma * g2)
                j += 2
            for i in range(n):
                lo = max(0, i - b)
                hi = min(n - 1, i + b)
                s = 0.0
                for jj in range(lo, hi + 1):
                    s += Pb[i, jj - i + b] * kicked[jj]
                z[i] = s
                if s < 0.0:
                    ever_neg[i] = True
                if not np.isfinite(s):
                    blown = True
            if blown:
                break
        cnt = 0
        for i in range(n):
            if ever_neg[i]:
                cnt += 1
        neg[r] = cnt if not blown else -1


@dataclass
class SheTrajectory:
    """Fields of a block of replicas at the recorded times.

    ``values[r, k, j]`` is the field of replica ``replicas[r]`` at ``T[k]``
    and site ``j``; ``lin[r, k, m]`` and ``quad[r, k, m]`` are the sums over
    steps ``n`` before ``T[k]`` of ``sum_j lin_m(j) Z_n(j)`` and
    ``sum_j quad_m(j) Z_n(j)^2``.
    """

    grid: SheGrid
    replicas: np.ndarray
    seed: int
    T: np.ndarray
    values: np.ndarray
    negative_sites: np.ndarray
    lin: np.ndarray | None = None
    quad: np.ndarray | None = None

    @property
    def blown_up(self) -> np.ndarray:
        return self.negative_sites < 0

    @property
    def negativity_fraction(self) -> float:
        ok = ~self.blown_up
        return float(self.negative_sites[ok].sum() / (ok.sum() * (self.grid.J + 1))) if ok.any() else 0.0


def record_steps(grid: SheGrid, T_grid) -> np.ndarray:
    steps = np.rint(np.asarray(T_grid, dtype=float) / grid.dt).astype(np.int64)
    if np.any(np.abs(steps * grid.dt - np.asarray(T_grid)) > 1e-9 * np.maximum(1, np.asarray(T_grid))):
        raise ValueError("recorded times must be multiples of dt")
    if np.any(np.diff(steps) < 0):
        raise ValueError("T_grid must be non-decreasing")
    return steps


def solve(Z0, grid: SheGrid, T_grid, seed: int, replicas, noise: float = 1.0,
          lin=None, quad=None) -> SheTrajectory:
    """Run ``replicas`` (indices) from ``Z0`` and record at ``T_grid``.

    ``noise`` scales the kick standard deviation (0 gives the heat flow).
    """
    replicas = np.atleast_1d(np.asarray(replicas, dtype=np.int64))
    Z0 = np.asarray(Z0, dtype=float)
    if Z0.shape != (grid.J + 1,):
        raise ValueError(f"initial field needs {grid.J + 1} sites")
    steps = record_steps(grid, T_grid)
    n_steps = int(steps.max(initial=0))
    keys = np.array([stream_key(seed, int(r)) for r in replicas], dtype=np.uint64)
    lin = np.zeros((0, grid.J + 1)) if lin is None else np.atleast_2d(np.asarray(lin, dtype=float))
    quad = np.zeros((0, grid.J + 1)) if quad is None else np.atleast_2d(np.asarray(quad, dtype=float))
    out = np.empty((len(replicas), len(steps), grid.J + 1))
    lin_acc = np.zeros((len(replicas), len(steps), lin.shape[0]))
    quad_acc = np.zeros((len(replicas), len(steps), quad.shape[0]))
    neg = np.zeros(len(replicas), dtype=np.int64)
    _solve(grid.banded(), grid.band, Z0, n_steps, noise * grid.sigma, keys, steps, out,
           lin, lin_acc, quad, quad_acc, neg)
    return SheTrajectory(grid, replicas, seed, np.asarray(T_grid, dtype=float), out, neg,
                         lin_acc if lin.shape[0] else None, quad_acc if quad.shape[0] else None)
