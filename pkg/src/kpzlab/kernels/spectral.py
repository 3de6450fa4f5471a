"""Spectral decomposition of the Robin Laplacian on {0, ..., N}."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq


def robin_generator_bands(n_sites: int, mu_left: float, mu_right: float | None):
    """Diagonal and off-diagonal of ``(1/2) Delta`` with Robin ghosts.

    ``mu_right=None`` means an absorbing far wall ``f(n_sites) = 0``.
    """
    d = np.full(n_sites, -1.0)
    d[0] = 0.5 * (mu_left - 2.0)
    if mu_right is not None:
        d[-1] = 0.5 * (mu_right - 2.0) if n_sites > 1 else 0.5 * (mu_left + mu_right - 2.0)
    e = np.full(n_sites - 1, 0.5)
    return d, e


@dataclass
class RobinSpectrum:
    N: int
    mu_A: float
    mu_B: float
    eigenvalues: np.ndarray   # of (1/2) Delta, ascending
    eigenvectors: np.ndarray  # orthonormal columns indexed by site

    @property
    def omegas(self) -> np.ndarray:
        """Frequencies with eigenvalue ``cos(omega) - 1``; ``nan`` where none is real."""
        c = self.eigenvalues + 1.0
        return np.where(np.abs(c) <= 1.0, np.arccos(np.clip(c, -1.0, 1.0)), np.nan)

    def kernel(self, t: float, xs=None, ys=None) -> np.ndarray:
        V = self.eigenvectors
        Vx = V if xs is None else V[np.asarray(xs)]
        Vy = V if ys is None else V[np.asarray(ys)]
        return (Vx * np.exp(self.eigenvalues * t)) @ Vy.T

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.eigenvalues > 0))


def robin_spectrum(N: int, mu_A: float, mu_B: float) -> RobinSpectrum:
    d, e = robin_generator_bands(N + 1, mu_A, mu_B)
    w, v = eigh_tridiagonal(d, e)
    return RobinSpectrum(N, mu_A, mu_B, w, v)


def secular(omega, N: int, mu_A: float, mu_B: float):
    """Vanishes at frequencies of Robin eigenfunctions ``cos(omega x) + c sin(omega x)``."""
    return (np.sin(omega * (N + 2)) - (mu_A + mu_B) * np.sin(omega * (N + 1))
            + mu_A * mu_B * np.sin(omega * N))


def bracketed_roots(N: int, mu_A: float, mu_B: float) -> np.ndarray:
    """Secular roots in ``[k pi/(N+1), (k+1) pi/(N+1))`` for ``k = 1..N-1``.

    Returns ``nan`` for a bracket without a sign change.
    """
    h = math.pi / (N + 1)
    roots = np.full(N - 1, np.nan)
    for k in range(1, N):
        a, b = k * h, (k + 1) * h
        fa, fb = secular(a, N, mu_A, mu_B), secular(b, N, mu_A, mu_B)
        if abs(fa) < 1e-11:
            # closed bracket: at A = B = 0 the roots are exactly k pi / (N+1)
            roots[k - 1] = a
        elif fa * fb < 0:
            roots[k - 1] = brentq(secular, a, b, args=(N, mu_A, mu_B), xtol=1e-15, rtol=1e-15)
    return roots


def spectral_kernel(t: float, xs, ys, N: int, mu_A: float, mu_B: float) -> np.ndarray:
    return robin_spectrum(N, mu_A, mu_B).kernel(t, xs, ys)
