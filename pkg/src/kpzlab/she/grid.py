"""Space grid and exact one-step propagator for the Robin SHE."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..kernels.spectral import robin_generator_bands
from ..kernels.wholeline import wholeline


@dataclass
class SheGrid:
    """Sites ``X_j = j dx``; on the half-line the grid stops at ``X_max`` with an absorbing wall.

    The generator is ``(1/2) dx^-2 Delta`` with ghosts ``Z(-dx) = (1 - A dx) Z(0)``
    and, on the interval, ``Z(1 + dx) = (1 - B dx) Z(1)``, i.e. the lattice
    Robin Laplacian at scale ``dx``.  Its semigroup is evaluated spectrally.
    """

    A: float
    B: float | None = None
    geometry: str = "half-line"
    dx: float = 0.02
    dt: float | None = None
    X_max: float = 5.0
    band_tol: float = 1e-17
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dt is None:
            self.dt = 0.5 * self.dx**2
        if self.dt > 0.5 * self.dx**2 * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds dx^2/2={0.5 * self.dx**2}")
        if self.geometry == "interval":
            n = round(1.0 / self.dx)
            if abs(n * self.dx - 1.0) > 1e-9 or self.B is None:
                raise ValueError("interval grid needs dx = 1/n and B")
            self.X_max = 1.0
        elif self.geometry != "half-line":
            raise ValueError(f"unknown geometry {self.geometry!r}")
        d, e = robin_generator_bands(self.J + 1, 1.0 - self.A * self.dx,
                                     None if self.geometry == "half-line" else 1.0 - self.B * self.dx)
        self.eigenvalues, self.eigenvectors = eigh_tridiagonal(d, e)

    @property
    def J(self) -> int:
        return int(round(self.X_max / self.dx))

    @property
    def X(self) -> np.ndarray:
        return np.arange(self.J + 1) * self.dx

    @property
    def sigma(self) -> float:
        """Standard deviation of one noise kick, ``sqrt(dt/dx)``."""
        return math.sqrt(self.dt / self.dx)

    def propagator(self, tau: float) -> np.ndarray:
        """Matrix of the semigroup over macroscopic time ``tau``."""
        key = round(tau / self.dt, 9)
        if key in self._cache:
            return self._cache[key]
        V = self.eigenvectors
        P = (V * np.exp(self.eigenvalues * tau / self.dx**2)) @ V.T
        if len(self._cache) < 8:
            self._cache[key] = P
        return P

    @property
    def P(self) -> np.ndarray:
        return self.propagator(self.dt)

    def one_step(self) -> np.ndarray:
        """``P_dt`` from the uniformization series, entrywise nonnegative.

        The spectral product ``V e^{lambda t} V^T`` carries rounding of order
        1e-15 that is sometimes negative; far from the data that rounding is
        the whole field and would show up as spurious sign changes.  Here
        ``P_dt = e^{-c tau} sum_k (tau (G + c))^k / k!`` with ``G + c >= 0``,
        so every term is nonnegative.  ``one_step_gap`` compares both routes.
        """
        if "one_step" in self._cache:
            return self._cache["one_step"]
        tau = self.dt / self.dx**2
        d, e = robin_generator_bands(self.J + 1, 1.0 - self.A * self.dx,
                                     None if self.geometry == "half-line" else 1.0 - self.B * self.dx)
        c = max(1.0, float(-d.min()))
        n = self.J + 1
        M = tau * (np.diag(d + c) + np.diag(e, 1) + np.diag(e, -1))
        term = np.eye(n)
        total = np.eye(n)
        k = 0
        while True:
            k += 1
            term = term @ M / k
            total += term
            if term.max() < 1e-18 * total.max():
                break
        P = math.exp(-c * tau) * total
        self._cache["one_step"] = P
        return P

    def one_step_gap(self) -> float:
        return float(np.abs(self.one_step() - self.P).max())

    @property
    def band(self) -> int:
        """Half bandwidth of the one-step propagator.

        Entries beyond it are below ``band_tol`` relative to the whole-line
        kernel bound (Robin branching adds at most a factor ``e^{|A| dx tau}``),
        far under the eigensolver's own rounding floor.
        """
        tau = self.dt / self.dx**2
        b = 1
        while b < self.J and wholeline(tau, b + 1) * math.exp(abs(self.A) * self.dx * tau + 1) >= self.band_tol:
            b += 1
        return b

    def banded(self) -> np.ndarray:
        """``P`` restricted to its band, as rows ``P[i, i-b .. i+b]`` (zero padded)."""
        b, n = self.band, self.J + 1
        P = self.one_step()
        out = np.zeros((n, 2 * b + 1))
        for k in range(-b, b + 1):
            diag = np.diagonal(P, k)
            if k >= 0:
                out[: n - k, b + k] = diag
            else:
                out[-k:, b + k] = diag
        return out

    def laplacian_half(self, phi: np.ndarray) -> np.ndarray:
        """``(1/2) dx^-2 Delta phi`` with the Robin ghosts (wall value 0 on the half-line)."""
        phi = np.asarray(phi, dtype=float)
        left = (1.0 - self.A * self.dx) * phi[0]
        right = (1.0 - self.B * self.dx) * phi[-1] if self.geometry == "interval" else 0.0
        ext = np.concatenate([[left], phi, [right]])
        return 0.5 * (ext[2:] + ext[:-2] - 2 * phi) / self.dx**2

    def delta0(self) -> np.ndarray:
        z = np.zeros(self.J + 1)
        z[0] = 1.0 / self.dx
        return z

    def inner(self, f, g) -> float:
        return float(self.dx * np.dot(f, g))

    def describe(self) -> dict:
        return {"A": self.A, "B": self.B, "geometry": self.geometry, "dx": self.dx,
                "dt": self.dt, "X_max": self.X_max, "J": self.J}
