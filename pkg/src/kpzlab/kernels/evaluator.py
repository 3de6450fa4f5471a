from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..scaling import Scaling
from .halfline import HalfLineImages
from .interval import interval_kernel
from .oracle import ode_kernel
from .spectral import RobinSpectrum, robin_spectrum

ROUTES = ("image-series", "interval-recursion", "spectral", "ode-oracle")


@dataclass
class KernelEvaluator:
    """Robin kernel on the half-line (``N is None``) or on {0..N}.

    ``route=None`` picks the image series on the half-line and the spectral
    sum on the interval.
    """

    mu_A: float
    mu_B: float | None = None
    N: int | None = None
    route: str | None = None
    tol: float = 1e-15
    eps: float | None = None
    _spectrum: RobinSpectrum | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mu_A <= 0 or (self.mu_B is not None and self.mu_B <= 0):
            raise ValueError("Robin coefficients must be positive")
        if self.route is None:
            self.route = "image-series" if self.N is None else "spectral"
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        if self.N is None and self.route in ("interval-recursion", "spectral"):
            raise ValueError(f"route {self.route} needs an interval")
        if self.N is not None and self.route == "image-series":
            raise ValueError("the image series is a half-line route")
        if self.N is not None and self.mu_B is None:
            raise ValueError("interval needs mu_B")

    @classmethod
    def from_scaling(cls, s: Scaling, route: str | None = None) -> "KernelEvaluator":
        return cls(s.mu_A, s.mu_B if s.geometry == "interval" else None, s.N, route, eps=s.epsilon)

    def with_route(self, route: str) -> "KernelEvaluator":
        return KernelEvaluator(self.mu_A, self.mu_B, self.N, route, self.tol, self.eps)

    @property
    def geometry(self) -> str:
        return "half-line" if self.N is None else "interval"

    @property
    def spectrum(self) -> RobinSpectrum:
        if self._spectrum is None:
            self._spectrum = robin_spectrum(self.N, self.mu_A, self.mu_B)
        return self._spectrum

    def matrix(self, t: float, xs, ys) -> np.ndarray:
        """``p^R_t(x, y)`` for ``x in xs``, ``y in ys``.

        The image and recursion routes also accept ghost rows ``x = -1`` and
        ``x = N + 1``.
        """
        xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
        ys = np.atleast_1d(np.asarray(ys, dtype=np.int64))
        if self.route == "image-series":
            W = int(max(np.abs(xs).max(), ys.max())) + 1
            img = HalfLineImages(t, self.mu_A, W, self.tol)
            return img.matrix(xs, ys)
        if self.route == "interval-recursion":
            return interval_kernel(t, xs, ys, self.N, self.mu_A, self.mu_B, self.eps,
                                   tol=max(self.tol, 1e-14))[0]
        if self.route == "spectral":
            return self.spectrum.kernel(t, xs, ys)
        return ode_kernel(t, xs, ys, self.mu_A, self.mu_B, self.N)

    def value(self, t: float, x: int, y: int) -> float:
        return float(self.matrix(t, [x], [y])[0, 0])

    def row_sums(self, t: float, xs, y_max: int | None = None) -> np.ndarray:
        """``f(t, x) = sum_y p^R_t(x, y)``; the half-line sum runs to ``y_max``."""
        if self.N is not None:
            ys = np.arange(self.N + 1)
        else:
            xs_arr = np.atleast_1d(xs)
            ys = np.arange(y_max if y_max is not None else int(xs_arr.max() + 14 * np.sqrt(t + 1) + 60))
        return self.matrix(t, xs, ys).sum(axis=1)

    def window(self, W: int | None = None) -> np.ndarray:
        if self.N is not None:
            return np.arange(self.N + 1)
        return np.arange(W + 1)


def kernel_eval(t: float, x: int, y: int, scaling: Scaling, route: str | None = None) -> float:
    return KernelEvaluator.from_scaling(scaling, route).value(t, x, y)
