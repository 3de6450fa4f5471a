"""Robin heat kernel on Z_{>=0} through the image formula.

With ghost condition ``f(-1) = mu f(0)`` the kernel is

    p(x, y) = p_t(x - y) + mu p_t(x + y + 1) + (1 - mu^-2) T(x + y),
    T(s)    = sum_{z >= 2} p_t(s + z) mu^z.

``T`` is evaluated by the backward recursion ``T(s) = mu^2 p_t(s+2) + mu T(s+1)``
started at a cutoff ``M`` whose omitted tail is certified through the
monotone ratio ``mu p_t(m+1) / p_t(m)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter

from .wholeline import log_wholeline, wholeline_table


def _tail_bound(t: float, M: int, mu: float, smax: int) -> float:
    """Upper bound on ``sup_{0<=s<=smax} |sum_{m>M} p_t(m) mu^(m-s)|``."""
    if t == 0:
        return 0.0
    lp = log_wholeline(t, [M, M + 1])
    r = mu * math.exp(lp[1] - lp[0])
    if r >= 1.0:
        return math.inf
    shift = -smax if mu < 1 else 0
    log_term = lp[0] + (M + shift) * math.log(mu)
    return math.exp(log_term) * r / (1.0 - r)


def image_series_tail(t: float, mu: float, smax: int, tol: float = 1e-15) -> tuple[int, float]:
    """Cutoff ``M`` and certified bound on the truncated image tail."""
    M = smax + 2 + int(12 * math.sqrt(t) + 40)
    while True:
        bound = abs(1.0 - mu**-2) * _tail_bound(t, M, mu, smax)
        if bound < tol or M > 10**8:
            return M, bound
        M *= 2


class HalfLineImages:
    """Kernel tables at one time ``t`` for arguments ``0 <= x, y <= W``."""

    def __init__(self, t: float, mu: float, W: int, tol: float = 1e-15):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.t, self.mu, self.W = t, mu, W
        smax = 2 * W + 1
        self.M, self.tail_bound = image_series_tail(t, mu, smax, tol)
        self.p = wholeline_table(t, self.M + 2)
        # T[s + 1] holds T(s) for s = -1..M; T(M) is the certified remainder
        src = mu * mu * self.p[np.arange(-1, self.M) + 2]
        T = np.zeros(self.M + 2)
        T[:-1] = lfilter([1.0], [1.0, -mu], src[::-1])[::-1]
        self.T = T

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        mu = self.mu
        direct = self.p[np.abs(x - y)]
        return direct + mu * self.p[np.abs(x + y + 1)] + (1.0 - mu**-2) * self.T[x + y + 1]

    def matrix(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)[:, None]
        ys = np.asarray(ys, dtype=np.int64)[None, :]
        return self(xs, ys)


def halfline_kernel(t: float, xs, ys, mu: float, tol: float = 1e-15) -> tuple[np.ndarray, float]:
    """Matrix ``p^R_t(x, y)`` over ``xs x ys`` and its truncation bound."""
    xs = np.atleast_1d(xs)
    ys = np.atleast_1d(ys)
    W = int(max(xs.max(), ys.max()))
    img = HalfLineImages(t, mu, W, tol)
    return img.matrix(xs, ys), img.tail_bound


def generating_identity_lhs(t: float, x: int, mu: float, tol: float = 1e-15) -> float:
    """``sum_{z in Z} p_t(x + z) mu^z`` summed to a certified cutoff."""
    # terms behave like p_t(m) mu^(m - x) on both tails
    total = 0.0
    for sign, m_mu in ((1, mu), (-1, 1.0 / mu)):
        M, _ = image_series_tail(t, m_mu, abs(x), tol)
        m = np.arange(0, M + 1)
        z = sign * m - x
        if sign == -1:
            z = z[m > 0]
            m = m[m > 0]
        lp = log_wholeline(t, m)
        total += float(np.sum(np.exp(lp + z * math.log(mu))))
    return total


def generating_identity_rhs(t: float, x: int, mu: float) -> float:
    return mu ** (-x) * math.exp(0.5 * (mu + 1.0 / mu - 2.0) * t)
