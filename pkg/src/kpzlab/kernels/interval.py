"""Robin heat kernel on {0, ..., N} through reflection blocks.

The initial spike at ``y`` is extended to all of Z so that the extension
``phi`` satisfies both Robin conditions for the free walk.  Block ``k`` covers
sites ``k(N+1), ..., k(N+1)+N``; on it the extension is a spike of weight
``I_k`` at the image point ``i(y, k)`` plus a spread part ``eps E_k``.  The
kernel is then

    p(x, y) = sum_k I_k p_t(x - i(y, k)) + eps sum_{k != 0} sum_{z in block k} p_t(x - z) E_k(z, y).

Blocks are generated outward two at a time: block ``-(m+1)`` from blocks
``0..m`` through the left condition and block ``m+1`` from blocks ``-m..0``
through the right one.
"""
from __future__ import annotations

import math

import numpy as np

from .wholeline import log_wholeline, wholeline


def image_point(y, k: int, N: int):
    if k % 2:
        return (k + 1) * (N + 1) - y - 1
    return y + k * (N + 1)


class IntervalReflections:
    """Reflection coefficients ``I_k`` and blocks ``E_k`` for ``|k| <= K``."""

    def __init__(self, N: int, mu_A: float, mu_B: float, eps: float | None = None):
        self.N, self.mu_A, self.mu_B = N, mu_A, mu_B
        self.eps = 1.0 / N if eps is None else eps
        self.I = {0: 1.0}
        self.E = {0: np.zeros((N + 1, N + 1))}
        self.K = 0
        ys = np.arange(N + 1)
        self._ys = ys
        # left: S[u] = sum_{z=0}^{u} mu_A^(u-z) F(z) running over z >= 0
        self._S_left = np.zeros((0, N + 1))
        # right: R[L] = sum_{z=L}^{N} mu_B^(z-L) F(z) running downward over z <= N
        self._R_right = np.zeros((0, N + 1))

    def _F_block(self, k: int) -> np.ndarray:
        """Extension on block ``k`` divided by eps, rows indexed by offset."""
        N = self.N
        F = self.E[k].copy()
        off = image_point(self._ys, k, N) - k * (N + 1)
        F[off, self._ys] += self.I[k] / self.eps
        return F

    def _extend_left_sums(self, k: int) -> None:
        mu = self.mu_A
        F = self._F_block(k)
        S = np.empty_like(F)
        prev = self._S_left[-1] if len(self._S_left) else np.zeros(self.N + 1)
        for j in range(self.N + 1):
            prev = F[j] + mu * prev
            S[j] = prev
        self._S_left = np.vstack([self._S_left, S])

    def _extend_right_sums(self, k: int) -> None:
        mu = self.mu_B
        F = self._F_block(k)
        R = np.empty_like(F)
        prev = self._R_right[0] if len(self._R_right) else np.zeros(self.N + 1)
        for j in range(self.N, -1, -1):
            prev = F[j] + mu * prev
            R[j] = prev
        self._R_right = np.vstack([R, self._R_right])

    def grow(self, K: int) -> None:
        N = self.N
        jj = np.arange(N + 1)
        while self.K < K:
            m = self.K
            # sums over blocks 0..m (left) and -m..0 (right)
            self._extend_left_sums(m)
            if m == 0:
                self._extend_right_sums(0)
            else:
                self._extend_right_sums(-m)
            # left block -(m+1): x = -(m+1)(N+1) + j, mirror -x-1 = m(N+1) + N - j
            mu = self.mu_A
            U = (m + 1) * (N + 1) - jj - 2          # -x-2, index into S_left
            S = np.where((U >= 0)[:, None], self._S_left[np.clip(U, 0, None)], 0.0)
            self.E[-(m + 1)] = mu * self.E[m][N - jj] + (mu * mu - 1.0) * S
            self.I[-(m + 1)] = mu * self.I[m]
            # right block m+1: x = (m+1)(N+1) + j, mirror 2N+1-x = -m(N+1) + N - j
            mu = self.mu_B
            L = (1 - m) * (N + 1) - jj              # 2(N+1) - x
            # R_right rows run over z = -m(N+1) .. N
            idx = L + m * (N + 1)
            R = np.where((L <= N)[:, None], self._R_right[np.clip(idx, 0, len(self._R_right) - 1)], 0.0)
            self.E[m + 1] = mu * self.E[-m][N - jj] + (mu * mu - 1.0) * R
            self.I[m + 1] = mu * self.I[-m]
            self.K = m + 1

    def growth_constant(self) -> float:
        """Empirical ``C0`` with ``sup|E_k| + |I_k| <= C0^|k|`` over the computed blocks."""
        c = 1.0
        for k in range(1, self.K + 1):
            for kk in (k, -k):
                size = np.abs(self.E[kk]).max() * self.eps + abs(self.I[kk])
                c = max(c, size ** (1.0 / k))
        return c

    def extension(self, y: int) -> tuple[np.ndarray, np.ndarray]:
        """Sites and values of the extended initial datum for spike ``y``."""
        N = self.N
        zs, vals = [], []
        for k in range(-self.K, self.K + 1):
            z = k * (N + 1) + np.arange(N + 1)
            v = self.eps * self.E[k][:, y].copy()
            v[image_point(y, k, N) - k * (N + 1)] += self.I[k]
            zs.append(z)
            vals.append(v)
        return np.concatenate(zs), np.concatenate(vals)


def interval_kernel(t: float, xs, ys, N: int, mu_A: float, mu_B: float,
                    eps: float | None = None, tol: float = 1e-13,
                    K: int | None = None) -> tuple[np.ndarray, float]:
    """``p^R_t(x, y)`` on {0..N} and a bound on the omitted blocks."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    ys = np.atleast_1d(np.asarray(ys, dtype=np.int64))
    refl = IntervalReflections(N, mu_A, mu_B, eps)
    if K is None:
        K = 1
        while True:
            refl.grow(K + 1)
            c0 = refl.growth_constant()
            # blocks beyond K sit at distance >= (K-1)(N+1) from the window
            d = max((K - 1) * (N + 1), 0)
            lp = float(log_wholeline(t, [d])[0])
            log_bound = lp + (K + 1) * math.log(c0) + math.log((N + 1) * 4.0) - math.log(max(1.0 - 1.0 / (1.0 + c0), 1e-300))
            bound = math.exp(log_bound) if log_bound < 700 else math.inf
            if bound < tol or K > 4000:
                break
            K = int(K * 1.5) + 1
    else:
        refl.grow(K)
        bound = math.nan
    out = np.zeros((len(xs), len(ys)))
    Ksum = min(refl.K, K)
    # spike part
    for k in range(-Ksum, Ksum + 1):
        img = image_point(ys, k, N)
        out += refl.I[k] * wholeline(t, (xs[:, None] - img[None, :]).ravel()).reshape(out.shape)
    # spread part
    for k in range(-Ksum, Ksum + 1):
        if k == 0:
            continue
        z = k * (N + 1) + np.arange(N + 1)
        P = wholeline(t, (xs[:, None] - z[None, :]).ravel()).reshape(len(xs), N + 1)
        out += refl.eps * P @ refl.E[k][:, ys]
    return out, bound
