"""Continuous-time simple random walk on Z at total jump rate 1.

``p_t(x)`` is evaluated from the uniformization series: the number of jumps
by time ``t`` is Poisson(t) and, given ``n`` jumps, the displacement is a
symmetric binomial walk.  Grouping ``n = 2m + |x|`` gives the positive series

    p_t(x) = sum_m e^-t (t/2)^(2m+|x|) / (m! (m+|x|)!)

which is summed outward from its largest term until the remaining terms fall
below double precision.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _log_series(t, x):
    # ratio a_{m+1}/a_m = (t/2)^2 / ((m+1)(m+1+x)); the peak is where it equals 1
    h = 0.5 * t
    peak = int(0.5 * (math.sqrt(x * x + t * t) - x))
    log_peak = -t + (2 * peak + x) * math.log(h) - math.lgamma(peak + 1.0) - math.lgamma(peak + x + 1.0)
    total = 1.0
    term = 1.0
    m = peak
    while True:
        term *= h * h / ((m + 1.0) * (m + 1.0 + x))
        total += term
        m += 1
        if term < 1e-18 * total:
            break
    term = 1.0
    m = peak
    while m > 0:
        term *= m * (m + x) / (h * h)
        total += term
        m -= 1
        if term < 1e-18 * total:
            break
    return log_peak + math.log(total)


@njit(cache=True)
def _log_series_vec(t, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = _log_series(t, abs(xs[i]))
    return out


def log_wholeline(t: float, x) -> np.ndarray:
    """``log p_t(x)`` for integer ``x`` (any sign)."""
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=np.int64)))
    if t == 0:
        return np.where(x == 0, 0.0, -np.inf)
    return _log_series_vec(float(t), x)


def wholeline(t: float, x) -> np.ndarray:
    """``p_t(x)``, vectorised over integer ``x``."""
    return np.exp(log_wholeline(t, x))


@njit(cache=True)
def _downward(t, M, start):
    # p(x-1) = p(x+1) + (2x/t) p(x) is stable downward for the decaying solution
    out = np.zeros(M + 1)
    hi, cur = 0.0, 1e-280
    for x in range(start, 0, -1):
        lo = hi + (2.0 * x / t) * cur
        hi, cur = cur, lo
        if cur > 1e250:
            out *= 1e-250
            hi *= 1e-250
            cur *= 1e-250
        if x - 1 <= M:
            out[x - 1] = cur
    return out


def wholeline_table(t: float, M: int) -> np.ndarray:
    """``p_t(0), ..., p_t(M)``.

    Short tables use the series termwise.  Long ones run the three-term
    recurrence satisfied by the series downward from well beyond ``M`` and
    are normalised by the series value at 0.
    """
    if t < 1.0 or M < 64:
        return wholeline(t, np.arange(M + 1))
    start = int(M + 40 + 6 * math.sqrt(t) + 2 * math.sqrt(M))
    tab = _downward(float(t), M, start)
    return tab * (math.exp(_log_series(float(t), 0)) / tab[0])


def tail_ratio(t: float, M: int, mu: float = 1.0) -> float:
    """``mu p_t(M+1) / p_t(M)``; the ratio is decreasing in ``M``."""
    lp = log_wholeline(t, [M, M + 1])
    return float(mu * np.exp(lp[1] - lp[0]))
