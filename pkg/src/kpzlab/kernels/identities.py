"""Numerically checkable identities of the Robin kernel."""
from __future__ import annotations

import math

import numpy as np

from ..quadrature import composite_gl, graded_edges
from .evaluator import KernelEvaluator
from .halfline import generating_identity_lhs, generating_identity_rhs


def generating_identity(t: float, x: int, mu: float) -> tuple[float, float]:
    """Both sides of ``sum_z p_t(x+z) mu^z = mu^-x exp((mu + 1/mu - 2) t / 2)``."""
    return generating_identity_lhs(t, x, mu), generating_identity_rhs(t, x, mu)


def mass_deficiency(ev: KernelEvaluator, t: float, x: int, n_panels: int = 30) -> dict:
    """``f(t, x) - 1`` and the boundary-flux integral that should equal it.

    Differentiating ``f(t, x) = sum_y p_t(x, y)`` in time leaves only the
    ghost terms, so ``f - 1 = (mu_A - 1)/2 int_0^t p_s(0, x) ds`` plus the
    matching ``mu_B`` term at ``N`` on the interval.
    """
    f_minus_1 = float(ev.row_sums(t, [x])[0]) - 1.0 if t > 0 else 0.0
    if t == 0:
        return {"deficiency": 0.0, "flux": 0.0, "residual": 0.0, "quad_error": 0.0}
    rows = [0] if ev.N is None else [0, ev.N]
    coef = np.array([0.5 * (ev.mu_A - 1.0)] + ([] if ev.N is None else [0.5 * (ev.mu_B - 1.0)]))

    def integrand(ss):
        return np.array([coef @ ev.matrix(s, rows, [x])[:, 0] if s > 0 else coef @ (np.array(rows) == x)
                         for s in ss])

    flux, err = composite_gl(integrand, graded_edges(0.0, t, n_panels))
    return {"deficiency": f_minus_1, "flux": float(flux), "residual": abs(f_minus_1 - float(flux)),
            "quad_error": float(err)}


def gradient_products(ev: KernelEvaluator, t: float, xs, ys) -> dict[str, np.ndarray]:
    """First-coordinate gradients ``grad+ p = p(x+1,y) - p(x,y)``, ``grad- p = p(x-1,y) - p(x,y)`` and their product."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    lo, hi = int(xs.min()) - 1, int(xs.max()) + 1
    rows = np.arange(lo, hi + 1)
    P = ev.matrix(t, rows, ys)
    i = xs - lo
    gp = P[i + 1] - P[i]
    gm = P[i - 1] - P[i]
    return {"grad_plus": gp, "grad_minus": gm, "K": gp * gm}


def _y_window(ev: KernelEvaluator, x: int, t_max: float) -> np.ndarray:
    if ev.N is not None:
        return np.arange(ev.N + 1)
    return np.arange(int(x + 12 * math.sqrt(t_max) + 60))


def signed_identity(ev: KernelEvaluator, x: int, xbar: int, t_max: float | None = None,
                    n_panels: int = 60) -> dict:
    """``sum_y int_0^inf grad+_y p_t(x,y) grad+_y p_t(xbar,y) dt`` by quadrature.

    The gradient is taken in the summed variable.  On the half-line the
    integrand decays like ``t^{-3/2} / (2 sqrt(pi))`` and the tail beyond
    ``t_max`` is added from that asymptote; on the interval it decays
    exponentially and ``t_max`` is set from the spectral gap.
    """
    if ev.N is None:
        t_max = 1e4 if t_max is None else t_max
        ys = _y_window(ev, max(x, xbar), t_max)
        tail = 1.0 / math.sqrt(math.pi * t_max)
    else:
        lam = np.sort(ev.spectrum.eigenvalues)[::-1]
        gap = max(abs(lam[1] - lam[0]), 1e-12)
        t_max = 40.0 / gap if t_max is None else t_max
        ys = np.arange(ev.N + 1)
        tail = 0.0

    def integrand(ts):
        out = np.empty(len(ts))
        for k, s in enumerate(ts):
            P = ev.matrix(s, [x, xbar], ys)
            g = np.diff(P, axis=1)
            out[k] = g[0] @ g[1]
        return out

    val, err = composite_gl(integrand, graded_edges(0.0, t_max, n_panels, first=1e-3))
    return {"value": float(val) + tail, "tail": tail, "quad_error": float(err), "t_max": t_max}


def cancellation_integral(ev: KernelEvaluator, x: int, a: float = 0.0, eps: float = 0.05,
                          T_macro: float = 1.0, n_panels: int = 50, y_min: int = 1) -> dict:
    """``sum_{y >= y_min} int_0^{T/eps^2} |K_t(x, y)| exp(a eps |x - y|) dt``."""
    t_max = T_macro / eps**2
    ys = _y_window(ev, x, t_max)
    ys = ys[ys >= y_min]
    if ev.N is not None:
        ys = ys[ys <= ev.N - 1]
    weight = np.exp(a * eps * np.abs(x - ys))

    def integrand(ts):
        return np.array([np.abs(gradient_products(ev, s, [x], ys)["K"][0]) @ weight for s in ts])

    val, err = composite_gl(integrand, graded_edges(0.0, t_max, n_panels, first=1e-3))
    return {"value": float(val), "quad_error": float(err)}


def kernel_difference(ev: KernelEvaluator, ev0: KernelEvaluator, t: float, xs, ys) -> float:
    """``sup |p_t(x, y; A) - p_t(x, y; 0)|`` over the window."""
    return float(np.max(np.abs(ev.matrix(t, xs, ys) - ev0.matrix(t, xs, ys))))


def gradient_facts(ev: KernelEvaluator, t: float, xs) -> dict[str, float]:
    """Short-time diagonal gradient values: both diagonal gradients and ``grad- p(x, x+1)``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    ys = np.arange(int(xs.max()) + 3)
    g = gradient_products(ev, t, xs, ys)
    diag_plus = g["grad_plus"][np.arange(len(xs)), xs]
    diag_minus = g["grad_minus"][np.arange(len(xs)), xs]
    off = g["grad_minus"][np.arange(len(xs)), xs + 1]
    return {"max_diag_plus": float(diag_plus.max()), "max_diag_minus": float(diag_minus.max()),
            "max_abs_offdiag_minus": float(np.abs(off).max())}
