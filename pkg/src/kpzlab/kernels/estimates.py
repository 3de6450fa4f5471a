"""Empirical checks of the kernel inequalities and spectral bounds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .evaluator import KernelEvaluator
from .spectral import bracketed_roots, robin_spectrum


def _expm_sym(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(M)
    return (V * np.exp(w)) @ V.T


def expm_perturbation_check(dim: int = 20, alpha_cap: float = -0.1, trials: int = 500,
                            seed: int = 0) -> float:
    """Largest ``||e^M - e^N|| / (e^alpha ||M - N||)`` over random symmetric pairs.

    Both matrices are shifted so their top eigenvalue is at most ``alpha_cap``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        mats = []
        for _ in range(2):
            G = rng.standard_normal((dim, dim))
            S = 0.5 * (G + G.T) * rng.uniform(0.1, 3.0)
            top = np.linalg.eigvalsh(S)[-1]
            mats.append(S - (top - alpha_cap + rng.uniform(0.0, 1.0)) * np.eye(dim))
        M, N = mats
        if rng.uniform() < 0.3:  # near pairs exercise the first-order regime
            N = M + 1e-3 * (N - M)
            top = np.linalg.eigvalsh(N)[-1]
            if top > alpha_cap:
                N = N - (top - alpha_cap) * np.eye(dim)
        diff = np.linalg.norm(M - N, 2)
        if diff == 0:
            continue
        ratio = np.linalg.norm(_expm_sym(M) - _expm_sym(N), 2) / (np.exp(alpha_cap) * diff)
        worst = max(worst, ratio)
    return worst


def monotone_domination_check(ev: KernelEvaluator, s: float, t: float, W: int = 60,
                              atol: float = 1e-12) -> dict:
    """``p_s(x, y) <= e^{t-s} p_t(x, y)`` on the window ``x, y <= W``."""
    xs = ev.window(W)
    lhs = ev.matrix(s, xs, xs)
    rhs = np.exp(t - s) * ev.matrix(t, xs, xs)
    excess = lhs - rhs
    return {"ok": bool(np.all(excess <= atol)), "max_excess": float(excess.max()),
            "violations": int(np.sum(excess > atol))}


@dataclass
class LongTimeFit:
    C: float
    K: float
    train_violations: int
    test_violations: int
    max_test_ratio: float


def longtime_bound_check(ev: KernelEvaluator, eps: float, t_grid, xs, ys,
                         margin: float = 1.1) -> LongTimeFit:
    """Fit ``p_t <= C (t^-1/2 + eps) exp(K eps^2 t)`` on half the grid, test on the rest.

    In log form the envelope is linear in ``(log C, K)``; the fit is the
    tightest such envelope over the training points (a small linear program).
    """
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    train, test = t_grid[::2], t_grid[1::2]

    def sup_over_window(ts):
        return np.array([ev.matrix(t, xs, ys).max() for t in ts])

    def base(ts):
        return np.log(ts**-0.5 + eps)

    ptr, pte = sup_over_window(train), sup_over_window(test)
    # variables (c = log C, K); minimise sum(c + K eps^2 t) s.t. log p <= c + base + K eps^2 t
    a = eps**2 * train
    res = linprog(c=[len(train), a.sum()], A_ub=-np.column_stack([np.ones_like(a), a]),
                  b_ub=-(np.log(ptr) - base(train)), bounds=[(None, None), (0.0, None)])
    logC, K = res.x
    C = float(np.exp(logC)) * margin

    def ratio(ts, ps):
        return ps / (C * np.exp(base(ts) + K * eps**2 * ts))

    rtr, rte = ratio(train, ptr), ratio(test, pte)
    return LongTimeFit(C, float(K), int(np.sum(rtr > 1)), int(np.sum(rte > 1)), float(rte.max()))


def spectrum_report(N: int, mu_A: float, mu_B: float) -> dict:
    """Residuals, orthonormality, bracket localisation and sup norms for one spectrum."""
    sp = robin_spectrum(N, mu_A, mu_B)
    V, lam = sp.eigenvectors, sp.eigenvalues
    d = np.full(N + 1, -1.0)
    d[0], d[-1] = 0.5 * (mu_A - 2), 0.5 * (mu_B - 2)
    L = np.diag(d) + 0.5 * (np.eye(N + 1, k=1) + np.eye(N + 1, k=-1))
    resid = np.abs(L @ V - V * lam).max()
    ortho = np.abs(V.T @ V - np.eye(N + 1)).max()
    roots = bracketed_roots(N, mu_A, mu_B)
    roots = roots[~np.isnan(roots)]
    # every secular root must match an eigenvalue cos(omega) - 1
    lam_from_roots = np.cos(roots) - 1.0
    match = np.array([np.abs(lam - v).min() for v in lam_from_roots]) if len(roots) else np.zeros(0)
    return {
        "N": N,
        "residual": float(resid),
        "orthonormality": float(ortho),
        "n_positive": sp.n_positive,
        "max_eigenvalue": float(lam.max()),
        "brackets_found": int(len(roots)),
        "bracket_match": float(match.max()) if len(match) else 0.0,
        "sup_norm_scaled": float(np.abs(V).max() * np.sqrt(N)),
        "max_positive_scaled": float(max(lam.max(), 0.0) * N**2),
    }
