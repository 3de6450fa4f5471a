"""Weak-asymmetry scaling of the open ASEP.

Maps a scale parameter ``epsilon`` and boundary parameters ``(A, B)`` to
the bulk rates ``p, q``, the boundary rates ``alpha, beta, gamma, delta``,
the Robin coefficients ``mu_A, mu_B`` and the transform constants used by
the microscopic Hopf-Cole transform.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

GEOMETRIES = ("half-line", "interval")


def _bulk(eps: float) -> tuple[float, float]:
    r = math.sqrt(eps)
    return 0.5 * math.exp(r), 0.5 * math.exp(-r)


def _boundary_pair(p: float, q: float, mu: float) -> tuple[float, float]:
    """(creation-type, annihilation-type) rates for one boundary coefficient."""
    sp, sq = math.sqrt(p), math.sqrt(q)
    create = p**1.5 * (sp - mu * sq) / (p - q)
    annih = q**1.5 * (sq - mu * sp) / (q - p)
    return create, annih


@dataclass(frozen=True)
class Scaling:
    epsilon: float
    A: float
    B: float | None
    geometry: str
    N: int | None
    p: float
    q: float
    mu_A: float
    mu_B: float | None
    alpha: float
    gamma: float
    beta: float | None
    delta: float | None
    lam: float
    nu: float
    rho: float

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def rates_valid(self) -> bool:
        rates = [self.alpha, self.gamma]
        if self.geometry == "interval":
            rates += [self.beta, self.delta]
        return all(r >= 0.0 for r in rates) and self.mu_A > 0

    @property
    def eps_max(self) -> float:
        return max_epsilon(self.A, self.B if self.geometry == "interval" else None)


def build_scaling(epsilon: float, A: float, B: float | None = None,
                  geometry: str = "half-line", N: int | None = None,
                  check: bool = True) -> Scaling:
    """Rates and transform constants at scale ``epsilon``.

    For the interval the scale must equal ``1/N``; pass either ``N`` or an
    ``epsilon`` whose reciprocal is an integer.
    """
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry {geometry!r}")
    if geometry == "interval":
        if B is None:
            raise ValueError("interval geometry needs B")
        if N is None:
            N = int(round(1.0 / epsilon))
        if N < 1 or abs(epsilon * N - 1.0) > 1e-12:
            raise ValueError(f"interval requires epsilon = 1/N, got epsilon={epsilon}, N={N}")
    else:
        N = None
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    p, q = _bulk(epsilon)
    mu_A = 1.0 - A * epsilon
    alpha, gamma = _boundary_pair(p, q, mu_A)
    beta = delta = mu_B = None
    if B is not None:
        mu_B = 1.0 - B * epsilon
        beta, delta = _boundary_pair(p, q, mu_B)
    r = math.sqrt(epsilon)
    # p + q - 2 sqrt(pq) = cosh(r) - 1, written to avoid cancellation
    nu = 2.0 * math.sinh(0.5 * r) ** 2
    rho = 1.0 if geometry == "half-line" else 1.0 / (1.0 - math.exp(-1.0))
    s = Scaling(epsilon, A, B, geometry, N, p, q, mu_A, mu_B, alpha, gamma,
                beta, delta, -r, nu, rho)
    if check:
        named = {"alpha": alpha, "gamma": gamma, "mu_A": mu_A}
        if geometry == "interval":
            named.update(beta=beta, delta=delta, mu_B=mu_B)
        bad = [k for k, v in named.items() if v < 0 or (k.startswith("mu") and v == 0)]
        if bad:
            raise ValueError(f"epsilon={epsilon} outside the validity window: "
                             f"negative {', '.join(bad)}")
    return s


def _valid(eps: float, A: float, B: float | None) -> bool:
    p, q = _bulk(eps)
    for c in (A,) if B is None else (A, B):
        mu = 1.0 - c * eps
        if mu <= 0:
            return False
        a, g = _boundary_pair(p, q, mu)
        if a < 0 or g < 0:
            return False
    return True


def max_epsilon(A: float, B: float | None = None, cap: float = 1.0, tol: float = 1e-12) -> float:
    """Largest ``eps0 <= cap`` with every rate non-negative on ``(0, eps0]``.

    The valid set need not be an interval for large ``eps`` (for strongly
    negative ``A`` it reopens), so the first failure on a log grid is located
    and then refined by bisection.
    """
    grid = np.geomspace(1e-10, cap, 400)
    if not _valid(grid[0], A, B):
        return 0.0
    lo = grid[0]
    for e in grid[1:]:
        if not _valid(e, A, B):
            hi = e
            break
        lo = e
    else:
        return cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _valid(mid, A, B):
            lo = mid
        else:
            hi = mid
    return lo


def asymptotic_residuals(s: Scaling) -> dict[str, float]:
    """Differences between exact rates and their first-order expansions in ``sqrt(eps)``."""
    r = math.sqrt(s.epsilon)
    out = {
        "p": s.p - (0.5 + 0.5 * r),
        "q": s.q - (0.5 - 0.5 * r),
        "alpha": s.alpha - (0.25 + (3 / 8 + s.A / 4) * r),
        "gamma": s.gamma - (0.25 - (3 / 8 + s.A / 4) * r),
    }
    if s.B is not None:
        out["beta"] = s.beta - (0.25 + (3 / 8 + s.B / 4) * r)
        out["delta"] = s.delta - (0.25 - (3 / 8 + s.B / 4) * r)
    return out
