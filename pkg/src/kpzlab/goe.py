"""GOE edge point process, the Laplace-product functional and its long-time limit.

Convention: real symmetric matrices with off-diagonal entries of variance 1
and diagonal entries of variance 2, spectrum edge at ``2 sqrt(n)``, scaled
points ``a_i = n^{1/6} (lambda_i - 2 sqrt(n))``.

Sampling uses the tridiagonal model: Householder reduction of such a matrix
gives diagonal ``N(0, 2)`` and off-diagonal ``chi_{n-1}, ..., chi_1`` entries
with the same eigenvalues in law, so only the top ``k`` eigenvalues of a
tridiagonal matrix are needed per replica.  The dense route is kept as a
cross-check.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.stats import norm as _norm

from .rng import numpy_generator


@dataclass
class GoePointSample:
    n: int
    k: int
    seed: int
    points: np.ndarray  # (replicas, k), descending within each row

    @property
    def replicas(self) -> int:
        return self.points.shape[0]

    @property
    def a1(self) -> np.ndarray:
        return self.points[:, 0]


def _tridiagonal(n: int, rng: np.random.Generator):
    d = rng.normal(0.0, math.sqrt(2.0), size=n)
    e = np.sqrt(rng.chisquare(np.arange(n - 1, 0, -1)))
    return d, e


def sample_goe_edge(n: int, k: int = 32, replicas: int = 1000, seed: int = 0,
                    method: str = "tridiagonal", first_replica: int = 0) -> GoePointSample:
    if n < 200:
        raise ValueError("edge scaling needs n >= 200")
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    pts = np.empty((replicas, k))
    for i in range(replicas):
        rng = numpy_generator(seed, first_replica + i)
        if method == "tridiagonal":
            d, e = _tridiagonal(n, rng)
            lam = eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(n - k, n - 1))
        elif method == "dense":
            G = rng.normal(size=(n, n))
            lam = np.linalg.eigvalsh((G + G.T) / math.sqrt(2.0))[n - k:]
        else:
            raise ValueError(f"unknown method {method!r}")
        pts[i] = n ** (1 / 6) * (np.sort(lam)[::-1] - 2.0 * math.sqrt(n))
    return GoePointSample(n, k, seed, pts)


def trace_audit(n: int, seed: int = 0, method: str = "tridiagonal") -> float:
    """Relative gap between the eigenvalue sum and the trace for one replica."""
    rng = numpy_generator(seed, 0)
    if method == "tridiagonal":
        d, e = _tridiagonal(n, rng)
        lam = eigh_tridiagonal(d, e, eigvals_only=True)
        tr = d.sum()
        scale = np.abs(lam).sum()
    else:
        G = rng.normal(size=(n, n))
        M = (G + G.T) / math.sqrt(2.0)
        lam = np.linalg.eigvalsh(M)
        tr = np.trace(M)
        scale = np.abs(lam).sum()
    return float(abs(lam.sum() - tr) / scale)


def _log_factors(points: np.ndarray, xi: float, T: float, shift: float = 0.0) -> np.ndarray:
    """``log (1 + 4 xi e^{(T/2)^{1/3} (a - shift)})^{-1/2}`` elementwise, overflow-safe."""
    if xi == 0:
        return np.zeros_like(points)
    u = math.log(4.0 * xi) + (T / 2.0) ** (1 / 3) * (points - shift)
    return -0.5 * np.logaddexp(0.0, u)


def replica_products(sample: GoePointSample, xi: float, T: float, shift: float = 0.0) -> np.ndarray:
    return np.exp(_log_factors(sample.points, xi, T, shift).sum(axis=1))


def laplace_product(sample: GoePointSample, xi: float, T: float) -> tuple[float, float, float]:
    """Replica average of the truncated product, its MC error and a truncation bound.

    Each omitted factor lies in ``[f(a_k), 1]``, so the full finite-n product
    of a replica is between ``prod_k * f(a_k)^{n-k}`` and ``prod_k``; the
    bound is the mean width of that bracket.
    """
    if xi < 0 or T <= 0:
        raise ValueError("need xi >= 0 and T > 0")
    prods = replica_products(sample, xi, T)
    last = _log_factors(sample.points[:, -1:], xi, T)[:, 0]
    n_tail = sample.n - sample.k
    lower = prods * np.exp(n_tail * last)
    mc = float(prods.std(ddof=1) / math.sqrt(len(prods))) if len(prods) > 1 else math.inf
    return float(prods.mean()), mc, float((prods - lower).mean())


def goe_cdf(sample: GoePointSample, x: float, level: float = 0.95) -> tuple[float, float, float]:
    """Empirical ``P(a_1 <= x)`` with a Wilson score interval."""
    n = sample.replicas
    p = float(np.mean(sample.a1 <= x))
    z = _norm.ppf(0.5 + level / 2)
    denom = 1 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return p, max(0.0, centre - half), min(1.0, centre + half)


def longtime_limit_table(sample: GoePointSample, x: float, T_list, xi: float = 1.0) -> list[dict]:
    """Shifted product expectation against ``P(a_1 <= x)`` on the same replicas.

    The per-replica product with ``a_i - x`` in place of ``a_i`` tends to
    ``1{a_1 <= x}`` as ``T`` grows.  ``se`` combines the standard errors of
    the two estimates as if independent; ``se_paired`` uses the per-replica
    difference and is much smaller at large ``T``.
    """
    T_list = list(T_list)
    if any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be increasing")
    ind = (sample.a1 <= x).astype(float)
    F = float(ind.mean())
    R = len(ind)
    se_F = float(ind.std(ddof=1) / math.sqrt(R))
    rows = []
    for T in T_list:
        prods = replica_products(sample, xi, T, shift=x)
        diff = prods - ind
        rows.append({"T": float(T), "value": float(prods.mean()), "F_emp": F,
                     "gap": float(abs(diff.mean())),
                     "se": math.hypot(float(prods.std(ddof=1) / math.sqrt(R)), se_F),
                     "se_paired": float(diff.std(ddof=1) / math.sqrt(R))})
    return rows


def she_laplace(h_samples, xi: float, T: float) -> tuple[float, float]:
    """Plug-in estimate of ``E exp(-xi exp(H(T, 0) + T/24))`` and its MC error."""
    h = np.asarray(h_samples, dtype=float)
    vals = np.exp(-xi * np.exp(h + T / 24.0))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))


def write_sample_csv(sample: GoePointSample, path) -> None:
    """Long format ``replica,i,a_i`` with a comment header carrying ``n``, ``k`` and the seed."""
    R, k = sample.points.shape
    rows = np.column_stack([np.repeat(np.arange(R), k), np.tile(np.arange(1, k + 1), R),
                            sample.points.ravel()])
    header = f"n={sample.n} k={sample.k} seed={sample.seed}\nreplica,i,a_i"
    np.savetxt(path, rows, delimiter=",", header=header, fmt=["%d", "%d", "%.17g"])


def read_sample_csv(path) -> GoePointSample:
    with open(path) as fh:
        meta = dict(kv.split("=") for kv in fh.readline().lstrip("# ").split())
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    n, k, seed = int(meta["n"]), int(meta["k"]), int(meta["seed"])
    R = int(data[:, 0].max()) + 1
    return GoePointSample(n, k, seed, data[:, 2].reshape(R, k))


def write_table_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
