"""Replica-block workers, one per ensemble kind.

A block maps ``(config, start, stop)`` to the records of replicas
``start .. stop-1``.  Every replica draws from its own counter stream, so a
block's output does not depend on which worker runs it or on the block size.
"""
from __future__ import annotations

import math

import numpy as np

from ..asep.ensemble import height_process_H, macroscopic_field, simulate_replica
from ..goe import replica_products, sample_goe_edge
from ..scaling import build_scaling
from ..she.grid import SheGrid
from ..she.solver import solve
from .config import ExperimentConfig


def asep_scaling(p: dict, epsilon: float | None = None):
    eps = p["epsilon"] if epsilon is None else epsilon
    return build_scaling(eps, p["A"], p.get("B"), p.get("geometry", "half-line"), p.get("N"))


def asep_sites(s, X) -> np.ndarray:
    """Lattice sites needed to interpolate at the macroscopic positions ``X``."""
    x = np.asarray(X, dtype=float) / s.epsilon
    lo = np.floor(x + 1e-9).astype(np.int64)
    frac = x - lo
    sites = set(lo.tolist()) | {int(a) + 1 for a, f in zip(lo, frac) if f > 1e-9}
    return np.array(sorted(sites), dtype=np.int64)


def _base(cfg: ExperimentConfig, r: int) -> dict:
    return {"config_hash": cfg.hash, "seed": cfg.seed, "replica": r}


def asep_block(cfg: ExperimentConfig, start: int, stop: int, epsilon: float | None = None) -> list[dict]:
    p = cfg.params
    s = asep_scaling(p, epsilon)
    T = [float(v) for v in p["T"]]
    X = [float(v) for v in p["X"]]
    t_grid = np.array(sorted(set(T))) / s.epsilon**2
    x_obs = asep_sites(s, X)
    nw = p["normalization"] == "narrow-wedge"
    out = []
    for r in range(start, stop):
        rep = simulate_replica(s, p["init"], t_grid, x_obs, cfg.seed, r,
                               normalization=p["normalization"], density=p["density"])
        if rep.overflow:
            out.append({**_base(cfg, r), "status": "overflow"})
            continue
        Z = macroscopic_field(rep, s, T, X, p["normalization"])
        H = height_process_H(rep, s, T, X, narrow_wedge=nw)
        for i, t in enumerate(T):
            for j, x in enumerate(X):
                out.append({**_base(cfg, r), "observable": "Z", "T": t, "X": x, "value": float(Z[i, j])})
                out.append({**_base(cfg, r), "observable": "H", "T": t, "X": x, "value": float(H[i, j])})
    return out


def she_grid(p: dict) -> SheGrid:
    return SheGrid(p["A"], p.get("B"), p.get("geometry", "half-line"), dx=p.get("dx", 0.02),
                   dt=p.get("dt"), X_max=p.get("X_max", 5.0))


def she_sites(grid: SheGrid, X) -> np.ndarray:
    idx = np.rint(np.asarray(X, dtype=float) / grid.dx).astype(np.int64)
    if np.any(np.abs(idx * grid.dx - np.asarray(X)) > 1e-9) or np.any(idx > grid.J):
        raise ValueError("SHE observation points must be grid sites")
    return idx


def she_initial(grid: SheGrid, init: str) -> np.ndarray:
    return grid.delta0() if init == "delta0" else np.ones(grid.J + 1)


def she_block(cfg: ExperimentConfig, start: int, stop: int) -> list[dict]:
    p = cfg.params
    g = she_grid(p)
    T = [float(v) for v in p["T"]]
    X = [float(v) for v in p["X"]]
    sites = she_sites(g, X)
    tr = solve(she_initial(g, p["init"]), g, T, cfg.seed, np.arange(start, stop))
    out = []
    for k, r in enumerate(range(start, stop)):
        if tr.blown_up[k]:
            out.append({**_base(cfg, r), "status": "blowup"})
            continue
        for i, t in enumerate(T):
            for j, x in enumerate(X):
                z = float(tr.values[k, i, sites[j]])
                out.append({**_base(cfg, r), "observable": "Z", "T": t, "X": x, "value": z})
                # H = log Z only where the field stayed positive
                out.append({**_base(cfg, r), "observable": "H", "T": t, "X": x,
                            "value": math.log(z) if z > 0 else None})
    return out


def goe_block(cfg: ExperimentConfig, start: int, stop: int) -> list[dict]:
    p = cfg.params
    sample = sample_goe_edge(p["n"], p["k"], stop - start, cfg.seed, first_replica=start)
    out = []
    prods = {(xi, T): replica_products(sample, xi, T) for xi in p["xi"] for T in p["T"]}
    for k, r in enumerate(range(start, stop)):
        out.append({**_base(cfg, r), "observable": "a", "value": [float(v) for v in sample.points[k]]})
        out.append({**_base(cfg, r), "observable": "a1", "value": float(sample.points[k, 0])})
        for x in p["x"]:
            out.append({**_base(cfg, r), "observable": "below", "X": float(x),
                        "value": float(sample.points[k, 0] <= x)})
        for (xi, T), v in prods.items():
            out.append({**_base(cfg, r), "observable": "laplace", "T": float(T), "xi": float(xi),
                        "value": float(v[k])})
    return out


BLOCKS = {"asep-ensemble": asep_block, "she-ensemble": she_block, "goe": goe_block}
