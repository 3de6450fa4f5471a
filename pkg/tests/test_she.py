import math

import numpy as np
import pytest

from kpzlab.she import SheGrid, VolterraOracle, first_moment_oracle, second_moment_exact, solve
from kpzlab.she.martingale import functional_rows, martingale_statistic, smooth_step
from kpzlab.she.martingale import test_function as make_phi
from kpzlab.she.moments import second_moment_lyapunov, volterra_ladder

GRID = SheGrid(-0.5, None, "half-line", dx=0.05, X_max=2.0)
IGRID = SheGrid(1.0, -0.5, "interval", dx=0.05)


def test_grid_validation():
    with pytest.raises(ValueError):
        SheGrid(0.0, dx=0.05, dt=0.01)
    with pytest.raises(ValueError):
        SheGrid(0.0, None, "interval", dx=0.05)
    with pytest.raises(ValueError):
        SheGrid(0.0, 0.0, "interval", dx=0.03)
    assert IGRID.J == 20 and IGRID.X_max == 1.0


def test_one_step_nonnegative_and_matches_spectral():
    P = GRID.one_step()
    assert P.min() >= 0.0
    assert GRID.one_step_gap() <= 1e-13


def test_zero_noise_is_heat_flow():
    Z0 = np.exp(-GRID.X)
    T = [0.0, 0.1, 0.25]
    tr = solve(Z0, GRID, T, seed=1, replicas=[0, 1], noise=0.0)
    for k, t in enumerate(T):
        assert np.allclose(tr.values[0, k], first_moment_oracle(Z0, GRID, t), rtol=1e-11, atol=1e-14)
    assert np.array_equal(tr.values[0], tr.values[1])


def test_zero_field_stays_zero():
    tr = solve(np.zeros(GRID.J + 1), GRID, [0.1, 0.2], seed=3, replicas=range(4))
    assert not tr.values.any()


def test_replicas_independent_of_block_split():
    Z0 = GRID.delta0()
    whole = solve(Z0, GRID, [0.1], seed=5, replicas=range(6)).values
    parts = np.concatenate([solve(Z0, GRID, [0.1], seed=5, replicas=r).values for r in ([0, 1], [2, 3, 4], [5])])
    assert np.array_equal(whole, parts)


def test_recorded_times_must_be_on_the_mesh():
    with pytest.raises(ValueError):
        solve(np.ones(GRID.J + 1), GRID, [GRID.dt * 2.5], seed=0, replicas=[0])
    with pytest.raises(ValueError):
        solve(np.ones(5), GRID, [0.1], seed=0, replicas=[0])


def test_first_moment_properties():
    g = SheGrid(0.0, 0.0, "interval", dx=0.05)
    assert np.allclose(first_moment_oracle(np.ones(g.J + 1), g, 0.4), 1.0, atol=1e-12)
    a, b = np.exp(-g.X), np.cos(g.X)
    lhs = first_moment_oracle(2 * a + 3 * b, g, 0.3)
    assert np.allclose(lhs, 2 * first_moment_oracle(a, g, 0.3) + 3 * first_moment_oracle(b, g, 0.3))


def test_delta_mean_matches_oracle():
    g = SheGrid(-0.5, None, "half-line", dx=0.05, X_max=2.0)
    R = 2000
    tr = solve(g.delta0(), g, [0.25], seed=11, replicas=range(R))
    Z = tr.values[:, 0, :]
    mean, se = Z.mean(axis=0), Z.std(axis=0, ddof=1) / math.sqrt(R)
    target = first_moment_oracle(g.delta0(), g, 0.25)
    sel = [0, 4, 8, 12]
    assert np.all(np.abs(mean[sel] - target[sel]) <= 4 * se[sel])


def test_second_moment_zero_noise_and_growth():
    Z0 = np.ones(IGRID.J + 1)
    v0 = second_moment_exact(Z0, IGRID, [0.2], noise=0.0)[0]
    assert np.allclose(v0, first_moment_oracle(Z0, IGRID, 0.2) ** 2, rtol=1e-12)
    v = second_moment_exact(Z0, IGRID, [0.2])[0]
    assert np.all(v > v0)


def test_second_moment_small_time_scaling():
    g = SheGrid(0.0, 0.0, "interval", dx=0.05)
    Z0 = np.ones(g.J + 1)
    Ts = [0.0125, 0.05, 0.2]
    excess = [second_moment_exact(Z0, g, [T])[0][10] - 1.0 for T in Ts]
    ratios = [e / math.sqrt(T) for e, T in zip(excess, Ts)]
    assert max(ratios) / min(ratios) < 2.5


def test_volterra_oracle_agrees_with_lyapunov():
    Z0 = np.ones(IGRID.J + 1)
    v = VolterraOracle(IGRID, 0.2, n_panels=40).solve(Z0)[-1]
    lyap = second_moment_lyapunov(Z0, IGRID, 0.2)
    assert np.max(np.abs(v / lyap - 1)) < 2e-3


def test_volterra_ladder_shrinks():
    lad = volterra_ladder(lambda g: np.ones(g.J + 1), 1.0, -0.5, "interval", 0.1, 1.0, 0.2,
                          [0.005 / 2**k for k in range(3)], n_panels=60)
    assert np.all(lad["ratios"] < 0.7)


def test_test_functions_satisfy_robin_conditions():
    assert abs(make_phi("plateau", -1.0).boundary_residuals()["left"]) <= 1e-10
    assert abs(make_phi("gaussian", 0.0).boundary_residuals()["left"]) <= 1e-8
    r = make_phi("gaussian", 1.0, -0.5, "interval").boundary_residuals()
    assert abs(r["left"]) <= 1e-8 and abs(r["right"]) <= 1e-8
    phi = make_phi("plateau", 0.5, width=0.6)
    assert np.all(phi(np.array([0.6, 0.8, 2.0])) == 0.0)
    assert smooth_step(np.array([0.0]), 0.2, 0.5)[0] == 1.0


def test_martingale_statistic_zero_noise_and_zero_field():
    phi = make_phi("gaussian", -0.5)
    lin, quad = functional_rows(phi, GRID)
    T = [0.0, 0.05, 0.1]
    tr = solve(np.exp(-GRID.X), GRID, T, seed=2, replicas=range(5), noise=0.0, lin=lin, quad=quad)
    stat = martingale_statistic(tr, phi)
    Yd = stat["per_phi"][0]["discrete"]["Y"]["mean"]
    assert np.abs(Yd).max() <= 1e-12
    Yc = stat["per_phi"][0]["continuum"]["Y"]["mean"]
    assert np.abs(Yc).max() <= 5e-3
    tr0 = solve(np.zeros(GRID.J + 1), GRID, T, seed=2, replicas=range(5), lin=lin, quad=quad)
    stat0 = martingale_statistic(tr0, phi)
    assert stat0["max_abs_z"] == 0.0


def test_martingale_statistic_flat_neumann():
    g = SheGrid(0.0, 0.0, "interval", dx=0.05)
    phis = [make_phi("plateau", 0.0, 0.0, "interval"), make_phi("gaussian", 0.0, 0.0, "interval")]
    lin, quad = functional_rows(phis, g)
    tr = solve(np.ones(g.J + 1), g, [0.0, 0.05, 0.1], seed=8, replicas=range(1500), lin=lin, quad=quad)
    assert martingale_statistic(tr, phis)["max_abs_z"] <= 4.0
