import math

import numpy as np
import pytest

from kpzlab.continuum import ContinuumKernel, gaussian, richardson, robin_bc_residual, total_mass


def _neumann_closed_form(T, X, Y):
    return gaussian(T, X - Y) + gaussian(T, X + Y)


def test_neumann_limit_matches_method_of_images():
    ker = ContinuumKernel(0.0)
    val, err = ker(0.5, [0.0, 0.3, 1.0], [0.2, 0.7])
    ref = _neumann_closed_form(0.5, np.array([[0.0], [0.3], [1.0]]), np.array([[0.2, 0.7]]))
    assert np.abs(val - ref).max() <= 1e-3
    assert np.all(err >= 0)


def test_richardson_removes_known_orders():
    h = 0.1 * 2.0 ** -np.arange(4)
    vals = 2.0 + 0.7 * h + 0.3 * h**2
    v, e = richardson(vals, (1.0, 2.0))
    assert v == pytest.approx(2.0, abs=1e-12)


def test_total_mass_conserved_at_neumann_interval():
    ker = ContinuumKernel(0.0, 0.0, "interval")
    m, _ = total_mass(ker, 0.3, [0.2, 0.5])
    assert np.allclose(m, 1.0, atol=1e-6)


def test_mass_grows_when_branching():
    m_branch, _ = total_mass(ContinuumKernel(-1.0), 0.5, [0.0])
    m_kill, _ = total_mass(ContinuumKernel(1.0), 0.5, [0.0])
    assert m_branch[0] > 1.0 > m_kill[0]


def test_robin_residual_shrinks_with_eps():
    r = np.abs(robin_bc_residual(ContinuumKernel(1.0), 0.5, [0.3]))[:, 0]
    assert np.all(np.diff(r) < 0)
    ratios = r[1:] / r[:-1]
    assert np.all((ratios > 0.35) & (ratios < 0.65))


def test_resolution_floor():
    with pytest.raises(ValueError):
        ContinuumKernel(0.0)(0.05, [0.0], [0.0])
    with pytest.raises(ValueError):
        ContinuumKernel(0.0, None, "interval")
