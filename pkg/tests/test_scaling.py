import math

import numpy as np
import pytest

from kpzlab.scaling import asymptotic_residuals, build_scaling, max_epsilon

# 30-digit evaluations of e^{+-0.2}/2, cosh(0.2)-1 and the simplified boundary rates
P04, Q04, NU04 = 0.610701379080084917, 0.409365376538990929, 0.0200667556190758463
ALPHA04, GAMMA04 = 0.335784380423845963, 0.184282375195229884


def test_exact_constants_at_eps_004():
    s = build_scaling(0.04, 0.0)
    assert s.lam == -0.2
    assert s.mu_A == 1.0
    assert s.p == pytest.approx(P04, rel=1e-15)
    assert s.q == pytest.approx(Q04, rel=1e-15)
    assert s.nu == pytest.approx(NU04, rel=1e-14)
    assert s.alpha == pytest.approx(ALPHA04, rel=1e-13)
    assert s.gamma == pytest.approx(GAMMA04, rel=1e-13)


@pytest.mark.parametrize("eps", [0.1, 0.05, 0.025, 1e-4])
def test_exact_identities(eps):
    s = build_scaling(eps, 0.3)
    assert s.p * s.q == pytest.approx(0.25, rel=1e-15)
    assert s.lam == -math.sqrt(eps)
    assert s.nu == pytest.approx(math.cosh(math.sqrt(eps)) - 1, rel=1e-12)
    assert 0.5 * math.log(s.q / s.p) == pytest.approx(s.lam, rel=1e-14)


def test_robin_rates_at_A1():
    # mpmath evaluation of the unsimplified boundary formulas, eps=0.05, A=1
    s = build_scaling(0.05, 1.0)
    assert s.alpha == pytest.approx(0.416784932364815288, rel=1e-13)
    assert s.gamma == pytest.approx(0.133319408068058559, rel=1e-13)


def test_interval_requires_reciprocal_integer():
    s = build_scaling(0.05, 1.0, -0.5, "interval")
    assert s.N == 20 and s.rho == pytest.approx(1 / (1 - math.exp(-1)))
    with pytest.raises(ValueError):
        build_scaling(0.03, 1.0, -0.5, "interval")
    with pytest.raises(ValueError):
        build_scaling(0.05, 1.0, None, "interval")
    assert build_scaling(0.05, 0.0).rho == 1.0


def test_invalid_epsilon_names_rate():
    with pytest.raises(ValueError, match="alpha"):
        build_scaling(0.5, -10.0)
    with pytest.raises(ValueError, match="gamma"):
        build_scaling(0.5, 5.0)


def test_residual_of_p_and_symmetry():
    s = build_scaling(0.04, 0.0, 0.0, "interval", 25)
    r = asymptotic_residuals(s)
    assert abs(r["p"]) == pytest.approx(0.0107013790800849182, rel=1e-12)
    assert r["alpha"] == pytest.approx(r["beta"], abs=1e-16)


def test_residuals_are_order_eps():
    ratios = [abs(asymptotic_residuals(build_scaling(e, 0.7))["alpha"]) / e for e in (0.04, 0.01, 0.0025, 0.000625)]
    assert max(ratios) < 1.0
    assert abs(ratios[-1] - ratios[-2]) < abs(ratios[1] - ratios[0])


def test_max_epsilon():
    assert max_epsilon(0.0, 0.0) == 1.0
    # strongly negative A: the creation rate is the one that turns negative
    e = max_epsilon(-10.0)
    assert build_scaling(e, -10.0).alpha >= 0
    assert build_scaling(e * 1.01, -10.0, check=False).alpha < 0
    e5 = max_epsilon(5.0)
    assert e5 < 1.0
    assert build_scaling(e5 * 1.01, 5.0, check=False).gamma < 0
    for eps in np.geomspace(1e-6, e5, 200):
        s = build_scaling(float(eps), 5.0)
        assert s.alpha >= 0 and s.gamma >= 0
