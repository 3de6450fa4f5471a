import math

import numpy as np
import pytest

from kpzlab.kernels import KernelEvaluator, kernel_eval, robin_spectrum
from kpzlab.kernels.estimates import expm_perturbation_check, spectrum_report
from kpzlab.kernels.identities import generating_identity, mass_deficiency, signed_identity
from kpzlab.kernels.wholeline import wholeline
from kpzlab.scaling import build_scaling

# p_t(x, y) at mu = 1 is e^{-t}(I_{x-y}(t) + I_{x+y+1}(t)); on {0..8} the images
# repeat with period 18.  Values from 30-digit Bessel functions.
REFLECTING = {(0, 0): 0.476631091143469294, (3, 5): 0.104780690216172298, (10, 2): 1.44141388682426678e-05}
REFLECTING_N8 = {(0, 0): 0.47663109114348207, (3, 5): 0.10478265844530787, (8, 1): 1.0890074705338094e-4}
# 25-digit matrix exponential of the truncated generator, t = 3
ROBIN_T3 = {1.05: {(0, 0): 0.46881041548964838, (2, 4): 0.11202132062201548, (7, 1): 0.0010865977216624661},
            0.9: {(0, 0): 0.38744583949306074, (2, 4): 0.1119739400237842, (7, 1): 0.0010852846889899167}}


def test_wholeline_is_bessel_kernel():
    # e^{-2.5} I_0(2.5), 30-digit Bessel evaluation
    assert float(wholeline(2.5, [0])[0]) == pytest.approx(0.270046441612202740, rel=1e-13)
    total = wholeline(2.5, np.arange(-80, 81)).sum()
    assert total == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("xy,val", REFLECTING.items())
def test_half_line_reflecting_frozen(xy, val):
    ev = KernelEvaluator(1.0)
    assert ev.value(2.5, *xy) == pytest.approx(val, rel=1e-13)
    assert ev.with_route("ode-oracle").value(2.5, *xy) == pytest.approx(val, rel=1e-12)


@pytest.mark.parametrize("xy,val", REFLECTING_N8.items())
@pytest.mark.parametrize("route", ["interval-recursion", "spectral", "ode-oracle"])
def test_interval_reflecting_frozen(xy, val, route):
    ev = KernelEvaluator(1.0, 1.0, 8, route)
    assert ev.value(2.5, *xy) == pytest.approx(val, rel=1e-12)


@pytest.mark.parametrize("mu", sorted(ROBIN_T3))
def test_half_line_robin_frozen(mu):
    ev = KernelEvaluator(mu)
    for (x, y), val in ROBIN_T3[mu].items():
        assert ev.value(3.0, x, y) == pytest.approx(val, rel=1e-13)


def test_initial_condition_and_ghost():
    ev = KernelEvaluator(1.05)
    M = ev.matrix(0.0, [0, 1, 2], [0, 1, 2])
    assert np.array_equal(M, np.eye(3))
    G = ev.matrix(0.7, [-1, 0], [0, 3, 6])
    assert np.allclose(G[0], 1.05 * G[1], rtol=1e-13)


def test_interval_routes_agree_with_robin_ends():
    s = build_scaling(0.05, 1.0, -0.5, "interval")
    vals = [kernel_eval(37.0, 4, 15, s, r) for r in ("interval-recursion", "spectral", "ode-oracle")]
    assert max(vals) - min(vals) <= 1e-12 * max(1.0, abs(vals[0]))


def test_conservation_at_neumann():
    ev = KernelEvaluator(1.0, 1.0, 20)
    assert np.allclose(ev.row_sums(50.0, np.arange(21)), 1.0, atol=1e-12)


def test_generating_identity():
    for mu in (0.9, 1.0, 1.05):
        lhs, rhs = generating_identity(20.0, 3, mu)
        assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_mass_deficiency():
    r = mass_deficiency(KernelEvaluator(1.05), 10.0, 2)
    assert r["residual"] <= 1e-6
    assert r["deficiency"] > 0  # mu_A > 1 feeds mass in


def test_signed_identity_half_line():
    ev = KernelEvaluator(1.0)
    assert signed_identity(ev, 3, 3)["value"] == pytest.approx(1.0, abs=2e-3)
    assert signed_identity(ev, 3, 5)["value"] == pytest.approx(0.0, abs=2e-3)


def test_spectrum_brackets_and_positive_count():
    rep = spectrum_report(200, 1 + 1 / 200, 1 + 0.5 / 200)
    assert rep["bracket_match"]
    sp = robin_spectrum(50, 1.0, 1.0)
    assert sp.eigenvalues.max() == pytest.approx(0.0, abs=1e-12)
    sp_pos = robin_spectrum(50, 1.2, 1.2)
    assert np.sum(sp_pos.eigenvalues > 1e-12) >= 1


def test_perturbation_ratio_small_trials():
    assert expm_perturbation_check(trials=40) <= 1.0


def test_unknown_route_rejected():
    with pytest.raises(ValueError):
        KernelEvaluator(1.0, route="nope")
    with pytest.raises(ValueError):
        KernelEvaluator(1.0, route="spectral")
    with pytest.raises(ValueError):
        KernelEvaluator(0.0)
