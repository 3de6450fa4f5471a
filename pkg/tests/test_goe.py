import math

import numpy as np
import pytest

from kpzlab.goe import (GoePointSample, goe_cdf, laplace_product, longtime_limit_table, read_sample_csv,
                        replica_products, sample_goe_edge, she_laplace, trace_audit, write_sample_csv)

SAMPLE = sample_goe_edge(400, 16, 300, seed=21)


def test_points_descending_and_deterministic():
    assert np.all(np.diff(SAMPLE.points, axis=1) < 0)
    again = sample_goe_edge(400, 16, 300, seed=21)
    assert np.array_equal(again.points, SAMPLE.points)
    tail = sample_goe_edge(400, 16, 100, seed=21, first_replica=200)
    assert np.array_equal(tail.points, SAMPLE.points[200:])


def test_input_validation():
    with pytest.raises(ValueError):
        sample_goe_edge(100, 4, 2)
    with pytest.raises(ValueError):
        sample_goe_edge(400, 400, 2)
    with pytest.raises(ValueError):
        laplace_product(SAMPLE, -1.0, 1.0)


def test_trace_audit():
    assert trace_audit(400, seed=3) <= 1e-8
    assert trace_audit(300, seed=3, method="dense") <= 1e-8


def test_dense_and_tridiagonal_same_law_scale():
    dense = sample_goe_edge(300, 2, 60, seed=5, method="dense")
    tri = sample_goe_edge(300, 2, 60, seed=6)
    assert abs(dense.a1.mean() - tri.a1.mean()) < 4 * math.hypot(dense.a1.std(), tri.a1.std()) / math.sqrt(60)


def test_laplace_product_limits():
    m, mc, tr = laplace_product(SAMPLE, 0.0, 1.0)
    assert m == 1.0 and mc == 0.0 and tr == 0.0
    vals = [laplace_product(SAMPLE, xi, 1.0)[0] for xi in (0.1, 0.5, 1.0, 2.0, 10.0, 1e6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-2
    p1 = replica_products(SAMPLE, 0.5, 1.0)
    p2 = replica_products(SAMPLE, 1.0, 1.0)
    assert np.all(p2 < p1)


def test_overflow_safe_factors():
    pts = GoePointSample(400, 2, 0, np.array([[800.0, -800.0]]))
    assert np.isfinite(replica_products(pts, 1.0, 1e12)).all()


def test_per_replica_limit_is_indicator():
    far = np.abs(SAMPLE.a1) > 0.01
    for xi in (0.5, 2.0):
        lim = replica_products(SAMPLE, xi, 1e12)
        assert np.abs(lim[far] - (SAMPLE.a1[far] <= 0)).max() <= 1e-12


def test_goe_cdf_limits_and_interval():
    assert goe_cdf(SAMPLE, 50.0)[0] == 1.0
    assert goe_cdf(SAMPLE, -50.0)[0] == 0.0
    p, lo, hi = goe_cdf(SAMPLE, 0.0)
    assert lo < p < hi


def test_longtime_table_shape():
    rows = longtime_limit_table(SAMPLE, 0.0, [8.0, 64.0, 512.0])
    assert [r["T"] for r in rows] == [8.0, 64.0, 512.0]
    assert rows[-1]["gap"] < rows[0]["gap"]
    assert all(r["se_paired"] <= r["se"] for r in rows)
    with pytest.raises(ValueError):
        longtime_limit_table(SAMPLE, 0.0, [64.0, 8.0])


def test_she_laplace():
    h = np.random.default_rng(0).normal(size=500)
    assert she_laplace(h, 0.0, 1.0)[0] == 1.0
    assert she_laplace(h, 1.0, 1.0)[0] > she_laplace(h, 2.0, 1.0)[0]


def test_sample_csv_roundtrip(tmp_path):
    write_sample_csv(SAMPLE, tmp_path / "s.csv")
    back = read_sample_csv(tmp_path / "s.csv")
    assert (back.n, back.k, back.seed) == (400, 16, 21)
    assert np.array_equal(back.points, SAMPLE.points)
