import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from byzgossip.metrics import (
    CSV_COLUMNS,
    GcrInapplicable,
    RunRecord,
    bias_variance,
    certificate_passes,
    descent_certificate,
    eta_max,
)


def loop_bias_variance(X, X_star):
    n, d = len(X), len(X[0])
    target = [sum(X_star[i][k] for i in range(n)) / n for k in range(d)]
    mean = [sum(X[i][k] for i in range(n)) / n for k in range(d)]
    bias = n * sum((mean[k] - target[k]) ** 2 for k in range(d))
    var = sum((X[i][k] - mean[k]) ** 2 for i in range(n) for k in range(d))
    mse = sum((X[i][k] - target[k]) ** 2 for i in range(n) for k in range(d))
    return bias, var, mse


def test_bias_variance_against_double_loop(rng):
    X = rng.standard_normal((3, 2))
    X_star = rng.standard_normal((3, 2))
    got = bias_variance(X, X_star)
    np.testing.assert_allclose(got, loop_bias_variance(X.tolist(), X_star.tolist()), rtol=1e-12)


def test_bias_variance_trivial_cases(rng):
    X_star = rng.standard_normal((4, 3))
    at_mean = np.broadcast_to(X_star.mean(axis=0), X_star.shape)
    assert bias_variance(at_mean, X_star) == pytest.approx((0, 0, 0), abs=1e-24)
    b, v, m = bias_variance(X_star, X_star)
    assert b == 0.0 and v == pytest.approx(m, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (5, 3), elements=st.floats(-1e3, 1e3)),
       arrays(np.float64, (5, 3), elements=st.floats(-1e3, 1e3)))
def test_pythagoras(X, X_star):
    b, v, m = bias_variance(X, X_star)
    assert m == pytest.approx(b + v, rel=1e-9, abs=1e-9)


def test_descent_certificate_examples(rng):
    X = rng.standard_normal((4, 2))
    norms = rng.exponential(1.0, 5)
    assert descent_certificate(X, X, X, norms, 0.0, 0.1) == 0.0
    # one gossip step on K3 at eta=1/3 reaches the mean: plenty of decrease
    L = np.array([[2, -1, -1], [-1, 2, -1], [-1, -1, 2]], dtype=float)
    Y = rng.standard_normal((3, 2))
    Z = (np.eye(3) - L / 3) @ Y
    diffs = [np.linalg.norm(Y[j] - Y[i]) for i, j in ((0, 1), (0, 2), (1, 2))]
    assert descent_certificate(Y, Z, Y, diffs, np.inf, 1 / 3) <= 1e-12


def test_certificate_tolerance():
    X = np.zeros((2, 1))
    assert certificate_passes(1e-9, X, X)
    assert not certificate_passes(1e-7, X, X)


def test_eta_max_examples():
    assert eta_max(1, 0.0, 2.0) == 0.25
    assert eta_max(10, 1 - 1e-9, 3.0) == pytest.approx(1 / 3, rel=1e-7)
    with pytest.raises(GcrInapplicable):
        eta_max(10, 1.0, 3.0)


def test_csv_row_order():
    rec = RunRecord(3, 0.5, 2, 0.1, 0.2, 0.30000000000000004, 0.9, -1e-3, seed=7, attack="alie",
                    defense="gcr", run_id="x")
    row = rec.csv_row()
    assert len(row) == len(CSV_COLUMNS)
    assert row[:5] == ["x", "7", "alie", "gcr", "3"]
    assert float(row[CSV_COLUMNS.index("mse")]) == 0.30000000000000004
