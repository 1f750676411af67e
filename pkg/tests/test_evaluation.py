import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rboost.evaluation import (
    MetricLog,
    emit_curves,
    improvement_curve,
    misclassification_count,
    normal_sf,
    pvalue_two_proportion,
    read_curves,
    relative_improvement,
)


def test_misclassification_examples():
    assert misclassification_count([1, 2, 3], [1, 2, 3]) == 0
    assert misclassification_count(np.zeros(7), np.ones(7)) == 7
    assert misclassification_count([0, 1, 2], [0, 2, 2]) == 1
    with pytest.raises(ValueError):
        misclassification_count([0, 1], [0])


def test_normal_tail_against_tables():
    assert 1 - normal_sf(1.96) == pytest.approx(0.9750021, abs=1e-7)
    assert normal_sf(5.291) == pytest.approx(6.1e-8, rel=0.02)
    assert normal_sf(0.0) == 0.5
    # symmetric form agrees with the lower tail to 1e-12 over |z| <= 8
    for z in np.linspace(-8, 8, 161):
        assert normal_sf(z) + normal_sf(-z) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("a, b, n, lo, hi", [
    (2815, 2440, 60000, 5.5e-8, 6.5e-8),
    (2381, 2102, 60000, 0.9e-5, 1.2e-5),
    (2978, 2506, 60000, 2.5e-11, 3.5e-11),
])
def test_pvalue_reference_values(a, b, n, lo, hi):
    assert lo <= pvalue_two_proportion(a, b, n) <= hi


def test_pvalue_direct_formula():
    pa, pb = 2815 / 60000, 2440 / 60000
    z = (pa - pb) / math.sqrt(pa * (1 - pa) / 60000 + pb * (1 - pb) / 60000)
    assert pvalue_two_proportion(2815, 2440, 60000) == pytest.approx(0.5 * math.erfc(z / math.sqrt(2)),
                                                                    rel=1e-14)
    assert pvalue_two_proportion(2815, 2440, 60000) == pytest.approx(6.09e-8, rel=0.01)


def test_pvalue_equal_counts_is_half():
    assert pvalue_two_proportion(100, 100, 1000) == 0.5


@pytest.mark.parametrize("a, b, n", [(0, 0, 10), (10, 10, 10), (-1, 2, 10), (3, 11, 10), (0, 0, 0)])
def test_pvalue_rejects_bad_input(a, b, n):
    with pytest.raises(ValueError):
        pvalue_two_proportion(a, b, n)


def test_pvalue_underflow_reported_as_zero():
    assert pvalue_two_proportion(5000, 10, 10000) == 0.0


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 5000), st.data())
def test_pvalue_antisymmetric(n, data):
    a = data.draw(st.integers(0, n))
    b = data.draw(st.integers(0, n))
    if a in (0, n) and b in (0, n):
        return  # zero variance
    p, q = pvalue_two_proportion(a, b, n), pvalue_two_proportion(b, a, n)
    if p == 0.0 or q == 0.0:
        return  # underflow clamp
    assert p + q == pytest.approx(1.0, abs=1e-12)


def test_pvalue_monotone_in_err_b():
    ps = [pvalue_two_proportion(500, b, 10000) for b in range(500, 300, -10)]
    assert all(x > y for x, y in zip(ps, ps[1:]))


def test_relative_improvement_examples():
    assert relative_improvement(2482, 2034) == pytest.approx(0.1805, abs=5e-5)
    assert relative_improvement(100, 100) == 0.0
    assert relative_improvement(100, 120) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        relative_improvement(0, 3)


def test_metric_log_requires_increasing_iterations():
    log = MetricLog()
    log.append(1, 2.0, 3, 0.1)
    with pytest.raises(ValueError):
        log.append(1, 1.0, 3, 0.2)


def test_single_row_curve_file(tmp_path):
    log = MetricLog()
    log.append(1, 1 / 3, 5, 0.125)
    path = tmp_path / "c.csv"
    emit_curves(log, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,train_loss,test_errors,seconds"
    assert len(lines) == 2


def test_curve_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(0)
    log = MetricLog()
    for m in range(1, 30, 3):
        log.append(m, float(rng.random() * 1e3), int(rng.integers(0, 99)) if m % 2 else None,
                   float(rng.random()))
    path = tmp_path / "c.csv"
    emit_curves(log, path)
    assert read_curves(path).rows == log.rows


def test_empty_log_is_an_error(tmp_path):
    with pytest.raises(ValueError):
        emit_curves(MetricLog(), tmp_path / "c.csv")


def test_improvement_curve():
    base, new = MetricLog(), MetricLog()
    base.append(10, 1.0, 200, 0.0)
    base.append(20, 0.5, 100, 0.0)
    new.append(20, 0.4, 80, 0.0)
    assert improvement_curve(base, new) == [(20, pytest.approx(0.2))]
