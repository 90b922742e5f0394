import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qline.errors import ConvergenceError, DomainError, PoleError
from qline.qcore import (
    QParams,
    Tolerance,
    fsum_complex,
    jackson_sum,
    q_derivative_at,
    q_exponential,
    qpoch_finite,
    qpoch_inf,
)


def test_qparams_constants():
    qp = QParams(2.0)
    assert qp.lam == 1.5
    assert qp.base2 == 0.25
    assert qp.base4 == 0.0625
    assert qp.accumulation_point == pytest.approx(4 / 3, rel=1e-15)


@pytest.mark.parametrize("q", [1.0, 0.5, 1.0 + 1e-7, 2e6, math.nan, math.inf])
def test_qparams_rejects_out_of_range(q):
    with pytest.raises(DomainError):
        QParams(q)


def test_tolerance_validation():
    with pytest.raises(DomainError):
        Tolerance(rel=0.0)
    with pytest.raises(DomainError):
        Tolerance(max_terms=0)


def test_qpoch_finite_examples():
    assert qpoch_finite(0.3, 0.5, 0) == 1.0
    assert qpoch_finite(0.5, 0.25, 2) == pytest.approx(0.4375, rel=1e-15)
    assert qpoch_finite(1.0, 0.25, 3) == 0.0
    with pytest.raises(DomainError):
        qpoch_finite(0.5, 0.5, -1)


def test_qpoch_inf_examples():
    assert qpoch_inf(0.0, 0.5) == 1.0
    assert qpoch_inf(0.5, 0.0) == 0.5
    direct = math.prod(1 - 0.9 * 0.5**i for i in range(200))
    assert qpoch_inf(0.9, 0.5, Tolerance(1e-12)) == pytest.approx(direct, rel=1e-10)
    with pytest.raises(DomainError):
        qpoch_inf(0.5, 1.0)


def test_qpoch_inf_convergence_error_carries_partial():
    with pytest.raises(ConvergenceError) as info:
        qpoch_inf(0.5, 0.999, Tolerance(1e-15, max_terms=5))
    assert info.value.partial == pytest.approx(qpoch_finite(0.5, 0.999, 5), rel=1e-15)


@given(st.floats(-0.9, 0.9), st.floats(0.05, 0.8), st.integers(0, 30))
@settings(max_examples=50, deadline=None)
def test_qpoch_splits(a, base, n):
    # (a; b)_inf = (a; b)_n (a b^n; b)_inf
    lhs = qpoch_inf(a, base)
    rhs = qpoch_finite(a, base, n) * qpoch_inf(a * base**n, base)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-300)


def test_q_exponential_examples():
    qp = QParams(2.0)
    assert q_exponential(0.0, qp) == 1.0
    with pytest.raises(PoleError):
        q_exponential(1.0, qp)


def test_q_exponential_modulus_is_weight():
    qp = QParams(1.5)
    y = np.linspace(-3, 3, 13)
    e = q_exponential(1j * y, qp)
    w = 1.0 / qpoch_inf(-(y**2), qp.base4)
    np.testing.assert_allclose(np.abs(e) ** 2, w, rtol=1e-12)


def test_q_derivative_examples():
    qp = QParams(2.0)
    assert q_derivative_at(lambda x: 3.0, 0.7, qp) == 0.0
    assert q_derivative_at(lambda x: x, 0.7, qp) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(DomainError):
        q_derivative_at(lambda x: x, 0.0, qp)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_q_derivative_of_q_exponential(q):
    qp = QParams(q)
    c, x = 0.3 - 0.2j, 0.8
    lhs = q_derivative_at(lambda t: q_exponential(c * t, qp), x, qp)
    rhs = c * (q / qp.lam) * q_exponential(q * c * x, qp)
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_jackson_sum_examples():
    assert jackson_sum(lambda n: 0.0, 0.5, -3, 3) == 0.0
    q = 1.7
    N = 12
    geo = jackson_sum(lambda n: 1.0, q**-2, 0, N)
    assert geo == pytest.approx((1 - q ** (-2 * (N + 1))) / (1 - q**-2), rel=1e-14)
    assert jackson_sum([2.5], 0.5, 3, 3) == pytest.approx(2.5 * 0.125)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert jackson_sum([], 0.5, 1, 0) == 0.0
    assert any("empty" in str(w.message) for w in caught)
    with pytest.raises(DomainError):
        jackson_sum([1.0, 2.0], 0.5, 0, 2)


def test_fsum_complex_is_exact():
    vals = [1e16, 1.0 + 1j, -1e16, 1e-16j]
    assert fsum_complex(vals) == complex(1.0, 1.0 + 1e-16)
