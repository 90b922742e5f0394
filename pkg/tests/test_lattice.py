import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qline.errors import DomainError, WindowError
from qline.lattice import (
    Lattice,
    LatticeFunction,
    apply_Dq,
    apply_P,
    apply_U,
    apply_X,
    calibrated_xi0,
    default_window,
    heisenberg_residual,
    heisenberg_residuals,
    inner_product,
    norm,
)
from qline.qcore import QParams


def lattice(q=2.0, xi0=1.0, K=6):
    return Lattice.symmetric(QParams(q), xi0=xi0, K=K)


def test_points():
    assert lattice(xi0=1.0).point(1, 0) == 1.0
    assert lattice(xi0=1.2).point(-1, 2) == pytest.approx(-4.8, rel=1e-15)
    assert lattice(xi0=1.0).point(1, -1) == 0.5
    with pytest.raises(DomainError):
        lattice().point(1, 7)


def test_lattice_validation():
    with pytest.raises(DomainError):
        lattice(xi0=2.0)
    with pytest.raises(DomainError):
        Lattice(QParams(2.0), 1.0, 3, 2)


@pytest.mark.parametrize("q", [1.1, 1.5, 2.0, 3.0, 10.0])
def test_calibrated_xi0(q):
    qp = QParams(q)
    xi = calibrated_xi0(qp)
    assert 1.0 <= xi < q
    # xi^2 lambda^2 / q is an even power of q... up to the label shift
    t = math.log(xi**2 * qp.lam**2 / q) / math.log(q)
    assert abs(t / 2 - round(t / 2)) < 1e-9
    assert default_window(qp) >= 40


def test_U_examples():
    lat = lattice(q=2.0)
    f = LatticeFunction.from_callable(lat, lambda x: x)
    assert apply_U(f, 0) is f
    g = apply_U(f, 1)
    assert g.window == (-5, 6)
    np.testing.assert_allclose(g.values, 2.0**-1.5 * g.x, rtol=1e-15)


def test_P_examples():
    q = 1.5
    lat = lattice(q=q)
    const = LatticeFunction.from_callable(lat, lambda x: 2.0 + 0 * x)
    assert np.all(apply_P(const).values == 0)
    ident = apply_P(LatticeFunction.from_callable(lat, lambda x: x))
    np.testing.assert_allclose(ident.values, -1j, rtol=1e-14)
    sq = apply_P(LatticeFunction.from_callable(lat, lambda x: x**2))
    np.testing.assert_allclose(sq.values, -1j * (q + 1 / q) * sq.x, rtol=1e-14)
    assert apply_Dq(ident).window == (-4, 4)


def test_X_examples():
    lat = lattice()
    zero = LatticeFunction.zeros(lat)
    assert np.all(apply_X(zero).values == 0)
    one = LatticeFunction.from_callable(lat, lambda x: 1.0 + 0 * x)
    np.testing.assert_array_equal(apply_X(one).values, one.x)
    np.testing.assert_allclose(apply_X(apply_X(one)).values, one.x**2, rtol=1e-15)


def test_window_exhaustion():
    lat = lattice(K=1)
    f = LatticeFunction.from_callable(lat, lambda x: x)
    with pytest.raises(WindowError):
        apply_Dq(apply_Dq(f))


def test_inner_product_single_point():
    q, xi0 = 2.0, 1.3
    lat = lattice(q=q, xi0=xi0)
    assert inner_product(LatticeFunction.zeros(lat), LatticeFunction.zeros(lat)) == 0
    vals = np.zeros((2, lat.size), dtype=complex)
    vals[1, 2 - lat.n_min] = 0.6 - 0.8j
    f = LatticeFunction(lat, vals)
    assert inner_product(f, f) == pytest.approx(xi0 * (q - 1 / q) * q**2 * 1.0, rel=1e-15)
    assert norm(f) == pytest.approx(math.sqrt(xi0 * 1.5 * 4), rel=1e-15)


def test_inner_product_hermitian():
    lat = lattice(q=1.5)
    rng = np.random.default_rng(1)
    f, g = LatticeFunction.random(lat, rng), LatticeFunction.random(lat, rng)
    assert inner_product(f, g) == pytest.approx(np.conj(inner_product(g, f)), rel=1e-14)


def test_csv_round_trip():
    lat = lattice(q=1.7, xi0=1.25)
    f = LatticeFunction.random(lat, np.random.default_rng(3))
    text = f.to_csv()
    assert text.splitlines()[0] == "sign,n,x,re,im"
    assert "\r" not in text
    g = LatticeFunction.from_csv(lat, io.StringIO(text))
    np.testing.assert_array_equal(f.values, g.values)
    assert g.window == f.window


def test_immutable():
    f = LatticeFunction.zeros(lattice())
    with pytest.raises(AttributeError):
        f.n_lo = 0
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_heisenberg_examples():
    lat = lattice(q=1.5, K=10)
    assert heisenberg_residual(LatticeFunction.zeros(lat)) == 0.0
    f = LatticeFunction.from_callable(lat, lambda x: x)
    assert heisenberg_residuals(f)["ux_xu"] < 1e-15


@given(st.sampled_from([1.1, 1.5, 2.0, 3.0]), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_heisenberg_random(q, seed):
    lat = Lattice.symmetric(QParams(q), xi0=1.0, K=8)
    f = LatticeFunction.random(lat, np.random.default_rng(seed))
    assert heisenberg_residual(f) < 1e-12
