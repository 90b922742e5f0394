import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qline.eigenbasis import EigenproblemParams, eigenfunction
from qline.errors import DomainError, ParameterError
from qline.estimator import EigenbasisProjector, check_lattice_array
from qline.oscillator import SpectrumLabel
from qline.verify import shell_function


@pytest.fixture(scope="module")
def fitted():
    return EigenbasisProjector(q=2.0, m_fock=6, m_nonfock=2).fit()


def test_params_round_trip():
    est = EigenbasisProjector(q=1.5, gamma=0.2, m_fock=3)
    assert est.get_params()["q"] == 1.5
    twin = clone(est)
    assert twin.get_params() == est.get_params()


def test_not_fitted():
    with pytest.raises(NotFittedError):
        EigenbasisProjector().transform(np.zeros((1, 4)))


def test_basis_member_is_one_hot(fitted):
    labels = fitted.labels_
    j = labels.index(SpectrumLabel.fock(3))
    row = fitted.components_[j]
    coef = fitted.transform(row)[0]
    expected = np.zeros(len(labels))
    expected[j] = 1.0
    assert np.max(np.abs(coef - expected)) < 1e-9
    assert fitted.residual(row)[0] < 1e-8


def test_nonfock_member(fitted):
    j = fitted.labels_.index(SpectrumLabel.nonfock(-1, 0.0))
    assert fitted.residual(fitted.components_[j] * (0.3 - 2j))[0] < 1e-8


def test_inverse_transform_rebuilds_combinations(fitted):
    # coefficients of unit-norm components; norms span many decades
    rng = np.random.default_rng(0)
    n = len(fitted.labels_)
    unit = rng.normal(size=(3, n)) + 1j * rng.normal(size=(3, n))
    root = np.sqrt(fitted.norms_)
    X = fitted.inverse_transform(unit / root)
    back = fitted.transform(X) * root
    assert np.max(np.abs(back - unit)) < 1e-8 * np.abs(unit).max()


def test_shell_residual_matches_verify_module():
    est = EigenbasisProjector(q=2.0, m_fock=8, m_nonfock=4).fit()
    f = shell_function(est.lattice_, est.params_, 0)
    r = est.residual(est.to_features(f))[0]
    assert 0 < r < 0.05
    back = est.from_features(est.to_features(f))
    np.testing.assert_array_equal(back.values, f.values)


def test_feature_count_checked(fitted):
    with pytest.raises(DomainError):
        fitted.transform(np.zeros((2, 5)))
    with pytest.raises(DomainError):
        fitted.inverse_transform(np.zeros(3))


def test_fit_validation():
    with pytest.raises(ParameterError):
        EigenbasisProjector(m_fock=-1).fit()


def test_check_lattice_array():
    assert check_lattice_array([1, 2, 3]).shape == (1, 3)
    assert check_lattice_array(np.ones((2, 3))).dtype == complex
    with pytest.raises(DomainError):
        check_lattice_array([[np.nan]])
    with pytest.raises(DomainError):
        check_lattice_array(np.zeros((0, 3)))
    with pytest.raises(DomainError):
        check_lattice_array(["a"])
