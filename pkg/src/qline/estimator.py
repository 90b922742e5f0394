"""Scikit-learn style projector onto the oscillator eigenbasis.

Rows of ``X`` are lattice functions flattened in ``LatticeFunction.values``
order (sign-major).  ``transform`` returns expansion coefficients over the
Fock and non-Fock eigenfunctions up to the cutoffs; ``inverse_transform``
rebuilds the lattice function from them.
"""
from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .eigenbasis import EigenproblemParams, eigenfunction, norm_closed_form
from .errors import DomainError, ParameterError
from .lattice import Lattice, LatticeFunction
from .oscillator import OscillatorParams
from .qcore import QParams
from .verify import cutoff_labels


def check_lattice_array(X, n_features: Optional[int] = None) -> np.ndarray:
    """Coerce ``X`` to a finite complex 2-D array (a 1-D input is one row).

    ``sklearn.utils.check_array`` rejects complex input, hence this helper.
    """
    X = np.asarray(X)
    if X.dtype == object or not (np.issubdtype(X.dtype, np.number) or X.dtype == bool):
        raise DomainError(f"expected numeric data, got dtype {X.dtype}")
    X = X.astype(complex)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise DomainError(f"expected a 2-D array, got {X.ndim} dimensions")
    if X.shape[0] == 0:
        raise DomainError("empty input")
    if not np.all(np.isfinite(X)):
        raise DomainError("input contains nan or inf")
    if n_features is not None and X.shape[1] != n_features:
        raise DomainError(f"expected {n_features} features (lattice points), got {X.shape[1]}")
    return X


class EigenbasisProjector(TransformerMixin, BaseEstimator):
    """Expansion of lattice functions over ``psi0 h_m`` (``m <= m_fock``) and
    ``psi0 k_m`` (``|m| <= m_nonfock``) using the closed-form norms.

    Parameters mirror the command line: ``q``, ``gamma``, ``xi0`` (default:
    calibrated label), ``window`` (half-width ``K``; default lattice rule)
    and ``parity`` of the sublattice (default: the one with ``c = q**(-2
    gamma)``).  ``m_nonfock=-1`` keeps only the Fock family.
    """

    def __init__(self, q: float = 2.0, gamma: float = 0.0, xi0: Optional[float] = None,
                 window: Optional[int] = None, m_fock: int = 8, m_nonfock: int = 4,
                 parity: Optional[int] = None, theta: float = 0.0):
        self.q = q
        self.gamma = gamma
        self.xi0 = xi0
        self.window = window
        self.m_fock = m_fock
        self.m_nonfock = m_nonfock
        self.parity = parity
        self.theta = theta

    def fit(self, X=None, y=None):
        if int(self.m_fock) != self.m_fock or self.m_fock < 0:
            raise ParameterError(f"m_fock must be a nonnegative integer, got {self.m_fock}")
        qp = QParams(float(self.q))
        lat = Lattice.symmetric(qp, xi0=self.xi0, K=self.window)
        op = OscillatorParams(qp, float(self.gamma), float(self.theta))
        ep = EigenproblemParams.from_lattice(lat, op, self.parity)
        labels = cutoff_labels(int(self.m_fock), int(self.m_nonfock), op.gamma)
        funcs = [eigenfunction(lab, lat, ep) for lab in labels]
        self.lattice_ = lat
        self.params_ = ep
        self.labels_ = labels
        self.components_ = np.array([f.values.ravel() for f in funcs])
        self.norms_ = np.array([ep.lattice_factor() * norm_closed_form(lab, ep) for lab in labels])
        n = lat.indices().astype(float)
        w = lat.xi0 * qp.lam * np.power(qp.q, n)
        self.weights_ = np.tile(w, len(lat.signs))
        self.n_features_in_ = self.components_.shape[1]
        if X is not None:
            check_lattice_array(X, self.n_features_in_)
        return self

    def transform(self, X) -> np.ndarray:
        """Coefficients ``(e_L, f) / ||e_L||**2`` for each row ``f``."""
        check_is_fitted(self, "components_")
        X = check_lattice_array(X, self.n_features_in_)
        return (X * self.weights_) @ np.conj(self.components_).T / self.norms_

    def inverse_transform(self, C) -> np.ndarray:
        check_is_fitted(self, "components_")
        C = np.asarray(C, dtype=complex)
        if C.ndim == 1:
            C = C.reshape(1, -1)
        if C.shape[1] != len(self.labels_):
            raise DomainError(f"expected {len(self.labels_)} coefficients, got {C.shape[1]}")
        return C @ self.components_

    def residual(self, X) -> np.ndarray:
        """Relative norm ``||f - Pf|| / ||f||`` per row (Jackson inner product)."""
        X = check_lattice_array(X, getattr(self, "n_features_in_", None))
        R = X - self.inverse_transform(self.transform(X))

        def sq(A):
            return np.sum(np.abs(A) ** 2 * self.weights_, axis=1)

        return np.sqrt(sq(R) / sq(X))

    def to_features(self, f: LatticeFunction) -> np.ndarray:
        check_is_fitted(self, "components_")
        if f.lattice != self.lattice_ or f.window != (self.lattice_.n_min, self.lattice_.n_max):
            raise DomainError("function must cover the fitted lattice window")
        return f.values.ravel().copy()

    def from_features(self, row) -> LatticeFunction:
        check_is_fitted(self, "components_")
        row = check_lattice_array(row, self.n_features_in_)[0]
        return LatticeFunction(self.lattice_, row.reshape(len(self.lattice_.signs), -1))
