"""Eigenfunctions of H = a+ a on the lattice.

Both families are written in the scaled coordinate ``y = q**(-gamma-1/2)
lambda x`` in which the ground-state weight is ``|psi0|**2 = 1/(-y**2;
q**-4)_inf``.  On the parity-``p`` sublattice the points are ``y = sign *
sqrt(c) * q**(-2k)`` with ``c = q**(-2 gamma - 1) lambda**2 xi0**2 q**(2p)``.

* Fock levels: ``psi0 * h_m(y)``, the q-Hermite II polynomials.
* Non-Fock levels (lattice calibrated, ``c = q**(-2 gamma')`` with
  ``gamma' - gamma`` an integer): ``psi0 * k_m(y)``.

Each function has two representations, a 2phi1 series in ``1/y**2``
(good for large ``|y|``) and a combination of two 1phi1 series in ``y**2``
(good for small ``|y|``), linked by the connection formula

    (-eps)^k 2phi1(-1/(eps q^2), -1/eps; 0; q^-4, -q^(4k-4)/c)
        = C_e phi_e(y) + C_o q^(-2k) phi_o(y).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, ParameterError
from .lattice import Lattice, LatticeFunction
from .oscillator import (
    FOCK,
    NONFOCK,
    OscillatorParams,
    SpectrumLabel,
    ground_state_values,
)
from .qcore import DEFAULT_TOL, Tolerance, qpoch_finite, qpoch_inf, qpoch_inf_many
from .qhyper import Phi11Spec, Phi21Spec, phi11, phi11_condition, phi21

ROUTE_CROSSOVER = 0.9
_INTEGER_TOL = 1e-9


def _nearest_integer(t: float, tol: float = _INTEGER_TOL) -> Optional[int]:
    r = round(t)
    return int(r) if abs(t - r) <= tol * max(1.0, abs(t)) else None


@dataclass(frozen=True)
class EigenproblemParams:
    """Oscillator parameters plus the lattice constant ``c``.

    ``calibrated`` and ``gamma_shift`` are derived: the lattice is calibrated
    when ``c = q**(-2 (gamma + j))`` for an integer ``j = gamma_shift``.
    ``xi0`` and ``base_index`` are recorded when the parameters come from a
    lattice (see :meth:`from_lattice`); the sublattice is then
    ``n = base_index + 2 * k'`` with scaled points ``y = sign sqrt(c) q**(2k')``.
    """

    op: OscillatorParams
    c: float
    xi0: Optional[float] = None
    base_index: int = 0
    calibrated: bool = field(init=False)
    gamma_shift: Optional[int] = field(init=False)

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ParameterError(f"c must be positive, got {self.c}")
        t = -math.log(self.c) / (2.0 * math.log(self.qp.q)) - self.op.gamma
        shift = _nearest_integer(t)
        object.__setattr__(self, "calibrated", shift is not None)
        object.__setattr__(self, "gamma_shift", shift)

    @classmethod
    def from_lattice(cls, lat: Lattice, op: OscillatorParams,
                     parity: Optional[int] = None) -> "EigenproblemParams":
        """Parameters for the ``parity`` sublattice of ``lat``.

        The reference index is chosen so that ``c`` is as close as possible
        to ``q**(-2 gamma)``: on a calibrated lattice one sublattice gets
        ``c = q**(-2 gamma)`` exactly and the other ``c = q**(-2 gamma - 2)``
        (a unit shift of gamma).  ``parity=None`` picks the former.
        """
        if lat.qp != op.qp:
            raise DomainError("lattice and oscillator use different q")
        qp = op.qp
        lq = math.log(qp.q)
        c0 = qp.q ** (-2 * op.gamma - 1) * qp.lam**2 * lat.xi0**2
        # c(n0) = c0 q^(2 n0); aim for log_q c(n0) = -2 gamma
        target = -(math.log(c0) / lq + 2 * op.gamma) / 2.0
        if parity is None:
            n0 = round(target)
        else:
            if parity not in (0, 1):
                raise ParameterError(f"parity must be 0 or 1, got {parity}")
            lower = math.floor(target)
            if (lower - parity) % 2:
                lower -= 1
            # candidates lower and lower + 2; ties go to the larger gamma shift
            n0 = lower if target - lower <= lower + 2 - target else lower + 2
        return cls(op, c0 * qp.q ** (2 * n0), xi0=lat.xi0, base_index=n0)

    @property
    def qp(self):
        return self.op.qp

    @property
    def parity(self) -> int:
        return self.base_index % 2

    @property
    def sqrt_c(self) -> float:
        return math.sqrt(self.c)

    @property
    def gamma_eff(self) -> float:
        """``gamma'`` with ``c = q**(-2 gamma')``; only defined when calibrated."""
        if not self.calibrated:
            raise ParameterError("lattice is not calibrated (c != q**(-2 gamma) q**2Z)")
        return self.op.gamma + self.gamma_shift

    def nonfock_index(self, label: SpectrumLabel) -> int:
        """Index ``m'`` of the k-function with the same ``epsilon`` as ``label``."""
        if label.kind != NONFOCK:
            raise ParameterError(f"{label} is not a non-Fock label")
        me = _nearest_integer(label.m + self.gamma_eff - label.gamma)
        if me is None:
            raise ParameterError(f"{label} is not in the non-Fock spectrum of this lattice")
        return me

    def lattice_factor(self) -> float:
        """Ratio between the lattice Jackson inner product of two
        eigenfunctions and the weighted sum over ``(sign, k)``."""
        if self.xi0 is None:
            raise ParameterError("parameters were not built from a lattice")
        return self.xi0 * self.qp.lam * self.qp.q**self.base_index


@dataclass(frozen=True)
class ConnectionCoefficients:
    C_e: float
    C_o: float
    family: Optional[str] = None
    general: Optional[tuple] = None


# -- the 1phi1 solutions -------------------------------------------------------


def phi_even(x, eps: float, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """``1phi1(-1/eps; q^-2; q^-4, eps q^(-2 gamma - 3) lambda^2 x^2)`` at lattice coordinate ``x``."""
    if eps == 0:
        raise ParameterError("eps must be nonzero")
    qp, g = ep.qp, ep.op.gamma
    z = eps * qp.q ** (-2 * g - 3) * qp.lam**2 * np.asarray(x, dtype=float) ** 2
    return phi11(Phi11Spec(-1.0 / eps, qp.base2, qp.base4, z), tol)


def phi_odd(x, eps: float, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """``1phi1(-q^-2/eps; q^-6; q^-4, eps q^(-2 gamma - 5) lambda^2 x^2)``; the odd
    solution is ``x * phi_odd(x)``."""
    if eps == 0:
        raise ParameterError("eps must be nonzero")
    qp, g = ep.qp, ep.op.gamma
    z = eps * qp.q ** (-2 * g - 5) * qp.lam**2 * np.asarray(x, dtype=float) ** 2
    return phi11(Phi11Spec(-qp.base2 / eps, qp.q**-6, qp.base4, z), tol)


def reduced_ev_residual(g, x, eps: float, ep: EigenproblemParams) -> float:
    """Relative defect of the equation for ``g = f / psi0``:

        g(x) (q + 1/q - eps q^-2g l^2 x^2) - g(q^2 x)/q - q g(x/q^2) (1 + q^(-2g-1) l^2 x^2) = 0

    ``g`` is a vectorized callable of the lattice coordinate.
    """
    qp, gam = ep.qp, ep.op.gamma
    q, lam = qp.q, qp.lam
    x = np.asarray(x, dtype=float)
    t0 = g(x) * (q + 1 / q - eps * q ** (-2 * gam) * lam**2 * x**2)
    tp = -g(q**2 * x) / q
    tm = -q * g(x / q**2) * (1 + q ** (-2 * gam - 1) * lam**2 * x**2)
    scale = np.abs(t0) + np.abs(tp) + np.abs(tm)
    return float(np.max(np.abs(t0 + tp + tm) / scale))


# -- connection coefficients -------------------------------------------------------


def _general_coeffs(eps: float, c: float, qp, tol: Tolerance):
    q, b = qp.q, qp.base4
    den = qpoch_inf_many([-c, -b / c], b, tol)
    ce = qpoch_inf_many([-qp.base2 / eps, b / (eps * c), eps * c], b, tol) / (
        qpoch_inf(qp.base2, b, tol) * den
    )
    co = qpoch_inf_many([-1.0 / eps, q**-6 / (eps * c), eps * c * q**2], b, tol) / (
        qpoch_inf(q**2, b, tol) * den
    )
    return float(np.real(ce)), float(np.real(co))


def classify_epsilon(eps: float, c: float, qp):
    """Identify the special family of ``eps``.

    Returns ``(family, index)`` with family one of ``fock_even``,
    ``fock_odd`` (index ``n``: ``eps = -q^-4n`` or ``-q^(-4n-2)``),
    ``nonfock_even``, ``nonfock_odd`` (index ``p``: ``eps = q^(-4p-2)/c`` or
    ``q^-4p/c``), or ``(None, None)`` for generic ``eps``.
    """
    lq = math.log(qp.q)
    if eps < 0:
        m = _nearest_integer(-math.log(-eps) / (2 * lq))
        if m is not None and m >= 0:
            return ("fock_even", m // 2) if m % 2 == 0 else ("fock_odd", m // 2)
        return None, None
    m = _nearest_integer(-math.log(eps * c) / (2 * lq))
    if m is None:
        return None, None
    if m % 2:
        return "nonfock_even", (m - 1) // 2
    return "nonfock_odd", m // 2


def connection_coeffs(eps: float, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL) -> ConnectionCoefficients:
    """``(C_e, C_o)`` of the connection formula for lattice constant ``ep.c``.

    For ``eps`` in one of the four special families the closed-form values
    (with exact zeros) are returned; the general infinite-product values
    are attached as ``general``.
    """
    qp, c, q = ep.qp, ep.c, ep.qp.q
    general = _general_coeffs(eps, c, qp, tol)
    family, k = classify_epsilon(eps, c, qp)
    b = qp.base4
    if family == "fock_even":
        ce = (-c) ** (-k) * q ** (4 * k * k - 2 * k) * qpoch_finite(qp.base2, b, k)
        return ConnectionCoefficients(float(ce), 0.0, family, general)
    if family == "fock_odd":
        co = (-c) ** (-k) * q ** (4 * k * k + 2 * k) * qpoch_finite(q**-6, b, k)
        return ConnectionCoefficients(0.0, float(co), family, general)
    if family == "nonfock_even":
        p = k
        ce = (-c) ** p * q ** (4 * p * p + 2 * p) * qpoch_inf(qp.base2, b, tol) / qpoch_inf(
            -q ** (-4 * p - 4) / c, b, tol
        )
        return ConnectionCoefficients(float(ce), 0.0, family, general)
    if family == "nonfock_odd":
        p = k
        co = (-c) ** p * q ** (4 * p * p - 2 * p) * qpoch_inf(q**-6, b, tol) / qpoch_inf(
            -q ** (-4 * p - 4) / c, b, tol
        )
        return ConnectionCoefficients(0.0, float(co), family, general)
    return ConnectionCoefficients(general[0], general[1], None, general)


def connection_lhs(eps: float, k, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """``(-eps)**k 2phi1(-1/(eps q^2), -1/eps; 0; q^-4, -q^(4k-4)/c)`` for integer ``k``."""
    qp, c = ep.qp, ep.c
    k = np.asarray(k)
    z = -np.power(qp.q, 4.0 * (k - 1)) / c
    series = phi21(Phi21Spec(-qp.base2 / eps, -1.0 / eps, 0.0, qp.base4, z), tol)
    return np.power(-eps, k.astype(float)) * series


def connection_rhs(eps: float, k, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL,
                   coeffs: Optional[ConnectionCoefficients] = None):
    """``C_e 1phi1(-1/eps; q^-2; q^-4, eps c q^(-4k-2)) + C_o q^-2k 1phi1(-1/(eps q^2); q^-6; q^-4, eps c q^(-4k-4))``."""
    qp, c, b = ep.qp, ep.c, ep.qp.base4
    coeffs = connection_coeffs(eps, ep, tol) if coeffs is None else coeffs
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape)
    if coeffs.C_e != 0:
        out = out + coeffs.C_e * phi11(
            Phi11Spec(-1.0 / eps, qp.base2, b, eps * c * np.power(qp.q, -4 * k - 2)), tol)
    if coeffs.C_o != 0:
        out = out + coeffs.C_o * np.power(qp.q, -2 * k) * phi11(
            Phi11Spec(-qp.base2 / eps, qp.q**-6, b, eps * c * np.power(qp.q, -4 * k - 4)), tol)
    return out


def connection_rhs_condition(eps: float, k, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL,
                             coeffs: Optional[ConnectionCoefficients] = None):
    """Value of :func:`connection_rhs` and its condition number.

    The condition number bounds the relative rounding error in units of the
    unit roundoff: it combines the summation condition of each 1phi1 with
    the cancellation between the two terms.
    """
    qp, c, b = ep.qp, ep.c, ep.qp.base4
    coeffs = connection_coeffs(eps, ep, tol) if coeffs is None else coeffs
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape)
    spread = np.zeros(k.shape)
    if coeffs.C_e != 0:
        v, cond = phi11_condition(
            Phi11Spec(-1.0 / eps, qp.base2, b, eps * c * np.power(qp.q, -4 * k - 2)), tol)
        t = coeffs.C_e * np.asarray(v)
        out = out + t
        spread = spread + np.abs(t) * np.asarray(cond)
    if coeffs.C_o != 0:
        v, cond = phi11_condition(
            Phi11Spec(-qp.base2 / eps, qp.q**-6, b, eps * c * np.power(qp.q, -4 * k - 4)), tol)
        t = coeffs.C_o * np.power(qp.q, -2 * k) * np.asarray(v)
        out = out + t
        spread = spread + np.abs(t) * np.asarray(cond)
    with np.errstate(divide="ignore", invalid="ignore"):
        return out, spread / np.abs(out)


# -- Fock family -------------------------------------------------------------------


def htilde_2phi1(m: int, y, qp, tol: Tolerance = DEFAULT_TOL):
    """``y**m 2phi1(q^(2m-2), q^(2m); 0; q^-4, -q^-4/y^2)`` (terminating)."""
    y = np.asarray(y, dtype=float)
    z = -qp.base4 / y**2
    series = phi21(Phi21Spec(qp.q ** (2 * m - 2), qp.q ** (2 * m), 0.0, qp.base4, z), tol)
    return y**m * series


def htilde_1phi1(m: int, y, qp, tol: Tolerance = DEFAULT_TOL):
    """Small-``|y|`` representation through the terminating 1phi1 series."""
    y = np.asarray(y, dtype=float)
    q, b = qp.q, qp.base4
    n = m // 2
    if m % 2 == 0:
        pref = (-1) ** n * q ** (4 * n * n - 2 * n) * qpoch_finite(qp.base2, b, n)
        return pref * phi11(Phi11Spec(q ** (4 * n), qp.base2, b, -q ** (-4 * n - 2) * y**2), tol)
    pref = (-1) ** n * q ** (4 * n * n + 2 * n) * qpoch_finite(q**-6, b, n)
    return pref * y * phi11(Phi11Spec(q ** (4 * n), q**-6, b, -q ** (-4 * n - 6) * y**2), tol)


def htilde(m: int, y, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """q-Hermite II function ``h_m(y) = y^m 2phi1(q^(2m-2), q^(2m); 0; q^-4, -q^-4/y^2)``.

    Uses the 2phi1 form where ``q^-4/y^2 < 0.9`` and the 1phi1 form elsewhere.
    """
    if m < 0:
        raise DomainError(f"m must be nonnegative, got {m}")
    qp = ep.qp
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        far = qp.base4 / y**2 < ROUTE_CROSSOVER
    out = np.empty(y.shape)
    if np.any(far):
        out[far] = htilde_2phi1(m, y[far], qp, tol)
    if np.any(~far):
        out[~far] = htilde_1phi1(m, y[~far], qp, tol)
    return out[()] if out.ndim == 0 else out


# -- non-Fock family -----------------------------------------------------------------


def _lattice_k(y_abs, ep: EigenproblemParams):
    t = -np.log(np.asarray(y_abs, dtype=float) / ep.sqrt_c) / (2.0 * math.log(ep.qp.q))
    k = np.rint(t)
    if np.any(np.abs(t - k) > 1e-6):
        raise DomainError("ktilde needs points y = sqrt(c) q^(-2k) on the lattice")
    return k.astype(int)


def ktilde_2phi1(m: int, y, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """One-sided 2phi1 form ``(-1)^k (|y|/sqrt c)^(m-g) 2phi1(-q^(2m-2g-2), -q^(2m-2g); 0; q^-4, -q^-4/y^2)``."""
    qp, g = ep.qp, ep.gamma_eff
    ya = np.abs(np.asarray(y, dtype=float))
    k = _lattice_k(ya, ep)
    z = -qp.base4 / ya**2
    series = phi21(Phi21Spec(-qp.q ** (2 * m - 2 * g - 2), -qp.q ** (2 * m - 2 * g), 0.0, qp.base4, z), tol)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return sign * (ya / ep.sqrt_c) ** (m - g) * series


def ktilde_1phi1(m: int, y, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """``C_e phi_e + C_o (y / sqrt c) phi_o`` in the scaled coordinate (any sign of ``y``)."""
    qp, g = ep.qp, ep.gamma_eff
    eps = qp.q ** (2 * g - 2 * m)
    coeffs = connection_coeffs(eps, ep, tol)
    y = np.asarray(y, dtype=float)
    b = qp.base4
    out = np.zeros(y.shape)
    if coeffs.C_e != 0:
        out = out + coeffs.C_e * phi11(Phi11Spec(-1.0 / eps, qp.base2, b, eps * qp.base2 * y**2), tol)
    if coeffs.C_o != 0:
        out = out + coeffs.C_o * (y / ep.sqrt_c) * phi11(
            Phi11Spec(-qp.base2 / eps, qp.q**-6, b, eps * b * y**2), tol)
    return out


def ktilde(m: int, y, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """Non-Fock eigenfunction factor ``k_m`` at signed lattice points ``y = ±sqrt(c) q^-2k``.

    Parity is ``k_m(-y) = (-1)**(m+1) k_m(y)``, the natural continuation of
    the 1phi1 form: ``k_m`` is even for odd ``m`` and odd for even ``m``.
    """
    if not ep.calibrated:
        raise ParameterError("non-Fock functions need a calibrated lattice, c = q**(-2 gamma)")
    qp = ep.qp
    y = np.asarray(y, dtype=float)
    ya = np.abs(y)
    far = qp.base4 / ya**2 < ROUTE_CROSSOVER
    out = np.empty(y.shape)
    if np.any(far):
        parity = np.where(y[far] < 0, (-1.0) ** (m + 1), 1.0)
        out[far] = parity * ktilde_2phi1(m, ya[far], ep, tol)
    if np.any(~far):
        out[~far] = ktilde_1phi1(m, y[~far], ep, tol)
    return out[()] if out.ndim == 0 else out


# -- norms and eigenfunctions ----------------------------------------------------------


def N_c(c: float, qp, tol: Tolerance = DEFAULT_TOL) -> float:
    b = qp.base4
    return float(qpoch_inf_many([b, -c * qp.base2, -qp.base2 / c], b, tol)
                 / qpoch_inf_many([qp.base2, -c, -b / c], b, tol))


def M_c(c: float, qp, tol: Tolerance = DEFAULT_TOL) -> float:
    b = qp.base4
    return float(qpoch_inf_many([b, b, -qp.base2 / c, -c * qp.base2], b, tol)
                 / qpoch_inf_many([-c, -b / c], b, tol))


def norm_closed_form(label: SpectrumLabel, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL) -> float:
    """Right-hand side of the orthogonality relation on the sign-doubled lattice,
    ``sum_{k, sign} f(y)^2 q^-2k / (-c q^-4k; q^-4)_inf``."""
    qp, c = ep.qp, ep.c
    if label.kind == FOCK:
        m = label.m
        return 2.0 * N_c(c, qp, tol) * qpoch_finite(qp.base2, qp.base2, m) * qp.q ** (2 * m * m)
    m = ep.nonfock_index(label)
    return 2.0 * M_c(c, qp, tol) * c**m * qp.q ** (2 * m * m) / qpoch_inf(
        -qp.q ** (-2 * m - 2) / c, qp.base2, tol)


def basis_values(label: SpectrumLabel, y, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """``h_m(y)`` or ``k_m'(y)`` for the label (polynomial / bounded factor, no ``psi0``)."""
    if label.kind == FOCK:
        return htilde(label.m, y, ep, tol)
    return ktilde(ep.nonfock_index(label), y, ep, tol)


def eigenfunction(label: SpectrumLabel, lat: Lattice, ep: EigenproblemParams,
                  tol: Tolerance = DEFAULT_TOL) -> LatticeFunction:
    """``psi0 * h_m`` or ``psi0 * k_m`` on the ``ep.parity`` sublattice of ``lat`` (zero elsewhere)."""
    if ep.xi0 is None or ep.xi0 != lat.xi0 or lat.qp != ep.qp:
        raise ParameterError("eigenproblem parameters were not built from this lattice")
    if label.kind == NONFOCK and not ep.calibrated:
        raise ParameterError("non-Fock eigenfunctions need a calibrated lattice")
    n = lat.indices()
    on = (n - ep.parity) % 2 == 0
    x = lat.points()
    vals = np.zeros(x.shape, dtype=complex)
    xs = x[:, on]
    psi = ground_state_values(xs, ep.op, tol)
    live = psi != 0
    b = np.zeros(xs.shape)
    b[live] = basis_values(label, ep.op.y_scale * xs[live], ep, tol)
    block = np.zeros(xs.shape, dtype=complex)
    block[live] = psi[live] * b[live]
    vals[:, on] = block
    return LatticeFunction(lat, vals)


def sublattice_y(lat: Lattice, ep: EigenproblemParams):
    """Scaled coordinates and Jackson weights ``q^-2k`` on the ``ep.parity`` sublattice.

    Returns ``(y, qk)`` with ``y`` of shape ``(len(signs), npts)``.
    """
    n = lat.indices(ep.parity)
    x = np.outer(np.asarray(lat.signs, dtype=float), lat.xi0 * np.power(lat.qp.q, n.astype(float)))
    y = ep.op.y_scale * x
    qk = np.power(lat.qp.q, (n - ep.base_index).astype(float))
    return y, qk


def weight(y, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL):
    """Orthogonality weight ``1 / (-y^2; q^-4)_inf`` (zero where it underflows)."""
    den = qpoch_inf(-np.asarray(y, dtype=float) ** 2, ep.qp.base4, tol)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(np.isfinite(den), 1.0 / den, 0.0)
