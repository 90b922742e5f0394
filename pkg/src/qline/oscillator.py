"""The q-oscillator ``a a+ - q**-2 a+ a = 1`` realized on the quantum line,
its ground state and two-part spectrum."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .lattice import Lattice, LatticeFunction, apply_Dq, apply_P, apply_U
from .qcore import DEFAULT_TOL, QParams, Tolerance, q_exponential

FOCK = "fock"
NONFOCK = "nonfock"

# values below this carry too few significant bits to enter a relative residual
_UNDERFLOW_FLOOR = 1e-290


@dataclass(frozen=True)
class OscillatorParams:
    """Realization ``a = alpha U^-2 + beta U^-1 P``, ``a+ = conj(alpha) U^2 + conj(beta) P U``.

    ``alpha = exp(i theta) sqrt(q / lambda)`` and ``beta = alpha q**gamma``.
    """

    qp: QParams
    gamma: float = 0.0
    theta: float = 0.0
    alpha: complex = field(init=False)
    beta: complex = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.theta)):
            raise DomainError("gamma and theta must be finite")
        alpha = cmath.exp(1j * self.theta) * math.sqrt(self.qp.q / self.qp.lam)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", alpha * self.qp.q**self.gamma)

    @property
    def y_scale(self) -> float:
        """Factor ``q**(-gamma - 1/2) * lambda`` turning a lattice coordinate
        into the argument of the eigenfunction polynomials."""
        return self.qp.q ** (-self.gamma - 0.5) * self.qp.lam


@dataclass(frozen=True)
class SpectrumLabel:
    kind: str
    m: int
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (FOCK, NONFOCK):
            raise DomainError(f"kind must be {FOCK!r} or {NONFOCK!r}, got {self.kind!r}")
        if int(self.m) != self.m:
            raise DomainError(f"m must be an integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if self.kind == FOCK:
            if self.m < 0:
                raise DomainError(f"Fock levels start at m = 0, got {self.m}")
            if self.gamma is not None:
                raise DomainError("Fock labels carry no gamma")
        elif self.gamma is None or not math.isfinite(self.gamma):
            raise DomainError("non-Fock labels need a finite gamma")

    @classmethod
    def fock(cls, m: int) -> "SpectrumLabel":
        return cls(FOCK, m)

    @classmethod
    def nonfock(cls, m: int, gamma: float) -> "SpectrumLabel":
        return cls(NONFOCK, m, float(gamma))

    def epsilon(self, qp: QParams) -> float:
        if self.kind == FOCK:
            return -qp.q ** (-2 * self.m)
        return qp.q ** (2 * self.gamma - 2 * self.m)

    def __str__(self):
        if self.kind == FOCK:
            return f"fock[{self.m}]"
        return f"nonfock[{self.m}; gamma={self.gamma:g}]"


def energy(label: SpectrumLabel, qp: QParams) -> float:
    """``E = (1 + epsilon) / (1 - q**-2)``."""
    return (1.0 + label.epsilon(qp)) / (1.0 - qp.base2)


def energy_from_epsilon(eps: float, qp: QParams) -> float:
    return (1.0 + eps) / (1.0 - qp.base2)


def apply_a(f: LatticeFunction, op: OscillatorParams) -> LatticeFunction:
    return apply_U(f, -2) * op.alpha + apply_U(apply_P(f), -1) * op.beta


def apply_adag(f: LatticeFunction, op: OscillatorParams) -> LatticeFunction:
    return apply_U(f, 2) * op.alpha.conjugate() + apply_P(apply_U(f, 1)) * op.beta.conjugate()


def apply_H(f: LatticeFunction, op: OscillatorParams) -> LatticeFunction:
    """``H = |alpha|^2 - |beta|^2 D_q^2 - i alpha conj(beta) (U + q U^-1) D_q``.

    Kept independent of ``apply_adag(apply_a(f))`` so the two can be
    compared.
    """
    q = op.qp.q
    d = apply_Dq(f)
    dd = apply_Dq(d)
    mixed = apply_U(d, 1) + apply_U(d, -1) * q
    aa = abs(op.alpha) ** 2
    bb = abs(op.beta) ** 2
    ab = op.alpha * op.beta.conjugate()
    return f * aa - dd * bb - mixed * (1j * ab)


def ground_state_values(x, op: OscillatorParams, tol: Tolerance = DEFAULT_TOL):
    """``psi0(x) = e_q(-i (alpha/beta) lambda q**-1/2 x)`` with unit normalization."""
    ratio = op.qp.q ** (-op.gamma)
    z = -1j * ratio * op.qp.lam * op.qp.q**-0.5 * np.asarray(x, dtype=float)
    return q_exponential(z, op.qp, tol)


def ground_state(lat: Lattice, op: OscillatorParams, tol: Tolerance = DEFAULT_TOL) -> LatticeFunction:
    if lat.qp != op.qp:
        raise DomainError("lattice and oscillator use different q")
    return LatticeFunction.from_callable(lat, lambda x: ground_state_values(x, op, tol))


def ev_difference_residual(f: LatticeFunction, E: float, op: OscillatorParams) -> float:
    """Relative defect of the three-term eigenvalue equation

        E x^2 l^2 f(x) = f(x) (|a|^2 x^2 l^2 + |b|^2 (q + 1/q))
                         + f(q^2 x) (-|b|^2/q - i a conj(b) q^{1/2} x l)
                         + f(x/q^2) (-q |b|^2 + i a conj(b) q^{1/2} x l)

    maximized over the points where ``f`` and both neighbours are available
    and representable (underflowed values are skipped).  Each pointwise
    defect is divided by the sum of magnitudes of the four terms.
    """
    q, lam = op.qp.q, op.qp.lam
    lo, hi = f.n_lo + 2, f.n_hi - 2
    if lo > hi:
        from .errors import WindowError

        raise WindowError(f"window {f.window} too small for the eigenvalue equation")
    x = f.lattice.points(lo, hi)
    f0 = f.block(lo, hi)
    fp = f.block(lo + 2, hi + 2)
    fm = f.block(lo - 2, hi - 2)
    aa, bb = abs(op.alpha) ** 2, abs(op.beta) ** 2
    ab = op.alpha * op.beta.conjugate()
    xl = x * lam
    lhs = E * xl**2 * f0
    t0 = f0 * (aa * xl**2 + bb * (q + 1 / q))
    tp = fp * (-bb / q - 1j * ab * math.sqrt(q) * xl)
    tm = fm * (-q * bb + 1j * ab * math.sqrt(q) * xl)
    defect = np.abs(lhs - t0 - tp - tm)
    scale = np.abs(lhs) + np.abs(t0) + np.abs(tp) + np.abs(tm)
    trio = np.minimum(np.minimum(np.abs(f0), np.abs(fp)), np.abs(fm))
    mask = (trio > _UNDERFLOW_FLOOR) & (scale > 0)
    if not np.any(mask):
        return 0.0
    return float(np.max(defect[mask] / scale[mask]))


def rayleigh_quotient(f: LatticeFunction, op: OscillatorParams) -> float:
    """``(f, H f) / (f, f)`` over the window where ``H f`` is defined."""
    from .lattice import inner_product

    hf = apply_H(f, op)
    fr = f.restrict(*hf.window)
    return (inner_product(fr, hf) / inner_product(fr, fr)).real
