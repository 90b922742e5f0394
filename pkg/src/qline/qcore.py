"""Elementary q-calculus: deformation constants, q-Pochhammer symbols,
the q-exponential, the symmetric q-derivative and Jackson sums."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError

Q_MIN = 1.0 + 1e-6
Q_MAX = 1e6
POLE_GUARD = 1e-300


@dataclass(frozen=True)
class QParams:
    """Deformation parameter ``q > 1`` together with the derived constants.

    ``lam`` is ``q - 1/q`` (``lambda`` is a Python keyword); ``base2`` and
    ``base4`` are the series bases ``q**-2`` and ``q**-4``.
    """

    q: float
    lam: float = field(init=False)
    base2: float = field(init=False)
    base4: float = field(init=False)

    def __post_init__(self):
        q = float(self.q)
        if not math.isfinite(q) or not (Q_MIN <= q <= Q_MAX):
            raise DomainError(f"q must lie in [{Q_MIN}, {Q_MAX:g}], got {self.q!r}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "lam", q - 1.0 / q)
        object.__setattr__(self, "base2", q**-2)
        object.__setattr__(self, "base4", q**-4)

    @property
    def accumulation_point(self) -> float:
        """``1/(1 - q**-2)``, the common limit of both spectral families."""
        return 1.0 / (1.0 - self.base2)


@dataclass(frozen=True)
class Tolerance:
    rel: float = 2.0**-53
    max_terms: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.rel < 1.0):
            raise DomainError(f"rel must lie in (0, 1), got {self.rel!r}")
        if int(self.max_terms) < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms!r}")


DEFAULT_TOL = Tolerance()


def _unwrap(arr):
    arr = np.asarray(arr)
    return arr[()] if arr.ndim == 0 else arr


def qpoch_finite(a, base: float, n: int):
    """Finite q-Pochhammer symbol ``(a; base)_n = prod_{i<n} (1 - a base**i)``."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    a = np.asarray(a)
    result = np.ones_like(a, dtype=np.result_type(a, float))
    power = 1.0
    for _ in range(n):
        result = result * (1.0 - a * power)
        power *= base
    return _unwrap(result)


def _qpoch_inf(a, base: float, tol: Tolerance, pole_guard: float | None = None):
    base = float(base)
    if not abs(base) < 1.0:
        raise DomainError(f"infinite q-Pochhammer needs |base| < 1, got {base}")
    a = np.asarray(a)
    abs_a = np.abs(a)
    result = np.ones_like(a, dtype=np.result_type(a, float))
    threshold = tol.rel * (1.0 - abs(base))
    power = 1.0
    n = 0
    with np.errstate(over="ignore", invalid="ignore"):
        # multiplicative tail is bounded once |a| |base|^N < rel (1 - |base|)
        while np.any(abs_a * abs(power) >= threshold):
            if n >= tol.max_terms:
                raise ConvergenceError(
                    f"(a; {base})_inf did not converge within {tol.max_terms} factors",
                    partial=_unwrap(result),
                    terms=n,
                )
            factor = 1.0 - a * power
            if pole_guard is not None and np.any(np.abs(factor) < pole_guard):
                raise PoleError(f"factor {n} of (a; {base})_inf vanishes", factor_index=n)
            result = result * factor
            power *= base
            n += 1
    return _unwrap(result)


def qpoch_inf(a, base: float, tol: Tolerance = DEFAULT_TOL):
    """Infinite q-Pochhammer symbol ``(a; base)_inf`` for ``|base| < 1``.

    Works elementwise on arrays.  Products that overflow come back as
    ``inf`` rather than raising, which callers use as an underflow of the
    reciprocal.
    """
    return _qpoch_inf(a, base, tol)


def qpoch_inf_many(args: Sequence, base: float, tol: Tolerance = DEFAULT_TOL):
    """Product of several infinite symbols, ``(a1, a2, ...; base)_inf``."""
    result = 1.0
    for a in args:
        result = result * qpoch_inf(a, base, tol)
    return result


def q_exponential(z, qp: QParams, tol: Tolerance = DEFAULT_TOL):
    """``e_q(z) = 1 / (z; q**-2)_inf``; raises :class:`PoleError` on a pole."""
    denom = _qpoch_inf(np.asarray(z, dtype=complex), qp.base2, tol, pole_guard=POLE_GUARD)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        value = 1.0 / np.asarray(denom)
    # overflowing denominators mean the value underflowed
    value = np.where(np.isfinite(denom), value, 0.0)
    return _unwrap(value)


def q_derivative_at(f: Callable, x: float, qp: QParams):
    """Symmetric q-derivative ``(f(qx) - f(x/q)) / (x (q - 1/q))``."""
    if x == 0:
        raise DomainError("the q-derivative is not defined at x = 0")
    return (f(qp.q * x) - f(x / qp.q)) / (x * qp.lam)


def fsum_complex(values) -> complex:
    """Exactly rounded sum of complex values (real and imaginary parts separately)."""
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


def jackson_sum(
    values: Union[Callable[[int], complex], Sequence[complex]],
    base: float,
    n_min: int,
    n_max: int,
):
    """``sum_{n=n_min}^{n_max} v(n) * base**n``.

    ``values`` is either a callable ``v(n)`` or a sequence whose first entry
    is ``v(n_min)``.  Truncation of the index range is the caller's business.
    """
    if base <= 0:
        raise DomainError(f"base must be positive, got {base}")
    if n_min > n_max:
        warnings.warn("jackson_sum over an empty window", RuntimeWarning, stacklevel=2)
        return 0.0
    n = np.arange(n_min, n_max + 1)
    if callable(values):
        v = np.array([values(int(k)) for k in n])
    else:
        v = np.asarray(values)
        if v.shape[0] != n.size:
            raise DomainError(f"expected {n.size} values for the window, got {v.shape[0]}")
    terms = v * np.power(float(base), n.astype(float))
    total = fsum_complex(terms)
    if np.isrealobj(v):
        return total.real
    return total
