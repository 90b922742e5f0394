"""Basic hypergeometric series 1phi1 and 2phi1 (the latter with lower
parameter 0 allowed), evaluated by direct summation with a term-ratio
recurrence.

Series convention for 1phi1 (it carries the extra ``(-1)**n b**(n(n-1)/2)``
factor) is the one for which

    (c - a z) f(b z) + (z - (c + b)) f(z) + b f(z / b) = 0

holds; :func:`phi11_recurrence_residual` evaluates the left-hand side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DivergenceError, ParameterError
from .qcore import DEFAULT_TOL, Tolerance, _unwrap

PHI21_RADIUS = 0.99
_CONSECUTIVE = 3


def terminating_index(a, base: float, rtol: float = 1e-12):
    """Return ``k`` if ``a == base**-k`` for an integer ``k >= 0``, else None.

    Such an upper parameter makes ``(a; base)_n`` vanish for ``n > k`` and
    the series terminate; detecting it lets the loop drop the rounding
    residue of ``1 - a * base**k``.
    """
    a = complex(a)
    if a.imag != 0 or a.real <= 0:
        return None
    k = -math.log(a.real) / math.log(base)
    kr = round(k)
    if kr < 0 or abs(k - kr) > rtol * max(1.0, abs(k)):
        return None
    return int(kr)


@dataclass(frozen=True)
class Phi11Spec:
    a: complex
    c: complex
    base: float
    z: object  # scalar or ndarray

    def __post_init__(self):
        if not (0.0 < self.base < 1.0):
            raise ParameterError(f"base must lie in (0, 1), got {self.base}")


@dataclass(frozen=True)
class Phi21Spec:
    a1: complex
    a2: complex
    c: complex
    base: float
    z: object

    def __post_init__(self):
        if not (0.0 < self.base < 1.0):
            raise ParameterError(f"base must lie in (0, 1), got {self.base}")


def _sum_series(ratio, z, stop_at, tol: Tolerance, label: str):
    """Sum ``sum_n t_n`` with ``t_0 = 1`` and ``t_{n+1} = t_n * ratio(n) * z``.

    Stops once three consecutive terms are below ``tol.rel`` times the
    partial sum (or the series terminates at ``stop_at``).  Entries whose
    terms overflow stop with a non-finite sum.  Returns the sum
    and the sum of absolute terms, whose quotient is the condition number
    of the summation.
    """
    z = np.asarray(z)
    dtype = np.result_type(z, float)
    term = np.ones(z.shape, dtype=dtype)
    total = np.zeros(z.shape, dtype=dtype)
    abs_total = np.zeros(z.shape, dtype=float)
    small = np.zeros(z.shape, dtype=int)
    n = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            total = total + term
            abs_total = abs_total + np.abs(term)
            if stop_at is not None and n == stop_at:
                break
            if n >= tol.max_terms:
                raise ConvergenceError(
                    f"{label} did not converge within {tol.max_terms} terms",
                    partial=_unwrap(total),
                    terms=n,
                )
            term = term * (ratio(n) * z)
            n += 1
            tiny = np.abs(term) <= tol.rel * np.abs(total)
            small = np.where(tiny, small + 1, 0)
            # an overflowed entry is finished: its sum is inf or nan
            small = np.where(np.isfinite(term), small, _CONSECUTIVE)
            if np.all(small >= _CONSECUTIVE):
                total = total + term
                abs_total = abs_total + np.abs(term)
                break
    return total, abs_total


def _phi11_raw(spec: Phi11Spec, tol: Tolerance):
    a, c, b = complex(spec.a), complex(spec.c), float(spec.base)
    stop_at = terminating_index(a, b)
    bad = terminating_index(c, b)
    if bad is not None and (stop_at is None or bad < stop_at):
        raise ParameterError(f"(c; base)_n vanishes at n = {bad + 1}")
    a = a.real if a.imag == 0 else a
    c = c.real if c.imag == 0 else c

    def ratio(n):
        bn = b**n
        return (1 - a * bn) / ((1 - b * bn) * (1 - c * bn)) * (-bn)

    return _sum_series(ratio, spec.z, stop_at, tol, "1phi1")


def phi11(spec: Phi11Spec, tol: Tolerance = DEFAULT_TOL):
    r"""Evaluate :math:`{}_1\phi_1(a; c; b, z)`.

    .. math::

        \sum_n \frac{(a;b)_n}{(b;b)_n (c;b)_n} (-1)^n b^{n(n-1)/2} z^n

    The series is entire in ``z``; ``z`` may be an array.
    """
    total, _ = _phi11_raw(spec, tol)
    return _unwrap(total)


def phi11_condition(spec: Phi11Spec, tol: Tolerance = DEFAULT_TOL):
    """Value and summation condition number ``sum |t_n| / |sum t_n|``."""
    total, abs_total = _phi11_raw(spec, tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = abs_total / np.abs(total)
    return _unwrap(total), _unwrap(cond)


def _phi21_raw(spec: Phi21Spec, tol: Tolerance):
    a1, a2, c, b = complex(spec.a1), complex(spec.a2), complex(spec.c), float(spec.base)
    stops = [k for k in (terminating_index(a1, b), terminating_index(a2, b)) if k is not None]
    stop_at = min(stops) if stops else None
    z = np.asarray(spec.z)
    if stop_at is None and np.any(np.abs(z) >= PHI21_RADIUS):
        raise DivergenceError(
            f"2phi1 argument |z| = {np.max(np.abs(z)):.4g} >= {PHI21_RADIUS}; "
            "use the 1phi1 side of the connection formula"
        )
    if c != 0:
        bad = terminating_index(c, b)
        if bad is not None and (stop_at is None or bad < stop_at):
            raise ParameterError(f"(c; base)_n vanishes at n = {bad + 1}")
    a1 = a1.real if a1.imag == 0 else a1
    a2 = a2.real if a2.imag == 0 else a2
    c = c.real if c.imag == 0 else c

    def ratio(n):
        bn = b**n
        # (0; b)_n is 1
        return (1 - a1 * bn) * (1 - a2 * bn) / ((1 - b * bn) * (1 - c * bn))

    return _sum_series(ratio, z, stop_at, tol, "2phi1")


def phi21(spec: Phi21Spec, tol: Tolerance = DEFAULT_TOL):
    r"""Evaluate :math:`{}_2\phi_1(a_1, a_2; c; b, z)`.

    Nonterminating series require ``|z| < 0.99``; beyond that a
    :class:`DivergenceError` is raised.  Terminating series (an upper
    parameter equal to ``b**-k``) are polynomials and accept any ``z``.
    """
    total, _ = _phi21_raw(spec, tol)
    return _unwrap(total)


def phi21_condition(spec: Phi21Spec, tol: Tolerance = DEFAULT_TOL):
    total, abs_total = _phi21_raw(spec, tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = abs_total / np.abs(total)
    return _unwrap(total), _unwrap(cond)


def phi11_recurrence_residual(spec: Phi11Spec, tol: Tolerance = DEFAULT_TOL):
    """``|(c - a z) f(b z) + (z - (c + b)) f(z) + b f(z / b)|`` for ``f = 1phi1(a; c; b, .)``."""
    a, c, b = spec.a, spec.c, spec.base
    z = np.asarray(spec.z)

    def f(arg):
        return np.asarray(phi11(Phi11Spec(a, c, b, arg), tol))

    res = (c - a * z) * f(b * z) + (z - (c + b)) * f(z) + b * f(z / b)
    return _unwrap(np.abs(res))


def phi11_recurrence_scale(spec: Phi11Spec, tol: Tolerance = DEFAULT_TOL):
    """Sum of magnitudes of the three recurrence terms; the natural yardstick
    for :func:`phi11_recurrence_residual`."""
    a, c, b = spec.a, spec.c, spec.base
    z = np.asarray(spec.z)

    def f(arg):
        return np.asarray(phi11(Phi11Spec(a, c, b, arg), tol))

    scale = np.abs((c - a * z) * f(b * z)) + np.abs((z - (c + b)) * f(z)) + np.abs(b * f(z / b))
    return _unwrap(scale)
