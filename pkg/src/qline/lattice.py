"""The two-sided q-lattice {sign * xi0 * q**n}, functions on it, the
quantum-line operators X, P, U and the Jackson inner product.

Operators never pad with zeros: a result is only defined where every
shifted input value exists, so windows shrink under application.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, WindowError
from .qcore import QParams, fsum_complex


def default_window(qp: QParams) -> int:
    """Half-width ``K`` of the default index window ``[-K, K]``."""
    return max(40, math.ceil(60.0 / math.log(qp.q)))


def calibrated_xi0(qp: QParams) -> float:
    """The representation label in ``[1, q)`` for which the lattice scale
    obeys ``xi**2 lambda**2 = q`` up to a power of ``q``."""
    xi = math.sqrt(qp.q) / qp.lam
    shift = math.floor(math.log(xi) / math.log(qp.q))
    xi = xi * qp.q ** (-shift)
    # guard the half-open interval against rounding
    if xi >= qp.q * (1 - 1e-15):
        xi /= qp.q
    if xi < 1.0:
        xi *= qp.q
    return xi


@dataclass(frozen=True)
class Lattice:
    qp: QParams
    xi0: float
    n_min: int
    n_max: int
    signs: Tuple[int, ...] = (1, -1)

    def __post_init__(self):
        if not (1.0 <= self.xi0 < self.qp.q):
            raise DomainError(f"xi0 must lie in [1, q) = [1, {self.qp.q}), got {self.xi0}")
        if self.n_min > self.n_max:
            raise DomainError(f"empty index range [{self.n_min}, {self.n_max}]")
        signs = tuple(int(s) for s in self.signs)
        if not signs or len(set(signs)) != len(signs) or any(s not in (1, -1) for s in signs):
            raise DomainError(f"signs must be a nonempty subset of (+1, -1), got {self.signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def symmetric(cls, qp: QParams, xi0: Optional[float] = None, K: Optional[int] = None,
                  signs: Sequence[int] = (1, -1)) -> "Lattice":
        """Lattice on ``n in [-K, K]``; ``xi0`` defaults to the calibrated label."""
        K = default_window(qp) if K is None else int(K)
        xi0 = calibrated_xi0(qp) if xi0 is None else float(xi0)
        return cls(qp, xi0, -K, K, tuple(signs))

    @property
    def size(self) -> int:
        return self.n_max - self.n_min + 1

    def indices(self, parity: Optional[int] = None) -> np.ndarray:
        """Index range, optionally restricted to one parity sublattice."""
        n = np.arange(self.n_min, self.n_max + 1)
        if parity is None:
            return n
        return n[(n - parity) % 2 == 0]

    def point(self, sign: int, n: int) -> float:
        if sign not in self.signs:
            raise DomainError(f"sign {sign} not carried by this lattice")
        if not (self.n_min <= n <= self.n_max):
            raise DomainError(f"index {n} outside [{self.n_min}, {self.n_max}]")
        return sign * self.xi0 * self.qp.q**n

    def points(self, n_lo: Optional[int] = None, n_hi: Optional[int] = None) -> np.ndarray:
        """Array of shape ``(len(signs), n_hi - n_lo + 1)`` of lattice coordinates."""
        n_lo = self.n_min if n_lo is None else n_lo
        n_hi = self.n_max if n_hi is None else n_hi
        n = np.arange(n_lo, n_hi + 1, dtype=float)
        mags = self.xi0 * np.power(self.qp.q, n)
        return np.outer(np.asarray(self.signs, dtype=float), mags)


class LatticeFunction:
    """Complex values on ``signs x [n_lo, n_hi]`` of a :class:`Lattice`.

    ``values[i, j]`` is the value at sign ``lattice.signs[i]`` and index
    ``n_lo + j``.  Instances are immutable.
    """

    __slots__ = ("lattice", "n_lo", "n_hi", "values")

    def __init__(self, lattice: Lattice, values, n_lo: Optional[int] = None,
                 n_hi: Optional[int] = None):
        n_lo = lattice.n_min if n_lo is None else int(n_lo)
        values = np.array(values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != len(lattice.signs):
            raise DomainError(
                f"values must have shape ({len(lattice.signs)}, width), got {values.shape}"
            )
        n_hi = n_lo + values.shape[1] - 1 if n_hi is None else int(n_hi)
        if values.shape[1] != n_hi - n_lo + 1 or values.shape[1] < 1:
            raise WindowError(f"window [{n_lo}, {n_hi}] does not match {values.shape[1]} columns")
        if n_lo < lattice.n_min or n_hi > lattice.n_max:
            raise WindowError(f"window [{n_lo}, {n_hi}] leaves the lattice")
        if not np.all(np.isfinite(values)):
            raise DomainError("lattice function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "n_lo", n_lo)
        object.__setattr__(self, "n_hi", n_hi)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("LatticeFunction is immutable")

    def __repr__(self):
        return (f"LatticeFunction(window=[{self.n_lo}, {self.n_hi}], "
                f"signs={self.lattice.signs}, q={self.lattice.qp.q})")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_callable(cls, lattice: Lattice, f: Callable, n_lo: Optional[int] = None,
                      n_hi: Optional[int] = None) -> "LatticeFunction":
        """Tabulate ``f`` (vectorized over an array of coordinates)."""
        n_lo = lattice.n_min if n_lo is None else n_lo
        n_hi = lattice.n_max if n_hi is None else n_hi
        x = lattice.points(n_lo, n_hi)
        return cls(lattice, np.broadcast_to(f(x), x.shape), n_lo, n_hi)

    @classmethod
    def zeros(cls, lattice: Lattice) -> "LatticeFunction":
        return cls(lattice, np.zeros((len(lattice.signs), lattice.size)))

    @classmethod
    def random(cls, lattice: Lattice, rng: np.random.Generator, n_lo=None, n_hi=None):
        n_lo = lattice.n_min if n_lo is None else n_lo
        n_hi = lattice.n_max if n_hi is None else n_hi
        shape = (len(lattice.signs), n_hi - n_lo + 1)
        vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return cls(lattice, vals, n_lo, n_hi)

    # -- access ------------------------------------------------------------

    @property
    def window(self) -> Tuple[int, int]:
        return self.n_lo, self.n_hi

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1)

    @property
    def x(self) -> np.ndarray:
        return self.lattice.points(self.n_lo, self.n_hi)

    def value(self, sign: int, n: int) -> complex:
        if not (self.n_lo <= n <= self.n_hi):
            raise WindowError(f"index {n} outside valid window {self.window}")
        return complex(self.values[self.lattice.signs.index(sign), n - self.n_lo])

    def block(self, n_lo: int, n_hi: int) -> np.ndarray:
        """Values on the sub-window ``[n_lo, n_hi]``."""
        if n_lo < self.n_lo or n_hi > self.n_hi or n_lo > n_hi:
            raise WindowError(f"[{n_lo}, {n_hi}] not inside valid window {self.window}")
        return self.values[:, n_lo - self.n_lo: n_hi - self.n_lo + 1]

    def restrict(self, n_lo: int, n_hi: int) -> "LatticeFunction":
        return LatticeFunction(self.lattice, self.block(n_lo, n_hi), n_lo, n_hi)

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_parity(self, parity: int) -> "LatticeFunction":
        """Copy with the values off the given parity sublattice set to zero."""
        mask = (self.indices - parity) % 2 == 0
        return LatticeFunction(self.lattice, self.values * mask, self.n_lo, self.n_hi)

    # -- arithmetic ----------------------------------------------------------

    def _common(self, other: "LatticeFunction"):
        _check_same_lattice(self, other)
        lo, hi = max(self.n_lo, other.n_lo), min(self.n_hi, other.n_hi)
        if lo > hi:
            raise WindowError("windows do not overlap")
        return lo, hi

    def __add__(self, other):
        if not isinstance(other, LatticeFunction):
            return NotImplemented
        lo, hi = self._common(other)
        return LatticeFunction(self.lattice, self.block(lo, hi) + other.block(lo, hi), lo, hi)

    def __sub__(self, other):
        if not isinstance(other, LatticeFunction):
            return NotImplemented
        lo, hi = self._common(other)
        return LatticeFunction(self.lattice, self.block(lo, hi) - other.block(lo, hi), lo, hi)

    def __mul__(self, scalar):
        if isinstance(scalar, LatticeFunction):
            lo, hi = self._common(scalar)
            return LatticeFunction(self.lattice, self.block(lo, hi) * scalar.block(lo, hi), lo, hi)
        return LatticeFunction(self.lattice, self.values * complex(scalar), self.n_lo, self.n_hi)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    # -- CSV -----------------------------------------------------------------

    def to_csv(self, stream=None) -> Optional[str]:
        """Write ``sign,n,x,re,im`` rows with 17 significant digits."""
        own = stream is None
        stream = io.StringIO() if own else stream
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["sign", "n", "x", "re", "im"])
        x = self.x
        for i, sign in enumerate(self.lattice.signs):
            for j, n in enumerate(self.indices):
                v = self.values[i, j]
                writer.writerow([sign, int(n), f"{x[i, j]:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
        return stream.getvalue() if own else None

    @classmethod
    def from_csv(cls, lattice: Lattice, stream) -> "LatticeFunction":
        if isinstance(stream, str):
            stream = io.StringIO(stream)
        rows = list(csv.DictReader(stream))
        if not rows:
            raise DomainError("no rows in CSV")
        ns = sorted({int(r["n"]) for r in rows})
        n_lo, n_hi = ns[0], ns[-1]
        vals = np.full((len(lattice.signs), n_hi - n_lo + 1), np.nan, dtype=complex)
        for r in rows:
            i = lattice.signs.index(int(r["sign"]))
            vals[i, int(r["n"]) - n_lo] = complex(float(r["re"]), float(r["im"]))
        if np.any(np.isnan(vals)):
            raise DomainError("CSV does not cover a full rectangular window")
        return cls(lattice, vals, n_lo, n_hi)


def _check_same_lattice(f: LatticeFunction, g: LatticeFunction):
    if f.lattice != g.lattice:
        raise DomainError("lattice functions live on different lattices")


# -- operators ---------------------------------------------------------------


def _shift(f: LatticeFunction, p: int, extra: int = 0) -> Tuple[np.ndarray, int, int]:
    """Values ``f(n - p)`` on the largest window where they exist."""
    lat = f.lattice
    lo = max(f.n_lo + p, lat.n_min)
    hi = min(f.n_hi + p, lat.n_max)
    if lo > hi:
        raise WindowError(f"window {f.window} exhausted by a shift of {p}")
    return f.block(lo - p, hi - p), lo, hi


def apply_U(f: LatticeFunction, power: int = 1) -> LatticeFunction:
    """``(U**p f)(x) = q**(-p/2) f(q**-p x)``."""
    power = int(power)
    if power == 0:
        return f
    vals, lo, hi = _shift(f, power)
    return LatticeFunction(f.lattice, vals * f.lattice.qp.q ** (-power / 2.0), lo, hi)


def apply_Dq(f: LatticeFunction) -> LatticeFunction:
    """Symmetric q-derivative on the lattice; the window loses one point per side."""
    lo, hi = f.n_lo + 1, f.n_hi - 1
    if lo > hi:
        raise WindowError(f"window {f.window} too small for the q-derivative")
    x = f.lattice.points(lo, hi)
    up = f.block(lo + 1, hi + 1)
    down = f.block(lo - 1, hi - 1)
    return LatticeFunction(f.lattice, (up - down) / (x * f.lattice.qp.lam), lo, hi)


def apply_P(f: LatticeFunction) -> LatticeFunction:
    """``P = -i D_q``."""
    d = apply_Dq(f)
    return LatticeFunction(f.lattice, -1j * d.values, d.n_lo, d.n_hi)


def apply_X(f: LatticeFunction) -> LatticeFunction:
    return LatticeFunction(f.lattice, f.values * f.x, f.n_lo, f.n_hi)


def inner_product(f: LatticeFunction, g: LatticeFunction) -> complex:
    """Jackson inner product ``xi0 (q - 1/q) sum conj(f) g q**n`` over the common window."""
    lo, hi = f._common(g)
    lat = f.lattice
    weight = lat.xi0 * lat.qp.lam * np.power(lat.qp.q, np.arange(lo, hi + 1, dtype=float))
    terms = np.conj(f.block(lo, hi)) * g.block(lo, hi) * weight
    return fsum_complex(terms)


def norm(f: LatticeFunction) -> float:
    return math.sqrt(max(inner_product(f, f).real, 0.0))


def _relation_residual(lhs: LatticeFunction, rhs: LatticeFunction, scale_terms: Iterable[LatticeFunction],
                       relative: bool) -> float:
    diff = lhs - rhs
    if not relative:
        return float(np.max(np.abs(diff.values)))
    lo, hi = diff.window
    scale = np.zeros_like(diff.values, dtype=float)
    for t in scale_terms:
        scale = scale + np.abs(t.block(lo, hi))
    mask = scale > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(diff.values[mask]) / scale[mask]))


def heisenberg_residuals(f: LatticeFunction, relative: bool = True) -> dict:
    """Residuals of the three quantum-line relations applied to ``f``:

    ``q^{1/2} XP - q^{-1/2} PX = iU``, ``UX = q^{-1} XU``, ``UP = q PU``.

    With ``relative=True`` each pointwise defect is divided by the sum of
    magnitudes of the terms entering it.
    """
    q = f.lattice.qp.q
    xp = apply_X(apply_P(f)) * math.sqrt(q)
    px = apply_P(apply_X(f)) * (1.0 / math.sqrt(q))
    iu = apply_U(f, 1) * 1j
    r1 = _relation_residual(xp - px, iu, (xp, px, iu), relative)

    ux = apply_U(apply_X(f), 1)
    xu = apply_X(apply_U(f, 1)) * (1.0 / q)
    r2 = _relation_residual(ux, xu, (ux, xu), relative)

    up = apply_U(apply_P(f), 1)
    pu = apply_P(apply_U(f, 1)) * q
    r3 = _relation_residual(up, pu, (up, pu), relative)
    return {"xp_px": r1, "ux_xu": r2, "up_pu": r3}


def heisenberg_residual(f: LatticeFunction, relative: bool = True) -> float:
    """Largest of :func:`heisenberg_residuals`."""
    return max(heisenberg_residuals(f, relative).values())
