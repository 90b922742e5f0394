"""Verification harness.

Every producer returns a :class:`VerificationReport`: a list of checks
``(id, value, tolerance)`` with ``pass <=> value <= tolerance`` plus an echo
of the parameters.  Sums run through ``math.fsum`` so reruns are
bit-identical.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import gmpy2
import numpy as np

from .eigenbasis import (
    EigenproblemParams,
    basis_values,
    classify_epsilon,
    connection_coeffs,
    connection_lhs,
    connection_rhs_condition,
    eigenfunction,
    norm_closed_form,
    sublattice_y,
    weight,
)
from .errors import ParameterError
from .lattice import Lattice, LatticeFunction, heisenberg_residuals, inner_product
from .oscillator import (
    FOCK,
    NONFOCK,
    OscillatorParams,
    SpectrumLabel,
    apply_a,
    apply_adag,
    energy,
    ev_difference_residual,
)
from .qcore import DEFAULT_TOL, QParams, Tolerance
from .qhyper import Phi11Spec, phi11, phi11_recurrence_residual, terminating_index

UNIT_ROUNDOFF = 2.0**-53
# float64 results are trusted where condition * roundoff stays below this
FLOAT_TRUST = 1e-10
_XP_GUARD_DIGITS = 30
_XP_MAX_DIGITS = 20000


@dataclass(frozen=True)
class Check:
    id: str
    value: float
    tolerance: float

    def __post_init__(self):
        v = float(self.value)
        # nan means the quantity could not be computed: report it as failing
        object.__setattr__(self, "value", math.inf if math.isnan(v) else abs(v))
        object.__setattr__(self, "tolerance", float(self.tolerance))

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "value": self.value if math.isfinite(self.value) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    name: str
    params: Dict[str, object] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, check_id: str, value: float, tolerance: float) -> Check:
        chk = Check(check_id, value, tolerance)
        self.checks.append(chk)
        return chk

    def note(self, text: str):
        self.notes.append(text)

    def extend(self, other: "VerificationReport"):
        self.checks.extend(other.checks)
        self.notes.extend(other.notes)
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> List[str]:
        return [c.id for c in self.checks if not c.passed]

    def value(self, check_id: str) -> float:
        for c in self.checks:
            if c.id == check_id:
                return c.value
        raise KeyError(check_id)

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, allow_nan=False)

    def to_text(self) -> str:
        lines = [f"report: {self.name}"]
        lines += [f"  {k} = {v}" for k, v in self.params.items()]
        width = max([len(c.id) for c in self.checks] + [8])
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  {mark}  {c.id:<{width}}  {c.value:.3e} <= {c.tolerance:.1e}")
        lines += [f"  note: {n}" for n in self.notes]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def echo_params(lat: Optional[Lattice], op: Optional[OscillatorParams], tol: Tolerance) -> dict:
    out: Dict[str, object] = {}
    if op is not None:
        out.update(q=op.qp.q, gamma=op.gamma, theta=op.theta)
    if lat is not None:
        out.update(q=lat.qp.q, xi0=lat.xi0, window=[lat.n_min, lat.n_max])
    out["tol"] = tol.rel
    return out


# -- basis tables ------------------------------------------------------------------


def _basis_table(labels: Sequence[SpectrumLabel], lat: Lattice, ep: EigenproblemParams,
                 tol: Tolerance):
    """Basis values, weights and Jackson factors ``q^-2k`` on the sublattice.

    Points where the weight underflows carry no information and are zeroed.
    """
    y, qk = sublattice_y(lat, ep)
    w = weight(y, ep, tol)
    live = w > 0
    table = np.zeros((len(labels),) + y.shape)
    for i, lab in enumerate(labels):
        table[i][live] = basis_values(lab, y[live], ep, tol)
    return table, w * np.broadcast_to(qk, y.shape), y


def _weighted_sum(values: np.ndarray) -> float:
    return math.fsum(np.ravel(values))


def gram_matrix(labels: Sequence[SpectrumLabel], lat: Lattice, ep: EigenproblemParams,
                tol: Tolerance = DEFAULT_TOL, method: str = "weight") -> np.ndarray:
    """Matrix of weighted sums ``sum_{sign,k} b_i b_j q^-2k / (-y^2; q^-4)_inf``.

    ``method="weight"`` sums basis products against the weight directly;
    ``method="lattice"`` takes Jackson inner products of the assembled
    eigenfunctions ``psi0 * b`` and divides by the lattice factor.  Both give
    the left-hand side of the orthogonality relations.
    """
    if any(lab.kind == NONFOCK for lab in labels) and not ep.calibrated:
        raise ParameterError("non-Fock labels need a calibrated lattice")
    n = len(labels)
    G = np.zeros((n, n), dtype=complex)
    if method == "weight":
        table, wq, _ = _basis_table(labels, lat, ep, tol)
        for i in range(n):
            for j in range(i, n):
                G[i, j] = G[j, i] = _weighted_sum(table[i] * table[j] * wq)
    elif method == "lattice":
        funcs = [eigenfunction(lab, lat, ep, tol) for lab in labels]
        factor = ep.lattice_factor()
        for i in range(n):
            for j in range(n):
                G[i, j] = inner_product(funcs[i], funcs[j]) / factor
    else:
        raise ParameterError(f"unknown method {method!r}")
    return G


def orthogonality_check(labels: Sequence[SpectrumLabel], lat: Lattice, ep: EigenproblemParams,
                        tol: Tolerance = DEFAULT_TOL, diag_tol: float = 1e-7,
                        offdiag_tol: float = 1e-8, compare_methods: bool = True) -> VerificationReport:
    """Gram diagonal against the closed-form norms and off-diagonal vanishing
    (relative to the geometric mean of the two diagonal entries)."""
    rep = VerificationReport("orthogonality", echo_params(lat, ep.op, tol))
    G = gram_matrix(labels, lat, ep, tol)
    d = np.real(np.diag(G))
    for i, lab in enumerate(labels):
        ref = norm_closed_form(lab, ep, tol)
        rep.add(f"norm.{lab}", abs(d[i] / ref - 1.0), diag_tol)
    scale = np.sqrt(np.abs(np.outer(d, d)))
    off = np.abs(G) / scale
    np.fill_diagonal(off, 0.0)
    worst = np.unravel_index(int(np.argmax(off)), off.shape) if len(labels) > 1 else (0, 0)
    rep.add("offdiag.max", float(off.max()) if len(labels) > 1 else 0.0, offdiag_tol)
    if len(labels) > 1:
        rep.note(f"largest off-diagonal at ({labels[worst[0]]}, {labels[worst[1]]})")
    cross = [(i, j) for i in range(len(labels)) for j in range(len(labels))
             if labels[i].kind == FOCK and labels[j].kind == NONFOCK]
    if cross:
        rep.add("offdiag.cross_family", max(off[i, j] for i, j in cross), offdiag_tol)
    if compare_methods:
        G2 = gram_matrix(labels, lat, ep, tol, method="lattice")
        rep.add("gram.method_agreement", float(np.max(np.abs(G2 - G) / scale)), 1e-10)
        rep.add("gram.diag_imag", float(np.max(np.abs(np.imag(np.diag(G2))) / d)), 1e-10)
    return rep


# -- connection formula ----------------------------------------------------------------


def connection_families(n_max: int, ep: EigenproblemParams):
    """``(name, index, eps)`` for the special families up to index ``n_max``."""
    q, c = ep.qp.q, ep.c
    fams = []
    for n in range(n_max + 1):
        fams.append(("fock_even", n, -q ** (-4 * n)))
        fams.append(("fock_odd", n, -q ** (-4 * n - 2)))
    if ep.calibrated:
        for p in range(n_max + 1):
            fams.append(("nonfock_even", p, q ** (-4 * p - 2) / c))
            fams.append(("nonfock_odd", p, q ** (-4 * p) / c))
    return fams


def generic_epsilons(ep: EigenproblemParams) -> List[float]:
    """Three non-special ``eps`` samples (two positive, one negative)."""
    base = ep.qp.q ** (2 * ep.op.gamma)
    out = []
    for f in (0.37, 2.9, -0.3):
        eps = f * base
        while classify_epsilon(eps, ep.c, ep.qp)[0] is not None:
            eps *= 1.1
        out.append(eps)
    return out


def admissible_k(ep: EigenproblemParams, lat: Optional[Lattice] = None, radius: float = 0.9) -> np.ndarray:
    """Lattice shells ``k`` (``y = sqrt(c) q^-2k``) with ``|q^(4k-4)/c| < radius``."""
    if lat is None:
        from .lattice import default_window

        K = default_window(ep.qp)
        ks = np.arange(-(K // 2) - 1, K // 2 + 2)
    else:
        n = lat.indices(ep.parity)
        ks = np.sort((ep.base_index - n) // 2)
    z = np.power(ep.qp.q, 4.0 * (ks - 1)) / ep.c
    return ks[z < radius]


def _log10_max_term_1phi1(a: float, c: float, b: float, z: float) -> float:
    """log10 of the largest term of a 1phi1 series (float estimate)."""
    if z == 0:
        return 0.0
    lg, best, n = 0.0, 0.0, 0
    lz = math.log10(abs(z))
    while n < 100000:
        bn = b**n
        r = abs((1 - a * bn) / ((1 - b * bn) * (1 - c * bn))) * bn
        if r == 0:
            break
        lg += math.log10(r) + lz
        n += 1
        best = max(best, lg)
        if lg < best - 40 and n * math.log10(1 / b) > lz:
            break
    return best


def _precision(bits: int):
    """Context manager: fresh MPFR context with ``bits`` of precision."""
    return gmpy2.context(gmpy2.context(), precision=bits)


def _xp_qpoch_inf(a, b, bits: int):
    """``(a; b)_inf`` in MPFR arithmetic at the current precision.

    Factors are multiplied out until ``|a b^n|`` drops below
    ``2**-sqrt(bits)``; the rest enters through
    ``log (t; b)_inf = -sum_m t^m / (m (1 - b^m))``, which then needs about
    as many terms as the head has factors.
    """
    prod = gmpy2.mpfr(1)
    t = a
    eps = gmpy2.mpfr(2) ** (-bits - 8)
    split = gmpy2.mpfr(2) ** (-max(8, int(math.sqrt(bits))))
    while abs(t) > split:
        prod *= 1 - t
        t *= b
    if abs(t) <= eps:
        return prod
    log_tail = gmpy2.mpfr(0)
    tm, bm, m = t, b, 1
    while abs(tm) > eps:
        log_tail -= tm / (m * (1 - bm))
        tm *= t
        bm *= b
        m += 1
    return prod * gmpy2.exp(log_tail)


class _XpRatios:
    """Term ratios (without the ``z`` factor) of a 1phi1 (``a2 = None``,
    carrying ``(-1)^n b^(n(n-1)/2)``) or 2phi1 series.  They do not depend
    on the argument, so one table serves every shell; it is filled lazily
    at the precision current when it is created."""

    def __init__(self, a1, a2, c, b, pochhammer_sign: bool):
        self.a1, self.a2, self.c, self.b = a1, a2, c, b
        self.sign = pochhammer_sign
        self.bn = gmpy2.mpfr(1)
        self.table = []
        self.context = gmpy2.get_context().copy()

    def __getitem__(self, n: int):
        if n >= len(self.table):
            with gmpy2.context(self.context):
                while len(self.table) <= n:
                    bn = self.bn
                    r = (1 - self.a1 * bn) / ((1 - self.b * bn) * (1 - self.c * bn))
                    if self.a2 is not None:
                        r *= 1 - self.a2 * bn
                    if self.sign:
                        r *= -bn
                    self.table.append(r)
                    self.bn = bn * self.b
        return self.table[n]


def _xp_series(ratios: _XpRatios, z, bits: int, stop_at: Optional[int]):
    """Series sum ``sum t_n`` with ``t_0 = 1``, ``t_{n+1} = t_n ratios[n] z``
    at the current precision.  Stops past the largest term once terms fall
    below ``2**-bits`` times it."""
    total = gmpy2.mpfr(1)
    term = gmpy2.mpfr(1)
    biggest = gmpy2.mpfr(1)
    cut = gmpy2.mpfr(2) ** (-bits - 8)
    n = 0
    while True:
        if stop_at is not None and n == stop_at:
            break
        term *= ratios[n] * z
        total += term
        n += 1
        mag = abs(term)
        if mag > biggest:
            biggest = mag
        elif mag <= cut * biggest or term == 0:
            break
    return total


_XP_LHS_BITS = 256


def _xp_lhs_series(ratios: "_XpRatios", c_x, q_x, k: int, stop_at: Optional[int]):
    """The 2phi1 side at shell ``k``.  Its argument has modulus below 0.9 and
    its terms barely cancel, so a fixed precision suffices; at full
    precision the geometric tail would need tens of thousands of terms."""
    with _precision(_XP_LHS_BITS):
        return _xp_series(ratios, -(+q_x) ** (4 * k - 4) / +c_x, _XP_LHS_BITS, stop_at)


def _xp_connection(eps, c, q, ks, digits, zero_e: bool, zero_o: bool, family: Optional[str],
                   index: int, gamma_eff: Optional[float]):
    """Relative defects ``|L - R| / |R|`` evaluated in MPFR arithmetic with
    ``digits[i]`` decimal digits at shell ``ks[i]``."""
    top = int(max(digits) * 3.33) + 64
    out = []
    with _precision(top):
        qx = gmpy2.mpfr(q)
        cx = qx ** (-2 * gmpy2.mpfr(gamma_eff)) if gamma_eff is not None else gmpy2.mpfr(c)
        epsx = _exact_eps(family, index, eps, qx, cx)
        b, b2 = qx**-4, qx**-2
        den = _xp_qpoch_inf(-cx, b, top) * _xp_qpoch_inf(-b / cx, b, top)
        ce = gmpy2.mpfr(0) if zero_e else (
            _xp_qpoch_inf(-b2 / epsx, b, top) * _xp_qpoch_inf(b / (epsx * cx), b, top)
            * _xp_qpoch_inf(epsx * cx, b, top) / (_xp_qpoch_inf(b2, b, top) * den))
        co = gmpy2.mpfr(0) if zero_o else (
            _xp_qpoch_inf(-1 / epsx, b, top) * _xp_qpoch_inf(qx**-6 / (epsx * cx), b, top)
            * _xp_qpoch_inf(epsx * cx * qx**2, b, top) / (_xp_qpoch_inf(qx**2, b, top) * den))
        even = _XpRatios(-1 / epsx, None, b2, b, True)
        odd = _XpRatios(-b2 / epsx, None, qx**-6, b, True)
    with _precision(_XP_LHS_BITS):
        e_l, q_l = +epsx, +qx
        left = _XpRatios(-(q_l**-2) / e_l, -1 / e_l, 0, q_l**-4, False)
    stop_e = terminating_index(-1.0 / eps, q**-4)
    stop_o = terminating_index(-(q**-2) / eps, q**-4)
    stop_l = [s for s in (terminating_index(-(q**-2) / eps, q**-4), terminating_index(-1.0 / eps, q**-4))
              if s is not None]
    stop_l = min(stop_l) if stop_l else None
    for k, d in zip(ks, digits):
        k = int(k)
        bits = int(d * 3.33) + 64
        with _precision(bits):
            q_k, c_k, e_k = +qx, +cx, +epsx
            lhs = (-e_k) ** k * _xp_lhs_series(left, c_k, q_k, k, stop_l)
            rhs = gmpy2.mpfr(0)
            if ce != 0:
                rhs += +ce * _xp_series(even, e_k * c_k * q_k ** (-4 * k - 2), bits, stop_e)
            if co != 0:
                rhs += +co * q_k ** (-2 * k) * _xp_series(odd, e_k * c_k * q_k ** (-4 * k - 4), bits, stop_o)
            out.append(float(abs(lhs - rhs) / abs(rhs)))
    return np.array(out)


def _exact_eps(family: Optional[str], index: int, eps: float, q_x, c_x):
    if family == "fock_even":
        return -(q_x ** (-4 * index))
    if family == "fock_odd":
        return -(q_x ** (-4 * index - 2))
    if family == "nonfock_even":
        return q_x ** (-4 * index - 2) / c_x
    if family == "nonfock_odd":
        return q_x ** (-4 * index) / c_x
    return gmpy2.mpfr(eps)


def connection_family_residual(eps: float, ks: np.ndarray, ep: EigenproblemParams,
                               tol: Tolerance = DEFAULT_TOL, family: Optional[str] = None,
                               index: int = 0, extended: bool = True):
    """Dual-route relative defects of the connection formula at shells ``ks``.

    Returns ``(defects, n_extended)``.  Points where the float64 1phi1 side
    is too ill-conditioned (``cond * max(roundoff, tol.rel) > FLOAT_TRUST``) are
    re-evaluated in extended precision when ``extended`` is set, and
    otherwise reported as ``nan``.
    """
    ks = np.asarray(ks)
    coeffs = connection_coeffs(eps, ep, tol)
    with np.errstate(all="ignore"):
        # (-eps)^k may overflow at the far shells; those go to the extended route
        lhs = np.asarray(connection_lhs(eps, ks, ep, tol))
        rhs, cond = connection_rhs_condition(eps, ks, ep, tol, coeffs)
        rhs, cond = np.asarray(rhs), np.asarray(cond)
        defect = np.abs(lhs - rhs) / np.abs(rhs)
    # both rounding and series truncation are amplified by the condition number
    unit = max(UNIT_ROUNDOFF, tol.rel)
    trusted = np.isfinite(cond) & (cond * unit <= FLOAT_TRUST) & np.isfinite(defect)
    bad = ~trusted
    defect = np.where(trusted, defect, np.nan)
    if not np.any(bad) or not extended:
        return defect, 0
    # precision per point from the largest series term against the
    # (well-conditioned) 2phi1 side
    q, c, b = ep.qp.q, ep.c, ep.qp.base4
    digits = []
    for k in ks[bad]:
        lg = -np.inf
        if coeffs.C_e != 0:
            z = eps * c * q ** (-4.0 * k - 2)
            lg = max(lg, math.log10(abs(coeffs.C_e)) + _log10_max_term_1phi1(-1 / eps, q**-2, b, z))
        if coeffs.C_o != 0:
            z = eps * c * q ** (-4.0 * k - 4)
            lg = max(lg, math.log10(abs(coeffs.C_o)) - 2 * k * math.log10(q)
                     + _log10_max_term_1phi1(-(q**-2) / eps, q**-6, b, z))
        lhs_mag = k * math.log10(abs(eps))  # |2phi1| is O(1) for |z| < 0.9
        digits.append(min(_XP_MAX_DIGITS, max(lg - lhs_mag, 0.0) + _XP_GUARD_DIGITS))
    defect[bad] = _xp_connection(eps, c, q, ks[bad], digits,
                                 coeffs.C_e == 0 and family is not None,
                                 coeffs.C_o == 0 and family is not None,
                                 family, index, ep.gamma_eff if ep.calibrated else None)
    return defect, int(bad.sum())


def connection_check(n_max: int, ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL,
                     lat: Optional[Lattice] = None, rel_tol: float = 1e-8,
                     generic: Optional[Sequence[float]] = None,
                     extended: bool = True) -> VerificationReport:
    """Connection formula at every admissible lattice shell for the special
    families up to index ``n_max`` (both parities) and for generic ``eps``.

    Also compares each closed-form coefficient pair against the general
    infinite-product formula.
    """
    rep = VerificationReport("connection", echo_params(lat, ep.op, tol))
    rep.params["c"] = ep.c
    ks = admissible_k(ep, lat)
    cases = [(f, i, e) for f, i, e in connection_families(n_max, ep)]
    cases += [(None, j, e) for j, e in enumerate(generic_epsilons(ep) if generic is None else generic)]
    total_ext = 0
    for family, index, eps in cases:
        defect, n_ext = connection_family_residual(eps, ks, ep, tol, family, index, extended)
        total_ext += n_ext
        cid = f"connection.{family}.{index}" if family else f"connection.generic.{eps:.6g}"
        rep.add(cid, float(np.max(defect)) if defect.size else 0.0, rel_tol)
        if family is not None:
            coeffs = connection_coeffs(eps, ep, tol)
            ge, go = coeffs.general
            scale = max(abs(coeffs.C_e), abs(coeffs.C_o))
            dev = max(abs(ge - coeffs.C_e), abs(go - coeffs.C_o)) / scale
            rep.add(f"coeffs.{family}.{index}", dev, rel_tol)
    rep.note(f"{ks.size} shells per case; {total_ext} point evaluations needed extended precision")
    return rep


# -- eigenvalue equation ----------------------------------------------------------------


def eigenvalue_check(lat: Lattice, ep: EigenproblemParams, fock_max: int = 8, nonfock_max: int = 4,
                     tol: Tolerance = DEFAULT_TOL, ev_tol: float = 1e-8) -> VerificationReport:
    rep = VerificationReport("eigenvalues", echo_params(lat, ep.op, tol))
    labels = [SpectrumLabel.fock(m) for m in range(fock_max + 1)]
    if ep.calibrated:
        labels += [SpectrumLabel.nonfock(m, ep.op.gamma) for m in range(-nonfock_max, nonfock_max + 1)]
    for lab in labels:
        f = eigenfunction(lab, lat, ep, tol)
        rep.add(f"ev.{lab}", ev_difference_residual(f, energy(lab, ep.qp), ep.op), ev_tol)
    return rep


# -- moments ----------------------------------------------------------------------------------


def moment_indeterminacy(s: int, J: int, lat: Lattice, ep: EigenproblemParams,
                         tol: Tolerance = DEFAULT_TOL, drift_tol: float = 1e-7,
                         delta: float = 0.01) -> VerificationReport:
    """Moments ``mu_j = sum y^j w q^-2k`` under ``w`` and under
    ``w (1 + k_s / C)`` with ``C = (1 + delta) max |k_s|``.

    The drift of moment ``j`` is normalized by ``max(1, nu_j)`` with the
    absolute moment ``nu_j = sum |y|^j w q^-2k``: equal to ``|mu_j|`` for
    even ``j`` and the correct cancellation scale for odd ``j``, where
    ``mu_j`` vanishes by symmetry.
    """
    if J < 0:
        raise ParameterError("J must be nonnegative")
    if not ep.calibrated:
        raise ParameterError("moment test needs a calibrated lattice")
    lab = SpectrumLabel.nonfock(s, ep.op.gamma)
    rep = VerificationReport(f"moments.s{s}", echo_params(lat, ep.op, tol))
    rep.params.update(s=s, J=J)
    table, wq, y = _basis_table([lab], lat, ep, tol)
    ks = table[0]
    C = (1.0 + delta) * float(np.max(np.abs(ks)))
    pert = 1.0 + ks / C
    drift, literal = [], []
    live = wq > 0
    log_mag = np.log(np.abs(y[live]))
    log_w = np.log(wq[live])
    sign = np.sign(y[live])
    for j in range(J + 1):
        # log domain: y**j overflows where the weight has already underflowed
        t = np.zeros_like(wq)
        t[live] = sign**j * np.exp(j * log_mag + log_w)
        mu = _weighted_sum(t)
        mu2 = _weighted_sum(t * pert)
        nu = _weighted_sum(np.abs(t))
        drift.append(abs(mu2 - mu) / max(1.0, nu))
        literal.append(abs(mu2 - mu) / max(1.0, abs(mu)))
    rep.add(f"moments.s{s}.drift", max(drift), drift_tol)
    rep.add(f"moments.s{s}.positivity", max(0.0, -float(np.min(pert))), 0.0)
    rep.note(f"C = {C:.6g}; drift against max(1, |mu_j|) is {max(literal):.3e}")
    return rep


# -- completeness ----------------------------------------------------------------------------


def shell_function(lat: Lattice, ep: EigenproblemParams, k: int = 0,
                   tol: Tolerance = DEFAULT_TOL) -> LatticeFunction:
    """``psi0`` times the indicator of the shell ``|y| = sqrt(c) q^-2k`` (both signs)."""
    from .oscillator import ground_state

    n = ep.base_index - 2 * k
    if not (lat.n_min <= n <= lat.n_max):
        raise ParameterError(f"shell k={k} (n={n}) outside the lattice window")
    psi = ground_state(lat, ep.op, tol)
    vals = np.zeros_like(psi.values)
    vals[:, n - lat.n_min] = psi.values[:, n - lat.n_min]
    return LatticeFunction(lat, vals)


def _projection(f: LatticeFunction, labels, lat, ep, tol):
    funcs = [eigenfunction(lab, lat, ep, tol) for lab in labels]
    factor = ep.lattice_factor()
    coef = [inner_product(e, f) / (factor * norm_closed_form(lab, ep, tol)) for e, lab in zip(funcs, labels)]
    recon = LatticeFunction.zeros(lat)
    for a, e in zip(coef, funcs):
        recon = recon + e * a
    resid = f - recon
    nf = inner_product(f, f).real
    return math.sqrt(max(inner_product(resid, resid).real, 0.0) / nf), np.array(coef)


def cutoff_labels(M_fock: int, M_nonfock: Optional[int], gamma: float) -> List[SpectrumLabel]:
    labels = [SpectrumLabel.fock(m) for m in range(M_fock + 1)]
    if M_nonfock is not None and M_nonfock >= 0:
        labels += [SpectrumLabel.nonfock(m, gamma) for m in range(-M_nonfock, M_nonfock + 1)]
    return labels


def completeness_projection(f: LatticeFunction, M_fock: int, M_nonfock: Optional[int], lat: Lattice,
                            ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL,
                            threshold: float = 0.05, gram_tol: float = 1e-8) -> VerificationReport:
    """Expand ``f`` over the eigenfunctions up to the cutoffs (closed-form
    norms) and report the relative residual ``||f - Pf|| / ||f||``.

    ``M_nonfock=None`` (or negative) uses the Fock family only.  The
    expansion is flagged when the Gram matrix of the chosen basis is not
    diagonal to ``gram_tol``.
    """
    rep = VerificationReport("completeness", echo_params(lat, ep.op, tol))
    rep.params.update(M_fock=M_fock, M_nonfock=M_nonfock)
    labels = cutoff_labels(M_fock, M_nonfock, ep.op.gamma)
    G = gram_matrix(labels, lat, ep, tol)
    d = np.real(np.diag(G))
    off = np.abs(G) / np.sqrt(np.abs(np.outer(d, d)))
    np.fill_diagonal(off, 0.0)
    rep.add("completeness.gram_diagonal", float(off.max()) if len(labels) > 1 else 0.0, gram_tol)
    resid, _ = _projection(f, labels, lat, ep, tol)
    rep.add("completeness.residual", resid, threshold)
    return rep


def completeness_sweep(f: LatticeFunction, cutoffs: Sequence[tuple], lat: Lattice,
                       ep: EigenproblemParams, tol: Tolerance = DEFAULT_TOL, threshold: float = 0.05,
                       monotone_tol: float = 1e-12) -> VerificationReport:
    """Residuals along increasing cutoffs; checks monotone decrease and the
    threshold at the last pair."""
    rep = VerificationReport("completeness", echo_params(lat, ep.op, tol))
    res = []
    for mf, mn in cutoffs:
        res.append(_projection(f, cutoff_labels(mf, mn, ep.op.gamma), lat, ep, tol)[0])
    rise = max([0.0] + [b - a for a, b in zip(res, res[1:])])
    rep.add("completeness.monotone", rise, monotone_tol)
    rep.add(f"completeness.residual.{cutoffs[-1][0]}_{cutoffs[-1][1]}", res[-1], threshold)
    rep.note("residuals: " + ", ".join(f"{c}: {r:.3e}" for c, r in zip(cutoffs, res)))
    return rep


def fock_incompleteness(lat: Lattice, ep: EigenproblemParams, M_fock: int = 12, s: int = 0,
                        tol: Tolerance = DEFAULT_TOL, retain: float = 0.99) -> VerificationReport:
    """Project ``psi0 k_s`` on the Fock functions up to ``M_fock``.

    The check value is the captured fraction of the squared norm; it must
    stay below ``1 - retain``.
    """
    rep = VerificationReport("incompleteness", echo_params(lat, ep.op, tol))
    f = eigenfunction(SpectrumLabel.nonfock(s, ep.op.gamma), lat, ep, tol)
    resid, _ = _projection(f, cutoff_labels(M_fock, None, ep.op.gamma), lat, ep, tol)
    rep.add(f"incompleteness.captured.s{s}", 1.0 - resid**2, 1.0 - retain)
    return rep


# -- algebra ------------------------------------------------------------------------------------

ALGEBRA_QS = (1.1, 1.5, 2.0, 3.0)
ALGEBRA_COEFF_BOUND = 1e4


def algebra_half_width(qp: QParams, bound: float = ALGEBRA_COEFF_BOUND) -> int:
    """Index half-width of the random-function support.

    ``a a+`` carries the coefficient ``|beta|^2 / (lambda x)^2`` which, for
    ``|gamma| <= 1``, stays below ``bound`` when ``|x| >= q**-half_width``.
    Rounding in the relation is proportional to that coefficient.
    """
    beta2 = qp.q**3 / qp.lam
    x_min = math.sqrt(beta2 / bound) / qp.lam
    return max(1, math.floor(-math.log(x_min) / math.log(qp.q)))


def algebra_check(qs: Iterable[float] = ALGEBRA_QS, n_functions: int = 50, seed: int = 0,
                  half_width: Optional[int] = None, K: Optional[int] = None,
                  xi0: Optional[float] = None, osc_tol: float = 1e-10,
                  heis_tol: float = 1e-11) -> VerificationReport:
    """Oscillator relation and quantum-line relations on random functions.

    Each random function is supported on ``n in [-h, h]`` with ``h =
    half_width`` or, by default, :func:`algebra_half_width`; the lattice
    spans ``[-K, K]`` with ``K >= h``.  ``gamma`` in ``[-1, 1]`` and
    ``theta`` are drawn per function.  The support is bounded because the
    operators carry ``1/x`` factors: far below ``|x| = 1`` the relation
    holds only up to cancellation of terms of size ``|x|**-2``.
    """
    rng = np.random.default_rng(seed)
    rep = VerificationReport("algebra", {"qs": list(qs), "n_functions": n_functions, "seed": seed})
    for q in qs:
        qp = QParams(q)
        h = algebra_half_width(qp) if half_width is None else int(half_width)
        lat = Lattice.symmetric(qp, xi0=xi0, K=h if K is None else max(int(K), h))
        rep.params[f"support.q{q:g}"] = [-h, h]
        osc, heis = 0.0, 0.0
        for _ in range(n_functions):
            op = OscillatorParams(qp, gamma=rng.uniform(-1, 1), theta=rng.uniform(0, 2 * math.pi))
            f = LatticeFunction.random(lat, rng, -h, h)
            r = apply_a(apply_adag(f, op), op) - apply_adag(apply_a(f, op), op) * qp.base2
            lo, hi = r.window
            defect = r - f.restrict(lo, hi)
            osc = max(osc, defect.norm_inf() / f.norm_inf())
            heis = max(heis, max(heisenberg_residuals(f).values()))
        rep.add(f"algebra.oscillator.q{q:g}", osc, osc_tol)
        rep.add(f"algebra.heisenberg.q{q:g}", heis, heis_tol)
    return rep


def phi11_recurrence_check(n_draws: int = 100, seed: int = 0, rec_tol: float = 1e-9,
                           tol: Tolerance = DEFAULT_TOL) -> VerificationReport:
    """Three-term recurrence of 1phi1 at random parameters, normalized by
    ``max(1, |f(z)|)``."""
    rng = np.random.default_rng(seed)
    rep = VerificationReport("phi11_recurrence", {"n_draws": n_draws, "seed": seed, "tol": tol.rel})
    worst = 0.0
    for _ in range(n_draws):
        q = rng.uniform(1.2, 3.0)
        b = q**-4
        a = complex(rng.normal(), rng.normal())
        c = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
        z = complex(rng.normal(scale=2), rng.normal(scale=2))
        spec = Phi11Spec(a, c, b, z)
        res = phi11_recurrence_residual(spec, tol)
        worst = max(worst, res / max(1.0, abs(phi11(spec, tol))))
    rep.add("phi11.recurrence", worst, rec_tol)
    return rep


# -- truncation soundness -----------------------------------------------------------------------


def doubled_window_check(producer: Callable[[int], VerificationReport], K: int) -> VerificationReport:
    """Run ``producer`` at half-width ``K`` and ``2K``; each check's value
    may change by less than its tolerance."""
    r1, r2 = producer(K), producer(2 * K)
    rep = VerificationReport(f"{r1.name}.doubling", dict(r1.params))
    rep.params["window_doubled"] = 2 * K
    v2 = {c.id: c for c in r2.checks}
    for c in r1.checks:
        other = v2.get(c.id)
        change = math.inf if other is None else abs(other.value - c.value)
        rep.add(f"{c.id}.doubling", change, c.tolerance)
    return rep
