"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline;
they are also written past pytest's capture.
"""
import time

from qline import EigenproblemParams, Lattice, OscillatorParams, QParams, SpectrumLabel, Tolerance
from qline.lattice import default_window
from qline.verify import (
    ALGEBRA_QS,
    VerificationReport,
    algebra_half_width,
    algebra_check,
    connection_check,
    doubled_window_check,
    eigenvalue_check,
    fock_incompleteness,
    moment_indeterminacy,
    orthogonality_check,
    phi11_recurrence_check,
)

TOL = Tolerance(1e-10)


def setup(q, gamma=0.0, mult=1, parity=None):
    """Calibrated lattice with ``mult`` times the default half-width."""
    qp = QParams(q)
    lat = Lattice.symmetric(qp, K=mult * default_window(qp))
    return lat, EigenproblemParams.from_lattice(lat, OscillatorParams(qp, gamma), parity)


def worst(rep: VerificationReport):
    """Largest value/tolerance ratio and the check that attains it."""
    c = max(rep.checks, key=lambda c: c.value / c.tolerance if c.tolerance else (0 if c.value == 0 else 1e300))
    return c


def run_criterion(n, producer, budget, capsys):
    t0 = time.perf_counter()
    rep = producer()
    elapsed = time.perf_counter() - t0
    c = worst(rep)
    ok = rep.passed and elapsed < budget
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: worst {c.id} = {c.value:.3e} vs {c.tolerance:.1e}"
              f" ({elapsed:.2f} s, budget {budget:g} s)")
    assert rep.passed, rep.failing()
    assert elapsed < budget


def merged(name, reports):
    rep = VerificationReport(name, {})
    for r in reports:
        rep.extend(r)
    return rep


def _algebra_only(kind, K=None):
    rep = algebra_check(K=K)
    out = VerificationReport(kind, rep.params)
    for c in rep.checks:
        if f".{kind}." in c.id:
            out.add(c.id, c.value, c.tolerance)
    return out


def _eigenvalues(mult=1):
    reps = []
    for q in (1.5, 2.0):
        lat, ep = setup(q, mult=mult)
        reps.append(eigenvalue_check(lat, ep, fock_max=8, nonfock_max=4, tol=TOL))
    return merged("eigenvalues", reps)


def _orthogonality(mult=1):
    reps = []
    for q in (1.5, 2.0):
        lat, ep = setup(q, mult=mult)
        labels = [SpectrumLabel.fock(m) for m in range(6)]
        labels += [SpectrumLabel.nonfock(m, 0.0) for m in range(-3, 4)]
        reps.append(orthogonality_check(labels, lat, ep, TOL))
    return merged("orthogonality", reps)


def _connection(mult=1):
    reps = []
    for q in (1.5, 2.0):
        for parity in (0, 1):
            lat, ep = setup(q, mult=mult, parity=parity)
            reps.append(connection_check(3, ep, TOL, lat=lat))
    return merged("connection", reps)


def _incompleteness(mult=1):
    lat, ep = setup(2.0, mult=mult)
    return fock_incompleteness(lat, ep, M_fock=12, s=0, tol=TOL)


def _moments(mult=1):
    lat, ep = setup(2.0, mult=mult)
    return merged("moments", [moment_indeterminacy(s, 10, lat, ep, TOL) for s in (0, 1)])


def test_criterion_1_oscillator_relation(capsys):
    run_criterion(1, lambda: _algebra_only("oscillator"), 5, capsys)


def test_criterion_2_heisenberg_relations(capsys):
    run_criterion(2, lambda: _algebra_only("heisenberg"), 5, capsys)


def test_criterion_3_phi11_recurrence(capsys):
    run_criterion(3, lambda: phi11_recurrence_check(n_draws=100), 2, capsys)


def test_criterion_4_eigenvalue_residuals(capsys):
    run_criterion(4, _eigenvalues, 10, capsys)


def test_criterion_5_orthogonality_and_norms(capsys):
    run_criterion(5, _orthogonality, 20, capsys)


def test_criterion_6_connection_formula(capsys):
    run_criterion(6, _connection, 10, capsys)


def test_criterion_7_fock_incompleteness(capsys):
    run_criterion(7, _incompleteness, 5, capsys)


def test_criterion_8_moment_indeterminacy(capsys):
    run_criterion(8, _moments, 5, capsys)


def _doubled_suite():
    # algebra lattices double a window covering every support; the others
    # double the default window of each q (doubled_window_check passes 1 then 2)
    K = max(algebra_half_width(QParams(q)) for q in ALGEBRA_QS)
    reps = [doubled_window_check(lambda K: _algebra_only(kind, K), K) for kind in ("oscillator", "heisenberg")]
    for producer in (_eigenvalues, _orthogonality, _connection, _incompleteness, _moments):
        reps.append(doubled_window_check(producer, 1))
    return merged("doubling", reps)


def test_criterion_9_truncation_soundness(capsys):
    run_criterion(9, _doubled_suite, 60, capsys)
