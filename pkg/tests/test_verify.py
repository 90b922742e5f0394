import json
import math

import numpy as np
import pytest

from qline.eigenbasis import EigenproblemParams, eigenfunction
from qline.lattice import Lattice
from qline.oscillator import OscillatorParams, SpectrumLabel
from qline.qcore import QParams, Tolerance
from qline.verify import (
    Check,
    VerificationReport,
    algebra_check,
    completeness_projection,
    completeness_sweep,
    connection_check,
    doubled_window_check,
    fock_incompleteness,
    gram_matrix,
    moment_indeterminacy,
    orthogonality_check,
    phi11_recurrence_check,
    shell_function,
)

TOL = Tolerance(1e-10)


def setup(q=2.0, gamma=0.0, parity=None):
    qp = QParams(q)
    lat = Lattice.symmetric(qp)
    return lat, EigenproblemParams.from_lattice(lat, OscillatorParams(qp, gamma), parity)


def fock(*ms):
    return [SpectrumLabel.fock(m) for m in ms]


def nonfock(*ms, gamma=0.0):
    return [SpectrumLabel.nonfock(m, gamma) for m in ms]


def test_check_semantics():
    assert Check("a", 1e-9, 1e-8).passed
    assert not Check("a", 1e-7, 1e-8).passed
    bad = Check("a", math.nan, 1.0)
    assert not bad.passed and bad.to_dict()["value"] is None
    assert Check("a", 0.0, 0.0).passed


def test_report_json_schema():
    rep = VerificationReport("demo", {"q": 2.0})
    rep.add("x", 1e-12, 1e-10)
    rep.add("y", math.nan, 1e-10)
    data = json.loads(rep.to_json())
    assert set(data) == {"params", "checks", "pass"}
    assert data["pass"] is False
    assert data["checks"][0] == {"id": "x", "value": 1e-12, "tolerance": 1e-10, "pass": True}
    assert rep.failing() == ["y"]
    assert "overall: FAIL" in rep.to_text()


def test_gram_parity_zero():
    lat, ep = setup()
    G = gram_matrix(fock(0, 1), lat, ep, TOL)
    assert G[0, 1] == 0 and G[1, 0] == 0


def test_gram_fock_against_closed_forms():
    lat, ep = setup(2.0)
    assert ep.c == pytest.approx(1.0)
    rep = orthogonality_check(fock(*range(6)), lat, ep, TOL, offdiag_tol=1e-9)
    assert rep.passed, rep.failing()


@pytest.mark.parametrize("q", [1.5, 2.0])
def test_gram_cross_family(q):
    lat, ep = setup(q)
    rep = orthogonality_check(fock(0, 1, 2, 3) + nonfock(-2, -1, 0, 1, 2), lat, ep, TOL)
    assert rep.value("offdiag.cross_family") < 1e-8
    assert rep.passed, rep.failing()


@pytest.mark.parametrize("parity", [0, 1])
def test_connection_q15(parity):
    lat, ep = setup(1.5, parity=parity)
    rep = connection_check(3, ep, TOL, lat=lat)
    assert rep.passed, rep.failing()
    assert any(c.id.startswith("connection.generic.") for c in rep.checks)
    assert any(c.id.startswith("connection.nonfock_odd.") for c in rep.checks)


def test_connection_gamma_nonzero():
    lat, ep = setup(2.0, gamma=0.4)
    assert connection_check(2, ep, TOL, lat=lat).passed


def test_moments():
    lat, ep = setup(2.0)
    rep = moment_indeterminacy(0, 10, lat, ep, TOL)
    assert rep.value("moments.s0.drift") < 1e-7
    assert rep.value("moments.s0.positivity") == 0.0
    rep0 = moment_indeterminacy(0, 0, lat, ep, TOL)
    assert rep0.value("moments.s0.drift") < 1e-8
    assert moment_indeterminacy(1, 10, lat, ep, TOL).passed


def test_moments_need_calibration():
    from qline.errors import ParameterError

    qp = QParams(2.0)
    lat = Lattice.symmetric(qp, xi0=1.0)
    ep = EigenproblemParams.from_lattice(lat, OscillatorParams(qp, 0.0))
    with pytest.raises(ParameterError):
        moment_indeterminacy(0, 4, lat, ep, TOL)


def test_completeness_of_basis_members():
    lat, ep = setup(2.0)
    f = eigenfunction(SpectrumLabel.fock(2), lat, ep, TOL)
    assert completeness_projection(f, 2, None, lat, ep, TOL).value("completeness.residual") < 1e-8
    g = eigenfunction(SpectrumLabel.nonfock(1, 0.0), lat, ep, TOL)
    assert completeness_projection(g, 0, 1, lat, ep, TOL).value("completeness.residual") < 1e-8


def test_completeness_shell_sweep():
    lat, ep = setup(2.0)
    f = shell_function(lat, ep, 0, TOL)
    rep = completeness_sweep(f, [(0, 0), (2, 1), (4, 2), (6, 3), (8, 4)], lat, ep, TOL)
    assert rep.passed, (rep.failing(), rep.notes)


def test_fock_family_incomplete():
    lat, ep = setup(2.0)
    rep = fock_incompleteness(lat, ep, 12, 0, TOL)
    assert rep.passed and rep.value("incompleteness.captured.s0") < 0.01


def test_algebra_and_recurrence_suites():
    assert algebra_check(n_functions=10).passed
    assert phi11_recurrence_check(n_draws=30).passed


def test_reports_are_deterministic():
    lat, ep = setup(1.5)
    a = connection_check(1, ep, TOL, lat=lat).to_json()
    b = connection_check(1, ep, TOL, lat=lat).to_json()
    assert a == b
    assert algebra_check(n_functions=5).to_json() == algebra_check(n_functions=5).to_json()


def test_doubled_window_check():
    def producer(K):
        rep = VerificationReport("toy", {"K": K})
        rep.add("r", 1.0 / K, 0.1)
        return rep

    rep = doubled_window_check(producer, 20)
    assert rep.value("r.doubling") == pytest.approx(0.025)
    assert rep.passed
    assert not doubled_window_check(producer, 2).passed
