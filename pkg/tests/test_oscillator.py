import math

import numpy as np
import pytest

from qline.errors import DomainError
from qline.lattice import Lattice, LatticeFunction, apply_U
from qline.oscillator import (
    OscillatorParams,
    SpectrumLabel,
    apply_a,
    apply_adag,
    apply_H,
    energy,
    ev_difference_residual,
    ground_state,
    ground_state_values,
    rayleigh_quotient,
)
from qline.eigenbasis import EigenproblemParams, eigenfunction, weight
from qline.qcore import QParams
from qline.verify import algebra_half_width


def setup(q=2.0, gamma=0.0, theta=0.0, K=40):
    qp = QParams(q)
    lat = Lattice.symmetric(qp, K=K)
    return lat, OscillatorParams(qp, gamma, theta)


def test_spectrum_examples():
    qp = QParams(2.0)
    assert energy(SpectrumLabel.fock(0), qp) == 0.0
    assert energy(SpectrumLabel.fock(1), qp) == pytest.approx(1.0, rel=1e-15)
    assert energy(SpectrumLabel.nonfock(0, 0.0), qp) == pytest.approx(8 / 3, rel=1e-15)
    assert SpectrumLabel.fock(1).epsilon(qp) == -0.25


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_both_families_approach_accumulation_point(q):
    qp = QParams(q)
    acc = qp.accumulation_point
    fock = [energy(SpectrumLabel.fock(m), qp) for m in range(15)]
    nonfock = [energy(SpectrumLabel.nonfock(m, 0.3), qp) for m in range(15)]
    assert all(a < b < acc for a, b in zip(fock, fock[1:]))
    assert all(a > b > acc for a, b in zip(nonfock, nonfock[1:]))
    fock, nonfock = energy(SpectrumLabel.fock(40), qp), energy(SpectrumLabel.nonfock(40, 0.3), qp)
    assert abs(fock - acc) < 1e-8 * acc and abs(nonfock - acc) < 1e-8 * acc


def test_label_validation():
    with pytest.raises(DomainError):
        SpectrumLabel.fock(-1)
    with pytest.raises(DomainError):
        SpectrumLabel("fock", 1, 0.5)
    with pytest.raises(DomainError):
        SpectrumLabel("nonfock", 0)
    with pytest.raises(DomainError):
        SpectrumLabel("other", 0)


def test_ground_state_at_origin():
    _, op = setup()
    assert ground_state_values(0.0, op) == 1.0


@pytest.mark.parametrize("q,gamma", [(1.5, 0.0), (2.0, 0.4), (3.0, -0.7)])
def test_ground_state_modulus_is_weight(q, gamma):
    lat, op = setup(q, gamma)
    x = lat.points(-10, 9).ravel()
    ep = EigenproblemParams(op, 1.0)
    lhs = np.abs(ground_state_values(x, op)) ** 2
    np.testing.assert_allclose(lhs, weight(op.y_scale * x, ep), rtol=1e-10)


@pytest.mark.parametrize("q,gamma,theta", [(1.5, 0.0, 0.0), (2.0, 0.3, 1.0), (3.0, -0.5, 4.0)])
def test_annihilator_kills_ground_state(q, gamma, theta):
    lat, op = setup(q, gamma, theta)
    psi = ground_state(lat, op)
    res = apply_a(psi, op)
    lo, hi = res.window
    # a f(x) = alpha q f(q^2 x) - i beta q^-1/2 (f(q^2 x) - f(x)) / (x lambda)
    x = lat.points(lo, hi)
    up, here = psi.block(lo + 2, hi + 2), psi.block(lo, hi)
    explicit = op.alpha * q * up - 1j * op.beta * q**-0.5 * (up - here) / (x * op.qp.lam)
    scale = abs(op.alpha) * q * np.abs(up) + abs(op.beta) * q**-0.5 * (np.abs(up) + np.abs(here)) / (
        np.abs(x) * op.qp.lam)
    mask = scale > 1e-280
    assert np.max(np.abs(res.values - explicit)[mask] / scale[mask]) < 1e-14
    assert np.max(np.abs(res.values[mask]) / scale[mask]) < 1e-10


def test_annihilator_zero():
    lat, op = setup()
    assert np.all(apply_a(LatticeFunction.zeros(lat), op).values == 0)


@pytest.mark.parametrize("q", [1.1, 1.5, 2.0, 3.0])
def test_oscillator_relation_random(q):
    qp = QParams(q)
    h = algebra_half_width(qp)
    lat = Lattice.symmetric(qp, xi0=1.0, K=h)
    rng = np.random.default_rng(7)
    for _ in range(10):
        op = OscillatorParams(qp, rng.uniform(-1, 1), rng.uniform(0, 2 * math.pi))
        f = LatticeFunction.random(lat, rng)
        r = apply_a(apply_adag(f, op), op) - apply_adag(apply_a(f, op), op) * qp.base2
        defect = r - f.restrict(*r.window)
        assert defect.norm_inf() < 1e-10 * f.norm_inf()


def test_hamiltonian_paths_agree():
    qp = QParams(1.7)
    lat = Lattice.symmetric(qp, xi0=1.0, K=8)
    op = OscillatorParams(qp, 0.25, 0.6)
    f = LatticeFunction.random(lat, np.random.default_rng(11))
    h1 = apply_H(f, op)
    h2 = apply_adag(apply_a(f, op), op)
    lo = max(h1.n_lo, h2.n_lo)
    hi = min(h1.n_hi, h2.n_hi)
    assert np.max(np.abs(h1.block(lo, hi) - h2.block(lo, hi))) < 1e-10 * f.norm_inf()


def test_ground_state_energy_zero():
    lat, op = setup(2.0)
    psi = ground_state(lat, op)
    assert ev_difference_residual(psi, 0.0, op) < 1e-10
    assert abs(rayleigh_quotient(psi, op)) < 1e-10


def test_rayleigh_quotient_of_first_level():
    lat, op = setup(2.0, K=60)
    ep = EigenproblemParams.from_lattice(lat, op)
    f = eigenfunction(SpectrumLabel.fock(1), lat, ep)
    assert rayleigh_quotient(f, op) == pytest.approx(1.0, rel=1e-9)
