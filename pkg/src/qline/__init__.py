"""Eigenbasis of the q-deformed harmonic oscillator on the quantum line.

Modules: ``qcore`` (q-calculus), ``qhyper`` (basic hypergeometric series),
``lattice`` (the two-sided q-lattice and its operators), ``oscillator``
(realization, ground state, spectrum), ``eigenbasis`` (Fock and non-Fock
eigenfunctions), ``verify`` (verification reports), ``estimator``
(projection onto the eigenbasis) and ``cli``.
"""
from .eigenbasis import EigenproblemParams, eigenfunction, htilde, ktilde, norm_closed_form
from .errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    ParameterError,
    PoleError,
    QLineError,
    WindowError,
)
from .lattice import Lattice, LatticeFunction, inner_product
from .oscillator import OscillatorParams, SpectrumLabel, energy
from .qcore import QParams, Tolerance
from .verify import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DivergenceError", "DomainError", "EigenproblemParams", "Lattice",
    "LatticeFunction", "OscillatorParams", "ParameterError", "PoleError", "QLineError", "QParams",
    "SpectrumLabel", "Tolerance", "VerificationReport", "WindowError", "eigenfunction", "energy",
    "htilde", "inner_product", "ktilde", "norm_closed_form",
]
