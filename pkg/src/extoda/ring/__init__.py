"""Exact arithmetic, the jet ring and coupling series."""
from .config import DEFAULT, TruncationConfig
from .coupling import CouplingBounds, CouplingSeries, coupling_derivative, monomial_str
from .jet import (JetElement, JetOrderOverflow, NotATotalDerivative, const, eps, exp_u,
                  jet_arith, u, v)
from .rational import Q, Rational, bernoulli, harmonic, to_str


def jet_x_derivative(a: JetElement) -> JetElement:
    return a.d()


def jet_antiderivative(a: JetElement) -> JetElement:
    return a.antiderivative()


def grade(a: JetElement):
    """Common degree, or None when the element is inhomogeneous."""
    return a.grade()


__all__ = [
    "DEFAULT", "TruncationConfig", "CouplingBounds", "CouplingSeries", "coupling_derivative",
    "monomial_str", "JetElement", "JetOrderOverflow", "NotATotalDerivative", "const", "eps",
    "exp_u", "jet_arith", "u", "v", "Q", "Rational", "bernoulli", "harmonic", "to_str",
    "jet_x_derivative", "jet_antiderivative", "grade",
]
