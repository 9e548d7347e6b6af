"""Shared fixtures and independent sympy oracles."""
import pytest
import sympy as sp
from hypothesis import HealthCheck, settings, strategies as st

from extoda.hierarchy import Hierarchy
from extoda.highergenus import GenusExpansion
from extoda.ring.config import DEFAULT, TruncationConfig
from extoda.ring.jet import JetElement, unpack

settings.register_profile("repo", max_examples=30, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

X, EPS = sp.symbols("x epsilon")
VF = sp.Function("v")
UF = sp.Function("u")

SMALL = TruncationConfig(eps_order=3, jet_order=8, coupling_degree=3, divisor_degree=2, p_max=2)


@pytest.fixture(scope="session")
def genus():
    return GenusExpansion(DEFAULT)


@pytest.fixture(scope="session")
def hier():
    return Hierarchy(DEFAULT.with_(eps_order=4), qmax=2)


def to_sympy(f: JetElement, x=X):
    """JetElement as an expression in x, eps with v(x), u(x) sympy functions."""
    out = 0
    for (a, b, packed), c in f.terms.items():
        term = sp.Rational(int(c.numerator), int(c.denominator)) * EPS ** a * sp.exp(b * UF(x))
        for var, m, e in unpack(packed):
            fn = VF(x) if var == 0 else UF(x)
            term *= (sp.diff(fn, x, m) if m else fn) ** e
        out += term
    return out


def eps_truncate(expr, n):
    """Taylor polynomial in eps up to eps^n."""
    return sp.series(expr, EPS, 0, n + 1).removeO()


def same(expr_a, expr_b) -> bool:
    return sp.simplify(sp.expand(expr_a - expr_b)) == 0


@st.composite
def jets(draw, cfg=SMALL, max_terms=3, max_m=2):
    """Random small JetElements."""
    out = JetElement._raw({}, cfg)
    for _ in range(draw(st.integers(0, max_terms))):
        c = draw(st.fractions(min_value=-3, max_value=3, max_denominator=4))
        term = JetElement.const(str(c), cfg) * JetElement.exp_u(draw(st.integers(-1, 1)), cfg)
        term = term * JetElement.eps(draw(st.integers(0, 1)), cfg)
        for name in ("v", "u"):
            for m in range(max_m + 1):
                e = draw(st.integers(0, 1))
                if e:
                    term = term * JetElement.var(name, m, cfg)
        out = out + term
    return out
