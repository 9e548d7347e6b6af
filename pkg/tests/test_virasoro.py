import math
from math import factorial

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, strategies as st

from extoda.virasoro import (VirasoroOp, alpha_m, apply_virasoro, free_field_check,
                             free_field_coefficients, gram_matrix, kappa, string_shift_term,
                             virasoro_commutator, virasoro_direct, virasoro_free_field, virasoro_residual)

W = 3
PAIRS = [(i, j) for i in range(-1, 4) for j in range(-1, 4)]


def test_string_operator_quadratic_term():
    L = virasoro_direct(-1, W)
    assert L.terms[(((1, 0), (2, 0)), (), -2)] == 1
    assert L.terms[(((1, 1),), ((1, 0),), 0)] == 1


def test_constants():
    assert alpha_m(1, 1) == 3
    assert kappa(1) == mpq(3, 2)
    assert kappa(0) == 1
    for m in range(5):
        assert alpha_m(m, 0) == factorial(m)
    # alpha_m(k) = (m+k)!/(k-1)! * (H_{m+k} - H_{k-1})
    for m in range(1, 4):
        for kk in range(1, 5):
            want = sp.factorial(m + kk) / sp.factorial(kk - 1) * (sp.harmonic(m + kk) - sp.harmonic(kk - 1))
            assert alpha_m(m, kk) == mpq(str(want))


def test_negative_m_rejected():
    with pytest.raises(ValueError):
        virasoro_direct(-2, W)


@pytest.mark.parametrize("i,j", PAIRS)
def test_commutation_relations(i, j):
    assert virasoro_commutator(i, j, W).passed


def test_specific_commutators():
    wide = 8
    L = {m: virasoro_direct(m, wide) for m in range(-1, 4)}
    assert L[-1].commutator(L[0]).restrict(W) == L[-1].restrict(W).scale(-1)
    assert L[1].commutator(L[2]).restrict(W) == L[3].restrict(W).scale(-1)
    assert not L[0].commutator(L[0])


def printed_variant(m, window):
    """L_m with the scaling term t^{2,k-1} d/dt^{2,k-1} taken literally."""
    L = VirasoroOp()
    for k in range(1, m):
        L.add([], [(2, k - 1), (2, m - k - 1)], factorial(k) * factorial(m - k))
    for k in range(1, window + 2):
        c = mpq(factorial(m + k), factorial(k - 1))
        L.add([(1, k)], [(1, m + k)], c)
        L.add([(2, k - 1)], [(2, k - 1)], c)
    for k in range(0, window + 1):
        L.add([(1, k)], [(2, m + k - 1)], 2 * alpha_m(m, k))
    return L.restrict(window)


def test_literal_scaling_term_breaks_algebra():
    wide = 7
    Lm1 = virasoro_direct(-1, wide)
    lhs = Lm1.commutator(printed_variant(1, wide)).restrict(W)
    assert lhs != virasoro_direct(0, wide).restrict(W).scale(-2)


@pytest.mark.parametrize("m", range(-1, 5))
def test_free_field_limit(m):
    assert free_field_check(m, W).passed
    assert virasoro_free_field(m, W) == virasoro_direct(m, W)


def test_string_operator_independent_of_nu():
    a1a2, a2a2 = free_field_coefficients(-1, 5)
    assert all(p.degree() <= 0 for p in a1a2.values())
    assert all(p.degree() <= 0 for p in a2a2.values())
    with pytest.raises(ValueError):
        free_field_coefficients(-2, 3)


def test_gram_matrix():
    assert gram_matrix(0) == [[0, 0], [0, 2]]
    nu = 0.3
    g = gram_matrix(nu)
    assert g[0][1] == pytest.approx(math.sin(math.pi * nu) / math.pi)
    assert g[1][0] == pytest.approx(-math.sin(math.pi * nu) / math.pi)
    assert g[1][1] == pytest.approx(2 * math.cos(math.pi * nu))


@pytest.mark.parametrize("m", range(-1, 3))
def test_shift_equals_string_term(m):
    L = virasoro_direct(m, 6)
    assert L.shifted() - L == string_shift_term(m).scale(-1)


# -- normal ordering against sympy applied to polynomials ------------------------

LABS = [(1, 0), (2, 0), (1, 1), (2, 1)]
SYM = {lab: sp.Symbol(f"t{lab[0]}_{lab[1]}") for lab in LABS}
EPS = sp.Symbol("eps")


def apply_sym(op: VirasoroOp, f):
    out = 0
    for (ts, ds, e), c in op.terms.items():
        g = f
        for lab in ds:
            g = sp.diff(g, SYM[lab])
        for lab in ts:
            g = g * SYM[lab]
        out += sp.Rational(int(c.numerator), int(c.denominator)) * EPS ** e * g
    return sp.expand(out)


@st.composite
def small_ops(draw):
    op = VirasoroOp()
    for _ in range(draw(st.integers(1, 3))):
        ts = draw(st.lists(st.sampled_from(LABS), max_size=2))
        ds = draw(st.lists(st.sampled_from(LABS), max_size=2))
        op.add(ts, ds, draw(st.integers(-3, 3)))
    return op


@given(small_ops(), small_ops())
def test_compose_matches_sympy(A, B):
    f = sum(SYM[a] ** 2 * SYM[b] + SYM[a] ** 3 for a in LABS for b in LABS)
    assert sp.expand(apply_sym(A.compose(B), f) - apply_sym(A, apply_sym(B, f))) == 0


# -- residuals on series ---------------------------------------------------------

@pytest.mark.parametrize("m", [-1, 0])
def test_genus_zero_constraints(genus, m):
    F0 = genus.F0.mul_eps(-2)
    r, pred = virasoro_residual(m, F0)
    assert not r.filter(lambda k: k[0] == -2)


def test_unshifted_form_matches_constraint_form(genus):
    logZ = genus.logZ
    L0 = virasoro_direct(0, logZ.bounds.p_max + 2)
    lhs = apply_virasoro(L0, logZ, shifted=True)
    rhs = apply_virasoro(L0 - string_shift_term(0), logZ)
    assert lhs == rhs


def test_high_m_not_evaluable(genus):
    assert virasoro_residual(3, genus.logZ) == (None, None)


def test_describe_is_stable():
    d = virasoro_direct(-1, 1).describe()
    assert {"t": ["t1_0", "t2_0"], "d": [], "eps": -2, "coeff": "1"} in d
    assert d == virasoro_direct(-1, 1).describe()
