
import pytest
import sympy as sp
from gmpy2 import mpq

from extoda.highergenus import (GenusExpansion, LoopSample, QuadExt, check_tau_recursions, check_u_from_tau,
                                f1_partials, f2_formula, gw_correlator, lam, loop_check, loop_lhs_genus1,
                                loop_residual_genus1, loop_samples, loop_source)
from extoda.ring.config import DEFAULT
from extoda.ring.coupling import CouplingBounds, CouplingSeries
from extoda.virasoro import virasoro_residual

P = sp.symbols("p0:5")
M = sp.symbols("m0:5")
s = sp.Symbol("s")


def f2_sym(P, M, cube=4):
    return f2_formula(list(P), list(M), 1 / P[1], 1 / M[1], 1 / (P[0] - M[0]), sp.Rational, cube)


# -- genus one --------------------------------------------------------------------

def test_f1_low_coefficients(genus):
    F1 = genus.F1
    assert F1.coefficient({(2, 0): 1}) == mpq(-1, 24)
    assert F1.coefficient({}) == 0


@pytest.mark.parametrize("exps,d,value", [
    ({(2, 0): 1}, 0, mpq(-1, 24)),
    ({(1, 1): 1}, 0, mpq(1, 12)),
    ({(2, 2): 1}, 1, mpq(1, 24)),
])
def test_genus_one_invariants(genus, exps, d, value):
    labels = [lab for lab, n in exps.items() for _ in range(n)]
    assert gw_correlator(genus.F1, labels, d) == value


def test_integrality(genus):
    for F in (genus.F1, genus.F2):
        assert not F.odd_part()
        assert not F.negative_q_part()


# -- the genus two jet formula -------------------------------------------------------

@pytest.mark.parametrize("cube", [4, 64])
def test_f2_formula_grading(cube):
    expr = f2_sym(P, M, cube)
    scaled = f2_sym([s ** (1 - k) * P[k] for k in range(5)], [s ** (1 - k) * M[k] for k in range(5)], cube)
    assert sp.simplify(scaled - s ** -2 * expr) == 0


@pytest.mark.parametrize("cube", [4, 64])
def test_f2_formula_swap_symmetric(cube):
    assert sp.simplify(f2_sym(P, M, cube) - f2_sym(M, P, cube)) == 0


def test_logZ_eps_support(genus):
    assert set(genus.logZ.eps_support()) == {-2, 0, 2}
    with pytest.raises(ValueError):
        genus.genus(3)


@pytest.mark.parametrize("m", [-1, 0, 1, 2])
def test_virasoro_constraints(genus, m):
    r, pred = virasoro_residual(m, genus.logZ)
    assert not r


def test_other_f2_reading_fails_virasoro():
    logZ = GenusExpansion(DEFAULT, cube=64).logZ
    r, _ = virasoro_residual(1, logZ)
    assert r.filter(lambda k: k[0] == 2)
    assert not r.filter(lambda k: k[0] < 2)


# -- tau function relations ----------------------------------------------------------

def test_lambda_is_shift():
    bd = CouplingBounds(p_max=1, deg_t=3, h_max=2, eps_max=4)
    x = CouplingSeries.t(1, 0, bd)
    f = x * x * x * CouplingSeries.t(2, 1, bd)
    eps = CouplingSeries.const(1, bd).mul_eps(1)
    shifted = (x + eps) * (x + eps) * (x + eps) * CouplingSeries.t(2, 1, bd)
    assert lam(f) == shifted
    assert lam(lam(f), -1) == f


def test_u_from_tau(genus):
    assert check_u_from_tau(genus.logZ, genus.g0.fields.u).passed


def test_tau_recursions(genus):
    assert all(r.passed for r in check_tau_recursions(genus.logZ, (1, 2)))


def test_tau_recursions_detect_perturbation(genus):
    bd = genus.logZ.bounds
    x = CouplingSeries.t(1, 0, bd)
    bump = (x * x * CouplingSeries.t(2, 1, bd)).mul_eps(2)
    rs = check_tau_recursions(genus.logZ + bump, (1,))
    assert not all(r.passed for r in rs)


# -- loop equation ------------------------------------------------------------------

def test_discriminant_example():
    smp = LoopSample(0, 1, 3, [1, 0, 0, 0], [0, 0, 0, 0])
    assert smp.D == 5
    with pytest.raises(ValueError):
        LoopSample(0, 1, 2, [1], [0])
    with pytest.raises(ValueError):
        LoopSample(0, -1, 3, [1], [0])


def test_quadratic_extension_against_sympy():
    d = mpq(7, 3)
    x, y = QuadExt(1, 2, d), QuadExt(mpq(-1, 2), 3, d)
    r = sp.sqrt(sp.Rational(7, 3))
    got = x * y - 2 * x + 1
    want = sp.expand((1 + 2 * r) * (-sp.Rational(1, 2) + 3 * r) - 2 * (1 + 2 * r) + 1)
    assert sp.nsimplify(want - (sp.Rational(str(got.a)) + sp.Rational(str(got.b)) * r)) == 0


def test_f1_partials_against_sympy():
    v, u, vd, ud = sp.symbols("v u vd ud")
    F1 = sp.log(vd ** 2 - sp.exp(u) * ud ** 2) / 24 - u / 24
    for smp in loop_samples(3, seed=7):
        E = sp.Rational(str(smp.E))
        vals = {vd: sp.Rational(str(smp.vd[0])), ud: sp.Rational(str(smp.ud[0])), u: sp.log(E)}
        dv, du = f1_partials(smp)
        for got, var in ((dv[0], v), (dv[1], vd), (du[0], u), (du[1], ud)):
            want = sp.simplify(sp.diff(F1, var).subs(vals))
            assert sp.Rational(str(got)) == want


def test_loop_left_side_closed_form():
    for smp in loop_samples(6, seed=3):
        assert loop_lhs_genus1(smp).pair() == (-smp.E / smp.D ** 2, 0)


def test_corrected_source_calibrates_to_one():
    c, res = loop_residual_genus1(loop_samples(5, 42), "corrected")
    assert c == 1
    assert all(a == 0 and b == 0 for a, b in res)
    assert loop_check(source="corrected").passed
    assert not loop_check().passed


def test_printed_source_cannot_be_calibrated():
    r = loop_check(5, 42, source="printed")
    assert not r.passed
    assert r.details["prefactor"] != "1"
    smp = loop_samples(1, 42)[0]
    with pytest.raises(ValueError):
        loop_source(smp, "other")


def test_samples_distinct_and_deterministic():
    a, b = loop_samples(5, 42), loop_samples(5, 42)
    assert [x.lam for x in a] == [x.lam for x in b]
    assert len({x.lam for x in a}) == 5
