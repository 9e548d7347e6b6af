import pytest
import sympy as sp
from gmpy2 import mpq

from conftest import UF, VF, X, to_sympy
from extoda.genus0 import OmegaZeroTable, gw0_correlator, omega0, theta
from extoda.ring import JetElement
from extoda.ring.coupling import CouplingSeries, tdeg
from extoda.tables import f0_reference, multiset_factor, parse_monomial

vs, us, z, w = sp.symbols("v u z w")


def poly(f: JetElement):
    return sp.expand(to_sympy(f).subs({VF(X): vs, UF(X): us}))


def theta_oracle(alpha, p):
    """Coefficients read off from sympy's Bessel series and digamma."""
    n = p + 3
    if alpha == 2:
        gen = sp.exp(z * vs) * sp.besseli(0, 2 * sp.exp(us / 2) * z)
        ser = sp.series(gen, z, 0, n).removeO()
        return sp.expand(ser.coeff(z, p + 1))
    tot = 0
    for m in range(n):
        c = sp.EulerGamma - us / 2 + sp.digamma(m + 1)
        tot += c * sp.exp(m * us) * z ** (2 * m) / sp.factorial(m) ** 2
    ser = sp.series(-2 * sp.exp(z * vs) * tot, z, 0, n).removeO()
    return sp.expand(sp.simplify(ser.coeff(z, p)))


@pytest.mark.parametrize("alpha", [1, 2])
@pytest.mark.parametrize("p", range(5))
def test_theta_against_bessel_series(alpha, p):
    assert sp.expand(poly(theta(alpha, p)) - theta_oracle(alpha, p)) == 0


def test_theta_examples():
    assert poly(theta(1, 0)) == us
    assert poly(theta(2, 0)) == vs
    assert poly(theta(2, 1)) == vs ** 2 / 2 + sp.exp(us)
    with pytest.raises(ValueError):
        theta(1, -1)


def test_omega0_examples():
    assert poly(omega0(2, 0, 2, 0)) == sp.exp(us)
    assert poly(omega0(1, 0, 2, 0)) == vs
    assert poly(omega0(1, 0, 1, 0)) == us


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_omega0_generating_series(a, b):
    # (z + w) sum Omega0 z^p w^q = d_v theta_a(z) d_u theta_b(w) + d_u theta_a(z) d_v theta_b(w) - eta_ab
    K = 3
    tab = OmegaZeroTable(K)
    th = {(al, p): poly(theta(al, p)) for al in (1, 2) for p in range(K + 2)}
    lhs = (z + w) * sum(poly(tab(a, p, b, q)) * z ** p * w ** q for p in range(K + 1) for q in range(K + 1))
    ta = sum(th[(a, p)] * z ** p for p in range(K + 2))
    tb = sum(th[(b, q)] * w ** q for q in range(K + 2))
    rhs = sp.diff(ta, vs) * sp.diff(tb, us) + sp.diff(ta, us) * sp.diff(tb, vs) - (1 if a != b else 0)
    diff = sp.Poly(sp.expand(lhs - rhs), z, w)
    for (i, j), c in diff.terms():
        if i + j <= K:
            assert sp.simplify(c) == 0


def test_omega0_symmetric():
    tab = OmegaZeroTable(3)
    for a in (1, 2):
        for b in (1, 2):
            for p in range(4):
                for q in range(4):
                    assert tab(a, p, b, q) == tab(b, q, a, p)


def test_fields_expansion(genus):
    f = genus.g0.fields
    bd = f.v.bounds
    assert f.v.coefficient({(1, 0): 1}) == 1 and f.u.coefficient({(2, 0): 1}) == 1
    assert f.v.coefficient({}) == 0 and f.u.coefficient({}) == 0
    # with only t^{1,0} switched on, v = t^{1,0} and u = 0
    only_x = lambda k: tdeg(k[2]) == 0
    assert f.v.filter(only_x) == CouplingSeries.t(1, 0, bd)
    assert not f.u.filter(only_x)


def test_field_derivatives_of_F0(genus):
    F0, f = genus.F0, genus.g0.fields
    D = F0.bounds.deg_t
    x = (1, 0)
    assert not (F0.d(x, (2, 0)) - f.v).filter(lambda k: tdeg(k[2]) <= D - 1)
    assert not (F0.d(x, x) - f.u).filter(lambda k: tdeg(k[2]) <= D)


def test_table_rows(genus):
    rows = f0_reference()
    assert len(rows) > 50
    for d, exps, coeff, pre, den in rows:
        assert genus.F0.coefficient(exps, d=d) == coeff, (d, exps)


@pytest.mark.parametrize("d,mono,value", [
    (0, "t0^2 s0", mpq(1, 2)), (1, "t1", -2), (2, "t3", mpq(-3, 4)),
    (2, "s2", mpq(1, 4)), (3, "t3^2", mpq(50, 27) / 2),
])
def test_table_examples(genus, d, mono, value):
    assert genus.F0.coefficient(parse_monomial(mono), d=d) == value


def test_correlators(genus):
    F0 = genus.F0
    assert gw0_correlator(F0, [(1, 0), (1, 0), (2, 0)], 0) == 1
    assert gw0_correlator(F0, [(1, 1)], 1) == -2
    assert gw0_correlator(F0, [(1, 3)], 2) == mpq(-3, 4)
    with pytest.raises(ValueError):
        gw0_correlator(F0, [(1, 9)], 0)
    with pytest.raises(ValueError):
        gw0_correlator(F0, [(3, 0)], 0)
    assert multiset_factor({(1, 0): 2, (2, 0): 3}) == 12


def test_string_equation(genus):
    g0 = genus.g0
    F0 = g0.F0
    bd = F0.bounds
    res = g0.t_tilde(1, 0) * g0.t_tilde(2, 0)
    for a in (1, 2):
        for p in range(1, bd.p_max + 1):
            res = res + g0.t_tilde(a, p) * F0.derivative(a, p - 1)
    assert not res.filter(lambda k: tdeg(k[2]) <= bd.deg_t - 1)


def test_theta_matches_density_limit(hier):
    for a in (1, 2):
        for p in range(3):
            h0 = hier.density(a, p).value.eps_layer(0)
            assert poly(h0) == poly(theta(a, p + 1))
