"""Genus-zero pipeline: theta series, dispersionless Omega, field solve, F_0."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial

from gmpy2 import mpq

from .ring.config import DEFAULT, TruncationConfig
from .ring.coupling import CouplingBounds, CouplingSeries
from .ring.jet import JetElement, unpack
from .ring.rational import harmonic
from .tables import multiset_factor

# polynomials in v, u, e^u live in the eps-free jet ring
POLY_CFG = TruncationConfig(eps_order=0, jet_order=15)
ETA = {(1, 2): 1, (2, 1): 1}


def _v():
    return JetElement.var("v", 0, POLY_CFG)


def _u():
    return JetElement.var("u", 0, POLY_CFG)


def _E(m: int):
    return JetElement.exp_u(m, POLY_CFG)


def theta(alpha: int, p: int) -> JetElement:
    """theta_{alpha,p}(v, u); gamma + psi(m+1) is replaced by the harmonic number H_m."""
    if p < 0:
        raise ValueError("p must be >= 0")
    v, u = _v(), _u()
    out = JetElement._raw({}, POLY_CFG)
    if alpha == 1:
        for m in range(p // 2 + 1):
            k = p - 2 * m
            c = mpq(-2, factorial(k) * factorial(m) ** 2)
            out = out + (u.scale(mpq(-1, 2)) + harmonic(m)) * _E(m) * v ** k * c
    elif alpha == 2:
        for m in range((p + 1) // 2 + 1):
            k = p + 1 - 2 * m
            if k < 0:
                continue
            out = out + _E(m) * v ** k * mpq(1, factorial(k) * factorial(m) ** 2)
    else:
        raise ValueError("alpha must be 1 or 2")
    return out


class OmegaZeroTable:
    """Dispersionless two-point functions from the theta generating series."""

    def __init__(self, pmax: int):
        self.pmax = pmax
        self._cache: dict = {}

    def _numerator(self, a: int, b: int, i: int, j: int) -> JetElement:
        ta, tb = theta(a, i), theta(b, j)
        out = ta.partial("v") * tb.partial("u") + ta.partial("u") * tb.partial("v")
        if i == 0 and j == 0:
            out = out - ETA.get((a, b), 0)
        return out

    def _block(self, a: int, b: int) -> dict:
        """All Omega^0_{a,p;b,q} with p + q <= 2*pmax, checking divisibility by z + w."""
        if (a, b) in self._cache:
            return self._cache[(a, b)]
        n = 2 * self.pmax
        om: dict = {}
        for s in range(n + 1):
            # Omega_{p,q} with p + q = s, from the highest p down
            for p in range(s, -1, -1):
                q = s - p
                val = self._numerator(a, b, p + 1, q)
                if q > 0:
                    val = val - om[(p + 1, q - 1)]
                om[(p, q)] = val
        # remaining equations: N_{0,0} = 0, N_{0,j} = Omega_{0,j-1}
        for j in range(n + 1):
            lhs = self._numerator(a, b, 0, j)
            rhs = om[(0, j - 1)] if j else JetElement._raw({}, POLY_CFG)
            if lhs != rhs:
                raise ArithmeticError(f"generating numerator not divisible by z+w at ({a},{b}), w^{j}")
        self._cache[(a, b)] = om
        return om

    def __call__(self, a: int, p: int, b: int, q: int) -> JetElement:
        return self._block(a, b)[(p, q)]


def omega0(alpha: int, p: int, beta: int, q: int) -> JetElement:
    return OmegaZeroTable(max(p, q))(alpha, p, beta, q)


class Substituter:
    """Evaluate jet polynomials at coupling series for v^{(m)}, u^{(m)}.

    e^{bu} is Q^b exp(b du) where du = u - t^{2,0}; only du enters exponentials.
    """

    def __init__(self, jets: dict, du: CouplingSeries):
        self.jets = jets
        self.bounds = du.bounds
        self.du = du
        self._pow: dict = {}
        self._exp: dict = {}

    def power(self, key, e: int) -> CouplingSeries:
        k = (key, e)
        if k not in self._pow:
            self._pow[k] = self.jets[key].one() if e == 0 else self.power(key, e - 1) * self.jets[key]
        return self._pow[k]

    def expu(self, b: int) -> CouplingSeries:
        if b not in self._exp:
            x = self.du.scale(b).exp()
            self._exp[b] = x * CouplingSeries.S(2 * b, self.bounds)
        return self._exp[b]

    def __call__(self, P: JetElement) -> CouplingSeries:
        out = CouplingSeries({}, self.bounds)
        groups: dict = {}
        for (a, b, packed), c in P.terms.items():
            groups.setdefault((a, b), []).append((packed, c))
        for (a, b), items in groups.items():
            part = CouplingSeries({}, self.bounds)
            for packed, c in items:
                term = CouplingSeries.const(c, self.bounds)
                for var, m, e in unpack(packed):
                    term = term * self.power((var, m), e)
                part = part + term
            if b:
                part = part * self.expu(b)
            if a:
                part = part.mul_eps(a)
            out = out + part
        return out


@dataclass
class FieldSeries:
    v: CouplingSeries
    u: CouplingSeries

    @property
    def du(self) -> CouplingSeries:
        return self.u - CouplingSeries.t(2, 0, self.u.bounds)


def genus0_bounds(cfg: TruncationConfig, extra_h: int = 0) -> CouplingBounds:
    return CouplingBounds.from_config(cfg, extra_h=extra_h)


def couplings(bounds: CouplingBounds):
    return [(a, p) for p in range(bounds.p_max + 1) for a in (1, 2)]


def solve_fields(cfg: TruncationConfig = DEFAULT, bounds: CouplingBounds | None = None) -> FieldSeries:
    """Triangular iteration on the coupling degree (t^{1,0} excluded)."""
    bd = bounds or genus0_bounds(cfg)
    t = {lab: CouplingSeries.t(*lab, bd) for lab in couplings(bd)}
    dth = {lab: (theta(*lab).partial("u"), theta(*lab).partial("v")) for lab in couplings(bd)}
    v = t[(1, 0)]
    u = t[(2, 0)]
    for _ in range(bd.deg_t + 1):
        sub = Substituter({(0, 0): v, (1, 0): u}, u - t[(2, 0)])
        nv = t[(1, 0)]
        nu = t[(2, 0)]
        for lab in couplings(bd):
            du_th, dv_th = dth[lab]
            if lab != (1, 0) and du_th:
                nv = nv + t[lab] * sub(du_th)
            if lab != (2, 0) and dv_th:
                nu = nu + t[lab] * sub(dv_th)
        if nv == v and nu == u:
            break
        v, u = nv, nu
    else:
        raise ArithmeticError("field iteration did not converge")
    return FieldSeries(v, u)


class GenusZero:
    """F_0 and the objects it is built from, at one truncation."""

    def __init__(self, cfg: TruncationConfig = DEFAULT, extra_h: int = 0):
        self.cfg = cfg
        self.bounds = genus0_bounds(cfg, extra_h)
        self.omega0 = OmegaZeroTable(cfg.p_max)

    @cached_property
    def fields(self) -> FieldSeries:
        return solve_fields(self.cfg, self.bounds)

    @cached_property
    def substituter(self) -> Substituter:
        f = self.fields
        return Substituter({(0, 0): f.v, (1, 0): f.u}, f.du)

    def t_tilde(self, a: int, p: int) -> CouplingSeries:
        t = CouplingSeries.t(a, p, self.bounds)
        return t - 1 if (a, p) == (1, 1) else t

    @cached_property
    def F0(self) -> CouplingSeries:
        labs = couplings(self.bounds)
        tt = {lab: self.t_tilde(*lab) for lab in labs}
        out = CouplingSeries({}, self.bounds)
        for i, la in enumerate(labs):
            for lb in labs[i:]:
                om = self.substituter(self.omega0(*la, *lb))
                w = tt[la] * tt[lb]
                out = out + (w * om if la == lb else (w * om).scale(2))
        return out.scale(mpq(1, 2))


def f0(cfg: TruncationConfig = DEFAULT) -> CouplingSeries:
    return GenusZero(cfg).F0


def gw0_correlator(F0: CouplingSeries, labels, degree: int):
    """<prod tau_{p_i}(phi_{alpha_i})>_{0,d}: coefficient times the multiset factorials."""
    exps: dict = {}
    for a, p in labels:
        if a not in (1, 2) or p < 0 or p > F0.bounds.p_max:
            raise ValueError(f"label ({a},{p}) outside the coupling window")
        exps[(a, p)] = exps.get((a, p), 0) + 1
    if 2 * degree > F0.bounds.h_max:
        raise ValueError(f"degree {degree} outside the divisor window")
    return F0.coefficient(exps, d=degree) * multiset_factor(exps)
