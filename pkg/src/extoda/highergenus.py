"""Genus one and two corrections, the assembled log Z, tau recursions, loop equation."""
from __future__ import annotations

import random
from functools import cached_property
from math import comb, factorial

from gmpy2 import mpq

from .genus0 import GenusZero
from .report import CheckResult, Report, summarize
from .ring.config import DEFAULT, TruncationConfig
from .ring.coupling import CouplingSeries, tdeg
from .tables import multiset_factor

T10 = (1, 0)
T20 = (2, 0)


def lam(f: CouplingSeries, sign: int = 1) -> CouplingSeries:
    """Lambda^{sign} = exp(sign * eps * d/dt^{1,0}), truncated by the series' eps bound."""
    out = f
    term = f
    k = 0
    while True:
        k += 1
        term = term.derivative(*T10).mul_eps(1).scale(mpq(sign, k))
        if not term:
            return out
        out = out + term


def f2_formula(P, M, iP1, iM1, iD, num, cube: int = 4):
    """24^2 F_2 in canonical coordinates.

    P, M are [u, u', u'', u''', u''''] for u_+ and u_-; iP1 = 1/u_+', iM1 = 1/u_-',
    iD = 1/(u_+ - u_-).  ``num(a, b)`` builds the rational a/b in the target ring.
    ``cube`` is the numeric factor in front of u_pm''^3 in the leading terms.
    """
    Dd = P[0] - M[0]
    c = num
    out = P[2] ** 3 * Dd * iP1 ** 4 * c(cube, 5) - M[2] ** 3 * Dd * iM1 ** 4 * c(cube, 5)
    out = out - P[2] * M[2] * iP1 * iM1 * c(1, 4)
    out = out + P[2] * iP1 ** 3 * (P[2] * M[1] * c(1, 2) - P[3] * Dd * c(7, 5)) * c(3, 4)
    out = out + M[2] * iM1 ** 3 * (M[2] * P[1] * c(1, 2) + M[3] * Dd * c(7, 5)) * c(3, 4)
    out = out + iP1 ** 2 * (P[2] ** 2 * c(33, 10) - P[3] * M[1] * c(9, 10)
                            + P[2] * M[2] * c(1, 10) + P[4] * Dd) * c(1, 4)
    out = out + iM1 ** 2 * (M[2] ** 2 * c(33, 10) - M[3] * P[1] * c(9, 10)
                            + P[2] * M[2] * c(1, 10) - M[4] * Dd) * c(1, 4)
    out = out - iP1 * (P[3] * c(17, 5) + M[3] * c(1, 2)) * c(1, 4)
    out = out - iM1 * (M[3] * c(17, 5) + P[3] * c(1, 2)) * c(1, 4)
    out = out - iD ** 2 * (P[1] ** 3 * iM1 + M[1] ** 3 * iP1) * c(1, 10)
    out = out - iD ** 2 * (P[1] ** 2 - P[1] * M[1] * c(11, 5) + M[1] ** 2)
    out = out + (P[2] - M[2]) * iD * (M[1] * iP1 * c(1, 5) + P[1] * iM1 * c(1, 5) + 1)
    return out


class CanonicalCoords:
    """u_pm = v +- 2 e^{u/2} and their t^{1,0}-derivatives, with e^{u/2} = S exp(du/2)."""

    def __init__(self, v: CouplingSeries, du: CouplingSeries, order: int = 4):
        bd = v.bounds
        self.bounds = bd
        half = du.scale(mpq(1, 2)).exp()
        self.W = (half * CouplingSeries.S(1, bd)).scale(2)
        # 1/(u_+ - u_-) = S^{-1} exp(-du/2) / 4
        self.inv_diff = ((-du.scale(mpq(1, 2))).exp() * CouplingSeries.S(-1, bd)).scale(mpq(1, 4))
        vs, ws = [v], [self.W]
        for _ in range(order):
            vs.append(vs[-1].derivative(*T10))
            ws.append(ws[-1].derivative(*T10))
        self.plus = [a + b for a, b in zip(vs, ws)]
        self.minus = [a - b for a, b in zip(vs, ws)]


def _check_integral(F: CouplingSeries, name: str) -> None:
    odd = F.odd_part()
    if odd:
        raise ArithmeticError(f"{name}: odd powers of e^(t20/2) survive ({len(odd.terms)} terms)")
    neg = F.negative_q_part()
    if neg:
        raise ArithmeticError(f"{name}: negative powers of Q survive ({len(neg.terms)} terms)")


def _unit_log(x: CouplingSeries, name: str) -> CouplingSeries:
    if x.terms.get((0, 0, 0)) != 1:
        raise ArithmeticError(f"{name}: log argument is not 1 at the base point")
    return x.log()


class GenusExpansion:
    """F_0, F_1, F_2 and log Z at one truncation."""

    F2_EXTRA_H = 2  # the F_2 formula carries (u_+ - u_-)^{-2} ~ Q^{-1}

    def __init__(self, cfg: TruncationConfig = DEFAULT, cube: int = 4):
        self.cfg = cfg
        self.cube = cube
        self.g0 = GenusZero(cfg)
        self.bounds = self.g0.bounds

    @cached_property
    def F0(self) -> CouplingSeries:
        return self.g0.F0

    @cached_property
    def F1(self) -> CouplingSeries:
        f = self.g0.fields
        cc = CanonicalCoords(f.v, f.du, order=1)
        # log((u_+ - u_-)/4) = u/2 exactly
        F = _unit_log(cc.plus[1] * cc.minus[1], "F1").scale(mpq(1, 24)) - f.u.scale(mpq(1, 24))
        _check_integral(F, "F1")
        return F

    @cached_property
    def _wide(self) -> GenusZero:
        return GenusZero(self.cfg, extra_h=self.F2_EXTRA_H)

    @cached_property
    def F2(self) -> CouplingSeries:
        f = self._wide.fields
        cc = CanonicalCoords(f.v, f.du, order=4)
        for s, name in ((cc.plus[1], "u_+'"), (cc.minus[1], "u_-'")):
            if s.terms.get((0, 0, 0)) != 1:
                raise ArithmeticError(f"F2: {name} is not a unit at the base point")
        raw = f2_formula(cc.plus, cc.minus, cc.plus[1].inverse(), cc.minus[1].inverse(),
                         cc.inv_diff, mpq, self.cube).scale(mpq(1, 576))
        _check_integral(raw, "F2")
        return raw.rebound(self.bounds)

    def genus(self, g: int) -> CouplingSeries:
        if g not in (0, 1, 2):
            raise ValueError("genus must be 0, 1 or 2")
        return (self.F0, self.F1, self.F2)[g]

    @cached_property
    def logZ(self) -> CouplingSeries:
        return self.F0.mul_eps(-2) + self.F1 + self.F2.mul_eps(2)


def f1_substituted(cfg: TruncationConfig = DEFAULT) -> CouplingSeries:
    return GenusExpansion(cfg).F1


def f2_substituted(cfg: TruncationConfig = DEFAULT, cube: int = 4) -> CouplingSeries:
    return GenusExpansion(cfg, cube).F2


def assemble_logZ(cfg: TruncationConfig = DEFAULT) -> CouplingSeries:
    return GenusExpansion(cfg).logZ


def gw_correlator(F: CouplingSeries, labels, degree: int):
    exps: dict = {}
    for lab in labels:
        exps[lab] = exps.get(lab, 0) + 1
    return F.coefficient(exps, d=degree) * multiset_factor(exps)


# -- tau recursions ----------------------------------------------------------------

def _R(logZ: CouplingSeries, v: CouplingSeries, X: CouplingSeries) -> CouplingSeries:
    """R X = v (Lambda - 1) X + eps (Lambda + 1) dX/dt^{2,0}."""
    dX = X.derivative(*T20)
    return v * (lam(X) - X) + (lam(dX) + dX).mul_eps(1)


def tau_recursion_residuals(logZ: CouplingSeries, q: int):
    """Residuals of the two recursion relations at level q (>= 1)."""
    dlog = {lab: logZ.derivative(*lab) for lab in ((1, q), (2, q), (1, q - 1), (2, q - 1), T20)}
    v = (lam(dlog[T20]) - dlog[T20]).mul_eps(1)

    def shift(x):
        return lam(x) - x

    r1 = shift(dlog[(1, q)]).scale(q) - _R(logZ, v, dlog[(1, q - 1)]) + shift(dlog[(2, q - 1)]).scale(2)
    r2 = shift(dlog[(2, q)]).scale(q + 1) - _R(logZ, v, dlog[(2, q - 1)])
    return r1, r2


def _valid(bounds, top_eps: int, deg_loss: int = 2):
    limit = bounds.deg_t - deg_loss
    return lambda k: k[0] <= top_eps and tdeg(k[2]) <= limit


def check_tau_recursions(logZ: CouplingSeries, qs=(1, 2), top_eps: int = 4) -> list:
    """Recursion relations on eps-layers <= top_eps (higher layers need F_3)."""
    keep = _valid(logZ.bounds, top_eps)
    out = []
    for q in qs:
        r1, r2 = tau_recursion_residuals(logZ, q)
        for name, r in (("first", r1), ("second", r2)):
            r = r.filter(keep)
            out.append(CheckResult(f"tau-recursion-{name}[q={q}]", f"tau recursion relation ({name})",
                                   not r, summarize(r), {"q": q, "eps_layers": f"<= {top_eps}"}))
    return out


def check_u_from_tau(logZ: CouplingSeries, u: CouplingSeries) -> CheckResult:
    """(Lambda - 1)(1 - Lambda^{-1}) log Z at eps^0 equals u."""
    x = lam(logZ) - logZ
    y = x - lam(x, -1)
    r = (y.eps_layer(0) - u).filter(_valid(logZ.bounds, 0, 0))
    return CheckResult("u-from-tau", "u in terms of the tau function", not r, summarize(r))


# -- genus one loop equation --------------------------------------------------------

class QuadExt:
    """a + b sqrt(d) over the rationals, for a fixed non-square-checked d."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a, self.b, self.d = mpq(a), mpq(b), mpq(d)

    def _lift(self, x):
        return x if isinstance(x, QuadExt) else QuadExt(x, 0, self.d)

    def __add__(self, o):
        o = self._lift(o)
        return QuadExt(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return QuadExt(self.a * o.a + self.b * o.b * self.d, self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def pair(self):
        return (self.a, self.b)

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, sqrt {self.d})"


def _ser_mul(x, y, K):
    out = [mpq(0)] * (K + 1)
    for i, a in enumerate(x):
        if not a:
            continue
        for j in range(K + 1 - i):
            out[i + j] = out[i + j] + a * y[j]
    return out


def _ser_binomial(x, alpha, K):
    """(1 + x)^alpha for x with zero constant term."""
    out = [mpq(0)] * (K + 1)
    out[0] = mpq(1)
    power = list(out)
    coef = mpq(1)
    for n in range(1, K + 1):
        power = _ser_mul(power, x, K)
        coef = coef * (alpha - n + 1) / n
        out = [a + coef * b for a, b in zip(out, power)]
    return out


def _ser_exp(x, K):
    out = [mpq(0)] * (K + 1)
    out[0] = mpq(1)
    power = list(out)
    for n in range(1, K + 1):
        power = [c / n for c in _ser_mul(power, x, K)]
        out = [a + b for a, b in zip(out, power)]
    return out


class LoopSample:
    """Rational jets of v and u (u enters only as e^u = E), plus lambda."""

    def __init__(self, v, E, lam_, vd, ud):
        self.v = mpq(v)
        self.E = mpq(E)
        self.lam = mpq(lam_)
        self.vd = [mpq(x) for x in vd]  # v', v'', ...
        self.ud = [mpq(x) for x in ud]
        if self.E <= 0:
            raise ValueError("E = e^u must be positive")
        if not self.D:
            raise ValueError("D vanishes at the sample")

    @property
    def D(self):
        return (self.v - self.lam) ** 2 - 4 * self.E

    @classmethod
    def random(cls, rng: random.Random, order: int = 4, lam_=None):
        def r():
            return mpq(rng.randint(-9, 9), rng.randint(1, 5))
        while True:
            try:
                s = cls(r(), mpq(rng.randint(1, 9), rng.randint(1, 4)),
                        lam_ if lam_ is not None else r(),
                        [r() for _ in range(order)], [r() for _ in range(order)])
            except ValueError:
                continue
            if s.vd[0] ** 2 != s.ud[0] ** 2 * s.E:
                return s

    def taylor(self, K: int):
        """Taylor coefficients in x of (v - lambda)/D, 1/D, (v - lambda)/sqrt D, 1/sqrt D."""
        vx = [self.v - self.lam] + [self.vd[k - 1] / factorial(k) for k in range(1, K + 1)]
        ux = [mpq(0)] + [self.ud[k - 1] / factorial(k) for k in range(1, K + 1)]
        Ex = [self.E * c for c in _ser_exp(ux, K)]
        Dx = [a - 4 * b for a, b in zip(_ser_mul(vx, vx, K), Ex)]
        D0 = Dx[0]
        x = [mpq(0)] + [c / D0 for c in Dx[1:]]
        invD = [c / D0 for c in _ser_binomial(x, -1, K)]
        isq_rat = _ser_binomial(x, mpq(-1, 2), K)
        # 1/sqrt(D0) = sqrt(D0)/D0
        isq = [QuadExt(0, c / D0, D0) for c in isq_rat]
        return {
            "v/D": _ser_mul(vx, invD, K),
            "1/D": invD,
            "v/sqD": _ser_mul(isq, vx, K),
            "1/sqD": isq,
        }


def f1_partials(s: LoopSample):
    """dF_1/dv^{(r)}, dF_1/du^{(r)} for r = 0, 1 at a sample."""
    vd, ud, E = s.vd[0], s.ud[0], s.E
    delta = vd * vd - ud * ud * E
    dv = [mpq(0), 2 * vd / (24 * delta)]
    du = [-ud * ud * E / (24 * delta) - mpq(1, 24), -2 * ud * E / (24 * delta)]
    return dv, du


def loop_lhs_genus1(s: LoopSample) -> QuadExt:
    """Genus-one layer of the left side of the loop equation (terms linear in F_1)."""
    dv, du = f1_partials(s)
    R = len(dv) - 1
    tay = s.taylor(R + 1)

    def der(name, n):
        return tay[name][n] * factorial(n)

    D0 = s.D
    out = QuadExt(0, 0, D0)
    for r in range(R + 1):
        out = out + dv[r] * der("v/D", r) - 2 * du[r] * der("1/D", r)
    for r in range(1, R + 1):
        for k in range(1, r + 1):
            inner = der("v/sqD", r - k + 1) * dv[r] - der("1/sqD", r - k + 1) * (2 * du[r])
            out = out + der("1/sqD", k - 1) * inner * comb(r, k)
    return out


SOURCES = ("corrected", "printed")


def loop_source(s: LoopSample, source: str = "printed"):
    """D^{-3} e^u (4 e^u -+ (v - lambda)^2).

    "printed" uses + (v - lambda)^2, which no constant prefactor reconciles with
    the genus-one term; "corrected" uses -, i.e. -e^u / D^2.
    """
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}")
    sign = 1 if source == "printed" else -1
    return s.E * (4 * s.E + sign * (s.v - s.lam) ** 2) / s.D ** 3


def loop_residual_genus1(samples, source: str = "printed"):
    """Calibrate the source prefactor on samples[0]; return (prefactor, [(a, b) per sample])."""
    first = loop_lhs_genus1(samples[0])
    if first.b:
        raise ArithmeticError("genus-one loop left side has a sqrt(D) component")
    c = first.a / loop_source(samples[0], source)
    out = []
    for s in samples:
        res = loop_lhs_genus1(s) - c * loop_source(s, source)
        out.append(res.pair())
    return c, out


def loop_samples(n: int = 5, seed: int = 42) -> list:
    """n random samples with pairwise distinct lambda."""
    rng = random.Random(seed)
    samples, lams = [], set()
    while len(samples) < n:
        s = LoopSample.random(rng)
        if s.lam not in lams:
            lams.add(s.lam)
            samples.append(s)
    return samples


def loop_check(n: int = 5, seed: int = 42, source: str = "printed") -> CheckResult:
    samples = loop_samples(n, seed)
    c, res = loop_residual_genus1(samples, source)
    ok = all(a == 0 and b == 0 for a, b in res)
    return CheckResult(f"loop-genus1[{source}]", "genus-one loop equation", ok,
                       "0" if ok else f"{sum(1 for a, b in res if a or b)} nonzero samples",
                       {"prefactor": str(c), "source": source,
                        "samples": [{"lambda": str(s.lam), "rational": str(a), "sqrt_D": str(b)}
                                    for s, (a, b) in zip(samples, res)]})
