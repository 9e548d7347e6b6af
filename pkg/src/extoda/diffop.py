"""Difference operators sum a_k Lambda^k over the jet ring.

Lambda acts on coefficients by x -> x + eps, expanded as an eps-Taylor series,
so (a Lambda^i)(b Lambda^j) = a S_i(b) Lambda^{i+j} with S_i from JetElement.shift.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial

from gmpy2 import mpq

from .ring.config import DEFAULT, TruncationConfig
from .ring.jet import JetElement
from .ring.rational import harmonic


class DiffOp:
    """Finite-band difference operator with JetElement coefficients."""

    __slots__ = ("coeffs", "cfg")

    def __init__(self, coeffs: dict | None = None, cfg: TruncationConfig = DEFAULT):
        self.cfg = cfg
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if c}
        for c in self.coeffs.values():
            if c.cfg != cfg:
                raise ValueError("coefficient config differs from operator config")

    @classmethod
    def shift_op(cls, k: int = 1, cfg: TruncationConfig = DEFAULT) -> "DiffOp":
        return cls({k: JetElement.const(1, cfg)}, cfg)

    @classmethod
    def lax(cls, cfg: TruncationConfig = DEFAULT) -> "DiffOp":
        """L = Lambda + v + e^u Lambda^{-1}."""
        return cls({1: JetElement.const(1, cfg), 0: JetElement.var("v", 0, cfg),
                    -1: JetElement.exp_u(1, cfg)}, cfg)

    def coeff(self, k: int) -> JetElement:
        c = self.coeffs.get(k)
        return c if c is not None else JetElement._raw({}, self.cfg)

    def band(self) -> tuple[int, int]:
        if not self.coeffs:
            return (0, -1)
        return (min(self.coeffs), max(self.coeffs))

    def __add__(self, other: "DiffOp") -> "DiffOp":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return DiffOp(out, self.cfg)

    def __neg__(self):
        return DiffOp({k: -c for k, c in self.coeffs.items()}, self.cfg)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiffOp":
        if isinstance(c, JetElement):
            return DiffOp({k: c * a for k, a in self.coeffs.items()}, self.cfg)
        return DiffOp({k: a.scale(c) for k, a in self.coeffs.items()}, self.cfg)

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return op_mul(self, other)
        return self.scale(other)

    def __eq__(self, other):
        return isinstance(other, DiffOp) and self.coeffs == other.coeffs

    def __repr__(self):
        return "DiffOp(" + ", ".join(f"L^{k}: {c.to_str()}" for k, c in sorted(self.coeffs.items())) + ")"

    def restrict(self, lo: int, hi: int) -> "DiffOp":
        return DiffOp({k: c for k, c in self.coeffs.items() if lo <= k <= hi}, self.cfg)

    def truncate_eps(self, n: int) -> "DiffOp":
        return DiffOp({k: c.truncate(n) for k, c in self.coeffs.items()}, self.cfg)

    def with_config(self, cfg: TruncationConfig) -> "DiffOp":
        return DiffOp({k: c.with_config(cfg) for k, c in self.coeffs.items()}, cfg)

    def power(self, n: int, band=None) -> "DiffOp":
        out = DiffOp.shift_op(0, self.cfg)
        for _ in range(n):
            out = op_mul(out, self, band)
        return out


def coefficient_of_product(A: DiffOp, B: DiffOp, k: int) -> JetElement:
    """(AB)_k = sum_i A_i S_i(B_{k-i})."""
    out = JetElement._raw({}, A.cfg)
    for i, a in A.coeffs.items():
        b = B.coeffs.get(k - i)
        if b is not None:
            out = out + a * b.shift(i)
    return out


def op_mul(A: DiffOp, B: DiffOp, band: tuple[int, int] | None = None) -> DiffOp:
    """Composition A o B, optionally keeping only Lambda-powers inside band."""
    if A.cfg != B.cfg:
        raise ValueError("mixed truncation configs")
    shifted: dict = {}
    out: dict = {}
    for i, a in A.coeffs.items():
        for j, b in B.coeffs.items():
            k = i + j
            if band is not None and not band[0] <= k <= band[1]:
                continue
            key = (i, j)
            if key not in shifted:
                shifted[key] = b.shift(i)
            term = a * shifted[key]
            out[k] = out[k] + term if k in out else term
    return DiffOp(out, A.cfg)


def commutator(A: DiffOp, B: DiffOp, band=None) -> DiffOp:
    return op_mul(A, B, band) - op_mul(B, A, band)


def positive_part(A: DiffOp) -> DiffOp:
    return DiffOp({k: c for k, c in A.coeffs.items() if k >= 0}, A.cfg)


def residue(A: DiffOp) -> JetElement:
    return A.coeff(0)


# -- Bernoulli operators and inverses of the discrete derivatives -------------

@dataclass(frozen=True)
class BOperator:
    """B_+ (direction=+1) = eps d/(e^{eps d} - 1); B_- (direction=-1) = eps d/(1 - e^{-eps d})."""

    direction: int

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")


B_PLUS = BOperator(1)
B_MINUS = BOperator(-1)


def apply_B(op: BOperator, f: JetElement) -> JetElement:
    return f.apply_bernoulli(op.direction)


def inv_forward(f: JetElement) -> JetElement:
    """(Lambda - 1)^{-1} f = B_+ d^{-1}(f) / eps.  Loses the top eps-order."""
    n = f.cfg.eps_order - 1
    return f.antiderivative().div_eps().apply_bernoulli(1).truncate(n)


def inv_backward(f: JetElement) -> JetElement:
    """(1 - Lambda^{-1})^{-1} f = B_- d^{-1}(f) / eps.  Loses the top eps-order."""
    n = f.cfg.eps_order - 1
    return f.antiderivative().div_eps().apply_bernoulli(-1).truncate(n)


# -- dressing data --------------------------------------------------------------

@dataclass
class DressingData:
    """Coefficients of eps P_x P^{-1} = sum b_j L^{-j} and eps Q_x Q^{-1} = sum c_j L^j."""

    b: dict
    c: dict
    depth: int


def _exp_shift_product(k: int, sign: int, cfg) -> JetElement:
    """prod_{i=1}^k S_i(e^{sign*u})."""
    out = JetElement.const(1, cfg)
    e = JetElement.exp_u(sign, cfg)
    for i in range(1, k + 1):
        out = out * e.shift(i)
    return out


def dressing_log_derivatives(L: DiffOp, J: int) -> DressingData:
    """Solve [sum b_j L^{-j}, L] = eps L_x and [sum c_j L^j, L] = eps L_x triangularly.

    Results are exact up to (but excluding) the top eps-order of L.cfg.
    """
    cfg = L.cfg
    zero = JetElement._raw({}, cfg)
    v = L.coeff(0)
    E = L.coeff(-1)
    Lx = {0: v.d().mul_eps(), -1: E.d().mul_eps()}
    b = {}

    def bb(j):
        return b.get(j, zero) if j >= 1 else zero

    for j in range(1, J + 1):
        k = 1 - j
        rhs = bb(-k) * (v.shift(k) - v)
        prev = bb(-k - 1)
        if prev:
            rhs = rhs + prev * E.shift(k + 1) - E * prev.shift(-1)
        rhs = rhs - Lx.get(k, zero)
        b[j] = inv_forward(rhs)
    c = {0: inv_backward(Lx[-1] * JetElement.exp_u(-1, cfg))}
    for k in range(0, J):
        R = Lx.get(k, zero) - c[k] * (v.shift(k) - v)
        if k >= 1:
            R = R - (c[k - 1] - c[k - 1].shift(1))
        d = inv_backward(R * _exp_shift_product(k, 1, cfg))
        c[k + 1] = (d * _exp_shift_product(k + 1, -1, cfg)).truncate(cfg.eps_order - 1)
    return DressingData(b, c, J)


def log_L_from_dressing(data: DressingData, cfg) -> DiffOp:
    out = {0: data.c[0].scale(mpq(1, 2))}
    for j in range(1, data.depth + 1):
        out[j] = data.c[j].scale(mpq(1, 2))
        out[-j] = data.b[j].scale(mpq(-1, 2))
    return DiffOp(out, cfg)


def log_L(L: DiffOp, J: int) -> DiffOp:
    """log L on the band [-J, J]."""
    return log_L_from_dressing(dressing_log_derivatives(L, J), L.cfg)


def inverse_lower(L: DiffOp, K: int) -> DiffOp:
    """L^{-1} expanded in Lambda^{-1}, coefficients of Lambda^k for -K <= k."""
    cfg = L.cfg
    lead = L.coeff(1)
    if lead != JetElement.const(1, cfg):
        raise ValueError("expected leading coefficient 1 at Lambda^1")
    X = DiffOp({k - 1: c.shift(-1) for k, c in L.coeffs.items() if k < 1}, cfg)
    band = (-K + 1, 0)
    total = DiffOp.shift_op(0, cfg)
    term = total
    for _ in range(K):
        term = -op_mul(term, X, band)
        total = total + term
    return op_mul(total, DiffOp.shift_op(-1, cfg), (-K, 0))


def inverse_upper(L: DiffOp, K: int) -> DiffOp:
    """L^{-1} expanded in Lambda for L = e^u Lambda^{-1}(1 + Y); powers 0..K."""
    cfg = L.cfg
    if L.coeff(-1) != JetElement.exp_u(1, cfg) or L.band()[0] != -1:
        raise ValueError("expected e^u Lambda^{-1} as lowest term")
    emu = JetElement.exp_u(-1, cfg)
    Y = DiffOp({k + 1: (emu * c).shift(1) for k, c in L.coeffs.items() if k > -1}, cfg)
    band = (0, K - 1)
    total = DiffOp.shift_op(0, cfg)
    term = total
    for _ in range(K):
        term = -op_mul(term, Y, band)
        total = total + term
    tail = DiffOp({1: emu.shift(1)}, cfg)
    return op_mul(total, tail, (1, K))


# -- the extended Toda hierarchy ----------------------------------------------

class TodaLax:
    """Cached Lax-side data at a working precision above the requested config.

    All public results are truncated to ``target.eps_order``.
    """

    def __init__(self, target: TruncationConfig = DEFAULT, depth: int = 5, extra_eps: int = 3):
        self.target = target
        self.cfg = target.working(extra_eps)
        self.depth = depth
        self.L = DiffOp.lax(self.cfg)
        self._powers = {0: DiffOp.shift_op(0, self.cfg), 1: self.L}

    def out(self, f: JetElement) -> JetElement:
        return JetElement(f.truncate(self.target.eps_order).terms, self.target)

    def Lpow(self, n: int) -> DiffOp:
        if n not in self._powers:
            self._powers[n] = op_mul(self.Lpow(n - 1), self.L)
        return self._powers[n]

    @cached_property
    def dressing(self) -> DressingData:
        return dressing_log_derivatives(self.L, self.depth)

    @cached_property
    def logL(self) -> DiffOp:
        return log_L_from_dressing(self.dressing, self.cfg)

    def _need(self, index: int):
        if self.depth < index:
            raise ValueError(f"dressing depth {self.depth} too small; log L needed up to Lambda^{index}")

    def generator_coeffs(self, beta: int, q: int, ks) -> dict:
        """Coefficients of A_{beta,q} at Lambda^k, k in ks (all k >= 0)."""
        if beta == 2:
            P = self.Lpow(q + 1)
            f = mpq(1, factorial(q + 1))
            return {k: P.coeff(k).scale(f) for k in ks}
        if beta != 1:
            raise ValueError("beta must be 1 or 2")
        self._need(max(ks, default=0) + q)
        P = self.Lpow(q)
        f = mpq(2, factorial(q))
        H = harmonic(q)
        out = {}
        for k in ks:
            c = coefficient_of_product(P, self.logL, k) - P.coeff(k).scale(H)
            out[k] = c.scale(f).truncate(self.cfg.eps_order - 1)
        return out

    def generator(self, beta: int, q: int) -> DiffOp:
        """A_{beta,q}; for beta = 1 only the band needed by the flows (0..q+1) is returned."""
        ks = range(0, q + 2) if beta == 1 else range(0, q + 2)
        return DiffOp({k: c for k, c in self.generator_coeffs(beta, q, list(ks)).items()}, self.cfg)

    def flow_working(self, beta: int, q: int):
        key = ("flow", beta, q)
        cache = self.__dict__.setdefault("_flows", {})
        if key not in cache:
            A = self.generator_coeffs(beta, q, [0, 1, 2])
            v = self.L.coeff(0)
            E = self.L.coeff(-1)
            vt = (A[1] * E.shift(1) - E * A[1].shift(-1)).div_eps()
            ut = (A[0] - A[0].shift(-1)).div_eps()
            # Lambda^1 coefficient of [A, L] must vanish
            top = (A[0] - A[0].shift(1)) + A[1] * (v.shift(1) - v) + A[2] * E.shift(2) - E * A[2].shift(-1)
            top = top.truncate(self.cfg.eps_order - 1)
            if top:
                raise ArithmeticError(f"[A_{beta},{q}, L] has a Lambda^1 part: {top.to_str()[:200]}")
            cache[key] = (vt, ut)
        return cache[key]

    def flow(self, beta: int, q: int):
        vt, ut = self.flow_working(beta, q)
        return self.out(vt), self.out(ut)

    def density_working(self, alpha: int, p: int) -> JetElement:
        key = ("h", alpha, p)
        cache = self.__dict__.setdefault("_dens", {})
        if key not in cache:
            if p == -1:
                cache[key] = self.L.coeff(0) if alpha == 2 else self.dressing.c[0]
            elif alpha == 2:
                cache[key] = self.Lpow(p + 2).coeff(0).scale(mpq(1, factorial(p + 2)))
            else:
                self._need(p + 1)
                P = self.Lpow(p + 1)
                r = coefficient_of_product(P, self.logL, 0) - P.coeff(0).scale(harmonic(p + 1))
                # log L is only known below the top eps-order
                cache[key] = r.scale(mpq(2, factorial(p + 1))).truncate(self.cfg.eps_order - 1)
        return cache[key]

    def density(self, alpha: int, p: int) -> JetElement:
        return self.out(self.density_working(alpha, p))


def flow_derivative(f: JetElement, flow) -> JetElement:
    """Derivative of a jet element along an evolution (v_t, u_t)."""
    vt, ut = flow
    out = JetElement._raw({}, f.cfg)
    for m in range(f.jet_order() + 1):
        n = f.cfg.eps_order
        pv = f.partial("v", m)
        if pv:
            out = out + pv * vt.truncate(n - pv.min_eps()).d(m)
        pu = f.partial("u", m)
        if pu:
            out = out + pu * ut.truncate(n - pu.min_eps()).d(m)
    return out


def lax_generator(beta: int, q: int, cfg: TruncationConfig = DEFAULT) -> DiffOp:
    return TodaLax(cfg, depth=q + 3).generator(beta, q).with_config(cfg).truncate_eps(cfg.eps_order)


def lax_flow(beta: int, q: int, cfg: TruncationConfig = DEFAULT):
    return TodaLax(cfg, depth=q + 3).flow(beta, q)
