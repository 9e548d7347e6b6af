"""Truncated elements of the graded jet ring.

A JetElement is a finite sum of monomials

    coeff * eps^a * e^{b u} * prod_m (v^{(m)})^{i_m} (u^{(m)})^{j_m}

with exact rational coefficients, a >= 0 and b any integer.  Monomials are
keyed by ``(a, b, packed)`` where ``packed`` stores the jet exponents in
8-bit slots of a Python int, so that multiplying monomials is integer addition.
Slot ``2*m`` holds the exponent of v^{(m)}, slot ``2*m + 1`` that of u^{(m)}.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Iterable

from gmpy2 import mpq

from .config import DEFAULT, TruncationConfig
from .rational import ZERO, bernoulli, to_str

BITS = 8
MASK = (1 << BITS) - 1
MAX_JET = 15
NAMES = ("v", "u")


class NotATotalDerivative(ValueError):
    """Raised when an antiderivative is requested for a non-exact element."""


class JetOrderOverflow(ValueError):
    """Raised when an x-derivative would exceed the configured jet order."""


def _slot(var: int, m: int) -> int:
    return 2 * m + var


def _unit(var: int, m: int) -> int:
    if m > MAX_JET:
        raise JetOrderOverflow(f"{NAMES[var]}^({m}) exceeds the hard limit {MAX_JET}")
    return 1 << (BITS * _slot(var, m))


@lru_cache(maxsize=None)
def unpack(packed: int) -> tuple[tuple[int, int, int], ...]:
    """List of (var, m, exponent) for the nonzero slots of a packed monomial."""
    out = []
    s = 0
    while packed:
        e = packed & MASK
        if e:
            out.append((s & 1, s >> 1, e))
        packed >>= BITS
        s += 1
    return tuple(out)


@lru_cache(maxsize=None)
def _order(packed: int) -> int:
    """Highest derivative order present (-1 for no jet variables)."""
    parts = unpack(packed)
    return max((m for _, m, _ in parts), default=-1)


@lru_cache(maxsize=None)
def _grade(packed: int) -> int:
    g = 0
    for var, m, e in unpack(packed):
        g += e * ((1 - m) if var == 0 else -m)
    return g


@lru_cache(maxsize=None)
def _d_monomial(b: int, packed: int) -> tuple[tuple[int, int], ...]:
    """x-derivative of e^{bu} * monomial, as (packed, integer coefficient) pairs."""
    out: dict[int, int] = {}
    for var, m, e in unpack(packed):
        k = packed - _unit(var, m) + _unit(var, m + 1)
        out[k] = out.get(k, 0) + e
    if b:
        k = packed + _unit(1, 1)
        out[k] = out.get(k, 0) + b
    return tuple((k, c) for k, c in out.items() if c)


def _monomial_str(a: int, b: int, packed: int) -> str:
    parts = []
    if a:
        parts.append("eps" if a == 1 else f"eps^{a}")
    for var, m, e in unpack(packed):
        name = NAMES[var] + ("'" * m if m <= 3 else f"^({m})")
        parts.append(name if e == 1 else f"{name}^{e}")
    if b:
        parts.append("e^{u}" if b == 1 else f"e^{{{b}u}}")
    return "*".join(parts)


class JetElement:
    """Immutable truncated element of the jet ring over the rationals."""

    __slots__ = ("terms", "cfg")

    def __init__(self, terms: dict | None = None, cfg: TruncationConfig = DEFAULT):
        self.cfg = cfg
        n = cfg.eps_order
        self.terms = {k: mpq(c) for k, c in (terms or {}).items() if c and k[0] <= n}

    # -- constructors ------------------------------------------------------
    @classmethod
    def _raw(cls, terms: dict, cfg: TruncationConfig) -> "JetElement":
        obj = cls.__new__(cls)
        obj.cfg = cfg
        obj.terms = terms
        return obj

    @classmethod
    def const(cls, c, cfg: TruncationConfig = DEFAULT) -> "JetElement":
        return cls({(0, 0, 0): mpq(c)}, cfg)

    @classmethod
    def var(cls, name: str, m: int = 0, cfg: TruncationConfig = DEFAULT) -> "JetElement":
        var = NAMES.index(name)
        if m > cfg.jet_order:
            raise JetOrderOverflow(f"{name}^({m}) exceeds jet order {cfg.jet_order}")
        return cls({(0, 0, _unit(var, m)): mpq(1)}, cfg)

    @classmethod
    def exp_u(cls, b: int = 1, cfg: TruncationConfig = DEFAULT) -> "JetElement":
        return cls({(0, b, 0): mpq(1)}, cfg)

    @classmethod
    def eps(cls, k: int = 1, cfg: TruncationConfig = DEFAULT) -> "JetElement":
        return cls({(k, 0, 0): mpq(1)}, cfg)

    def zero(self) -> "JetElement":
        return JetElement._raw({}, self.cfg)

    def with_config(self, cfg: TruncationConfig) -> "JetElement":
        """Re-home the element under another config, truncating in eps."""
        return JetElement(self.terms, cfg)

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "JetElement"):
        if other.cfg != self.cfg:
            raise ValueError(f"mixed truncation configs: {self.cfg} vs {other.cfg}")

    def _coerce(self, other) -> "JetElement":
        if isinstance(other, JetElement):
            self._check(other)
            return other
        return JetElement.const(other, self.cfg)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            s = t.get(k, ZERO) + c
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return JetElement._raw(t, self.cfg)

    __radd__ = __add__

    def __neg__(self):
        return JetElement._raw({k: -c for k, c in self.terms.items()}, self.cfg)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "JetElement":
        c = mpq(c)
        if not c:
            return self.zero()
        return JetElement._raw({k: v * c for k, v in self.terms.items()}, self.cfg)

    def __mul__(self, other):
        if not isinstance(other, JetElement):
            return self.scale(other)
        self._check(other)
        n = self.cfg.eps_order
        out: dict = {}
        get = out.get
        for (a1, b1, p1), c1 in self.terms.items():
            room = n - a1
            for (a2, b2, p2), c2 in other.terms.items():
                if a2 > room:
                    continue
                k = (a1 + a2, b1 + b2, p1 + p2)
                out[k] = get(k, ZERO) + c1 * c2
        return JetElement._raw({k: c for k, c in out.items() if c}, self.cfg)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(1 / mpq(other))

    def __pow__(self, n: int):
        out = JetElement.const(1, self.cfg)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, JetElement):
            if isinstance(other, (int, type(ZERO))) or hasattr(other, "denominator"):
                other = JetElement.const(other, self.cfg)
            else:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "JetElement(0)"
        return f"JetElement({self.to_str()})"

    def to_str(self) -> str:
        parts = []
        for k in sorted(self.terms):
            c = self.terms[k]
            mono = _monomial_str(*k)
            if not mono:
                parts.append(to_str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{to_str(c)}*{mono}")
        return " + ".join(parts) if parts else "0"

    # -- eps bookkeeping ---------------------------------------------------
    def truncate(self, eps_order: int) -> "JetElement":
        return JetElement._raw({k: c for k, c in self.terms.items() if k[0] <= eps_order}, self.cfg)

    def eps_layer(self, a: int) -> "JetElement":
        """Coefficient of eps^a, as an eps-free element."""
        return JetElement._raw({(0, b, p): c for (aa, b, p), c in self.terms.items() if aa == a}, self.cfg)

    def mul_eps(self, k: int = 1) -> "JetElement":
        n = self.cfg.eps_order
        return JetElement._raw({(a + k, b, p): c for (a, b, p), c in self.terms.items() if a + k <= n}, self.cfg)

    def div_eps(self, k: int = 1) -> "JetElement":
        """Exact division by eps^k; every term must carry at least eps^k."""
        bad = [key for key in self.terms if key[0] < k]
        if bad:
            raise ValueError(f"not divisible by eps^{k}: {_monomial_str(*bad[0])}")
        return JetElement._raw({(a - k, b, p): c for (a, b, p), c in self.terms.items()}, self.cfg)

    def min_eps(self) -> int:
        return min((k[0] for k in self.terms), default=self.cfg.eps_order + 1)

    # -- structure ---------------------------------------------------------
    def jet_order(self) -> int:
        return max((_order(p) for _, _, p in self.terms), default=-1)

    def grade(self):
        """Common degree of all monomials, or None when inhomogeneous (or zero)."""
        degs = {a + 2 * b + _grade(p) for a, b, p in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def is_homogeneous(self) -> bool:
        return self.grade() is not None or not self.terms

    # -- differential structure -------------------------------------------
    def d(self, n: int = 1) -> "JetElement":
        """Total x-derivative, n times; terms whose eps-power leaves no room are kept."""
        out = self
        for _ in range(n):
            out = out._d_once()
        return out

    def _d_once(self) -> "JetElement":
        M = self.cfg.jet_order
        out: dict = {}
        for (a, b, p), c in self.terms.items():
            for q, k in _d_monomial(b, p):
                if _order(q) > M:
                    var, m, _ = max(unpack(q), key=lambda t: t[1])
                    raise JetOrderOverflow(
                        f"derivative produces {NAMES[var]}^({m}) beyond jet order {M}")
                key = (a, b, q)
                out[key] = out.get(key, ZERO) + c * k
        return JetElement._raw({k: c for k, c in out.items() if c}, self.cfg)

    def _eps_series(self, weights: Iterable, sign: int = 1) -> "JetElement":
        """sum_n w_n (sign*eps*d_x)^n applied to self, pruned so no wasted derivatives."""
        n_max = self.cfg.eps_order
        out = self.zero()
        cur = self
        for n, w in enumerate(weights):
            if not cur.terms or n > n_max:
                break
            if w:
                out = out + cur.mul_eps(n).scale(w * sign ** n)
            cur = cur.truncate(n_max - n - 1)
            if not cur.terms:
                break
            cur = cur._d_once()
        return out

    def shift(self, k: int) -> "JetElement":
        """f(x + k*eps) expanded in eps (the action of Lambda^k on a coefficient)."""
        if k == 0:
            return self
        return self._eps_series((mpq(k) ** n / factorial(n) for n in range(self.cfg.eps_order + 1)))

    def apply_bernoulli(self, sign: int) -> "JetElement":
        """B_+ (sign=+1) or B_- (sign=-1): sum_k B_k/k! (sign*eps*d_x)^k."""
        return self._eps_series((bernoulli(n) / factorial(n) for n in range(self.cfg.eps_order + 1)), sign)

    def partial(self, name: str, m: int = 0) -> "JetElement":
        """Partial derivative w.r.t. v^{(m)} or u^{(m)}; d/du also hits e^{bu}."""
        var = NAMES.index(name)
        unit = _unit(var, m)
        sh = BITS * _slot(var, m)
        out: dict = {}
        for (a, b, p), c in self.terms.items():
            e = (p >> sh) & MASK
            if e:
                key = (a, b, p - unit)
                out[key] = out.get(key, ZERO) + c * e
            if var == 1 and m == 0 and b:
                key = (a, b, p)
                out[key] = out.get(key, ZERO) + c * b
        return JetElement._raw({k: c for k, c in out.items() if c}, self.cfg)

    def euler(self, name: str) -> "JetElement":
        """Variational derivative sum_m (-d_x)^m d/d w^{(m)}."""
        out = self.zero()
        for m in range(self.jet_order() + 1):
            part = self.partial(name, m)
            if part:
                out = out + (part.d(m).scale((-1) ** m))
        return out

    def antiderivative(self) -> "JetElement":
        """F with d_x F = self and no constant term (ladder integration)."""
        F = self.zero()
        rem = self
        while rem.terms:
            n = rem.jet_order()
            if n <= 0:
                raise NotATotalDerivative(f"{rem.to_str()} is not a total x-derivative")
            for var in (0, 1):
                top = _unit(var, n)
                sh = BITS * _slot(var, n)
                part: dict = {}
                for (a, b, p), c in rem.terms.items():
                    tops = [e for vv, m, e in unpack(p) if m == n]
                    if not tops:
                        continue
                    if sum(tops) != 1:
                        raise NotATotalDerivative(
                            f"{rem.to_str()} is nonlinear in its top derivatives")
                    if (p >> sh) & MASK:
                        part[(a, b, p - top)] = c
                if not part:
                    continue
                G = _integrate(part, var, n - 1, self.cfg)
                F = F + G
                rem = rem - G._d_once()
            if rem.jet_order() >= n:
                raise NotATotalDerivative(f"{self.to_str()} is not a total x-derivative")
        return F


def _integrate(part: dict, var: int, m: int, cfg: TruncationConfig) -> JetElement:
    """Integrate a polynomial in the jets w.r.t. w^{(m)} (w = v or u)."""
    out: dict = {}
    unit = _unit(var, m)
    sh = BITS * _slot(var, m)
    for (a, b, p), c in part.items():
        e = (p >> sh) & MASK
        if var == 0 or m > 0 or b == 0:
            key = (a, b, p + unit)
            out[key] = out.get(key, ZERO) + c / (e + 1)
        else:
            # int u^e e^{bu} du = e^{bu} sum_i (-1)^i e!/(e-i)! u^{e-i} / b^{i+1}
            base = p - e * unit
            for i in range(e + 1):
                coef = mpq((-1) ** i * factorial(e), factorial(e - i)) / mpq(b) ** (i + 1)
                key = (a, b, base + (e - i) * unit)
                out[key] = out.get(key, ZERO) + c * coef
    return JetElement._raw({k: c for k, c in out.items() if c}, cfg)


# -- convenience symbols ----------------------------------------------------
def v(m: int = 0, cfg: TruncationConfig = DEFAULT) -> JetElement:
    return JetElement.var("v", m, cfg)


def u(m: int = 0, cfg: TruncationConfig = DEFAULT) -> JetElement:
    return JetElement.var("u", m, cfg)


def exp_u(b: int = 1, cfg: TruncationConfig = DEFAULT) -> JetElement:
    return JetElement.exp_u(b, cfg)


def eps(k: int = 1, cfg: TruncationConfig = DEFAULT) -> JetElement:
    return JetElement.eps(k, cfg)


def const(c, cfg: TruncationConfig = DEFAULT) -> JetElement:
    return JetElement.const(c, cfg)


def jet_arith(a: JetElement, b, op: str) -> JetElement:
    """Dispatch form of the ring operations: op in {"add", "mul", "scalar"}."""
    if op == "add":
        return a + b
    if op == "mul":
        if not isinstance(b, JetElement):
            raise TypeError("mul expects two JetElements; use op='scalar'")
        return a * b
    if op == "scalar":
        return a.scale(b)
    raise ValueError(f"unknown op {op!r}")
