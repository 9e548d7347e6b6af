"""Truncated series in the couplings t^{alpha,p} and the divisor variable.

Terms are keyed by ``(e, h, packed)``:

* ``e``  power of eps (may be negative; log tau starts at eps^-2),
* ``h``  power of S = e^{t^{2,0}/2}, so Q = S^2 and Q^d has h = 2d,
* ``packed`` the t-exponents, 8 bits per variable, t^{alpha,p} in slot 2p + alpha - 1.

Truncation is by the total degree in all couplings except t^{1,0}.  The
t^{1,0}-degree of every series we build is bounded by the dimension (charge)
grading, so d/dt^{1,0} never loses information.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

from gmpy2 import mpq

from .config import DEFAULT, TruncationConfig
from .rational import ZERO, to_str

BITS = 8
MASK = (1 << BITS) - 1


def var_index(alpha: int, p: int) -> int:
    if alpha not in (1, 2) or p < 0:
        raise ValueError(f"bad coupling label ({alpha},{p})")
    return 2 * p + alpha - 1


def var_label(i: int) -> tuple[int, int]:
    return (i % 2 + 1, i // 2)


def var_name(i: int) -> str:
    a, p = var_label(i)
    return f"t{a}_{p}"


@lru_cache(maxsize=None)
def unpack(packed: int) -> tuple[tuple[int, int], ...]:
    """(index, exponent) pairs of a packed t-monomial."""
    out = []
    i = 0
    while packed:
        e = packed & MASK
        if e:
            out.append((i, e))
        packed >>= BITS
        i += 1
    return tuple(out)


def pack(exps: dict) -> int:
    out = 0
    for i, e in exps.items():
        if e < 0 or e > MASK:
            raise ValueError(f"exponent {e} out of range")
        out += e << (BITS * i)
    return out


@lru_cache(maxsize=None)
def tdeg(packed: int) -> int:
    """Total degree excluding t^{1,0}."""
    return sum(e for i, e in unpack(packed) if i)


@lru_cache(maxsize=None)
def exponent(packed: int, i: int) -> int:
    return (packed >> (BITS * i)) & MASK


@dataclass(frozen=True)
class CouplingBounds:
    """Truncation window of a CouplingSeries."""

    p_max: int
    deg_t: int
    h_max: int
    eps_max: int

    @classmethod
    def from_config(cls, cfg: TruncationConfig = DEFAULT, extra_h: int = 0, deg_t=None):
        return cls(cfg.p_max, cfg.coupling_degree if deg_t is None else deg_t,
                   2 * cfg.divisor_degree + 1 + extra_h, cfg.eps_order)

    @property
    def nvars(self) -> int:
        return 2 * (self.p_max + 1)

    def widen(self, extra_h: int) -> "CouplingBounds":
        return CouplingBounds(self.p_max, self.deg_t, self.h_max + extra_h, self.eps_max)

    def keeps(self, key) -> bool:
        e, h, p = key
        return h <= self.h_max and e <= self.eps_max and tdeg(p) <= self.deg_t


class CouplingSeries:
    """Immutable truncated series sum c * eps^e * S^h * t^n."""

    __slots__ = ("terms", "bounds")

    def __init__(self, terms: dict | None = None, bounds: CouplingBounds | None = None):
        self.bounds = bounds or CouplingBounds.from_config()
        keep = self.bounds.keeps
        self.terms = {k: mpq(c) for k, c in (terms or {}).items() if c and keep(k)}

    @classmethod
    def _raw(cls, terms, bounds):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.bounds = bounds
        return obj

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, c, bounds: CouplingBounds) -> "CouplingSeries":
        return cls({(0, 0, 0): c}, bounds)

    @classmethod
    def t(cls, alpha: int, p: int, bounds: CouplingBounds) -> "CouplingSeries":
        if p > bounds.p_max:
            raise ValueError(f"t^{{{alpha},{p}}} outside window p_max={bounds.p_max}")
        return cls({(0, 0, 1 << (BITS * var_index(alpha, p))): 1}, bounds)

    @classmethod
    def S(cls, h: int, bounds: CouplingBounds) -> "CouplingSeries":
        return cls({(0, h, 0): 1}, bounds)

    @classmethod
    def Q(cls, d: int, bounds: CouplingBounds) -> "CouplingSeries":
        return cls.S(2 * d, bounds)

    @classmethod
    def eps(cls, e: int, bounds: CouplingBounds) -> "CouplingSeries":
        return cls({(e, 0, 0): 1}, bounds)

    def zero(self) -> "CouplingSeries":
        return CouplingSeries._raw({}, self.bounds)

    def one(self) -> "CouplingSeries":
        return CouplingSeries._raw({(0, 0, 0): mpq(1)}, self.bounds)

    def rebound(self, bounds: CouplingBounds) -> "CouplingSeries":
        return CouplingSeries(self.terms, bounds)

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "CouplingSeries":
        if isinstance(other, CouplingSeries):
            if other.bounds != self.bounds:
                raise ValueError(f"mixed coupling bounds: {self.bounds} vs {other.bounds}")
            return other
        return CouplingSeries.const(other, self.bounds)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            s = t.get(k, ZERO) + c
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        return CouplingSeries._raw(t, self.bounds)

    __radd__ = __add__

    def __neg__(self):
        return CouplingSeries._raw({k: -c for k, c in self.terms.items()}, self.bounds)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "CouplingSeries":
        c = mpq(c)
        if not c:
            return self.zero()
        return CouplingSeries._raw({k: v * c for k, v in self.terms.items()}, self.bounds)

    def _buckets(self):
        out: dict[int, list] = {}
        for (e, h, p), c in self.terms.items():
            out.setdefault(tdeg(p), []).append((e, h, p, c))
        return out

    def __mul__(self, other):
        if not isinstance(other, CouplingSeries):
            return self.scale(other)
        other = self._coerce(other)
        bd = self.bounds
        D, H, E = bd.deg_t, bd.h_max, bd.eps_max
        ob = other._buckets()
        out: dict = {}
        get = out.get
        for d1, lst1 in self._buckets().items():
            for d2, lst2 in ob.items():
                if d1 + d2 > D:
                    continue
                for e1, h1, p1, c1 in lst1:
                    for e2, h2, p2, c2 in lst2:
                        h = h1 + h2
                        e = e1 + e2
                        if h > H or e > E:
                            continue
                        k = (e, h, p1 + p2)
                        out[k] = get(k, ZERO) + c1 * c2
        return CouplingSeries._raw({k: c for k, c in out.items() if c}, bd)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(1 / mpq(other))

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        if isinstance(other, CouplingSeries):
            return self.terms == other.terms
        try:
            return self.terms == self._coerce(other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"CouplingSeries({self.to_str()})"

    # -- transcendental functions of series with nilpotent argument --------
    def _nilpotent_series(self, coeffs: Callable[[int], object]) -> "CouplingSeries":
        if (0, 0, 0) in self.terms:
            raise ValueError("argument must have zero constant term")
        out = self.one().scale(coeffs(0))
        power = self.one()
        cap = self.bounds.deg_t + max(self.bounds.h_max, 0) + self.bounds.eps_max + 64
        for n in range(1, cap):
            power = power * self
            if not power:
                return out
            out = out + power.scale(coeffs(n))
        raise ValueError("series argument is not nilpotent under the truncation")

    def exp(self) -> "CouplingSeries":
        from math import factorial
        return self._nilpotent_series(lambda n: mpq(1, factorial(n)))

    def log1p(self) -> "CouplingSeries":
        """log(1 + self)."""
        return self._nilpotent_series(lambda n: mpq((-1) ** (n + 1), n) if n else 0)

    def log(self) -> "CouplingSeries":
        """log of a series with constant term exactly 1."""
        c = self.terms.get((0, 0, 0), ZERO)
        if c != 1:
            raise ValueError(f"log needs unit constant term, got {c}")
        return (self - 1).log1p()

    def inverse(self) -> "CouplingSeries":
        """1/self for a series whose constant term is a nonzero rational."""
        c = self.terms.get((0, 0, 0), ZERO)
        if not c:
            raise ZeroDivisionError("series has no invertible constant term")
        x = (self / c) - 1
        return x._nilpotent_series(lambda n: (-1) ** n).scale(1 / c)

    # -- derivatives --------------------------------------------------------
    def derivative(self, alpha: int, p: int) -> "CouplingSeries":
        """d/dt^{alpha,p}; for t^{2,0} the S-power contributes h/2."""
        if p > self.bounds.p_max:
            raise ValueError(f"t^{{{alpha},{p}}} outside window p_max={self.bounds.p_max}")
        i = var_index(alpha, p)
        unit = 1 << (BITS * i)
        sh = BITS * i
        out: dict = {}
        for (e, h, q), c in self.terms.items():
            n = (q >> sh) & MASK
            if n:
                k = (e, h, q - unit)
                out[k] = out.get(k, ZERO) + c * n
            if i == 1 and h:
                k = (e, h, q)
                out[k] = out.get(k, ZERO) + c * mpq(h, 2)
        return CouplingSeries._raw({k: c for k, c in out.items() if c}, self.bounds)

    def d(self, *labels) -> "CouplingSeries":
        out = self
        for a, p in labels:
            out = out.derivative(a, p)
        return out

    # -- inspection ----------------------------------------------------------
    def coefficient(self, exps: dict | None = None, d: int = 0, e: int = 0, h=None):
        """Coefficient of eps^e Q^d prod t^{a,p}^n; exps maps (alpha, p) -> n."""
        key = pack({var_index(*lab): n for lab, n in (exps or {}).items()})
        return self.terms.get((e, 2 * d if h is None else h, key), ZERO)

    def eps_layer(self, e: int) -> "CouplingSeries":
        return CouplingSeries._raw({(0, h, p): c for (ee, h, p), c in self.terms.items() if ee == e},
                                   self.bounds)

    def eps_support(self) -> set:
        return {k[0] for k in self.terms}

    def mul_eps(self, k: int) -> "CouplingSeries":
        E = self.bounds.eps_max
        return CouplingSeries._raw({(e + k, h, p): c for (e, h, p), c in self.terms.items() if e + k <= E},
                                   self.bounds)

    def filter(self, pred: Callable) -> "CouplingSeries":
        """Keep terms whose key (e, h, packed) satisfies pred."""
        return CouplingSeries._raw({k: c for k, c in self.terms.items() if pred(k)}, self.bounds)

    def truncate_deg(self, deg_t: int) -> "CouplingSeries":
        return self.filter(lambda k: tdeg(k[2]) <= deg_t)

    def odd_part(self) -> "CouplingSeries":
        """Terms with an odd power of S."""
        return self.filter(lambda k: k[1] % 2)

    def negative_q_part(self) -> "CouplingSeries":
        return self.filter(lambda k: k[1] < 0)

    def max_tdeg(self) -> int:
        return max((tdeg(p) for _, _, p in self.terms), default=-1)

    def items(self) -> Iterable:
        """Deterministically ordered (e, h, {label: exp}, coeff) tuples."""
        for (e, h, p) in sorted(self.terms, key=lambda k: (k[0], k[1], tdeg(k[2]), unpack(k[2]))):
            yield e, h, {var_label(i): n for i, n in unpack(p)}, self.terms[(e, h, p)]

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, h, exps, c in self.items():
            mono = monomial_str(exps, h, e)
            parts.append(to_str(c) if not mono else (mono if c == 1 else f"{to_str(c)}*{mono}"))
        return " + ".join(parts)


def monomial_str(exps: dict, h: int = 0, e: int = 0) -> str:
    """Stable text form, variables sorted, e.g. 't1_0^2*t2_0*Q^1'."""
    parts = [f"t{a}_{p}" + (f"^{n}" if n > 1 else "") for (a, p), n in sorted(exps.items(), key=lambda x: (x[0][1], x[0][0]))]
    if h:
        parts.append(f"Q^{h // 2}" if h % 2 == 0 else f"S^{h}")
    if e:
        parts.append(f"eps^{e}")
    return "*".join(parts)


def coupling_derivative(f: CouplingSeries, var: tuple[int, int]) -> CouplingSeries:
    return f.derivative(*var)
