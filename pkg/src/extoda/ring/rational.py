"""Exact rationals (gmpy2.mpq) plus the few number-theoretic helpers we need."""
from __future__ import annotations

from functools import lru_cache
from math import comb, factorial

from gmpy2 import mpq

Rational = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)


def Q(x, y=None) -> Rational:
    """Coerce ints, Fractions, mpq or "p/q" strings to mpq."""
    if y is not None:
        return mpq(x, y)
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def to_str(x) -> str:
    """Serialize as "p/q" (or "p" for integers)."""
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Rational:
    """Bernoulli numbers with B_1 = -1/2, i.e. x/(e^x - 1) = sum B_n x^n / n!."""
    if n == 0:
        return ONE
    acc = ZERO
    for k in range(n):
        acc += comb(n + 1, k) * bernoulli(k)
    return -acc / (n + 1)


@lru_cache(maxsize=None)
def harmonic(n: int) -> Rational:
    """H_n = 1 + 1/2 + ... + 1/n, with H_0 = 0."""
    return sum((mpq(1, j) for j in range(1, n + 1)), ZERO)


@lru_cache(maxsize=None)
def inv_factorial(n: int) -> Rational:
    return mpq(1, factorial(n))
