"""Reference genus-zero expansion of the CP^1 potential, transcribed as printed.

Rows are ``degree ; prefactor ; monomial ; denominator`` with t_p = t^{1,p},
s_p = t^{2,p}.  The coefficient of the monomial in F_0 is prefactor/denominator.
"""
from __future__ import annotations

from math import factorial

from .ring.rational import Q

_ROWS = """
0 ; 1 ; t0^2 s0 ; 2!
0 ; 1 ; t0^2 t1 s0 ; 2!
0 ; 1 ; t0^3 s1 ; 3!
0 ; 1 ; t0^3 t2 s0 ; 3!
0 ; 1 ; t0^4 s2 ; 4!
0 ; 1 ; t0^2 t1^2 s0 ; 2!
0 ; 2 ; t0^3 t1 s1 ; 3!
0 ; 1 ; t0^4 t3 s0 ; 4!
0 ; 1 ; t0^5 s3 ; 5!
0 ; 3 ; t0^3 t1 t2 s0 ; 3!
0 ; 3 ; t0^4 t2 s1 ; 4!
0 ; 3 ; t0^4 t1 s2 ; 4!
1 ; 1 ; 1 ; 1
1 ; -2 ; t1 ; 1
1 ; 2 ; t1^2 ; 2!
1 ; -2 ; t0 t2 ; 1
1 ; 1 ; t1 s0 ; 1
1 ; 1 ; t0 s1 ; 1
1 ; -2 ; t0^2 t3 ; 2!
1 ; -2 ; t1^2 s0 ; 2!
1 ; 1 ; t0 t2 s0 ; 1
1 ; 1 ; t0^2 s2 ; 2!
1 ; -2 ; t0^2 t1 t3 ; 2!
1 ; -1 ; t0 t1 t2 s0 ; 1
1 ; 1 ; t0^2 t3 s0 ; 2!
1 ; 2 ; t1^2 s0^2 ; (2!)^2
1 ; -1 ; t0^2 t2 s1 ; 2!
1 ; 1 ; t0 t1 s0 s1 ; 1
1 ; 1 ; t0^2 s1^2 ; 2!
1 ; 1 ; t0^2 t1 s2 ; 2!
1 ; 1 ; t0^3 s3 ; 3!
2 ; -3/4 ; t3 ; 1
2 ; 1/4 ; s2 ; 1
2 ; 5/4 ; t2^2 ; 2!
2 ; 3/4 ; t1 t3 ; 1
2 ; 1/4 ; t3 s0 ; 1
2 ; -3/4 ; t2 s1 ; 1
2 ; 1/2 ; s1^2 ; 2!
2 ; -1/4 ; t1 s2 ; 1
2 ; 1/4 ; t0 s3 ; 1
2 ; 2 ; t0 t2 t3 ; 1
2 ; -3/2 ; t2^2 s0 ; 2!
2 ; -3/2 ; t1 t3 s0 ; 1
2 ; -2 ; t0 t3 s1 ; 1
2 ; 1/2 ; t2 s0 s1 ; 1
2 ; -1 ; t0 t2 s2 ; 1
2 ; 1/2 ; t1 s0 s2 ; 1
2 ; 1 ; t0 s1 s2 ; 1
2 ; 2 ; t0 t1 t2 t3 ; 1
2 ; 4 ; t0^2 t3^2 ; (2!)^2
2 ; 1 ; t1 t2^2 s0 ; 2!
2 ; -3 ; t0 t2 t3 s0 ; 1
2 ; 1 ; t2^2 s0^2 ; (2!)^2
2 ; 1 ; t1 t3 s0^2 ; 2!
2 ; 1 ; t0 t2^2 s1 ; 2!
2 ; -2 ; t0 t1 t3 s1 ; 1
2 ; -1 ; t1 t2 s0 s1 ; 1
2 ; 1 ; t0 t3 s0 s1 ; 1
2 ; -2 ; t0 t2 s1^2 ; 2!
2 ; 1 ; t1 s0 s1^2 ; 2!
2 ; 3 ; t0 s1^3 ; 3!
2 ; -1 ; t0 t1 t2 s2 ; 1
2 ; -3 ; t0^2 t3 s2 ; 2!
2 ; 1 ; t0 t2 s0 s2 ; 1
2 ; 1 ; t0 t1 s1 s2 ; 1
2 ; 2 ; t0^2 s2^2 ; (2!)^2
2 ; -1 ; t0^2 t2 s3 ; 2!
2 ; 1 ; t0 t1 s0 s3 ; 2
2 ; 3/2 ; t0^2 s1 s3 ; 2!
3 ; 50/27 ; t3^2 ; 2!
3 ; -7/9 ; t3 s2 ; 1
3 ; 1/3 ; s2^2 ; 2!
3 ; -2/9 ; t2 s3 ; 1
3 ; 1/6 ; s1 s3 ; 1
3 ; -2 ; t2^2 t3 ; 2!
3 ; -14/9 ; t3^2 s0 ; 2!
3 ; 2 ; t2 t3 s1 ; 1
3 ; -2 ; t3 s1^2 ; 2!
3 ; 1 ; t2^2 s2 ; 2!
3 ; 1/3 ; t3 s0 s2 ; 1
3 ; -1 ; t2 s1 s2 ; 1
3 ; 1 ; s1^2 s2 ; 2!
3 ; -1 ; t0 t3 s3 ; 1
3 ; 1/6 ; t2 s0 s3 ; 1
3 ; 1/2 ; t0 s2 s3 ; 1
3 ; -4 ; t0 t2 t3^2 ; 2!
3 ; 5 ; t2^2 t3 s0 ; 2!
3 ; 4 ; t1 t3^2 s0 ; 2!
3 ; 2/3 ; t3^2 s0^2 ; (2!)^2
3 ; 8 ; t0 t3^2 s1 ; 2!
3 ; -3 ; t2 t3 s0 s1 ; 1
3 ; 1 ; t3 s0 s1^2 ; 2!
3 ; 3 ; t0 t2 t3 s2 ; 1
3 ; -2 ; t2^2 s0 s2 ; 2!
3 ; -2 ; t1 t3 s0 s2 ; 1
3 ; -5 ; t0 t3 s1 s2 ; 1
3 ; 1 ; t2 s0 s1 s2 ; 1
3 ; -2 ; t0 t2 s2^2 ; 2!
3 ; 1 ; t1 s0 s2^2 ; 2!
3 ; 3 ; t0 s1 s2^2 ; 2!
3 ; 1 ; t0 t2^2 s3 ; 2!
3 ; -1 ; t0 t1 t3 s3 ; 1
3 ; -1/2 ; t1 t2 s0 s3 ; 1
3 ; 1/2 ; t0 t3 s0 s3 ; 1
3 ; -3/2 ; t0 t2 s1 s3 ; 1
3 ; 1/2 ; t1 s0 s1 s3 ; 1
3 ; 2 ; t0 s1^2 s3 ; 2!
3 ; 1/2 ; t0 t1 s2 s3 ; 1
3 ; 1 ; t0^2 s3^2 ; (2!)^2
"""

_DENOMS = {"1": 1, "2": 2, "2!": 2, "3!": 6, "4!": 24, "5!": 120, "(2!)^2": 4}


def parse_monomial(text: str) -> dict:
    """'t0^2 s1' -> {(1, 0): 2, (2, 1): 1}; '1' -> {}."""
    out: dict = {}
    for tok in text.split():
        if tok == "1":
            continue
        name, _, exp = tok.partition("^")
        alpha = 1 if name[0] == "t" else 2
        p = int(name[1:])
        out[(alpha, p)] = out.get((alpha, p), 0) + (int(exp) if exp else 1)
    return out


def f0_reference():
    """List of (degree, {label: exponent}, coefficient in F_0, displayed prefactor, denominator)."""
    rows = []
    for line in _ROWS.strip().splitlines():
        d, pre, mono, den = (x.strip() for x in line.split(";"))
        if den not in _DENOMS:
            raise ValueError(f"unknown denominator {den}")
        rows.append((int(d), parse_monomial(mono), Q(pre) / _DENOMS[den], pre, den))
    return rows


def multiset_factor(exps: dict) -> int:
    out = 1
    for n in exps.values():
        out *= factorial(n)
    return out
