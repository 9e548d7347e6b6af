"""Virasoro operators on functions of the couplings.

Operators are second-order Weyl-algebra elements in normal form
(all t's to the left of all d/dt's).  A term is keyed by two sorted tuples of
labels ``(alpha, p)`` (the t-factors and the derivative factors) and its power
of eps.  In the unshifted operators each t carries 1/eps and each derivative eps.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from math import comb, factorial

from gmpy2 import mpq

from .report import CheckResult, summarize
from .ring.coupling import CouplingSeries, tdeg, unpack, var_index
from .ring.rational import ZERO, harmonic, to_str

Label = tuple  # (alpha, p)


def _key(ts, ds, e):
    return (tuple(sorted(ts)), tuple(sorted(ds)), e)


@dataclass
class VirasoroOp:
    """Finite sum of c * eps^e * t^A d^B."""

    terms: dict = field(default_factory=dict)

    def add(self, ts, ds, c, e=None) -> None:
        if not c:
            return
        k = _key(ts, ds, len(ds) - len(ts) if e is None else e)
        s = self.terms.get(k, ZERO) + mpq(c)
        if s:
            self.terms[k] = s
        else:
            self.terms.pop(k, None)

    def __add__(self, other: "VirasoroOp") -> "VirasoroOp":
        out = VirasoroOp(dict(self.terms))
        for (ts, ds, e), c in other.terms.items():
            out.add(ts, ds, c, e)
        return out

    def scale(self, c) -> "VirasoroOp":
        return VirasoroOp({k: v * mpq(c) for k, v in self.terms.items() if v * mpq(c)})

    def __sub__(self, other):
        return self + other.scale(-1)

    def __eq__(self, other):
        return isinstance(other, VirasoroOp) and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def max_index(self) -> int:
        return max((p for ts, ds, _ in self.terms for _, p in ts + ds), default=-1)

    def restrict(self, window: int) -> "VirasoroOp":
        """Terms all of whose labels have level <= window."""
        return VirasoroOp({k: c for k, c in self.terms.items()
                           if all(p <= window for _, p in k[0] + k[1])})

    def compose(self, other: "VirasoroOp") -> "VirasoroOp":
        """self o other, brought back to normal order."""
        out = VirasoroOp()
        for (ta, da, ea), ca in self.terms.items():
            for (tb, db, eb), cb in other.terms.items():
                for ts, ds, c in _normal_order(ta, da, tb, db):
                    out.add(ts, ds, ca * cb * c, ea + eb)
        return out

    def commutator(self, other: "VirasoroOp") -> "VirasoroOp":
        return self.compose(other) - other.compose(self)

    def shifted(self) -> "VirasoroOp":
        """Replace t^{1,1} by t^{1,1} - 1 in every coefficient."""
        out = VirasoroOp()
        for (ts, ds, e), c in self.terms.items():
            n = ts.count((1, 1))
            rest = [t for t in ts if t != (1, 1)]
            for j in range(n + 1):
                # (t - 1)^n = sum_j C(n,j) t^j (-1)^{n-j}
                out.add(rest + [(1, 1)] * j, ds, c * comb(n, j) * (-1) ** (n - j), e)
        return out

    def describe(self) -> list:
        """Stable list of {t, d, eps, coeff} records."""
        out = []
        for (ts, ds, e), c in sorted(self.terms.items()):
            out.append({"t": [f"t{a}_{p}" for a, p in ts], "d": [f"d{a}_{p}" for a, p in ds],
                        "eps": e, "coeff": to_str(c)})
        return out


def _normal_order(ta, da, tb, db):
    """t^ta d^da t^tb d^db = sum c t^.. d^.. (multi-index Leibniz)."""
    dcount = Counter(da)
    tcount = Counter(tb)
    common = [x for x in dcount if x in tcount]
    # for each shared variable choose the number k of contractions
    options = [[(x, k) for k in range(min(dcount[x], tcount[x]) + 1)] for x in common]
    combos = [[]]
    for opt in options:
        combos = [c + [o] for c in combos for o in opt]
    out = []
    for combo in combos:
        c = mpq(1)
        dleft = Counter(dcount)
        tleft = Counter(tcount)
        for x, k in combo:
            c *= comb(dcount[x], k) * comb(tcount[x], k) * factorial(k)
            dleft[x] -= k
            tleft[x] -= k
        ts = list(ta) + list(tleft.elements())
        ds = list(dleft.elements()) + list(db)
        out.append((ts, ds, c))
    return out


# -- direct construction -------------------------------------------------------

def alpha_m(m: int, k: int):
    if k == 0:
        return mpq(factorial(m))
    return mpq(factorial(m + k), factorial(k - 1)) * sum((mpq(1, j) for j in range(k, m + k + 1)), ZERO)


def kappa(m: int):
    return harmonic(m + 1)


def virasoro_direct(m: int, window: int) -> VirasoroOp:
    """L_m with every coupling level <= window."""
    if m < -1:
        raise ValueError("L_m is defined here for m >= -1")
    L = VirasoroOp()
    if m == -1:
        for k in range(1, window + 2):
            for a in (1, 2):
                L.add([(a, k)], [(a, k - 1)], 1)
        L.add([(1, 0), (2, 0)], [], 1)
        return L.restrict(window)
    if m == 0:
        for k in range(1, window + 2):
            L.add([(1, k)], [(1, k)], k)
            L.add([(2, k - 1)], [(2, k - 1)], k)
            L.add([(1, k)], [(2, k - 1)], 2)
        L.add([(1, 0), (1, 0)], [], 1)
        return L.restrict(window)
    for k in range(1, m):
        L.add([], [(2, k - 1), (2, m - k - 1)], factorial(k) * factorial(m - k))
    for k in range(1, window + 2):
        c = mpq(factorial(m + k), factorial(k - 1))
        L.add([(1, k)], [(1, m + k)], c)
        L.add([(2, k - 1)], [(2, m + k - 1)], c)
    for k in range(0, window + 1):
        L.add([(1, k)], [(2, m + k - 1)], 2 * alpha_m(m, k))
    return L.restrict(window)


def string_shift_term(m: int) -> VirasoroOp:
    """Right side operator of the constraint L_m Z = (m+1)![d_{1,m+1} + 2 kappa_m d_{2,m}] Z."""
    out = VirasoroOp()
    if m == -1:
        out.add([], [(1, 0)], 1, 0)
        return out
    out.add([], [(1, m + 1)], factorial(m + 1), 0)
    out.add([], [(2, m)], 2 * factorial(m + 1) * kappa(m), 0)
    return out


# -- free-field construction -----------------------------------------------------

class NuPoly:
    """Exact polynomial in the regularization parameter nu (coefficient list)."""

    def __init__(self, coeffs=None):
        c = [mpq(x) for x in (coeffs or [])]
        while c and not c[-1]:
            c.pop()
        self.c = c

    @classmethod
    def linear(cls, a, b):
        """a + b*nu."""
        return cls([a, b])

    def __mul__(self, other: "NuPoly") -> "NuPoly":
        out = [ZERO] * (len(self.c) + len(other.c) - 1) if self.c and other.c else []
        for i, x in enumerate(self.c):
            for j, y in enumerate(other.c):
                out[i + j] += x * y
        return NuPoly(out)

    def __add__(self, other: "NuPoly") -> "NuPoly":
        n = max(len(self.c), len(other.c))
        return NuPoly([(self.c[i] if i < len(self.c) else 0) + (other.c[i] if i < len(other.c) else 0)
                       for i in range(n)])

    def scale(self, s) -> "NuPoly":
        return NuPoly([x * s for x in self.c])

    def at0(self):
        return self.c[0] if self.c else ZERO

    def d_at0(self):
        return self.c[1] if len(self.c) > 1 else ZERO

    def degree(self) -> int:
        return len(self.c) - 1

    @classmethod
    def rising(cls, a, b, n: int) -> "NuPoly":
        """prod_{j=0}^{n-1} (a + b*nu + j); empty product is 1."""
        out = cls([1])
        for j in range(n):
            out = out * cls.linear(a + j, b)
        return out


def _sign(n: int) -> int:
    return -1 if n % 2 else 1


def free_field_coefficients(m: int, window: int):
    """Normal-ordered mode coefficients of L_m^{(nu)} as exact nu-polynomials.

    Returns (a1a2, a2a2): dicts p -> NuPoly for :a_{1,p} a_{2,m-p-1}: and :a_{2,p} a_{2,m-p-2}:.
    Gamma ratios G(x+m+1)/G(x) are written as the rising product of m+1 linear factors.
    """
    if m < -1:
        raise ValueError("free-field coefficients are rational in nu for m < -1; not supported")
    a1a2, a2a2 = {}, {}
    for p in range(-window - 1, window + 1):
        q = m - p - 1
        if -window - 1 <= q <= window:
            poly = NuPoly.rising(-p, 1, m + 1) + NuPoly.rising(-p, -1, m + 1)
            a1a2[p] = poly.scale(mpq(_sign(p + 1), 2))
        q = m - p - 2
        if -window - 1 <= q <= window:
            # Gamma(m - nu - p)/Gamma(-nu - p - 1) = prod_{j=0}^{m} (-nu - p - 1 + j)
            a2a2[p] = NuPoly.rising(-p - 1, -1, m + 1).scale(_sign(p))
    return a1a2, a2a2


def _bose(alpha: int, p: int):
    """Realize a_{alpha,p}: ('d', label, sign) or ('t', label, sign)."""
    if p >= 0:
        return ("d", (alpha, p), 1)
    other = 2 if alpha == 1 else 1
    return ("t", (other, -p - 1), _sign(p + 1))


def virasoro_free_field(m: int, window: int, limit: str = "value") -> VirasoroOp:
    """nu -> 0 limit of the free-field L_m, realized on couplings."""
    a1a2, a2a2 = free_field_coefficients(m, window)
    L = VirasoroOp()

    def emit(x, y, c):
        kx, lx, sx = _bose(*x)
        ky, ly, sy = _bose(*y)
        ts = [l for k, l in ((kx, lx), (ky, ly)) if k == "t"]
        ds = [l for k, l in ((kx, lx), (ky, ly)) if k == "d"]
        L.add(ts, ds, c * sx * sy)

    for p, poly in a1a2.items():
        emit((1, p), (2, m - p - 1), poly.at0())
    for p, poly in a2a2.items():
        emit((2, p), (2, m - p - 2), poly.d_at0())
    return L.restrict(window)


def gram_matrix(nu=0):
    """G(nu) = (1/pi)[[0, sin pi nu], [-sin pi nu, 2 pi cos pi nu]]; exact at integer nu."""
    if isinstance(nu, int):
        return [[mpq(0), mpq(0)], [mpq(0), mpq(2 * (-1) ** nu)]]
    import math
    s = math.sin(math.pi * nu) / math.pi
    return [[0.0, s], [-s, 2 * math.cos(math.pi * nu)]]


# -- checks ----------------------------------------------------------------------

def virasoro_commutator(i: int, j: int, window: int) -> CheckResult:
    """[L_i, L_j] = (i - j) L_{i+j} on the given window.

    Operators are built on a wider window so every term with labels inside the
    target window is produced exactly; the comparison is restricted to it.
    """
    wide = window + max(i, j, 0) + 2
    Li, Lj = virasoro_direct(i, wide), virasoro_direct(j, wide)
    lhs = Li.commutator(Lj).restrict(window)
    rhs = virasoro_direct(i + j, wide).restrict(window).scale(i - j) if i + j >= -1 else VirasoroOp()
    diff = lhs - rhs
    return CheckResult(f"virasoro-comm[{i},{j}]", "Virasoro commutation relations", not diff,
                       f"{len(diff.terms)} differing terms" if diff else "0",
                       {"window": window, "terms_compared": len(lhs.terms)})


def free_field_check(m: int, window: int) -> CheckResult:
    diff = virasoro_free_field(m, window) - virasoro_direct(m, window)
    return CheckResult(f"free-field[{m}]", "free-field limit equals direct operator", not diff,
                       f"{len(diff.terms)} differing terms" if diff else "0")


def apply_virasoro(Lm: VirasoroOp, logZ: CouplingSeries, shifted: bool = False) -> CouplingSeries:
    """(L_m tau)/tau evaluated through log tau only.

    eps^e t^A d_a d_b -> eps^e t^A (d_a d_b F + d_a F d_b F), eps^e t^A d_a -> eps^e t^A d_a F.  Derivatives outside the series window are skipped;
    use ``evaluable`` to mask the affected monomials.
    """
    op = Lm.shifted() if shifted else Lm
    bd = logZ.bounds
    cache: dict = {}

    def d(*labs):
        labs = tuple(sorted(labs))
        if labs not in cache:
            cache[labs] = logZ.d(*labs)
        return cache[labs]

    out = CouplingSeries({}, bd)
    for (ts, ds, e), c in op.terms.items():
        if any(p > bd.p_max for _, p in ts + ds):
            continue
        if len(ds) == 0:
            body = logZ.one()
        elif len(ds) == 1:
            body = d(ds[0])
        elif len(ds) == 2:
            body = d(*ds) + d(ds[0]) * d(ds[1])
        else:
            raise ValueError("only operators of order <= 2 are supported")
        tm = CouplingSeries.const(c, bd)
        for lab in ts:
            tm = tm * CouplingSeries.t(*lab, bd)
        out = out + (tm * body).mul_eps(e)
    return out


def evaluable_filter(Lm: VirasoroOp, bounds, deg_loss: int = 2):
    """Predicate on series keys: monomials the truncated residual determines exactly.

    Excludes monomials above deg_t - deg_loss and those divisible by a coupling
    whose operator term needs a derivative outside the window.  Returns None when
    a derivative-only term is outside the window (nothing evaluable).
    """
    bad_vars = set()
    for (ts, ds, _), c in Lm.terms.items():
        if any(p > bounds.p_max for _, p in ds):
            if not ts:
                return None
            if any(p > bounds.p_max for _, p in ts):
                continue
            bad_vars.update(var_index(*lab) for lab in ts if lab != (1, 1))
            if all(lab == (1, 1) for lab in ts):
                return None
    limit = bounds.deg_t - deg_loss

    def pred(key) -> bool:
        e, h, packed = key
        if tdeg(packed) > limit:
            return False
        return not any(i in bad_vars for i, _ in unpack(packed))

    return pred


def virasoro_residual(m: int, logZ: CouplingSeries, shifted: bool = True, deg_loss: int = 2):
    """Residual of the m-th constraint on log Z, restricted to evaluable monomials.

    Returns (residual, evaluable) where evaluable is the predicate used, or
    (None, None) when the window cannot determine any coefficient.
    """
    bd = logZ.bounds
    wide = virasoro_direct(m, bd.p_max + max(m, 0) + 2)
    op = wide.shifted() if shifted else wide
    pred = evaluable_filter(op, bd, deg_loss)
    if pred is None:
        return None, None
    return apply_virasoro(op, logZ).filter(pred), pred
