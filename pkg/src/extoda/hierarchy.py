"""Hamiltonian densities, two-point functions Omega and the bihamiltonian structure."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

from gmpy2 import mpq

from .diffop import TodaLax, coefficient_of_product, flow_derivative
from .report import CheckResult, summarize
from .ring.config import DEFAULT, TruncationConfig
from .ring.jet import JetElement
from .ring.rational import harmonic

MU = {1: mpq(-1, 2), 2: mpq(1, 2)}


def R(gamma: int, beta: int) -> int:
    """Recursion matrix entry R^gamma_beta."""
    return 2 if (gamma == 2 and beta == 1) else 0


@dataclass
class HamiltonianDensity:
    alpha: int
    p: int
    value: JetElement

    @property
    def expected_degree(self):
        return self.p + MU[self.alpha] + mpq(3, 2)


@dataclass
class OmegaTable:
    """Omega_{alpha,p;beta,q} for p, q <= pmax."""

    pmax: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key) -> JetElement:
        return self.entries[key]

    def keys(self):
        return self.entries.keys()

    def as_json(self) -> dict:
        return {f"{a},{p};{b},{q}": val.to_str() for (a, p, b, q), val in sorted(self.entries.items())}


@dataclass(frozen=True)
class PoissonOp:
    """which = 1 for the first Hamiltonian operator, 2 for the second."""

    which: int


U1 = PoissonOp(1)
U2 = PoissonOp(2)


def poisson_apply(P: PoissonOp, fv: JetElement, fu: JetElement):
    """Apply U_P to the covector (f^v, f^u); returns the (v, u) components.

    Loses the top eps-order of the config (one division by eps).
    """
    cfg = fv.cfg
    if P.which == 1:
        return ((fu.shift(1) - fu).div_eps(), (fv - fv.shift(-1)).div_eps())
    if P.which != 2:
        raise ValueError("Poisson operator must be 1 or 2")
    v = JetElement.var("v", 0, cfg)
    E = JetElement.exp_u(1, cfg)
    first = (E * fv).shift(1) - E * fv.shift(-1) + v * (fu.shift(1) - fu)
    vfv = v * fv
    second = vfv - vfv.shift(-1) + fu.shift(1) - fu.shift(-1)
    return first.div_eps(), second.div_eps()


def variational_derivative(h: JetElement):
    """(delta/delta v, delta/delta u) of the local functional with density h."""
    return h.euler("v"), h.euler("u")


class Hierarchy:
    """Lazily built densities, flows and Omega table of the extended Toda hierarchy."""

    def __init__(self, cfg: TruncationConfig = DEFAULT, qmax: int = 2, extra_eps: int = 3):
        self.cfg = cfg
        self.qmax = qmax
        self.lax = TodaLax(cfg, depth=qmax + 4, extra_eps=extra_eps)
        self.wcfg = self.lax.cfg
        self._omega: dict = {}
        self._vd: dict = {}

    def out(self, f: JetElement) -> JetElement:
        return self.lax.out(f)

    # densities and flows
    def density(self, alpha: int, p: int) -> HamiltonianDensity:
        if p < -1:
            raise ValueError("density level must be >= -1")
        return HamiltonianDensity(alpha, p, self.lax.density(alpha, p))

    def flow(self, beta: int, q: int):
        return self.lax.flow(beta, q)

    # Omega
    def omega_working(self, alpha: int, p: int, beta: int, q: int) -> JetElement:
        if p < 0 or q < 0:
            return JetElement._raw({}, self.wcfg)
        key = (alpha, p, beta, q)
        if key not in self._omega:
            h = self.lax.density_working(alpha, p - 1)
            rhs = flow_derivative(h, self.lax.flow_working(beta, q)).truncate(self.wcfg.eps_order - 1)
            # (Lambda - 1)/eps = d_x o (unit series), inverted by B_+ o d_x^{-1}
            self._omega[key] = rhs.antiderivative().apply_bernoulli(1)
        return self._omega[key]

    def omega(self, alpha: int, p: int, beta: int, q: int) -> JetElement:
        return self.out(self.omega_working(alpha, p, beta, q))

    def omega_table(self, pmax: int | None = None) -> OmegaTable:
        pmax = self.qmax if pmax is None else pmax
        t = OmegaTable(pmax)
        for a in (1, 2):
            for p in range(pmax + 1):
                for b in (1, 2):
                    for q in range(pmax + 1):
                        t.entries[(a, p, b, q)] = self.omega(a, p, b, q)
        return t

    def omega_rhs_commutator(self, alpha: int, p: int, beta: int, q: int) -> JetElement:
        """eps^{-1} res[A_{beta,q}, M] with M the operator whose residue is h_{alpha,p-1}.

        Finite only when alpha = 2 or beta = 2; the (1,1) case is an infinite sum.
        """
        if alpha == 1 and beta == 1:
            raise ValueError("the (1,.;1,.) commutator residue is an infinite sum")
        lax = self.lax
        if alpha == 2:
            M = lax.Lpow(p + 1)
            Mc = {k: M.coeff(k).scale(mpq(1, factorial(p + 1))) for k in range(-p - 1, p + 2)}
        else:
            lax._need(p + q + 1)
            P = lax.Lpow(p)
            f = mpq(2, factorial(p))
            Mc = {}
            for k in range(-q - 1, 1):
                c = coefficient_of_product(P, lax.logL, k) - P.coeff(k).scale(harmonic(p))
                Mc[k] = c.scale(f)
        if beta == 2:
            A = lax.generator_coeffs(2, q, list(range(0, q + 2)))
        else:
            A = lax.generator_coeffs(1, q, list(range(0, p + 2)))
        out = JetElement._raw({}, self.wcfg)
        for i, a in A.items():
            m = Mc.get(-i)
            if m is None:
                continue
            out = out + a * m.shift(i) - m * a.shift(-i)
        return out.div_eps()

    # variational derivatives and Poisson structure
    def delta_H(self, beta: int, q: int):
        key = (beta, q)
        if key not in self._vd:
            self._vd[key] = variational_derivative(self.lax.density_working(beta, q))
        return self._vd[key]

    def check_omega_identities(self, pmax: int = 2, qmax: int = 2) -> list:
        """Both Omega identities (v-derivative and Euler field) on the index box."""
        out = []
        n = self.cfg.eps_order
        cfg = self.wcfg
        one = JetElement.const(1, cfg)
        for a in (1, 2):
            for p in range(pmax + 1):
                for b in (1, 2):
                    for q in range(qmax + 1):
                        W = self.omega_working(a, p, b, q)
                        lhs = W.partial("v")
                        rhs = self.omega_working(a, p - 1, b, q) + self.omega_working(a, p, b, q - 1)
                        if a != b and p == 0 and q == 0:
                            rhs = rhs + one
                        res = (lhs - rhs).truncate(n)
                        out.append(CheckResult(f"omega-dv[{a},{p};{b},{q}]", "v-derivative of Omega",
                                               not res, summarize(res)))
                        euler = JetElement._raw({}, cfg)
                        for m in range(W.jet_order() + 1):
                            pv = W.partial("v", m)
                            if pv:
                                euler = euler + JetElement.var("v", m, cfg) * pv
                        euler = euler + W.partial("u").scale(2)
                        rhs = W.scale(p + q + 1 + MU[a] + MU[b])
                        if a == 1:
                            rhs = rhs + self.omega_working(2, p - 1, b, q).scale(2)
                        if b == 1:
                            rhs = rhs + self.omega_working(a, p, 2, q - 1).scale(2)
                        if a == 1 and b == 1 and p == 0 and q == 0:
                            rhs = rhs + one.scale(2)
                        res = (euler - rhs).truncate(n)
                        out.append(CheckResult(f"omega-euler[{a},{p};{b},{q}]", "Euler-field identity of Omega",
                                               not res, summarize(res)))
        return out

    def check_tau_symmetry(self, pmax: int = 2) -> list:
        out = []
        for a in (1, 2):
            for p in range(pmax + 1):
                for b in (1, 2):
                    for q in range(pmax + 1):
                        if (a, p) >= (b, q):
                            continue
                        res = self.omega(a, p, b, q) - self.omega(b, q, a, p)
                        out.append(CheckResult(f"tau-symmetry[{a},{p};{b},{q}]", "tau symmetry of Omega",
                                               not res, summarize(res)))
        return out

    def check_bihamiltonian_recursion(self, beta: int, q: int) -> CheckResult:
        n = self.cfg.eps_order
        lhs = poisson_apply(U2, *self.delta_H(beta, q - 1))
        r1 = poisson_apply(U1, *self.delta_H(beta, q))
        c = q + MU[beta] + mpq(1, 2)
        rhs = [x.scale(c) for x in r1]
        for g in (1, 2):
            if R(g, beta):
                extra = poisson_apply(U1, *self.delta_H(g, q - 1))
                rhs = [x + y.scale(R(g, beta)) for x, y in zip(rhs, extra)]
        res = [(x - y).truncate(n) for x, y in zip(lhs, rhs)]
        ok = not res[0] and not res[1]
        return CheckResult(f"bihamiltonian[{beta},{q}]", "bihamiltonian recursion", ok,
                           "; ".join(summarize(x) for x in res))


def hamiltonian_density(alpha: int, p: int, cfg: TruncationConfig = DEFAULT) -> HamiltonianDensity:
    return Hierarchy(cfg, qmax=max(p, 0)).density(alpha, p)


def omega(alpha: int, p: int, beta: int, q: int, cfg: TruncationConfig = DEFAULT) -> JetElement:
    return Hierarchy(cfg, qmax=max(p, q)).omega(alpha, p, beta, q)
