"""The acceptance checks, one function per criterion, over a shared cached context."""
from __future__ import annotations

from functools import cached_property

from gmpy2 import mpq

from .diffop import B_MINUS, B_PLUS, apply_B, lax_flow
from .genus0 import OmegaZeroTable, theta
from .hierarchy import Hierarchy
from .highergenus import GenusExpansion, check_tau_recursions, check_u_from_tau, loop_check
from .report import CheckResult, Report, summarize
from .ring.config import DEFAULT, TruncationConfig
from .ring.coupling import CouplingSeries, tdeg
from .ring.jet import JetElement
from .tables import f0_reference
from .virasoro import free_field_check, virasoro_commutator, virasoro_residual

SCHEMA_VERSION = 1


def _same(a: JetElement, b: JetElement) -> JetElement:
    """a - b for elements that may live in different configs."""
    return JetElement._raw({k: c for k, c in _diff_terms(a.terms, b.terms).items()}, a.cfg)


def _diff_terms(x: dict, y: dict) -> dict:
    out = dict(x)
    for k, c in y.items():
        s = out.get(k, 0) - c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


class Context:
    """Lazily built objects shared by the criteria."""

    def __init__(self, cfg: TruncationConfig = DEFAULT, flow_eps: int = 4, loop_samples: int = 5,
                 seed: int = 42, imax: int = 3):
        self.cfg = cfg
        self.flow_cfg = cfg.with_(eps_order=min(cfg.eps_order, flow_eps))
        self.loop_samples = loop_samples
        self.seed = seed
        self.imax = imax

    @cached_property
    def hierarchy(self) -> Hierarchy:
        return Hierarchy(self.flow_cfg, qmax=2)

    @cached_property
    def casimir_hierarchy(self) -> Hierarchy:
        return Hierarchy(self.cfg, qmax=0)

    @cached_property
    def genus(self) -> GenusExpansion:
        return GenusExpansion(self.cfg)


def criterion_1(ctx: Context) -> list:
    """F_0 table reproduction."""
    F0 = ctx.genus.F0
    bad = []
    rows = f0_reference()
    for d, exps, coeff, pre, den in rows:
        got = F0.coefficient(exps, d=d)
        if got != coeff:
            bad.append(f"Q^{d} {exps}: {got} != {pre}/{den}")
    return [CheckResult("f0-table", "genus-zero potential table", not bad,
                        "; ".join(bad[:5]) if bad else "0", {"rows": len(rows), "mismatches": len(bad)})]


def criterion_2(ctx: Context) -> list:
    """Casimir densities."""
    H = ctx.casimir_hierarchy
    cfg = ctx.cfg
    v = JetElement.var("v", 0, cfg)
    u = JetElement.var("u", 0, cfg)
    r2 = H.density(2, -1).value - v
    r1 = H.density(1, -1).value - apply_B(B_MINUS, u)
    return [CheckResult("casimir[2]", "Casimir density h_{2,-1} = v", not r2, summarize(r2),
                        {"eps_order": cfg.eps_order}),
            CheckResult("casimir[1]", "Casimir density h_{1,-1} = B_- u", not r1, summarize(r1),
                        {"eps_order": cfg.eps_order})]


def expected_toda_flow(cfg: TruncationConfig):
    """Toda lattice equations in interpolated form."""
    w = cfg.working(1)
    E = JetElement.exp_u(1, w)
    v = JetElement.var("v", 0, w)
    vt = (E.shift(1) - E).div_eps()
    ut = (v - v.shift(-1)).div_eps()
    return vt.truncate(cfg.eps_order), ut.truncate(cfg.eps_order)


def expected_t11_flow(cfg: TruncationConfig):
    """Closed form of the (1,1) flow in terms of B_+ and B_-."""
    w = cfg.working(1)
    E = JetElement.exp_u(1, w)
    v = JetElement.var("v", 0, w)
    u = JetElement.var("u", 0, w)
    bu = apply_B(B_MINUS, u) - 2
    bv = apply_B(B_PLUS, v)
    vt = v * v.d(1) + ((E * bu).shift(1) - E * bu.shift(-1)).div_eps()
    ut = (v * bu - (v * bu).shift(-1) + bv.shift(1) - bv.shift(-1)).div_eps()
    return vt.truncate(cfg.eps_order), ut.truncate(cfg.eps_order)


def _flow_check(cid, anchor, got, want, cfg):
    res = [_same(g, JetElement(w.terms, g.cfg)) for g, w in zip(got, want)]
    return CheckResult(cid, anchor, not res[0] and not res[1],
                       "; ".join(summarize(r) for r in res), {"eps_order": cfg.eps_order})


def criterion_3(ctx: Context) -> list:
    """Toda and (1,1) flows against their closed forms."""
    cfg = ctx.flow_cfg
    return [
        _flow_check("flow[2,0]", "Toda lattice equations", lax_flow(2, 0, cfg), expected_toda_flow(cfg), cfg),
        _flow_check("flow[1,1]", "first nontrivial logarithmic flow", lax_flow(1, 1, cfg),
                    expected_t11_flow(cfg), cfg),
    ]


def criterion_4(ctx: Context) -> list:
    """Tau symmetry and the two Omega identities for p, q <= 2."""
    H = ctx.hierarchy
    return H.check_tau_symmetry(2) + H.check_omega_identities(2, 2)


def criterion_5(ctx: Context) -> list:
    """Virasoro commutation relations and the free-field limit."""
    out = []
    for i in range(-1, ctx.imax + 1):
        for j in range(-1, ctx.imax + 1):
            out.append(virasoro_commutator(i, j, ctx.cfg.p_max + 1))
    for m in range(-1, ctx.imax + 1):
        out.append(free_field_check(m, ctx.cfg.p_max + 1))
    return out


def criterion_6(ctx: Context) -> list:
    H = ctx.hierarchy
    return [H.check_bihamiltonian_recursion(b, q) for b in (1, 2) for q in range(0, 3)]


def _virasoro_checks(logZ: CouplingSeries, ms, tag: str, layers=None) -> list:
    out = []
    for m in ms:
        r, pred = virasoro_residual(m, logZ)
        if r is None:
            out.append(CheckResult(f"{tag}[L_{m}]", "Virasoro constraint", False,
                                   "no evaluable monomials in this window"))
            continue
        if layers is not None:
            r = r.filter(lambda k: k[0] in layers)
        n = sum(1 for k in logZ.terms if pred(k))
        out.append(CheckResult(f"{tag}[L_{m}]", "Virasoro constraint", not r, summarize(r),
                               {"evaluable_logZ_terms": n, "eps_layers": sorted(logZ.eps_support())}))
    return out


def criterion_7(ctx: Context) -> list:
    return _virasoro_checks(ctx.genus.logZ, (-1, 0, 1, 2), "virasoro-logZ")


def criterion_8(ctx: Context) -> list:
    F0 = ctx.genus.F0.mul_eps(-2)
    return (_virasoro_checks(F0, (-1,), "string-F0", layers={-2})
            + _virasoro_checks(ctx.genus.logZ, (-1,), "string-logZ"))


def criterion_9(ctx: Context) -> list:
    g = ctx.genus
    return check_tau_recursions(g.logZ, (1, 2)) + [check_u_from_tau(g.logZ, g.g0.fields.u)]


def criterion_10(ctx: Context) -> list:
    """The source term as printed, plus the sign-corrected source as a diagnostic."""
    return [loop_check(ctx.loop_samples, ctx.seed, "printed"),
            loop_check(ctx.loop_samples, ctx.seed, "corrected")]


def criterion_11(ctx: Context) -> list:
    c = ctx.genus.F1.coefficient({(2, 0): 1})
    return [CheckResult("f1-t20", "genus-one coefficient of t^{2,0}", c == mpq(-1, 24), str(c))]


def criterion_12(ctx: Context) -> list:
    """Dispersionless limits: theta vs densities, Omega^0 vs Omega, F_0 second derivatives."""
    H = ctx.hierarchy
    out = []
    for a in (1, 2):
        for p in range(0, 3):
            h0 = H.density(a, p).value.eps_layer(0)
            r = _diff_terms(h0.terms, theta(a, p + 1).terms)
            out.append(CheckResult(f"theta-density[{a},{p}]", "theta series vs Hamiltonian densities",
                                   not r, f"{len(r)} terms" if r else "0"))
    om0 = OmegaZeroTable(2)
    for a in (1, 2):
        for p in range(3):
            for b in (1, 2):
                for q in range(3):
                    r = _diff_terms(H.omega(a, p, b, q).eps_layer(0).terms, om0(a, p, b, q).terms)
                    out.append(CheckResult(f"omega0[{a},{p};{b},{q}]", "generating series of Omega^0",
                                           not r, f"{len(r)} terms" if r else "0"))
    g = ctx.genus
    F0, f = g.F0, g.g0.fields
    D = F0.bounds.deg_t
    x = (1, 0)
    r_v = (F0.d(x, (2, 0)) - f.v).filter(lambda k: tdeg(k[2]) <= D - 1)
    r_u = (F0.d(x, x) - f.u).filter(lambda k: tdeg(k[2]) <= D)
    out.append(CheckResult("f0-v", "v_0 from the genus-zero tau function", not r_v, summarize(r_v)))
    out.append(CheckResult("f0-u", "u_0 from the genus-zero tau function", not r_u, summarize(r_u)))
    sub = g.g0.substituter
    bad = 0
    for a, p in ((1, 0), (2, 0), (1, 1), (2, 1)):
        for b, q in ((1, 0), (2, 0), (1, 1), (2, 1)):
            r = (F0.d((a, p), (b, q)) - sub(om0(a, p, b, q))).filter(lambda k: tdeg(k[2]) <= D - 2)
            bad += bool(r)
    out.append(CheckResult("f0-omega0", "second derivatives of F_0 are Omega^0", not bad,
                           f"{bad} mismatching pairs" if bad else "0"))
    return out


CRITERIA = {
    1: ("F0 table reproduction", criterion_1),
    2: ("Casimir densities", criterion_2),
    3: ("Toda and (1,1) flows", criterion_3),
    4: ("tau symmetry and Omega identities", criterion_4),
    5: ("Virasoro algebra and free-field limit", criterion_5),
    6: ("bihamiltonian recursion", criterion_6),
    7: ("Virasoro constraints on log Z", criterion_7),
    8: ("string equation", criterion_8),
    9: ("tau recursion relations", criterion_9),
    10: ("genus-one loop equation", criterion_10),
    11: ("genus-one t^{2,0} coefficient", criterion_11),
    12: ("dispersionless consistency", criterion_12),
}


def run_criterion(n: int, ctx: Context) -> list:
    return CRITERIA[n][1](ctx)


def verify_all(ctx: Context | None = None, only=None, log=None) -> Report:
    """Run the criteria in order; ``log`` receives one summary line per criterion."""
    ctx = ctx or Context()
    report = Report()
    for n, (title, fn) in CRITERIA.items():
        if only and n not in only:
            continue
        rs = fn(ctx)
        for r in rs:
            r.details.setdefault("criterion", n)
        report.extend(rs)
        if log:
            ok = all(r.passed for r in rs)
            log(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title} ({sum(r.passed for r in rs)}/{len(rs)})")
    return report
