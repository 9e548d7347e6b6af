"""Command-line driver: ``python -m extoda <command>``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from .report import Report
from .ring.config import TruncationConfig
from .ring.rational import to_str

log = logging.getLogger("extoda")

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------------

def parse_labels(text: str) -> list:
    """'1:0,1:0,2:0' -> [(1, 0), (1, 0), (2, 0)]."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            a, p = (int(x) for x in tok.split(":"))
        except ValueError:
            raise UsageError(f"bad label {tok!r}; expected alpha:p") from None
        if a not in (1, 2) or p < 0:
            raise UsageError(f"bad label {tok!r}; alpha must be 1 or 2 and p >= 0")
        out.append((a, p))
    if not out:
        raise UsageError("no labels given")
    return out


def monomial_pairs(exps: dict) -> list:
    """Sorted [variable, exponent] pairs."""
    return [[f"t{a}_{p}", n] for (a, p), n in sorted(exps.items(), key=lambda x: (x[0][1], x[0][0]))]


def label_text(exps: dict) -> str:
    return ",".join(f"{a}:{p}" for (a, p), n in sorted(exps.items()) for _ in range(n))


def load_config(args) -> TruncationConfig:
    try:
        cfg = TruncationConfig.load(args.config)
    except (OSError, ValueError) as e:
        raise UsageError(f"config: {e}") from None
    overrides = {k: getattr(args, k) for k in ("eps_order", "coupling_degree", "divisor_degree", "p_max")
                 if getattr(args, k, None) is not None}
    try:
        return cfg.with_(**overrides) if overrides else cfg
    except ValueError as e:
        raise UsageError(str(e)) from None


def emit(args, payload: dict, rows=None, columns=None) -> None:
    """Write JSON (default) or CSV; CSV needs row data."""
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"--format csv is not available for '{args.command}'")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def report_payload(cmd: str, cfg: TruncationConfig, report: Report) -> dict:
    return {"command": cmd, "config": cfg.as_dict(), **report.as_dict()}


# -- commands --------------------------------------------------------------------

def cmd_hamiltonians(args, cfg):
    from .hierarchy import Hierarchy

    H = Hierarchy(cfg, qmax=max(args.pmax, 0))
    out = []
    for a in (1, 2):
        for p in range(-1, args.pmax + 1):
            out.append({"alpha": a, "p": p, "density": H.density(a, p).value.to_str()})
    emit(args, {"command": "hamiltonians", "config": cfg.as_dict(), "densities": out})
    return 0


def cmd_flows(args, cfg):
    from .diffop import lax_flow

    vt, ut = lax_flow(args.beta, args.q, cfg)
    emit(args, {"command": "flows", "config": cfg.as_dict(), "beta": args.beta, "q": args.q,
                "v_t": vt.to_str(), "u_t": ut.to_str()})
    return 0


def cmd_omega(args, cfg):
    from .hierarchy import Hierarchy

    H = Hierarchy(cfg, qmax=args.pmax)
    emit(args, {"command": "omega", "config": cfg.as_dict(), "omega": H.omega_table(args.pmax).as_json()})
    return 0


def cmd_virasoro(args, cfg):
    from .virasoro import free_field_check, virasoro_commutator, virasoro_direct

    report = Report()
    if args.action == "check-comm":
        window = args.window if args.window is not None else cfg.p_max + 1
        for i in range(-1, args.imax + 1):
            for j in range(-1, args.imax + 1):
                report.add(virasoro_commutator(i, j, window))
        if args.free_field:
            for m in range(-1, args.imax + 1):
                report.add(free_field_check(m, window))
        emit(args, report_payload("virasoro check-comm", cfg, report))
    elif args.action == "operator":
        op = virasoro_direct(args.m, args.window if args.window is not None else cfg.p_max)
        emit(args, {"command": "virasoro operator", "m": args.m, "terms": op.describe()})
        return 0
    else:
        from .highergenus import GenusExpansion
        from .verify import _virasoro_checks

        logZ = GenusExpansion(cfg).logZ
        report.extend(_virasoro_checks(logZ, [args.m], "virasoro-logZ"))
        emit(args, report_payload("virasoro residual", cfg, report))
    return 0 if report.passed else 1


def _coefficient_rows(F, degree: int, tmax: int, exact_degree: bool = False):
    rows = []
    for e, h, exps, c in F.items():
        if h % 2 or h < 0:
            continue
        d = h // 2
        if d > degree or (exact_degree and d != degree):
            continue
        if any(p > tmax for _, p in exps):
            continue
        rows.append((d, exps, c))
    return rows


def cmd_gw0(args, cfg):
    from .genus0 import GenusZero, gw0_correlator

    if args.action == "correlator":
        labels = parse_labels(args.labels)
        G = GenusZero(cfg.with_(divisor_degree=max(cfg.divisor_degree, args.deg),
                                coupling_degree=max(cfg.coupling_degree, len(labels))))
        try:
            value = gw0_correlator(G.F0, labels, args.deg)
        except ValueError as e:
            raise UsageError(str(e)) from None
        sys.stdout.write(to_str(value) + "\n")
        return 0
    G = GenusZero(cfg.with_(divisor_degree=max(cfg.divisor_degree, args.degree)))
    rows = _coefficient_rows(G.F0, args.degree, args.tmax)
    payload = [{"degree": d, "monomial": monomial_pairs(exps), "rational": to_str(c)} for d, exps, c in rows]
    emit(args, {"command": "gw0", "config": cfg.as_dict(), "coefficients": payload},
         rows=[(0, d, label_text(exps), to_str(c)) for d, exps, c in rows],
         columns=("genus", "degree", "labels", "value"))
    return 0


def cmd_gw(args, cfg):
    from .highergenus import GenusExpansion
    from .tables import multiset_factor

    if args.genus not in (0, 1, 2):
        raise UsageError("--genus must be 0, 1 or 2")
    cfg = cfg.with_(divisor_degree=max(cfg.divisor_degree, args.degree))
    F = GenusExpansion(cfg).genus(args.genus)
    rows = _coefficient_rows(F, args.degree, args.tmax if args.tmax is not None else cfg.p_max,
                             exact_degree=True)
    payload = []
    csv_rows = []
    for d, exps, c in rows:
        corr = c * multiset_factor(exps)
        payload.append({"genus": args.genus, "degree": d, "labels": label_text(exps),
                        "monomial": monomial_pairs(exps), "coefficient": to_str(c), "correlator": to_str(corr)})
        csv_rows.append((args.genus, d, label_text(exps), to_str(corr)))
    emit(args, {"command": "gw", "config": cfg.as_dict(), "correlators": payload},
         rows=csv_rows, columns=("genus", "degree", "labels", "value"))
    return 0


def cmd_loop_check(args, cfg):
    from .highergenus import loop_check

    if args.samples < 2:
        raise UsageError("--samples must be at least 2 (one is used for calibration)")
    r = loop_check(args.samples, args.seed, args.source)
    report = Report([r])
    for i, s in enumerate(r.details["samples"]):
        print(f"sample {i} lambda={s['lambda']} residual=({s['rational']}, {s['sqrt_D']})", file=sys.stderr)
    emit(args, report_payload("loop-check", cfg, report))
    return 0 if report.passed else 1


def cmd_verify_all(args, cfg):
    from .verify import Context, verify_all

    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError:
            raise UsageError("--only expects a comma-separated list of criterion numbers") from None
        if not only <= set(range(1, 13)):
            raise UsageError("criteria are numbered 1..12")
    ctx = Context(cfg, loop_samples=args.samples, seed=args.seed)
    report = verify_all(ctx, only, log=lambda s: print(s, file=sys.stderr))
    emit(args, report_payload("verify-all", cfg, report))
    return 0 if report.passed else 1


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON file with truncation keys")
    common.add_argument("--eps-order", dest="eps_order", type=int)
    common.add_argument("--coupling-degree", dest="coupling_degree", type=int)
    common.add_argument("--divisor-degree", dest="divisor_degree", type=int)
    common.add_argument("--p-max", dest="p_max", type=int)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="extoda", description="Exact computations for the extended Toda hierarchy "
                                "and the CP^1 partition function.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("hamiltonians", parents=[common], help="Hamiltonian densities h_{alpha,p}")
    s.add_argument("--pmax", type=int, default=1)
    s.set_defaults(func=cmd_hamiltonians)

    s = sub.add_parser("flows", parents=[common], help="flow (v_t, u_t) of t^{beta,q}")
    s.add_argument("--beta", type=int, choices=(1, 2), required=True)
    s.add_argument("--q", type=int, default=0)
    s.set_defaults(func=cmd_flows)

    s = sub.add_parser("omega", parents=[common], help="two-point functions Omega")
    s.add_argument("--pmax", type=int, default=1)
    s.set_defaults(func=cmd_omega)

    s = sub.add_parser("virasoro", parents=[common], help="Virasoro operators and checks")
    s.add_argument("action", choices=("check-comm", "residual", "operator"))
    s.add_argument("--imax", type=int, default=3)
    s.add_argument("--window", type=int)
    s.add_argument("--m", type=int, default=-1)
    s.add_argument("--free-field", action="store_true", help="also compare the free-field limit")
    s.set_defaults(func=cmd_virasoro)

    s = sub.add_parser("gw0", parents=[common], help="genus-zero coefficients, or one correlator")
    s.add_argument("action", nargs="?", choices=("table", "correlator"), default="table")
    s.add_argument("--degree", type=int, default=3)
    s.add_argument("--tmax", type=int, default=3)
    s.add_argument("--labels")
    s.add_argument("--deg", type=int, default=0)
    s.set_defaults(func=cmd_gw0)

    s = sub.add_parser("gw", parents=[common], help="genus-tagged correlators (genus <= 2)")
    s.add_argument("--genus", type=int, default=1)
    s.add_argument("--degree", type=int, default=1)
    s.add_argument("--tmax", type=int)
    s.set_defaults(func=cmd_gw)

    s = sub.add_parser("loop-check", parents=[common], help="genus-one loop equation at random samples")
    s.add_argument("--samples", type=int, default=5)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--source", choices=("printed", "corrected"), default="printed",
                   help="source term as printed, or with the sign of (v-lambda)^2 flipped")
    s.set_defaults(func=cmd_loop_check)

    s = sub.add_parser("verify-all", parents=[common], help="run every acceptance check")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("--samples", type=int, default=5)
    s.add_argument("--seed", type=int, default=42)
    s.set_defaults(func=cmd_verify_all)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "gw0" and args.action == "correlator" and not args.labels:
            raise UsageError("gw0 correlator needs --labels")
        cfg = load_config(args)
        return args.func(args, cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"extoda: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
