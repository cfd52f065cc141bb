"""Command line: ``qhode analyze FILE`` and ``qhode check FILE``.

Exit codes: 0 success, 1 usage or parse error, 2 mathematical obstruction
(or a failed check), 3 numerical failure.
"""

import argparse
import sys

from . import __version__
from .errors import QHODEError
from .report import ALL_CHECKS, Options, all_checks_pass, bundled_systems, dumps, run


def _complex(text):
    return complex(text.replace("i", "j"))


def build_parser():
    p = argparse.ArgumentParser(prog="qhode", description=(
        "Laurent-series (Painleve-type) analysis of quasi-homogeneous polynomial ODE systems."))
    p.add_argument("--version", action="version", version=f"qhode {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file", help="system file, or the name of a bundled system "
                        f"({', '.join(bundled_systems())})")
        sp.add_argument("--order", type=int, default=20, help="expansion order N (default 20)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--starts", type=int, default=200, help="Newton starts for the balances")
        sp.add_argument("--alpha", type=_complex, default=2.0,
                        help="value pinned for a continuum balance parameter (default 2)")
        sp.add_argument("--tol", type=float, default=1e-8, help="residual tolerance")
        sp.add_argument("--draws", type=int, default=10, help="random parameter draws per check")
        sp.add_argument("--json", action="store_true", help="print the JSON report")

    a = sub.add_parser("analyze", help="full pipeline report")
    common(a)
    a.add_argument("--no-numeric", action="store_true",
                   help="skip the series-vs-integration comparison")
    c = sub.add_parser("check", help="verification checks only; exit 0 iff all pass")
    common(c)
    for name in ALL_CHECKS:
        c.add_argument(f"--{name}", action="store_true", help=f"run the {name} check")
    return p


def _fmt(z):
    z = complex(z[0], z[1]) if isinstance(z, list) else complex(z)
    if abs(z) < 1e-12:
        return "0"
    if abs(z.imag) < 1e-12:
        return f"{z.real:.6g}"
    if abs(z.real) < 1e-12:
        return f"{z.imag:.6g}i"
    return f"{z.real:.6g}{z.imag:+.6g}i"


def render(report):
    out = []
    sysd = report["system"]
    out.append(f"system   {sysd['file']}  n={sysd['n']}  vars={', '.join(sysd['variables'])}")
    if report.get("weights") is None:
        out.append("weights  none (not quasi-homogeneous)")
        return "\n".join(out)
    w = report["weights"]
    out.append(f"weights  s={tuple(w['s'])}  unique={w['unique']}  Delta={w['delta']}")
    out.append(f"balances {len(report['balances'])}")
    for i, e in enumerate(report["balances"]):
        kind = "continuum" if e["continuum"] else "isolated"
        out.append(f"  [{i}] {kind:9s} c0=({', '.join(e['c0'])})  residual={e['residual']:.1e}")
        ev = ", ".join(_fmt(z) for z in e["kowalevski"]["eigenvalues"])
        out.append(f"      spectrum {{{ev}}}")
        ex = e["expansion"]
        if ex["status"] != "ok":
            out.append(f"      OBSTRUCTION at k={ex['k']} (witness {ex['witness']:.2e})")
            continue
        names = ", ".join(f"{p['name']}@{p['level']}" for p in ex["free_parameters"]) or "none"
        out.append(f"      free parameters {len(ex['free_parameters'])}: {names}")
        for name, c in e.get("checks", {}).items():
            detail = {k: v for k, v in c.items()
                      if k in ("value", "max_value", "max_error", "domination_margin", "radius",
                               "series_vs_integration", "passes", "draws")}
            items = "  ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                              for k, v in sorted(detail.items()))
            out.append(f"      {name:20s} {'PASS' if c['ok'] else 'FAIL'}  {items}")
    cen = report["census"]
    out.append(f"census   max free parameters {cen['max_free_parameters']}, n-1 = {cen['n_minus_1']}")
    for name, c in report.get("checks", {}).items():
        if name == "elliptic" and c.get("applicable"):
            out.append(f"elliptic {'PASS' if c['ok'] else 'FAIL'}  residual={c['residual']:.3g}"
                       f"  normalization: {c['best']}")
            for vname, v in c["variants"].items():
                val = v.get("residual", v.get("error"))
                val = f"{val:.3g}" if isinstance(val, float) else val
                out.append(f"         {vname:48s} {val}")
            if "mismatch" in c:
                out.append(f"         mismatch: {c['mismatch']}")
        elif name == "poisson":
            cas = ", ".join(k for k, v in c.get("casimir", {}).items() if v) or "none"
            out.append(f"poisson  {'PASS' if c['ok'] else 'FAIL'}  jacobi_ok={c['jacobi_ok']}"
                       f"  casimirs: {cas}")
        else:
            out.append(f"{name:8s} {'PASS' if c['ok'] else 'FAIL'}  {c.get('reason', '')}")
    return "\n".join(out)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = Options(order=args.order, seed=args.seed, starts=args.starts, alpha=args.alpha,
                   tol=args.tol, draws=args.draws,
                   numeric=not getattr(args, "no_numeric", False))
    if args.command == "check":
        select = tuple(c for c in ALL_CHECKS if getattr(args, c)) or ALL_CHECKS
    else:
        select = ALL_CHECKS
    try:
        report, code = run(args.file, opts, select)
    except FileNotFoundError as exc:
        print(dumps({"error": "FileNotFound", "message": str(exc)}), file=sys.stderr)
        return 1
    except QHODEError as exc:
        print(dumps(exc.to_dict()), file=sys.stderr)
        return exc.exit_code
    if args.command == "check" and code == 0 and not all_checks_pass(report):
        code = 2
    print(dumps(report) if args.json else render(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
