"""Command line interface.

All commands write delimited text: `# key=value` metadata lines, then a
header row, then data rows.  Runs with the same inputs produce
byte-identical output; wall-clock metadata only appears under --timings.
Figures are rendered next to the output file when --plot is given.

Exit codes: 0 success, 2 usage errors, 3 library errors (bad source
configs, unsupported analyses, certification failures).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time

_SCHEMA_PREFIX = "tamelab"
_GENERATOR = "tamelab-0.1.0"


def _apply_thread_env():
    """Honor TAMELAB_THREADS before numpy pulls in a thread pool."""
    v = os.environ.get("TAMELAB_THREADS")
    if v:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, v)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def parse_n_values(spec: str) -> list[int]:
    """n grammar: plain ints, 2^k powers, and A..B doubling ladders,
    comma separated.  "2^4..2^12" expands to 16, 32, ..., 4096."""

    def one(tok: str) -> int:
        tok = tok.strip()
        if "^" in tok:
            b, e = tok.split("^", 1)
            return int(b) ** int(e)
        return int(tok)

    out: list[int] = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ".." in tok:
            lo_s, hi_s = tok.split("..", 1)
            lo, hi = one(lo_s), one(hi_s)
            if lo < 1 or hi < lo:
                raise ValueError(f"bad ladder {tok!r}")
            v = lo
            while v <= hi:
                out.append(v)
                v *= 2
        else:
            out.append(one(tok))
    if not out:
        raise ValueError("empty n specification")
    return out


def parse_grid(spec: str) -> list[float]:
    """Float grid grammar: comma list, or lo:hi:count for a uniform grid."""
    spec = spec.strip()
    if ":" in spec:
        lo_s, hi_s, cnt_s = spec.split(":")
        lo, hi, cnt = float(lo_s), float(hi_s), int(cnt_s)
        if cnt < 2:
            return [lo]
        step = (hi - lo) / (cnt - 1)
        return [lo + i * step for i in range(cnt)]
    return [float(t) for t in spec.split(",") if t.strip()]


def _emit_table(args, schema: str, meta: dict, header: list[str],
                rows: list[list], t0: float) -> None:
    buf = io.StringIO()
    buf.write(f"# schema={_SCHEMA_PREFIX}.{schema}.v1\n")
    buf.write(f"# generated_by={_GENERATOR}\n")
    for k, v in meta.items():
        buf.write(f"# {k}={v}\n")
    if getattr(args, "timings", False):
        buf.write(f"# runtime_ms={(time.perf_counter() - t0) * 1000.0:.1f}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as f:
            f.write(text)


def _plot_path(args) -> str:
    base, _ = os.path.splitext(args.out)
    return base + ".png"


def _kinds(args) -> list[str]:
    return ["R", "C", "B"] if args.kind == "all" else [args.kind]


# -- subcommand bodies ---------------------------------------------------


def _cmd_exact(args, t0):
    from . import analysis
    from .sources import parse_source_token

    src = parse_source_token(args.source)
    ns = parse_n_values(args.n)
    rows = []
    for kind in _kinds(args):
        for n in ns:
            if args.method == "alternating" or (
                    args.method == "auto" and args.precision_bits):
                r = analysis.exact_mean_alternating(
                    src, kind, n, precision_bits=args.precision_bits)
            elif args.method == "direct":
                r = analysis.exact_mean_direct(src, kind, n)
            elif args.method == "rice":
                r = analysis.rice_integral(src, kind, n)
            else:
                val = analysis.exact_mean(src, kind, n)
                r = analysis.ExactMeanResult(kind, n, val, "auto", 0.0, None)
            rows.append([r.kind, r.n, r.value, r.method,
                         r.certified_abs_error, r.precision_bits])
    meta = {"source": args.source, "method": args.method}
    _emit_table(args, "exact", meta,
                ["kind", "n", "value", "method", "certified_abs_error",
                 "precision_bits"], rows, t0)
    if args.plot:
        from .plots import save_cost_curves
        curves = {}
        for kind in _kinds(args):
            curves[kind] = [r[2] for r in rows if r[0] == kind]
        save_cost_curves(_plot_path(args), ns, curves,
                         f"exact mean costs: {args.source}")


def _cmd_simulate(args, t0):
    from . import analysis
    from .sources import parse_source_token

    src = parse_source_token(args.source)
    ns = parse_n_values(args.n)
    kinds = _kinds(args)
    rows = []
    for n in ns:
        est = analysis.monte_carlo(src, n, args.trials, seed=args.seed,
                                   kinds=kinds)
        for kind in kinds:
            e = est[kind]
            rows.append([e.kind, e.n, e.trials, e.mean, e.se, e.std, e.seed])
    meta = {"source": args.source, "trials": args.trials, "seed": args.seed}
    _emit_table(args, "simulate", meta,
                ["kind", "n", "trials", "mean", "se", "std", "seed"], rows, t0)
    if args.plot:
        from .plots import save_cost_curves
        curves = {k: [r[3] for r in rows if r[0] == k] for k in kinds}
        save_cost_curves(_plot_path(args), ns, curves,
                         f"simulated mean costs: {args.source}")


def _cmd_asymptote(args, t0):
    from . import analysis
    from .sources import parse_source_token

    src = parse_source_token(args.source)
    ns = parse_n_values(args.n)
    rows = []
    meta = {"source": args.source}
    plots = {}
    for kind in _kinds(args):
        pred = analysis.asymptotic_main_term(src, kind, ns[-1], ladder=ns,
                                             pairs=args.pairs)
        meta[f"regime_{kind}"] = pred.regime
        meta[f"entropy"] = repr(pred.entropy)
        for cname, cval in pred.coefficients.items():
            meta[f"coeff_{kind}_{cname}"] = repr(cval)
        if pred.fit is not None:
            fit = pred.fit
        else:
            fit = analysis.asymptotic_fit(src, kind, ns)
        flux = None
        if pred.regime == "periodic" and args.pairs > 0:
            try:
                flux = analysis.periodic_fluctuation(src, kind, fit.ns,
                                                     pairs=args.pairs)
            except analysis.UnsupportedSource:
                flux = None
        for i, n in enumerate(fit.ns):
            rows.append([kind, int(n), fit.means[i], fit.predictions[i],
                         fit.residuals[i]])
        plots[kind] = fit, flux
    _emit_table(args, "asymptote", meta,
                ["kind", "n", "exact", "template", "residual_rel"], rows, t0)
    if args.plot:
        from .plots import save_residual_plot
        base, _ = os.path.splitext(args.out)
        for kind, (fit, flux) in plots.items():
            resid = fit.means - fit.predictions
            save_residual_plot(f"{base}_{kind}.png", fit.ns, resid,
                               fluctuation=flux,
                               title=f"{kind} residuals: {args.source}")


def _flatten_report(report) -> list[list]:
    rows = [["verdict", report.verdict]]
    ev = report.evidence
    if "generator" in ev and ev["generator"] is not None:
        rows.append(["generator", ev["generator"]])
    if "first_pole_t" in ev:
        rows.append(["first_pole_t", ev["first_pole_t"]])
        rows.append(["pole_scan_agrees", ev["pole_scan_agrees"]])
    if ev.get("witness"):
        rows.append(["witness", ev["witness"]["text"]])
        rows.append(["witness_ratio", ev["witness"]["ratio"]])
    gc = ev.get("good_class")
    if gc is not None:
        rows.append(["rho_hat", gc.rho_hat])
        rows.append(["A_hat", gc.A_hat])
        rows.append(["sigma0_hat", gc.sigma0_hat])
        rows.append(["good_class", gc.good])
    if ev.get("branch_pair_distance") is not None:
        rows.append(["branch_pair_distance", ev["branch_pair_distance"]])
    for u in ev.get("uni_reports", ()):
        rows.append([f"uni_estimate_n{u.n}", u.estimate])
        rows.append([f"uni_threshold_n{u.n}", u.threshold])
        rows.append([f"uni_covered_n{u.n}", u.covered_mass])
    diop = ev.get("diop")
    if diop is not None:
        for word, c in diop.rates.items():
            tag = "".join(str(s) for s in word)
            rows.append([f"diop_c_{tag}", c])
    for note in report.notes:
        rows.append(["note", note])
    return rows


def _cmd_classify(args, t0):
    from .sources import parse_source_token
    from .tameness import classify, theorem2_regime

    src = parse_source_token(args.source)
    report = classify(src)
    rows = _flatten_report(report)
    rows.insert(1, ["regime", theorem2_regime(report)])
    meta = {"source": args.source}
    _emit_table(args, "classify", meta, ["field", "value"], rows, t0)


def _cmd_spectrum(args, t0):
    from .dynamics import DynamicalSource
    from .errors import UnsupportedSource
    from .operator import discretize, dominant_eigenvalue
    from .sources import parse_source_token

    src = parse_source_token(args.source)
    if not isinstance(src, DynamicalSource):
        raise UnsupportedSource("spectrum needs a dynamical source")
    svals = parse_grid(args.s)
    rows = []
    for s in svals:
        M = discretize(src, float(s), N=args.N, which=args.which)
        lam = dominant_eigenvalue(M)
        rows.append([s, lam.real, lam.imag, abs(lam)])
    meta = {"source": args.source, "N": args.N, "which": args.which}
    _emit_table(args, "spectrum", meta,
                ["s", "eig_real", "eig_imag", "eig_abs"], rows, t0)
    if args.plot:
        from .plots import save_spectrum_plot
        save_spectrum_plot(_plot_path(args), svals, [r[3] for r in rows],
                           xlabel="s", ylabel="|dominant eigenvalue|",
                           title=f"spectrum: {args.source}")


def _cmd_probe(args, t0):
    from .dynamics import DynamicalSource
    from .errors import UnsupportedSource
    from .operator import (dominant_eigenvalue, resolvent_norm_probe,
                           tangent_matrix)
    from .sources import parse_source_token

    src = parse_source_token(args.source)
    if not isinstance(src, DynamicalSource):
        raise UnsupportedSource("resolvent probes need a dynamical source")
    try:
        tvals = [float(v) for v in parse_n_values(args.t)]
    except ValueError:
        tvals = parse_grid(args.t)
    rows = []
    marks = []
    for t in tvals:
        M = tangent_matrix(src, complex(1.0, float(t)), N=args.N)
        lam = dominant_eigenvalue(M)
        if abs(lam - 1.0) < 1e-8:
            rows.append([t, float("inf"), 1])
            marks.append(t)
        else:
            rows.append([t, resolvent_norm_probe(src, float(t), N=args.N), 0])
    meta = {"source": args.source, "N": args.N}
    _emit_table(args, "probe", meta, ["t", "response", "divergent"], rows, t0)
    if args.plot:
        from .plots import save_spectrum_plot
        finite = [(r[0], r[1]) for r in rows if r[2] == 0]
        save_spectrum_plot(_plot_path(args), [f[0] for f in finite],
                           [f[1] for f in finite], xlabel="t",
                           ylabel="resolvent response", marks=marks,
                           title=f"line probe: {args.source}")


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tamelab",
        description="Digital-tree costs over probabilistic sources: exact "
                    "means, simulations, asymptotics, classification, and "
                    "operator spectra.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, plot: bool = True):
        sp.add_argument("--source", required=True,
                        help="source token, inline JSON, or config path")
        sp.add_argument("--out", default="-",
                        help="output file, - for stdout (default)")
        sp.add_argument("--timings", action="store_true",
                        help="include runtime metadata (breaks byte-identity)")
        if plot:
            sp.add_argument("--plot", action="store_true",
                            help="render a PNG figure next to --out")

    sp = sub.add_parser("exact", help="exact mean costs")
    common(sp)
    sp.add_argument("--kind", choices=["R", "C", "B", "all"], default="all")
    sp.add_argument("--n", required=True, help="e.g. 8 | 2,8,32 | 2^4..2^12")
    sp.add_argument("--method", choices=["auto", "alternating", "direct", "rice"],
                    default="auto")
    sp.add_argument("--precision-bits", type=int, default=None)
    sp.set_defaults(fn=_cmd_exact)

    sp = sub.add_parser("simulate", help="Monte Carlo mean costs")
    common(sp)
    sp.add_argument("--kind", choices=["R", "C", "B", "all"], default="all")
    sp.add_argument("--n", required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("asymptote", help="template fits on an exact ladder")
    common(sp)
    sp.add_argument("--kind", choices=["R", "C", "B", "all"], default="all")
    sp.add_argument("--n", default="2^4..2^12",
                    help="fit ladder (default 2^4..2^12)")
    sp.add_argument("--pairs", type=int, default=3,
                    help="pole pairs in the fluctuation overlay (periodic only)")
    sp.set_defaults(fn=_cmd_asymptote)

    sp = sub.add_parser("classify", help="periodic / tame classification")
    common(sp, plot=False)
    sp.set_defaults(fn=_cmd_classify)

    sp = sub.add_parser("spectrum", help="dominant operator eigenvalue on a grid")
    common(sp)
    sp.add_argument("--s", default="1.1:3:16", help="grid: lo:hi:count or list")
    sp.add_argument("--N", type=int, default=24, help="collocation degree")
    sp.add_argument("--which", choices=["tangent", "secant"], default="tangent")
    sp.set_defaults(fn=_cmd_spectrum)

    sp = sub.add_parser("probe", help="resolvent response along Re(s)=1")
    common(sp)
    sp.add_argument("--t", default="2..64", help="ordinates: list or A..B doubling")
    sp.add_argument("--N", type=int, default=24)
    sp.set_defaults(fn=_cmd_probe)

    return p


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "plot", False) and args.out == "-":
        parser.error("--plot needs --out FILE so the figure has a home")
    t0 = time.perf_counter()
    from .errors import TamelabError
    try:
        args.fn(args, t0)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    except TamelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
