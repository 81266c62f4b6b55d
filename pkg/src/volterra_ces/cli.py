"""Command-line entry point: ``volterra-ces <subcommand> ...``.

Exit codes: 0 when every requested check passes or is inconclusive because
its hypotheses are unmet, 2 when a check fails, 1 on bad input.
"""
from __future__ import annotations

import argparse
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import cesaro, forcing, resolvents, solvers, spectral
from .config import ConfigError, RunConfig, load_config, read_csv_signal
from .meansquare import mean_square_additive, mean_square_limit_check
from .numerics import GridFunction, running_mean
from .reports import FAIL, INCONCLUSIVE, Check, Report

log = logging.getLogger("volterra_ces")

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2


# ---------------------------------------------------------------- output

def csv_text(header, columns, footer=()) -> str:
    """Comma-separated table with ``%.12g`` numbers, LF endings and ``# key = value`` footers."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    if columns:
        data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
        np.savetxt(buf, data, fmt="%.12g", delimiter=",", newline="\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_csv(path, header, columns, footer=()):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(csv_text(header, columns, footer))


def _emit(args, header, columns, summary):
    """CSV to ``--out`` (summary on stdout) or everything to stdout."""
    if args.out:
        write_csv(args.out, header, columns)
        sys.stdout.write("".join(f"{s}\n" for s in summary))
    else:
        sys.stdout.write(csv_text(header, columns, summary))


def _status_code(reports):
    return EXIT_FAIL if any(r.status == FAIL for r in reports) else EXIT_OK


# ---------------------------------------------------------------- pipeline

def _check_reports(cfg: RunConfig, x, xprime, bundle, blowup):
    s = cfg.scenario
    out = []
    for name in cfg.checks:
        tol = cfg.tol(name)
        if blowup is not None and name not in ("roots", "pathological_dichotomy",
                                                "positive_forcing", "resolvent_integrals"):
            rep = Report(name)
            rep.add(Check(name, None, None, tol, INCONCLUSIVE,
                          f"solution blew up at t = {blowup:g}; hypotheses unmet"))
            out.append(rep)
            continue
        f = GridFunction(s.h, s.forcing_samples())
        if name == "resolvent_integrals":
            out.append(resolvents.check_resolvent_integrals(bundle, s.measure, tol)
                       if bundle.r_prime is not None else _blowup_report(name, bundle, tol))
        elif name == "interval_averages":
            out.append(cesaro.verify_theorem(s, x, xprime, bundle, tol, cfg.thetas,
                                             panels=("interval",)))
        elif name == "forcing_limit":
            out.append(cesaro.verify_theorem(s, x, xprime, bundle, tol, cfg.thetas,
                                             panels=("forcing",)))
        elif name == "integral_contrast":
            out.append(cesaro.verify_theorem(s, x, None, bundle, tol, cfg.thetas))
        elif name == "delay_equivalence":
            out.append(cesaro.delay_equivalence(bundle, x, f, tol))
        elif name == "pathological_dichotomy":
            out.append(cesaro.pathological_dichotomy(f, cfg.thetas, tol))
        elif name == "positive_forcing":
            out.append(cesaro.positive_equivalence_check(f, cfg.thetas, tol))
        elif name == "roots":
            out.append(_roots_report(s.measure, bundle, tol))
        elif name == "meansquare":
            out.append(mean_square_limit_check(x, bundle, cfg.sigma, tol))
        elif name == "route_equivalence":
            out.append(solvers.route_check(s, tol, bundle))
    return out


def _blowup_report(name, bundle, tol):
    rep = Report(name)
    rep.add(Check(name, None, None, tol, INCONCLUSIVE,
                  f"resolvent blew up at t = {bundle.diagnostics.get('blowup_time')}"))
    return rep


def _roots_report(mu, bundle, tol):
    rs = bundle.diagnostics.get("roots") or spectral.locate_roots(mu)
    rep = Report("roots")
    rep.info["v0"] = rs.v0
    rep.info["count_certified"] = rs.count_certified
    rep.info["complete_right_of"] = rs.complete_right_of
    for lam, m in rs.roots:
        rep.info[f"root_{lam.real:.10g}{lam.imag:+.10g}i"] = m
    try:
        verdict = spectral.integrability_verdict(rs)
    except ValueError:
        verdict = INCONCLUSIVE
    rep.info["spectral_verdict"] = verdict
    try:
        dr = spectral.decay_rate_check(rs, bundle, tol)
        rep.checks.extend(dr.checks)
    except ValueError as err:
        rep.add(Check("envelope_rate", rs.v0, None, tol, INCONCLUSIVE, str(err)))
    return rep


def run_scenario(cfg: RunConfig) -> int:
    """Solve, analyse and write ``solution.csv``, ``running_mean.csv`` and ``report.txt``."""
    s = cfg.scenario
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = solvers.resolvent_for(s, spectral=s.kind == "fde")
    blowup = None
    try:
        x, xprime = solvers.solve(s, derivative=True)
    except solvers.BlowUpError as err:
        blowup = err.time
        x = GridFunction(s.h, err.values) if err.values.size else GridFunction(s.h, [s.xi])
        xprime = None
    cols = [x.t, x.values] + ([xprime.values] if xprime is not None else [])
    write_csv(out / "solution.csv", ["t", "x"] + (["xprime"] if xprime is not None else []), cols)
    rm = running_mean(x) if x.n >= 1 else x
    write_csv(out / "running_mean.csv", ["t", "running_mean"], [rm.t, rm.values])

    reports = _check_reports(cfg, x, xprime, bundle, blowup)
    lines = [f"scenario = {cfg.source}", f"kind = {s.kind}",
             f"r_integrable = {bundle.integrable_verdict}"]
    if blowup is not None:
        lines.append(f"blowup_time = {blowup:.12g}")
    lines.append(f"running_mean_at_T = {rm.values[-1]:.12g}")
    text = "\n".join(lines) + "\n"
    for rep in reports:
        text += "\n" + rep.to_text()
    code = _status_code(reports)
    text += f"\nexit_status = {code}\n"
    with open(out / "report.txt", "w", newline="\n") as fh:
        fh.write(text)
    return code


def _run_one(path, overrides):
    try:
        cfg = load_config(path, **overrides)
        return run_scenario(cfg), cfg.output_dir, ""
    except (ConfigError, ValueError) as err:
        return EXIT_INPUT, None, f"{path}: {err}"


# ---------------------------------------------------------------- subcommands

def _overrides(args):
    return dict(step=args.step, horizon=args.horizon, tol=args.tol)


def cmd_run(args):
    overrides = _overrides(args)
    multi = len(args.configs) > 1
    jobs = []
    for p in args.configs:
        o = dict(overrides)
        if args.out:
            o["out"] = Path(args.out) / Path(p).stem if multi else Path(args.out)
        jobs.append(o)
    if multi and args.jobs != 1:
        workers = args.jobs or min(len(jobs), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, args.configs, jobs))
    else:
        results = [_run_one(p, o) for p, o in zip(args.configs, jobs)]
    for p, (code, out, msg) in zip(args.configs, results):
        if msg:
            print(f"error: {msg}", file=sys.stderr)
        else:
            print(f"{p}: exit {code}, artifacts in {out}")
    return max(code for code, _, _ in results)


def cmd_resolvent(args):
    cfg = load_config(args.config, **_overrides(args))
    s = cfg.scenario
    b = solvers.resolvent_for(s, spectral=s.kind == "fde")
    rp = b.r_prime.values if b.r_prime is not None else np.full(len(b.r), np.nan)
    summary = ["integral_r,integral_r_prime,verdict",
               f"{b.integral_r:.12g},{_g(b.integral_r_prime)},{b.integrable_verdict}"]
    _emit(args, ["t", "r", "r_prime"], [b.r.t, b.r.values, rp], summary)
    return EXIT_OK


def _g(v):
    return "nan" if v is None else f"{v:.12g}"


def cmd_solve(args):
    cfg = load_config(args.config, **_overrides(args))
    s = cfg.scenario
    try:
        x, xp = solvers.solve(s, derivative=True)
    except solvers.BlowUpError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL
    rm = running_mean(x).values[-1]
    if xp is None:
        _emit(args, ["t", "x"], [x.t, x.values], [f"running_mean_at_T = {rm:.12g}"])
    else:
        _emit(args, ["t", "x", "xprime"], [x.t, x.values, xp.values],
              [f"running_mean_at_T = {rm:.12g}"])
    return EXIT_OK


def _signal_from(args):
    src = Path(args.source)
    if src.suffix == ".csv":
        f = read_csv_signal(src)
        if abs(f.t0) > 1e-12:
            raise ConfigError(f"{src}: signal must start at t = 0")
        return f
    cfg = load_config(src, **_overrides(args))
    return GridFunction(cfg.scenario.h, cfg.scenario.forcing_samples())


def cmd_cesaro(args):
    f = _signal_from(args)
    if args.theta is not None:
        f = cesaro.interval_average_map(f, args.theta)
    e = cesaro.estimate_limit(f, args.tol if args.tol is not None else 1e-2)
    summary = [f"estimate = {e.estimate:.12g}", f"half_width = {e.half_width:.12g}",
               f"verdict = {e.verdict}"]
    _emit(args, ["t", "running_mean"], [e.curve.t, e.curve.values], summary)
    return EXIT_OK


def cmd_decompose(args):
    f = _signal_from(args)
    d = cesaro.decompose(f, args.theta)
    tol = args.tol if args.tol is not None else 1e-2
    e1, e2 = cesaro.estimate_limit(d.f1, tol), cesaro.estimate_limit(d.F2, tol)
    summary = [f"theta = {d.theta:.12g}", f"identity_gap = {d.identity_gap:.12g}",
               f"f1_limit = {e1.estimate:.12g}", f"f1_verdict = {e1.verdict}",
               f"F2_mean_limit = {e2.estimate:.12g}", f"F2_mean_verdict = {e2.verdict}"]
    _emit(args, ["t", "f", "f1", "f2", "F2"],
          [f.t, f.values, d.f1.values, d.f2.values, d.F2.values], summary)
    return EXIT_OK


def cmd_verify(args):
    cfg = load_config(args.config, **_overrides(args))
    s = cfg.scenario
    bundle = solvers.resolvent_for(s, spectral=s.kind == "fde")
    x, xp = solvers.solve(s, derivative=True)
    tol = args.tol if args.tol is not None else 2e-2
    rep = cesaro.verify_theorem(s, x, xp, bundle, tol, cfg.thetas)
    text = rep.to_text()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return _status_code([rep])


def cmd_roots(args):
    cfg = load_config(args.config, **_overrides(args))
    mu = cfg.scenario.measure
    if cfg.scenario.kind != "fde":
        raise ConfigError("roots need an fde scenario")
    rect = tuple(args.rect) if args.rect else None
    rs = spectral.locate_roots(mu, rect)
    rows = sorted(rs.roots, key=lambda p: (-p[0].real, p[0].imag))
    cols = [[lam.real for lam, _ in rows], [lam.imag for lam, _ in rows], [m for _, m in rows]]
    try:
        verdict = spectral.integrability_verdict(rs)
    except ValueError:
        verdict = INCONCLUSIVE
    summary = [f"v0={rs.v0:.12g}", f"count_certified={str(rs.count_certified).lower()}",
               f"verdict={verdict}"]
    _emit(args, ["re", "im", "multiplicity"], cols if rows else [], summary)
    return EXIT_OK


def cmd_example(args):
    T = args.horizon if args.horizon is not None else 200.0
    if args.family == "pathological":
        f = forcing.pathological_f(args.alpha, T, args.step)
    else:
        h = args.step if args.step is not None else 1e-2
        f = forcing.reference_f(args.family, T, h, args.level)
    _emit(args, ["t", "f"], [f.t, f.values], [f"step = {f.h:.12g}"])
    return EXIT_OK


def cmd_meansquare(args):
    cfg = load_config(args.config, **_overrides(args))
    s = cfg.scenario
    if s.kind != "ide":
        raise ConfigError("mean square needs an ide scenario")
    b = solvers.resolvent_for(s)
    x = solvers.solve(s)
    sigma = args.sigma if args.sigma is not None else cfg.sigma
    if isinstance(sigma, str):
        from .config import parse_expression
        sigma = parse_expression(sigma, "t")
    ms = mean_square_additive(x, b, sigma)
    _emit(args, ["t", "ms"], [ms.t, ms.values], [f"ms_at_T = {ms.values[-1]:.12g}"])
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--step", type=float, help="grid step h (overrides the file)")
    common.add_argument("--horizon", type=float, help="horizon T (overrides the file)")
    common.add_argument("--tol", type=float, help="tolerance for every check")
    common.add_argument("--out", help="output file (or directory for 'run')")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="volterra-ces",
                                description="Resolvents, solvers and Cesàro-limit checks for "
                                            "linear equations with memory.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("run", parents=[common], help="full pipeline for one or more scenario files")
    q.add_argument("configs", nargs="+")
    q.add_argument("--jobs", type=int, default=0, help="worker processes (0: one per scenario)")
    q.set_defaults(func=cmd_run)

    for name, func, help_ in [("resolvent", cmd_resolvent, "resolvent as CSV t,r,r_prime"),
                              ("solve", cmd_solve, "solution as CSV t,x[,xprime]"),
                              ("verify", cmd_verify, "Cesàro-limit report for a scenario")]:
        q = sub.add_parser(name, parents=[common], help=help_)
        q.add_argument("config")
        q.set_defaults(func=func)

    q = sub.add_parser("roots", parents=[common], help="characteristic roots of a delay scenario")
    q.add_argument("config")
    q.add_argument("--rect", type=float, nargs=4, metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    q.set_defaults(func=cmd_roots)

    q = sub.add_parser("cesaro", parents=[common], help="running mean and limit verdict")
    q.add_argument("source", help="scenario file (its forcing) or CSV t,value")
    q.add_argument("--theta", type=float, help="analyse the interval average over theta instead")
    q.set_defaults(func=cmd_cesaro)

    q = sub.add_parser("decompose", parents=[common], help="moving-average decomposition")
    q.add_argument("source", help="scenario file (its forcing) or CSV t,value")
    q.add_argument("--theta", type=float, default=1.0)
    q.set_defaults(func=cmd_decompose)

    q = sub.add_parser("example", parents=[common], help="sample a forcing family as CSV")
    q.add_argument("--family", default="pathological",
                   choices=("pathological",) + forcing.REFERENCE_KINDS)
    q.add_argument("--alpha", type=float, default=1.0)
    q.add_argument("--level", type=float, default=0.7, help="level of constant-type families")
    q.set_defaults(func=cmd_example)

    q = sub.add_parser("meansquare", parents=[common], help="mean square under additive noise")
    q.add_argument("config")
    q.add_argument("--sigma", help="noise intensity expression in t (default from the file)")
    q.set_defaults(func=cmd_meansquare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
