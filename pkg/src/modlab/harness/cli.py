"""Command line entry point: ``modlab {simulate,verify,characteristics,transform,report}``.

Exit codes: 0 success, 1 invariant failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..characteristics import backward_endpoints, flow_batch, flow_jacobian_dets, yajima_integrals
from ..propagator import SCHEMES
from ..wavepacket import invert, mod_norm, wpt
from ..windows import make_window
from . import config as C
from . import io
from .checks import CHECKS, CheckResult, run_checks, yajima_table
from .scenario import NormRow, NormTimeseries, constant_report, run_scenario, scenario_from_config

log = logging.getLogger("modlab")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _scenario(args):
    cfg = C.load_config(args.config) if args.config else dict(C.DEFAULTS)
    return cfg, scenario_from_config(cfg, seed=args.seed, scheme=args.scheme)


def _finish(checks, quiet: bool = False) -> int:
    if not quiet:
        for c in checks:
            print(c.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        first = failed[0]
        msg = first.line()
        if first.detail:
            msg += f" ({first.detail})"
        print(msg, file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _simulation_checks(result, tol_scale: float) -> list:
    d = result.diagnostics
    s = result.scenario
    out = [CheckResult("l2_drift", d["drift_max"] < 1e-6 * tol_scale, d["drift_max"], 1e-6 * tol_scale),
           CheckResult("inversion_residual", d["inversion_max"] < 1e-8 * tol_scale,
                       d["inversion_max"], 1e-8 * tol_scale),
           CheckResult("jacobian_sample", d["jacobian_max_dev"] < 1e-5 * tol_scale,
                       d["jacobian_max_dev"], 1e-5 * tol_scale)]
    for name, msg in result.failures:
        out.append(CheckResult(f"run:{name}", False, None, None, msg))
    if result.series.rows:
        rep = constant_report([result.series], s.cap)[s.name]
        worst = max(v["C_T"] for v in rep.values())
        out.append(CheckResult("ratio_cap", worst < s.cap, worst, s.cap))
    return out


def _constants(result) -> dict:
    if not result.series.rows:
        return {}
    rep = constant_report([result.series], result.scenario.cap)[result.scenario.name]
    return {io.p_label(p): v["C_T"] for p, v in rep.items()}


def cmd_simulate(args) -> int:
    _, s = _scenario(args)
    result = run_scenario(s, keep_snapshots=True)
    out = Path(args.out)
    io.write_atomic(out / "norms.csv", io.norms_csv([result.series]))
    for k, states in result.snapshots.items():
        for j, f in enumerate(states):
            io.write_snapshot(out / "snapshots" / f"u0_{k:02d}_t{j:02d}.txt", f)
    checks = _simulation_checks(result, args.tol_scale)
    io.write_atomic(out / "report.json", io.report_json(s.name, checks, _constants(result)))
    return _finish(checks)


def cmd_verify(args) -> int:
    _, s = _scenario(args)
    names = None
    if args.checks:
        names = [k.strip() for k in args.checks.split(",") if k.strip()]
        unknown = [k for k in names if k not in CHECKS]
        if unknown:
            raise C.ConfigError(f"unknown checks {unknown}; available: {', '.join(CHECKS)}")
    result = run_scenario(s)
    checks = run_checks(s, names, args.tol_scale, args.seed or 0, result)
    if args.out:
        out = Path(args.out)
        io.write_atomic(out / "norms.csv", io.norms_csv([result.series]))
        io.write_atomic(out / "report.json", io.report_json(s.name, checks, _constants(result)))
    return _finish(checks)


def cmd_characteristics(args) -> int:
    cfg, s = _scenario(args)
    n = s.grid.n
    m = s.potential
    ex = {k.split(".", 1)[1]: v for k, v in cfg.items() if k.startswith("characteristics.")}
    xs = C.numbers(ex["x"], "characteristics.x")
    xis = C.numbers(ex["xi"], "characteristics.xi")
    t0 = C.number(ex["t"], "characteristics.t")
    s1 = C.number(ex["s"], "characteristics.s")
    delta = C.number(ex["delta"], "characteristics.delta")
    xi_max = C.number(ex["xi_max"], "characteristics.xi_max")
    if not xs or not xis:
        raise C.ConfigError("characteristics.x and characteristics.xi must be non-empty")
    X = np.array([[x] * n for x in xs for _ in xis], dtype=float)
    XI = np.array([[k] * n for _ in xs for k in xis], dtype=float)
    _, XE, XIE = flow_batch(m, t0, X, XI, s1, 1e-3)
    _, _, phase = backward_endpoints(m, t0, X, XI, s1, 1e-3)
    dets = flow_jacobian_dets(m, t0, X, XI, s1)
    horizon = min(max(abs(s1), 1e-3), 1.0)
    yaj = yajima_integrals(m, delta, horizon, t0, X, XI)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "xi", "t", "s", "x_end", "xi_end", "phase_re", "phase_im", "jacobian_det", "yajima"])
    for k in range(len(X)):
        w.writerow([repr(float(v)) for v in (X[k, 0], XI[k, 0], t0, s1, XE[k, 0], XIE[k, 0],
                                              phase[k].real, phase[k].imag, dets[k], yaj[k])])
    table = yajima_table(m, s.grid.L, delta, xi_max=xi_max)
    summary = {"potential": m.kind, "anchors": len(X),
               "max_jacobian_deviation": float(np.max(np.abs(dets - 1))),
               "yajima_sup": {io.p_label(T): v for T, v in table.items()},
               "yajima_sup_over_1_plus_T": {io.p_label(T): v / (1 + T) for T, v in table.items()}}
    checks = [CheckResult("unit_jacobian", summary["max_jacobian_deviation"] < 1e-5 * args.tol_scale,
                          summary["max_jacobian_deviation"], 1e-5 * args.tol_scale)]
    if args.out:
        out = Path(args.out)
        io.write_atomic(out / "characteristics.csv", buf.getvalue())
        io.write_atomic(out / "characteristics.json", json.dumps(summary, indent=2) + "\n")
    else:
        sys.stdout.write(buf.getvalue())
    print(json.dumps(summary, indent=2))
    return _finish(checks)


def cmd_transform(args) -> int:
    cfg, s = _scenario(args)
    try:
        f = io.read_snapshot(args.field)
    except (OSError, ValueError) as exc:
        raise C.ConfigError(f"cannot read field file: {exc}") from None
    phi = make_window(s.window, f.grid)
    F = wpt(f, phi)
    back = invert(F, phi)
    err = float(np.linalg.norm(back.values - f.values) / np.linalg.norm(f.values))
    norms = {io.p_label(p): mod_norm(F, p, p).value for p in s.exponents}
    summary = {"field": str(args.field), "t": float(f.time_tag), "n": f.grid.n, "N": f.grid.N,
               "L": f.grid.L, "window_l2": phi.l2_norm, "signal_l2": f.l2_norm,
               "inversion_error": err, "norms": norms}
    text = json.dumps(summary, indent=2) + "\n"
    if args.out:
        io.write_atomic(Path(args.out) / "transform.json", text)
    print(text, end="")
    check = CheckResult("inversion_residual", err < 1e-8 * args.tol_scale, err, 1e-8 * args.tol_scale)
    return _finish([check], quiet=True)


def cmd_report(args) -> int:
    rows = []
    for item in args.inputs:
        p = Path(item)
        path = p / "norms.csv" if p.is_dir() else p
        try:
            rows += io.read_norms_csv(path)
        except (OSError, ValueError, KeyError) as exc:
            raise C.ConfigError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise C.ConfigError("no norm rows found")
    series = {}
    for r in rows:
        ser = series.setdefault(r["scenario"], {"times": set(), "rows": []})
        ser["times"].add(r["t"])
        ser["rows"].append(NormRow(r["u0_id"], r["p"], r["t"], r["window"], r["norm"], r["ratio"]))
    series_list = [NormTimeseries(name, tuple(sorted(v["times"])), v["rows"])
                   for name, v in sorted(series.items())]
    rep = constant_report(series_list, args.cap, args.window)
    lines = [f"{'scenario':<20} {'p':>4} " + " ".join(f"T={t:<8g}" for t in series_list[0].times)]
    flagged = []
    for ser in series_list:
        for p, v in rep[ser.scenario].items():
            lines.append(f"{ser.scenario:<20} {io.p_label(p):>4} "
                         + " ".join(f"{c:<10.6g}" for _, c in v["table"]))
            if v["flagged"] or not v["finite"]:
                flagged.append((ser.scenario, p, v["C_T"]))
    print("\n".join(lines))
    doc = {name: {io.p_label(p): v for p, v in per.items()} for name, per in rep.items()}
    if args.out:
        io.write_atomic(Path(args.out) / "constants.json", json.dumps(io._jsonable(doc), indent=2) + "\n")
    checks = [CheckResult("ratio_cap", not flagged, max(v["C_T"] for per in rep.values() for v in per.values()),
                          args.cap, "; ".join(f"{a} p={io.p_label(b)}: {c:.4g}" for a, b, c in flagged))]
    return _finish(checks, quiet=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value scenario file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="seed for the random initial-data suite")
    common.add_argument("--scheme", choices=SCHEMES, default=None)
    common.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="modlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("simulate", parents=[common], help="run one scenario, write norms and snapshots")
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sp.add_argument("--checks", help="comma separated subset of: " + ", ".join(CHECKS))
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("characteristics", parents=[common], help="trajectory, Jacobian and weighted-integral batch")
    sp.set_defaults(func=cmd_characteristics)
    sp = sub.add_parser("transform", parents=[common], help="transform, invert and measure a field file")
    sp.add_argument("field", help="snapshot file")
    sp.set_defaults(func=cmd_transform)
    sp = sub.add_parser("report", parents=[common], help="aggregate norms.csv files into constant tables")
    sp.add_argument("inputs", nargs="+", help="norms.csv files or directories holding one")
    sp.add_argument("--cap", type=float, default=100.0)
    sp.add_argument("--window", choices=("fixed", "evolved"), default="fixed")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "simulate" and not args.out:
        print("error: simulate needs --out", file=sys.stderr)
        return EXIT_CONFIG
    if not args.tol_scale > 0:
        print("error: --tol-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except C.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
