"""Command-line entry point: ``macrb <command> [--config FILE] [--key value ...]``.

Every command writes CSV files (plus a JSON summary where noted) into
``--out``. Each CSV starts with comment lines recording the command, an
optional timestamp and the fully resolved configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .crb import crb_curve
from .geometry import AntennaPositionVector, ConstraintError, format_apv, maxvar_apv, parse_apv, ufa_apv, uhw_apv
from .optimizer import evaluate_placement, optimize_placement, sweep_region_size
from .precoding import DegenerateGeometryError, optimal_precoder
from .runconfig import KEYS, ConfigError, RunConfig, load_config, parse_region
from .scc import UncertaintyRegion, scc_profile
from .simulate import run_monte_carlo

log = logging.getLogger("macrb")

COMMANDS = ("crb-map", "optimize", "scc-profile", "crb-profile", "sweep", "simulate")
DEFAULT_SELECTORS = ("maxvar", "ufa", "uhw", "opt")


class Run:
    """Resolved configuration plus output plumbing for one command."""

    def __init__(self, command: str, rc: RunConfig):
        self.command = command
        self.rc = rc
        self.cfg = rc.scenario()
        self.region = rc.uncertainty_region()
        self.out = Path(rc.out)
        self.failures = 0
        self._opt_cache = {}

    def header(self, extra: dict | None = None) -> list[str]:
        lines = [f"# command: {self.command}"]
        if self.rc.metadata:
            lines.append(f"# generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
        lines.append("# config: " + json.dumps(self.rc.as_dict(), sort_keys=True))
        for k, v in (extra or {}).items():
            lines.append(f"# {k}: {v}")
        return lines

    def write_csv(self, name: str, columns: list[str], rows, extra: dict | None = None) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        with open(path, "w", newline="") as fh:
            for line in self.header(extra):
                fh.write(line + "\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        log.info("wrote %s", path)
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        doc = {"command": self.command, "config": self.rc.as_dict(), **payload}
        if self.rc.metadata:
            doc["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_fmt) + "\n")
        log.info("wrote %s", path)
        return path

    def optimize(self, region: UncertaintyRegion, diagnostics: bool = False):
        key = (tuple(region.angles_deg), region.center_deg, region.kappa_scc, diagnostics)
        if key not in self._opt_cache:
            self._opt_cache[key] = optimize_placement(
                self.rc.grid(), region, self.cfg, diagnostics, self.rc.workers, self.rc.fine_step,
                self.rc.beamwidth_criterion)
        return self._opt_cache[key]

    def resolve_apv(self, selector: str, index: int = 0) -> tuple[str, AntennaPositionVector]:
        sel = selector.strip()
        fixed = {"maxvar": maxvar_apv, "ufa": ufa_apv, "uhw": uhw_apv}
        if sel in fixed:
            return sel, fixed[sel](self.cfg)
        if sel == "opt" or sel.startswith("opt:"):
            region = self.region
            label = "opt"
            if sel.startswith("opt:"):
                lo, hi, c = parse_region(sel[4:])
                region = UncertaintyRegion.from_bounds(lo, hi, c, self.rc.region_step, self.rc.kappa_scc)
                label = f"opt_{lo:g}_{hi:g}"
            report = self.optimize(region)
            if report.best is None:
                raise ValueError(f"no feasible placement for selector {sel!r}")
            return label, report.best.apv
        apv = parse_apv(sel, name=f"custom{index}")
        apv.validate(self.cfg)
        return apv.name, apv


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _crb_cols(res):
    if res.worst_crb is None:
        return None, None
    return res.worst_crb.deg, res.worst_crb.variance


def _report_summary(report) -> dict:
    best = report.best
    least = report.least_violating
    return {
        "status": report.status,
        "best_a_lambda": None if best is None else best.a,
        "best_b_lambda": None if best is None else best.b,
        "best_apv": None if best is None else format_apv(best.apv),
        "best_worst_crb_deg": None if best is None else best.worst_crb.deg,
        "best_worst_crb_rad2": None if best is None else best.worst_crb.variance,
        "best_worst_angle_deg": None if best is None else best.worst_angle_deg,
        "best_max_sidelobe_scc": None if best is None else best.max_sidelobe_scc,
        "n_cells": len(report.cells),
        "n_geometry_ok": report.n_geometry_ok,
        "n_feasible": report.n_feasible,
        "feasible_fraction": report.feasible_fraction,
        "least_violating": None if least is None else {
            "a_lambda": least.a, "b_lambda": least.b, "max_sidelobe_scc": least.max_sidelobe_scc},
    }


def cmd_crb_map(run: Run, args) -> None:
    report = run.optimize(run.region, diagnostics=run.rc.diagnostics)
    rows = []
    for c in report.cells:
        deg_, rad2 = _crb_cols(c)
        if c.geometry_ok and c.error:
            run.failures += 1
        rows.append([c.a, c.b, c.feasible, deg_, rad2, c.max_sidelobe_scc, c.error])
    run.write_csv("crb_map.csv", ["a_lambda", "b_lambda", "feasible", "worst_crb_deg", "worst_crb_rad2",
                                  "max_sidelobe_scc", "error"], rows)
    summary = _report_summary(report)
    run.write_json("crb_map_summary.json", summary)
    _print_summary(summary)


def cmd_optimize(run: Run, args) -> None:
    report = run.optimize(run.region, diagnostics=False)
    summary = _report_summary(report)
    run.write_json("optimize_summary.json", summary)
    _print_summary(summary)


def _print_summary(s: dict) -> None:
    if s["status"] != "ok":
        lv = s["least_violating"]
        print(f"infeasible: no cell satisfies the SCC constraint; least violating {lv}")
        return
    print(f"best a = {s['best_a_lambda']:g}, b = {s['best_b_lambda']:g}  apv = [{s['best_apv']}]")
    print(f"worst-case CRB = {s['best_worst_crb_deg']:.6g} deg ({s['best_worst_crb_rad2']:.6g} rad^2) "
          f"at {s['best_worst_angle_deg']:g} deg; feasible fraction {s['feasible_fraction']:.4f}")


def _selectors(args):
    return args.apv or list(DEFAULT_SELECTORS)


def cmd_scc_profile(run: Run, args) -> None:
    for i, sel in enumerate(_selectors(args)):
        label, apv = run.resolve_apv(sel, i)
        prof = scc_profile(apv, run.region, run.cfg, run.rc.fine_step, run.rc.beamwidth_criterion)
        rows = zip(prof.angles_deg, prof.values, prof.mainlobe)
        extra = {"apv": format_apv(apv), "beamwidth_deg": repr(prof.beamwidth.width_deg),
                 "max_sidelobe_scc": repr(prof.max_sidelobe), "feasible": int(prof.feasible)}
        run.write_csv(f"scc_profile_{label}.csv", ["theta_deg", "scc_mag", "in_mainlobe"], rows, extra)
        print(f"{label}: max sidelobe SCC {prof.max_sidelobe:.4f} ({'feasible' if prof.feasible else 'infeasible'})")


def cmd_crb_profile(run: Run, args) -> None:
    for i, sel in enumerate(_selectors(args)):
        label, apv = run.resolve_apv(sel, i)
        F = optimal_precoder(run.region.center, apv, run.cfg)
        crb = crb_curve(apv, F, run.region.angles, run.cfg)
        rows = []
        for th, v in zip(run.region.angles_deg, crb):
            if np.isfinite(v):
                rows.append([th, v, float(np.rad2deg(np.sqrt(v))), None])
            else:
                run.failures += 1
                rows.append([th, None, None, "Fisher information vanishes (precoder null)"])
        run.write_csv(f"crb_profile_{label}.csv", ["theta_deg", "crb_rad2", "crb_deg", "error"], rows,
                      {"apv": format_apv(apv)})


def cmd_sweep(run: Run, args) -> None:
    rc = run.rc
    center = run.region.center_deg
    rows = sweep_region_size(rc.spans, center, rc.grid(), run.cfg, rc.region_step, rc.kappa_scc,
                             rc.workers, rc.fine_step, rc.beamwidth_criterion)
    out = []
    for row in rows:
        res = row.result
        deg_, _ = _crb_cols(res)
        if res.geometry_ok and res.error:
            run.failures += 1
        out.append([row.span_deg, row.solution, res.feasible, deg_, res.error,
                    None if res.apv is None else format_apv(res.apv)])
    run.write_csv("sweep.csv", ["span_deg", "solution_name", "feasible", "worst_crb_deg", "error", "apv"], out,
                  {"theta_c_deg": repr(center)})


def cmd_simulate(run: Run, args) -> None:
    rc = run.rc
    center = run.region.center_deg
    est_region = UncertaintyRegion.from_span(center, rc.sim_span, rc.region_step, rc.kappa_scc)
    theta_true = center if rc.theta_true is None else rc.theta_true
    selectors = args.apv or ["maxvar"]
    summary = []
    for i, sel in enumerate(selectors):
        label, apv = run.resolve_apv(sel, i)
        for snr_db in rc.snr_list:
            cfg = run.cfg.with_snr_db(snr_db)
            mc = run_monte_carlo(theta_true, apv, est_region, cfg, rc.trials, rc.seed,
                                 full_domain=rc.full_domain, workers=rc.workers)
            rows = [[t, int(s), theta_true, est, err, None, None]
                    for t, (s, est, err) in enumerate(zip(mc.seeds, mc.estimates_deg, mc.errors_deg))]
            rows.append(["summary", rc.seed, theta_true, None, None, mc.rmse_deg, mc.sqrt_crb_deg])
            run.write_csv(f"simulate_{label}_{snr_db:g}dB.csv",
                          ["trial", "seed", "theta_true_deg", "theta_hat_deg", "error_deg", "rmse_deg",
                           "sqrt_crb_deg"], rows, {"apv": format_apv(apv), "snr_db": repr(float(snr_db))})
            summary.append([label, snr_db, rc.trials, mc.rmse_deg, mc.sqrt_crb_deg, mc.ratio,
                            mc.rmse_stderr_deg, mc.boundary_hits])
            print(f"{label} @ {snr_db:g} dB: RMSE {mc.rmse_deg:.5g} deg, sqrt(CRB) {mc.sqrt_crb_deg:.5g} deg, "
                  f"ratio {mc.ratio:.4f}")
    run.write_csv("simulate_summary.csv", ["apv", "snr_db", "trials", "rmse_deg", "sqrt_crb_deg", "ratio",
                                           "rmse_stderr_deg", "boundary_hits"], summary)


HANDLERS = {
    "crb-map": cmd_crb_map,
    "optimize": cmd_optimize,
    "scc-profile": cmd_scc_profile,
    "crb-profile": cmd_crb_profile,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file; flags override its keys")
    for key, (section, _, help_) in KEYS.items():
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE",
                            help=f"[{section}] {help_}")
    common.add_argument("--no-metadata", action="store_const", const="false", dest="metadata",
                        help="omit the timestamp comment line")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="macrb", description="AoD CRB maps, robust movable-antenna placement and estimator checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("scc-profile", "crb-profile", "simulate"):
            p.add_argument("--apv", action="append",
                           help="maxvar | ufa | uhw | opt | opt:MIN:MAX[:CENTER] | comma-separated positions "
                                "(repeatable)")
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    """``--region -10:30`` -> ``--region=-10:30`` so argparse does not take
    a negative value for an option."""
    value_flags = {f"--{k.replace('_', '-')}" for k in KEYS} | {"--apv", "--config"}
    out = []
    it = iter(argv)
    for tok in it:
        if tok in value_flags:
            nxt = next(it, None)
            if nxt is not None and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: getattr(args, k) for k in KEYS}
    try:
        rc = load_config(args.config, overrides)
        run = Run(args.command, rc)
    except ConfigError as exc:
        parser.exit(2, f"macrb: error: {exc}\n")
    try:
        HANDLERS[args.command](run, args)
    except (ConstraintError, DegenerateGeometryError, ValueError) as exc:
        print(f"macrb: error: {exc}", file=sys.stderr)
        return 1
    if run.failures:
        print(f"macrb: {run.failures} row(s) could not be evaluated; see the error column", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
