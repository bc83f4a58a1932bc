"""Command-line interface.

Subcommands: validate, equilibrium, simulate, defaults, sweep, reproduce.
One JSON document carries economy + shock + signal + engine; command-line
flags override the document's engine fields.  Exit codes: 0 success,
1 validation or reproduction failure, 2 usage error.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .defaults import classify_defaults_single_shock, line_thresholds
from .document import canonical_document, load_document, parse_document
from .economy import leontief
from .equilibrium import leverage_comparative_statics
from .errors import RigidnetError, UsageError
from .montecarlo import run_campaign
from .pipeline import solve_cells
from .scenarios import GOLDEN, detect_line, reproduce


def _header(args_dict: dict) -> list[str]:
    cfg = " ".join(f"{k}={v}" for k, v in sorted(args_dict.items()) if v is not None)
    return [f"# rigidnet {__version__}", f"# {cfg}"]


def _write_csv(path: Path, header: list[str], columns: list[str], rows) -> None:
    lines = list(header)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    doc = load_document(args.file)
    parsed = parse_document(doc)
    engine = parsed.engine
    if getattr(args, "draws", None):
        engine = replace(engine, num_draws=args.draws)
    if getattr(args, "seed", None) is not None:
        engine = replace(engine, seed=args.seed)
    return replace(parsed, engine=engine)


def _require_shock(parsed):
    if parsed.model is None:
        raise UsageError("this command needs a shock section in the document")
    return parsed


def cmd_validate(args) -> int:
    parsed = parse_document(load_document(args.file))
    print(json.dumps(canonical_document(parsed), indent=2))
    return 0


def cmd_equilibrium(args) -> int:
    parsed = _require_shock(_load(args))
    econ = parsed.econ
    L = leontief(econ)
    sols = solve_cells(econ, L, parsed.model, parsed.signal, parsed.engine)
    out = _out_dir(args)
    rows = []
    payload = []
    for sol in sols:
        eq, prof = sol.equilibrium, sol.profile
        stats = {
            "y": eq.y0, "l": eq.l, "c": eq.c0, "p_over_w": eq.p_over_w,
            "p_rel": eq.p_rel, "zeta": prof.zeta, "xi": prof.xi,
            "v0": L.v0, "v_zeta": prof.v_zeta, "r": prof.r,
        }
        for name, vec in stats.items():
            for k in range(econ.n):
                rows.append(
                    (sol.cell if sol.cell is not None else "",
                     econ.theta[k], k + 1, name, float(vec[k]), "")
                )
        payload.append({
            "cell": sol.cell,
            "psi": prof.psi,
            "wage_identity": list(eq.wage_identity),
            **{name: np.asarray(vec).tolist() for name, vec in stats.items()},
        })
    header = _header({"file": args.file, "seed": parsed.engine.seed,
                      "backend": parsed.engine.backend})
    _write_csv(out / "equilibrium.csv", header,
               ["cell", "theta", "sector", "statistic", "value", "stderr"], rows)
    (out / "equilibrium.json").write_text(json.dumps({
        "config": canonical_document(parsed), "cells": payload}, indent=2))
    print(f"wrote {out / 'equilibrium.csv'}")
    return 0


def cmd_simulate(args) -> int:
    parsed = _require_shock(_load(args))
    econ = parsed.econ
    L = leontief(econ)
    sols = solve_cells(econ, L, parsed.model, parsed.signal, parsed.engine)
    if parsed.signal.kind == "partition":
        profile = [s.profile for s in sols]
        equil = [s.equilibrium for s in sols]
    else:
        profile, equil = sols[0].profile, sols[0].equilibrium
    report = run_campaign(
        econ, L, profile, equil, parsed.model, parsed.signal,
        parsed.engine.num_draws, parsed.engine.seed,
    )
    out = _out_dir(args)
    header = _header({"file": args.file, "seed": report.seed,
                      "draws": report.num_draws})
    rows = []
    per_sector = {
        "profit_mean": (report.profit_mean, report.profit_mean_se),
        "profit_sd": (report.profit_sd, report.profit_sd_se),
        "default_prob": (report.default_prob, report.default_prob_se),
        "tau_mean": (report.tau_mean, report.tau_mean_se),
        "eps_mean": (report.eps_mean, report.eps_mean_se),
    }
    for name, (vals, ses) in per_sector.items():
        for k in range(econ.n):
            rows.append(("", econ.theta[k], k + 1, name,
                         float(vals[k]), float(ses[k])))
    _write_csv(out / "simulate.csv", header,
               ["cell", "theta", "sector", "statistic", "value", "stderr"], rows)

    for name, hists in report.histograms.items():
        for k, h in enumerate(hists):
            lines = list(header) + [
                f"{h.edges[i]} {h.edges[i + 1]} {h.counts[i]}"
                for i in range(len(h.counts))
            ]
            (out / f"hist_{name}_sector{k + 1}.txt").write_text(
                "\n".join(lines) + "\n")

    payload = {
        "config": canonical_document(parsed),
        "num_draws": report.num_draws,
        "seed": report.seed,
        "welfare_mean": report.welfare_mean,
        "cascade_prob": report.cascade_prob,
        **{name: vals.tolist() for name, (vals, _) in per_sector.items()},
        **{f"{name}_se": ses.tolist() for name, (_, ses) in per_sector.items()},
    }
    if report.zeta is not None:
        payload["zeta"] = report.zeta.tolist()
        payload["xi"] = report.xi.tolist()
    (out / "report.json").write_text(json.dumps(payload, indent=2))
    print(f"wrote {out / 'simulate.csv'}")
    return 0


def cmd_defaults(args) -> int:
    parsed = _require_shock(_load(args))
    econ = parsed.econ
    L = leontief(econ)
    cls = classify_defaults_single_shock(
        econ, L, parsed.model, args.eta_o, parsed.signal,
        args.cell if parsed.signal.kind == "partition" else None,
    )
    out = _out_dir(args)
    header = _header({"file": args.file, "eta_o": args.eta_o})
    rows = [
        (k + 1, cls.verdicts[k], float(cls.L_minus[k]), float(L.L[k, cls.o]))
        for k in range(econ.n)
    ]
    _write_csv(out / "defaults.csv", header,
               ["sector", "verdict", "L_minus", "L_ko"], rows)
    payload = {
        "config": canonical_document(parsed),
        "o": cls.o + 1,
        "eta_o": cls.eta_o,
        "t_bar": cls.t_bar,
        "verdicts": cls.verdicts,
    }
    line = detect_line(econ)
    if line is not None and parsed.model.kind == "single_node_exponential":
        x_star = line_thresholds(line, parsed.model.rate, econ.n)
        payload["line_thresholds"] = [
            None if np.isinf(x) else float(x) for x in x_star
        ]
        payload["line_default_prob"] = [
            0.0 if np.isinf(x) else float(np.exp(parsed.model.rate * x))
            for x in x_star
        ]
    (out / "defaults.json").write_text(json.dumps(payload, indent=2))
    print(f"wrote {out / 'defaults.csv'}")
    return 0


def cmd_sweep(args) -> int:
    parsed = _require_shock(_load(args))
    econ = parsed.econ
    if not 1 <= args.sector <= econ.n:
        raise UsageError(f"--sector must be in 1..{econ.n}")
    grid = _parse_grid(args.theta_grid)
    L = leontief(econ)
    report = leverage_comparative_statics(
        econ, L, parsed.engine, parsed.model, parsed.signal,
        args.sector - 1, grid,
    )
    out = _out_dir(args)
    header = _header({"file": args.file, "sector": args.sector,
                      "theta_grid": args.theta_grid})
    rows = []
    for i, th in enumerate(report.theta_grid):
        for k in range(econ.n):
            rows.append((
                float(th), k + 1, float(report.xi[i, k]),
                float(report.labor[i, k]), float(report.c0[i, k]),
                float(report.p_over_w[i, k]), float(report.p_rel[i, k]),
            ))
    _write_csv(out / "sweep.csv", header,
               ["theta_o", "sector", "xi", "l", "c", "p_over_w", "p_rel"], rows)
    (out / "sweep.json").write_text(json.dumps({
        "sector": args.sector,
        "theta_grid": report.theta_grid.tolist(),
        "zeta_o": report.zeta_o.tolist(),
        "claims": report.claims,
    }, indent=2))
    print(f"wrote {out / 'sweep.csv'}")
    return 0 if all(report.claims.values()) else 1


def cmd_reproduce(args) -> int:
    result = reproduce(args.table, num_draws=args.draws, seed=args.seed)
    out = _out_dir(args)
    header = _header({"table": args.table, "draws": result.num_draws,
                      "seed": result.seed})
    rows = [
        (d.theta if d.theta is not None else "", d.sector, d.column,
         float(d.computed), round(d.computed, 2), float(d.expected),
         float(d.tol), "pass" if d.ok else "FAIL")
        for d in result.cells
    ]
    _write_csv(out / f"table{result.table}.csv", header,
               ["theta", "sector", "column", "computed", "computed_2dec",
                "expected", "tol", "status"], rows)
    bad = [d for d in result.cells if not d.ok]
    for d in result.cells:
        status = "pass" if d.ok else "FAIL"
        theta = f"theta={d.theta} " if d.theta is not None else ""
        print(f"table {result.table} {theta}sector {d.sector} {d.column}: "
              f"{d.computed:.4f} vs {d.expected} (tol {d.tol:.4f}) {status}")
    print(f"table {result.table}: {'PASS' if result.passed else 'FAIL'} "
          f"({len(result.cells) - len(bad)}/{len(result.cells)} cells)")
    return 0 if result.passed else 1


def _parse_grid(spec: str) -> np.ndarray:
    try:
        a, b, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise UsageError(f"--theta-grid must be a:b:step, got {spec!r}") from None
    if step <= 0 or b < a:
        raise UsageError("--theta-grid needs a <= b and step > 0")
    return np.arange(a, b + step * 0.5, step)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rigidnet",
        description="Rigid equilibria, endogenous debt costs and default "
                    "cascades on production networks",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="validate a document and echo it")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("equilibrium", help="solve debt costs and equilibrium")
    sp.add_argument("file")
    sp.add_argument("--out")
    sp.add_argument("--draws", type=int)
    sp.add_argument("--seed", type=int)
    sp.set_defaults(fn=cmd_equilibrium)

    sp = sub.add_parser("simulate", help="run a Monte Carlo campaign")
    sp.add_argument("file")
    sp.add_argument("--draws", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("defaults", help="classify defaults at a realization")
    sp.add_argument("file")
    sp.add_argument("--eta-o", type=float, required=True, dest="eta_o")
    sp.add_argument("--cell", type=int)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_defaults)

    sp = sub.add_parser("sweep", help="sweep one sector's leverage")
    sp.add_argument("file")
    sp.add_argument("--sector", type=int, required=True)
    sp.add_argument("--theta-grid", required=True, dest="theta_grid")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("reproduce", help="recompute a reference table")
    sp.add_argument("--table", required=True, choices=list(GOLDEN))
    sp.add_argument("--draws", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RigidnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
