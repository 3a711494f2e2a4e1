import argparse
import csv
import json
import math
import os
import sqlite3
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import run_log
from dani import PowerLaw, divergence_probe, identity_residual, power_law_rate, psi_to_rate, rate_to_psi
from diosearch import WitnessReport, count_growth, enumerate_solutions, thmA_witnesses, thmB_witnesses
from experiment_config import (
    ConfigError,
    ExperimentConfig,
    apply_env,
    config_reference,
    default_workers,
    load_config,
)
from flowlab import (
    CrosscheckVerdict,
    OrbitSpec,
    cusp_indicator,
    cusp_mass_from_deltas,
    crosscheck_corollary,
    crosscheck_dani,
    fit_tail_slope,
    joint_average,
    orbit_delta_series,
    window_deltas,
)
from lattice import EnumerationBudgetError
from numkit import WeightPair, normalize_constraint
from run_ledger import RunManifest, get_run_ledger

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_FAIL = 4


@dataclass
class CommandResult:
    name: str
    columns: List[str]
    rows: List[dict]
    summary: Dict = field(default_factory=dict)
    lines: List[str] = field(default_factory=list)
    failed: bool = False
    tables: Dict[str, Tuple[List[str], List[dict]]] = field(default_factory=dict)


# --- output ------------------------------------------------------------------

def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_table(out_dir: str, name: str, columns: Sequence[str], rows: Sequence[dict], fmt: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{name}.{fmt}")
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_cell(row.get(c, "")) for c in columns])
    else:
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"columns": list(columns), "rows": _plain(list(rows))}, f, indent=2, sort_keys=True)
            f.write("\n")
    return path


def theta_cell(theta) -> str:
    return " ".join(format_cell(x) for x in np.ravel(theta))


def parallel_map(func: Callable, items: Sequence, workers: int) -> list:
    """Ordered map; results never depend on the worker count."""
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --- per-sample work (module level so worker processes can import it) -------

def _search_sample(theta, psi, constraints, Qmax, budget) -> List[dict]:
    rows = []
    for i, cs in enumerate(constraints):
        for rec in enumerate_solutions(theta, psi, cs, Qmax, class_index=i, budget=budget):
            rows.append(rec.to_row())
    return rows


def _orbit_sample(spec_args, t_grid, eps, budget) -> List[dict]:
    rows = []
    for i, (theta, v, N, wp, kappa) in enumerate(spec_args):
        spec = OrbitSpec.for_class(theta, v, N, wp, kappa, t_grid)
        for t, delta in orbit_delta_series(spec, budget):
            rows.append({"class_index": i, "t": t, "delta": delta, "fired": bool(cusp_indicator(delta, eps))})
    return rows


def _window_sample(item, T_horizon, plan, budget) -> np.ndarray:
    theta, v, N, wp, kappa = item
    return window_deltas(OrbitSpec.for_class(theta, v, N, wp, kappa), T_horizon, plan, budget)


def _joint_sample(theta, class_args, eps, T_horizon, plan, budget):
    specs = [OrbitSpec.for_class(theta, v, N, wp, kappa) for v, N, wp, kappa in class_args]
    return joint_average(specs, [eps] * len(specs), T_horizon, plan, budget)


def _growth_sample(theta, psi, cs, grid, budget):
    return count_growth(theta, psi, cs, grid, budget)


def _thmA_sample(theta, constraints, c, delta, Qmax, budget) -> WitnessReport:
    return thmA_witnesses(theta, constraints, c, delta, Qmax, budget)


def _thmB_sample(theta, classes, eps, grid, require_primitive, distinct, budget) -> WitnessReport:
    return thmB_witnesses(theta, classes, eps, grid, require_primitive, distinct, budget)


def _corollary_sample(item, eps, times, budget) -> CrosscheckVerdict:
    theta, v, N, wp, kappa = item
    return crosscheck_corollary(OrbitSpec.for_class(theta, v, N, wp, kappa), eps, times, budget)


def _dani_sample(item, psi, Tmax, slack, step, budget) -> CrosscheckVerdict:
    theta, v, N, _, _ = item
    return crosscheck_dani(OrbitSpec.for_class(theta, v, N), psi, Tmax, slack, step, budget)


# --- commands ----------------------------------------------------------------

def _class_args(config: ExperimentConfig) -> list:
    """(v, N, weights, kappa) per class, all classes brought to one modulus."""
    norm = config.normalized()
    return [(cs.residues, norm.modulus, wp, kappa)
            for cs, wp, kappa in zip(norm.constraints, config.weight_pairs(), config.kappa_list())]


def _separate_class_args(config: ExperimentConfig) -> list:
    """(v, N, weights, kappa) per class, each class normalized on its own modulus."""
    out = []
    for cs, wp, kappa in zip(config.constraints(), config.weight_pairs(), config.kappa_list()):
        norm = normalize_constraint([cs], [wp])
        out.append((norm.constraints[0].residues, norm.modulus, wp, kappa))
    return out


def cmd_search(config: ExperimentConfig, workers: int) -> CommandResult:
    psi = config.approx_function()
    norm = config.normalized()
    thetas = config.thetas()
    work = partial(_search_sample, psi=psi, constraints=norm.constraints, Qmax=config.Qmax, budget=config.budget)
    rows = []
    for k, (theta, sample_rows) in enumerate(zip(thetas, parallel_map(work, thetas, workers))):
        for row in sample_rows:
            rows.append({"sample": k, "theta": theta_cell(theta), **row})
    columns = ["sample", "theta", "class_index", "p", "q", "residual", "qnorm"]
    summary = {"samples": len(thetas), "solutions": len(rows), "modulus": norm.modulus}
    return CommandResult("search", columns, rows, summary, [f"solutions={len(rows)}"])


def cmd_dani(config: ExperimentConfig, workers: int) -> CommandResult:
    psi = config.approx_function()
    m, n = config.m, config.n
    rate = psi_to_rate(psi, m, n, span=config.rate_span, step=config.rate_step)
    back = rate_to_psi(rate)
    grid = [float(t) for t in rate.grid()]
    rows = []
    for k, t in enumerate(grid):
        lam = rate.lam(t)
        row = {"t": t, "r": rate.r(t), "lam": lam, "L": rate.big_l(t),
               "identity_residual": identity_residual(psi, rate, t)}
        if k + 1 < len(grid):
            # log x halfway between two grid points, where r is interpolated
            lx = 0.5 * (lam + rate.lam(grid[k + 1]))
            row["roundtrip_log_x"] = lx
            row["roundtrip_error"] = abs(back.log_psi_log(lx) - psi._log_psi_extended(lx))
        rows.append(row)
    summary = {
        "t0": rate.t0,
        "max_identity_residual": max(r["identity_residual"] for r in rows),
        "max_roundtrip_error": max(r["roundtrip_error"] for r in rows if "roundtrip_error" in r),
    }
    if isinstance(psi, PowerLaw):
        closed = power_law_rate(psi.c, psi.delta, m, n, psi.x0, config.rate_span, config.rate_step)
        summary["closed_form_gap"] = max(abs(r["r"] - closed.r(r["t"])) for r in rows)
    t_end = rows[-1]["t"]
    psi_part, rate_part = divergence_probe(psi, rate, math.exp(rate.lam(t_end)), t_end)
    summary.update({"psi_integral": psi_part, "rate_integral": rate_part})
    lines = [f"max_identity_residual={summary['max_identity_residual']:.3e}",
             f"max_roundtrip_error={summary['max_roundtrip_error']:.3e}"]
    columns = ["t", "r", "lam", "L", "identity_residual", "roundtrip_log_x", "roundtrip_error"]
    return CommandResult("dani", columns, rows, summary, lines)


def cmd_orbit(config: ExperimentConfig, workers: int) -> CommandResult:
    thetas = config.thetas()
    class_args = _class_args(config)
    items = [[(theta, v, N, wp, kappa) for v, N, wp, kappa in class_args] for theta in thetas]
    work = partial(_orbit_sample, t_grid=tuple(config.t_grid()), eps=config.eps, budget=config.budget)
    rows = []
    for k, sample_rows in enumerate(parallel_map(work, items, workers)):
        rows.extend({"sample": k, **row} for row in sample_rows)
    fired = sum(1 for r in rows if r["fired"])
    summary = {"samples": len(thetas), "points": len(rows), "fired": fired}
    return CommandResult("orbit", ["sample", "class_index", "t", "delta", "fired"], rows, summary,
                         [f"points={len(rows)} fired={fired}"])


def cmd_cusp(config: ExperimentConfig, workers: int) -> CommandResult:
    class_args = _separate_class_args(config)
    thetas = config.thetas()
    items = [(theta, *args) for args in class_args for theta in thetas]
    work = partial(_window_sample, T_horizon=config.T_horizon, plan=config.renewal_plan(), budget=config.budget)
    arrays = parallel_map(work, items, workers)
    levels = list(config.cusp_levels)
    eps_list = [math.exp(-T) for T in levels]
    expected = -(config.m + config.n)

    rows, slopes, lines = [], [], []
    for i, (_, N, _, _) in enumerate(class_args):
        estimates = cusp_mass_from_deltas(arrays[i * len(thetas):(i + 1) * len(thetas)], eps_list, config.T_horizon)
        for T, eps, est in zip(levels, eps_list, estimates):
            rows.append({"class_index": i, "modulus": N, "T": T, "eps": eps,
                         "estimate": est.value, "samples": est.samples})
        values = [est.value for est in estimates]
        if len(values) >= 2 and min(values) > 0:
            slope = fit_tail_slope(levels, values)
            slopes.append(slope)
            lines.append(f"class {i} (N={N}): slope={slope:.4f} expected={expected}")
        else:
            slopes.append(None)
            run_log.warn(f"Class {i}: not enough positive cusp estimates to fit a tail slope")
    summary = {"moduli": [args[1] for args in class_args], "thetas": len(thetas),
               "expected_slope": expected, "slopes": slopes}
    return CommandResult("cusp", ["class_index", "modulus", "T", "eps", "estimate", "samples"],
                         rows, summary, lines)


def cmd_joint(config: ExperimentConfig, workers: int) -> CommandResult:
    class_args = _class_args(config)
    thetas = config.thetas()
    work = partial(_joint_sample, class_args=class_args, eps=config.eps, T_horizon=config.T_horizon,
                   plan=config.renewal_plan(), budget=config.budget)
    pairs = parallel_map(work, thetas, workers)
    rows = [{"sample": k, "theta": theta_cell(theta), "joint": j, "product": p}
            for k, (theta, (j, p)) in enumerate(zip(thetas, pairs))]
    joint = float(np.mean([j for j, _ in pairs]))
    product = float(np.mean([p for _, p in pairs]))
    summary = {"joint": joint, "product": product, "gap": abs(joint - product), "thetas": len(thetas)}
    return CommandResult("joint", ["sample", "theta", "joint", "product"], rows, summary,
                         [f"joint={joint:.4f} product={product:.4f} gap={abs(joint - product):.4f}"])


VERDICT_COLUMNS = ["sample", "class_index", "modulus", "check", "fired", "passed", "failed"]


def _verdict_rows(kind: str, entries: Sequence[tuple]) -> List[dict]:
    return [{"sample": k, "class_index": i, "modulus": N, "check": kind,
             "fired": v.fired, "passed": v.passed, "failed": v.failed}
            for k, i, N, v in entries]


def _merge(entries: Sequence[tuple]) -> CrosscheckVerdict:
    total = CrosscheckVerdict()
    for *_, v in entries:
        total = total.merge(v)
    return total


def _per_class_items(config: ExperimentConfig, class_args: Sequence[tuple]) -> Tuple[list, list]:
    """(sample, class_index, modulus) keys and worker items, sample by sample."""
    keys, items = [], []
    for k, theta in enumerate(config.thetas()):
        for i, (v, N, wp, kappa) in class_args:
            keys.append((k, i, N))
            items.append((theta, v, N, wp, kappa))
    return keys, items


def _corollary_verdicts(config: ExperimentConfig, workers: int) -> List[tuple]:
    keys, items = _per_class_items(config, list(enumerate(_separate_class_args(config))))
    work = partial(_corollary_sample, eps=config.eps, times=tuple(config.t_grid()), budget=config.budget)
    return [(*key, v) for key, v in zip(keys, parallel_map(work, items, workers))]


def _dani_verdicts(config: ExperimentConfig, workers: int) -> List[tuple]:
    uniform = WeightPair.uniform(config.m, config.n)
    eligible = [(i, args) for i, args in enumerate(_separate_class_args(config))
                if args[2] == uniform and args[3] == 1.0]
    if not eligible:
        run_log.warn("Dani reconciliation skipped: it needs equal weights and kappa = 1")
        return []
    keys, items = _per_class_items(config, eligible)
    work = partial(_dani_sample, psi=config.approx_function(), Tmax=config.Tmax,
                   slack=config.slack, step=config.t_step, budget=config.budget)
    return [(*key, v) for key, v in zip(keys, parallel_map(work, items, workers))]


def cmd_crosscheck(config: ExperimentConfig, workers: int) -> CommandResult:
    corollary = _corollary_verdicts(config, workers)
    rows = _verdict_rows("corollary", corollary)
    total = _merge(corollary)
    lines = [f"corollary: {total.summary()}"]
    dani = _dani_verdicts(config, workers)
    if dani:
        rows += _verdict_rows("dani", dani)
        lines.append(f"dani: {_merge(dani).summary()}")
        total = total.merge(_merge(dani))
    lines.append(total.summary())
    summary = {"fired": total.fired, "passed": total.passed, "failed": total.failed,
               "failures": total.details[:20]}
    return CommandResult("crosscheck", VERDICT_COLUMNS, rows, summary, lines, failed=not total.ok)


def _campaign_khintchine(config: ExperimentConfig, workers: int) -> CommandResult:
    cs = config.normalized().constraints[0]
    grid = config.count_grid()
    work = partial(_growth_sample, psi=config.approx_function(), cs=cs, grid=grid, budget=config.budget)
    thetas = config.thetas()
    tables = parallel_map(work, thetas, workers)
    rows = [{"sample": k, "Q": Q, "count": count}
            for k, table in enumerate(tables) for Q, count in table]
    early = 100 if 100 in grid else grid[0]
    late = 1000 if 1000 in grid else grid[len(grid) // 2]
    last = grid[-1]
    counts = [dict(t) for t in tables]
    zero = sum(1 for c in counts if c[last] == 0)
    growing = sum(1 for c in counts if c[last] > 0 and c[last] >= 3 * c[early])
    flat = sum(1 for c in counts if c[last] == c[late])
    total = len(thetas)
    summary = {"thetas": total, "grid": grid,
               "fraction_growing": growing / total, "growth_from": early,
               "fraction_flat": flat / total, "flat_from": late,
               "fraction_without_solutions": zero / total}
    lines = [f"fraction_growing={growing / total:.3f} (count(Q={last}) > 0 and >= 3 count(Q={early}))",
             f"fraction_flat={flat / total:.3f} (no new solutions on ({late}, {last}])",
             f"fraction_without_solutions={zero / total:.3f} (count(Q={last}) = 0)"]
    return CommandResult("campaign", ["sample", "Q", "count"], rows, summary, lines)


WITNESS_COLUMNS = ["sample", "theta", "Q", "class_index", "p", "q", "residual", "qnorm", "scale"]


def _witness_result(thetas, reports: Sequence[WitnessReport], summary: dict, lines: List[str]) -> CommandResult:
    """Per-sample witness counts, with every witness solution in a separate witnesses table."""
    rows, records = [], []
    for k, (theta, report) in enumerate(zip(thetas, reports)):
        qs = report.Qs
        rows.append({"sample": k, "theta": theta_cell(theta), "witnesses": len(qs),
                     "first_Q": qs[0] if qs else "", "last_Q": qs[-1] if qs else ""})
        records.extend({"sample": k, "theta": theta_cell(theta), **row} for row in report.to_rows())
    summary["witness_records"] = len(records)
    return CommandResult("campaign", ["sample", "theta", "witnesses", "first_Q", "last_Q"], rows, summary,
                         lines, tables={"witnesses": (WITNESS_COLUMNS, records)})


def _campaign_thmA(config: ExperimentConfig, workers: int) -> CommandResult:
    thetas = config.thetas()
    work = partial(_thmA_sample, constraints=config.normalized().constraints, c=config.c,
                   delta=config.delta, Qmax=config.Qmax, budget=config.budget)
    reports = parallel_map(work, thetas, workers)
    rich = sum(1 for rep in reports if len(rep.witnesses) >= 3)
    summary = {"thetas": len(thetas), "fraction_with_3_witnesses": rich / len(thetas),
               "mean_witnesses": float(np.mean([len(rep.witnesses) for rep in reports]))}
    return _witness_result(thetas, reports, summary, [f"fraction_with_3_witnesses={rich / len(thetas):.3f}"])


def _campaign_thmB(config: ExperimentConfig, workers: int, require_primitive: bool,
                   distinct: bool) -> CommandResult:
    norm = config.normalized()
    eps = config.eps / norm.eps_factor
    thetas = config.thetas()
    work = partial(_thmB_sample, classes=config.witness_classes(), eps=eps, grid=config.witness_grid(),
                   require_primitive=require_primitive, distinct=distinct, budget=config.budget)
    reports = parallel_map(work, thetas, workers)
    hit = sum(1 for rep in reports if rep.witnesses)
    summary = {"thetas": len(thetas), "eps": eps, "eps_factor": norm.eps_factor,
               "witness_rate": hit / len(thetas),
               "mean_witnesses": float(np.mean([len(rep.witnesses) for rep in reports]))}
    return _witness_result(thetas, reports, summary, [f"witness_rate={hit / len(thetas):.3f}"])


def _campaign_verdicts(kind: str, entries: List[tuple]) -> CommandResult:
    total = _merge(entries)
    summary = {"fired": total.fired, "passed": total.passed, "failed": total.failed,
               "failures": total.details[:20]}
    return CommandResult("campaign", VERDICT_COLUMNS, _verdict_rows(kind, entries), summary,
                         [total.summary()], failed=not total.ok)


def cmd_campaign(config: ExperimentConfig, workers: int) -> CommandResult:
    kind = config.campaign
    if kind == "khintchine":
        result = _campaign_khintchine(config, workers)
    elif kind == "thmA":
        result = _campaign_thmA(config, workers)
    elif kind == "thmB":
        result = _campaign_thmB(config, workers, config.require_primitive, config.distinct)
    elif kind == "dilation_control":
        result = _campaign_thmB(config, workers, True, True)
    elif kind == "corollary":
        result = _campaign_verdicts("corollary", _corollary_verdicts(config, workers))
    elif kind == "cusp":
        result = cmd_cusp(config, workers)
    elif kind == "joint":
        result = cmd_joint(config, workers)
    else:
        result = _campaign_verdicts("dani", _dani_verdicts(config, workers))
    result.summary["campaign"] = kind
    return result


COMMANDS: Dict[str, Callable[[ExperimentConfig, int], CommandResult]] = {
    "search": cmd_search,
    "dani": cmd_dani,
    "orbit": cmd_orbit,
    "cusp": cmd_cusp,
    "joint": cmd_joint,
    "crosscheck": cmd_crosscheck,
    "campaign": cmd_campaign,
}


# --- entry point -------------------------------------------------------------

def build_config(args) -> ExperimentConfig:
    config = apply_env(load_config(args.config))
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    if args.budget is not None:
        config.budget = args.budget
    if args.format is not None:
        config.format = args.format
    config.validate()
    return config


def execute(command: str, config: ExperimentConfig, workers: int) -> int:
    run_log.set_log_dir(config.out)
    config_hash = config.config_hash()
    manifest = RunManifest(command=command, config_hash=config_hash, started_at=run_log.now().isoformat())
    run_log.log(f"Starting {command} (config {config_hash[:12]}, workers={workers})")

    code = EXIT_OK
    try:
        result = COMMANDS[command](config, workers)
    except EnumerationBudgetError as e:
        print(f"Error: {e}")
        code = EXIT_BUDGET
    except ValueError as e:
        print(f"Error: {e}")
        code = EXIT_CONFIG
    except RuntimeError as e:
        print(f"Error: {e}")
        code = EXIT_FAIL
    else:
        path = write_table(config.out, command, result.columns, result.rows, config.format)
        manifest.columns = result.columns
        manifest.data_file = os.path.basename(path)
        for name, (columns, rows) in result.tables.items():
            extra = write_table(config.out, name, columns, rows, config.format)
            manifest.extra_files.append(os.path.basename(extra))
        manifest.summary = _plain(result.summary)
        for line in result.lines:
            print(line)
        if result.failed:
            code = EXIT_FAIL

    manifest.finished_at = run_log.now().isoformat()
    manifest.summary.setdefault("exit_code", code)
    if code == EXIT_OK or manifest.data_file:
        manifest.write(config.out, command)
    try:
        get_run_ledger().log_run(manifest, "SUCCESS" if code == EXIT_OK else "FAILED", code)
    except sqlite3.Error as e:
        print(f"Warning: could not record run in ledger: {e}")
    run_log.log(f"Finished {command} with exit code {code}")
    run_log.set_log_dir(None)
    return code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config (see config-reference)")
    common.add_argument("--seed", type=int, help="64-bit seed for theta sampling (overrides config)")
    common.add_argument("--out", help="Output directory (default: config 'out', env DIOLAB_OUT, 'runs')")
    common.add_argument("--budget", type=int, help="Enumeration node budget (default 10^7, env DIOLAB_BUDGET)")
    common.add_argument("--format", choices=["csv", "json"], help="Output format (default csv)")
    common.add_argument("--workers", type=int, help="Worker processes (default env DIOLAB_WORKERS or 1)")

    parser = argparse.ArgumentParser(description="Diophantine approximation lab with congruence conditions")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    subparsers.add_parser("search", parents=[common], help="Enumerate congruence-constrained solutions of |theta q + p|^m <= psi(|q|^n)")
    subparsers.add_parser("dani", parents=[common], help="Tabulate the rate function of psi with Dani-identity residuals")
    subparsers.add_parser("orbit", parents=[common], help="Delta along the orbit a(kappa t) u(theta) gamma Gamma_N")
    subparsers.add_parser("cusp", parents=[common], help="Estimate cusp masses at eps = e^-T and fit the tail slope")
    subparsers.add_parser("joint", parents=[common], help="Joint vs product time averages of cusp indicators")
    subparsers.add_parser("crosscheck", parents=[common], help="Reconcile cusp excursions with direct search")
    subparsers.add_parser("campaign", parents=[common], help="Seeded campaign over sampled theta (kind from config 'campaign')")
    subparsers.add_parser("config-reference", help="Print every config key with its default")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_OK
    if args.command == "config-reference":
        print(config_reference())
        return EXIT_OK

    try:
        config = build_config(args)
    except ValueError as e:
        print(f"Error: {e}")
        return EXIT_CONFIG
    workers = args.workers if args.workers is not None else default_workers()
    return execute(args.command, config, max(1, workers))


if __name__ == "__main__":
    sys.exit(main())
