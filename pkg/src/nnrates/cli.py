"""Command-line front end.

Subcommands:
  run <config.json>        execute the experiment blocks in a config file
  bounds eval --theorem T  evaluate closed-form guarantee parameters
  analyze boundary ...     classify probe points and report boundary mass

Exit codes: 0 success, 2 argument/config validation failure (nothing is
written), 3 resource-limit refusal, 4 I/O failure.  Observed bound
violations are data, never an exit code.

All numbers in reports are canonicalized to 12 significant digits at
report construction, so CSV and JSON renderings of a run agree exactly
and reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds
from .boundary import boundary_measure, region_classify
from .distributions import FiniteAtomic, load_distribution
from .errors import DomainError, InapplicableError, InfeasibleParametersError, ResourceLimitError
from .harness import (
    KRule,
    consistency_sweep,
    estimate_expected_excess,
    rate_sweep,
    run_lower_bound_trials,
    run_upper_bound_trials,
)

__all__ = ["main"]

_EXPERIMENT_TYPES = ("upper_bound", "lower_bound", "excess", "rate_sweep", "consistency")


def _canon(value):
    """Canonical 12-significant-digit value for report payloads."""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isfinite(v):
            return float(f"{v:.12g}")
        return v
    return value


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


@dataclass
class Report:
    columns: list[str]
    rows: list[list]
    summary: dict

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        lines.append("# " + " ".join(f"{k}={_fmt(v)}" for k, v in self.summary.items()))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "columns": {
                name: [row[i] for row in self.rows] for i, name in enumerate(self.columns)
            },
            "summary": self.summary,
        }
        return json.dumps(payload, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _report(columns, rows, summary) -> Report:
    canon_rows = [[_canon(v) for v in row] for row in rows]
    canon_summary = {k: _canon(v) for k, v in summary.items()}
    return Report(list(columns), canon_rows, canon_summary)


# -- config parsing ------------------------------------------------------------


class ConfigError(ValueError):
    pass


def _require(mapping: dict, key: str, kind, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    value = mapping[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{where}: key {key!r} must be {kind.__name__}")
    return value


def _parse_k_rule(raw, where: str) -> KRule:
    if isinstance(raw, int) and not isinstance(raw, bool):
        return KRule("fixed", k=raw)
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: k rule must be an integer or an object")
    kind = _require(raw, "kind", str, where)
    if kind == "fixed":
        return KRule("fixed", k=_require(raw, "k", int, where))
    if kind == "power":
        return KRule("power", exponent=_require(raw, "exponent", float, where))
    if kind == "sqrt":
        return KRule("sqrt")
    if kind == "rate_optimal":
        delta = raw.get("delta")
        if delta is not None and not isinstance(delta, (int, float)):
            raise ConfigError(f"{where}: delta must be numeric")
        return KRule(
            "rate_optimal",
            k_scale=float(raw.get("k_scale", 1.0)),
            alpha=float(raw.get("alpha", 1.0)),
            delta=None if delta is None else float(delta),
        )
    raise ConfigError(f"{where}: unknown k rule kind {kind!r}")


def _parse_n_grid(raw, where: str) -> list[int]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: n_grid must be a nonempty list")
    grid = []
    for v in raw:
        if not isinstance(v, int) or isinstance(v, bool) or v < 2:
            raise ConfigError(f"{where}: n_grid entries must be integers >= 2")
        grid.append(v)
    return grid


@dataclass
class _Plan:
    """A fully validated experiment, ready to execute."""

    index: int
    kind: str
    runner: object  # zero-argument callable producing (Report, summary_status)
    filename: str


def _validate_experiment(i: int, block, dist, defaults: dict) -> _Plan:
    where = f"experiments[{i}]"
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: must be an object")
    kind = _require(block, "type", str, where)
    if kind not in _EXPERIMENT_TYPES:
        raise ConfigError(f"{where}: unknown type {kind!r}")
    trials = block.get("trials", defaults["trials"])
    mc_points = block.get("mc_points", defaults["mc_points"])
    seed = defaults["master_seed"]
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError(f"{where}: trials must be a positive integer")
    if not isinstance(mc_points, int) or mc_points < 1:
        raise ConfigError(f"{where}: mc_points must be a positive integer")

    if kind == "upper_bound":
        n = _require(block, "n", int, where)
        k = _parse_k_rule(block.get("k", block.get("k_rule")), where).k_for(n)
        delta = _require(block, "delta", float, where)
        schedule = block.get("schedule", "confidence")
        if schedule not in ("confidence", "zero_bayes"):
            raise ConfigError(f"{where}: schedule must be 'confidence' or 'zero_bayes'")
        # surface infeasible (n, k, delta) now, before any output exists
        if schedule == "confidence":
            bounds.upper_bound_params(n, k, delta)
        else:
            bounds.zero_bayes_params(n, k, delta)

        def run_upper():
            rep = run_upper_bound_trials(dist, n, k, delta, trials, seed, schedule)
            rows = [
                [t, rep.n, rep.k, rep.delta, p, rep.bound, v]
                for t, (p, v) in enumerate(zip(rep.mistake_probs, rep.violated))
            ]
            summary = {
                "schedule": rep.schedule,
                "boundary_mass": rep.boundary_mass,
                "violation_frequency": rep.violation_frequency,
                "wilson_low": rep.wilson_low,
                "wilson_high": rep.wilson_high,
            }
            cols = ["trial", "n", "k", "delta", "mistake_prob", "bound", "violated"]
            return _report(cols, rows, summary)

        return _Plan(i, kind, run_upper, f"{i:02d}_upper_bound")

    if kind == "lower_bound":
        n = _require(block, "n", int, where)
        k = _parse_k_rule(block.get("k", block.get("k_rule")), where).k_for(n)
        cap = block.get("trials")
        if cap is not None and (not isinstance(cap, int) or cap < 1):
            raise ConfigError(f"{where}: trials must be a positive integer")

        def run_lower():
            chk = run_lower_bound_trials(dist, n, k, cap, seed)
            rows = [[chk.n, chk.k, chk.lhs, chk.stderr]]
            summary = {
                "lhs": chk.lhs,
                "rhs": chk.rhs,
                "stderr": chk.stderr,
                "trials_used": chk.trials_used,
                "high_error_mass": chk.high_error_mass,
                "constant": chk.constant,
                "passed": int(chk.passed),
            }
            return _report(["n", "k", "mean_excess", "stderr"], rows, summary)

        return _Plan(i, kind, run_lower, f"{i:02d}_lower_bound")

    if kind == "excess":
        n = _require(block, "n", int, where)
        k = _parse_k_rule(block.get("k", block.get("k_rule")), where).k_for(n)

        def run_excess():
            est = estimate_expected_excess(dist, n, k, trials, mc_points, seed)
            rows = [[est.n, est.k, est.mean, est.stderr]]
            summary = {"trials": trials, "mc_points": mc_points}
            return _report(["n", "k", "mean_excess", "stderr"], rows, summary)

        return _Plan(i, kind, run_excess, f"{i:02d}_excess")

    n_grid = _parse_n_grid(block.get("n_grid"), where)
    rule = _parse_k_rule(block.get("k_rule", {"kind": "sqrt"}), where)
    for n in n_grid:
        rule.k_for(n)  # raises on an out-of-range k before anything runs

    if kind == "rate_sweep":

        def run_rate():
            sweep = rate_sweep(dist, n_grid, rule, trials, mc_points, seed)
            rows = [[r.n, r.k, r.mean_excess, r.stderr] for r in sweep.rows]
            summary = {
                "slope": sweep.slope,
                "intercept": sweep.intercept,
                "excluded": ";".join(str(n) for n in sweep.excluded) or "none",
            }
            return _report(["n", "k", "mean_excess", "stderr"], rows, summary)

        return _Plan(i, kind, run_rate, f"{i:02d}_rate_sweep")

    def run_consistency():
        sweep = consistency_sweep(dist, n_grid, rule, trials, mc_points, seed)
        rows = [[r.n, r.k, r.mean_excess, r.stderr] for r in sweep.rows]
        summary = {"spearman": sweep.spearman}
        for r in sweep.rows:
            summary[f"median_{r.n}"] = r.median_excess
        return _report(["n", "k", "mean_excess", "stderr"], rows, summary)

    return _Plan(i, kind, run_consistency, f"{i:02d}_consistency")


# -- subcommand: run -----------------------------------------------------------


def _cmd_run(args) -> int:
    config_path = Path(args.config)
    try:
        text = config_path.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 4
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return 2

    try:
        if not isinstance(config, dict):
            raise ConfigError("config root must be an object")
        dist_cfg = config.get("distribution")
        if not isinstance(dist_cfg, dict):
            raise ConfigError("config: missing 'distribution' object")
        dist = load_distribution(dist_cfg, base_dir=config_path.parent)
        seed = args.master_seed if args.master_seed is not None else config.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("config: 'seed' must be an integer")
        out_dir = args.output_dir or config.get("output_dir", "reports")
        if not isinstance(out_dir, str):
            raise ConfigError("config: 'output_dir' must be a string")
        blocks = config.get("experiments")
        if not isinstance(blocks, list) or not blocks:
            raise ConfigError("config: 'experiments' must be a nonempty list")
        defaults = {
            "trials": args.trials if args.trials is not None else 400,
            "mc_points": args.mc_points if args.mc_points is not None else 2000,
            "master_seed": seed,
        }
        plans = [_validate_experiment(i, b, dist, defaults) for i, b in enumerate(blocks)]
    except (ConfigError, ValueError, DomainError, InfeasibleParametersError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_path = Path(out_dir)
    if not out_path.is_absolute():
        out_path = config_path.parent / out_path
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    ext = args.format
    statuses = []
    outputs = []
    try:
        out_path.mkdir(parents=True, exist_ok=True)
        for plan in plans:
            report = plan.runner()
            target = out_path / f"{plan.filename}.{ext}"
            target.write_text(report.render(ext))
            outputs.append(str(target))
            statuses.append({"index": plan.index, "type": plan.kind, "status": "ok"})
    except ResourceLimitError as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 4

    manifest = {
        "config": config,
        "master_seed": seed,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": outputs,
        "experiments": statuses,
    }
    try:
        (out_path / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 4
    print(json.dumps(manifest, indent=2))
    return 0


# -- subcommand: bounds eval ---------------------------------------------------


def _bounds_pairs(args) -> list[tuple[str, object]]:
    kind = args.theorem
    if kind == "1":
        params = bounds.upper_bound_params(args.n, args.k, args.delta)
        return [
            ("n", params.n),
            ("k", params.k),
            ("delta", params.delta),
            ("mass_level", params.mass_level),
            ("band", params.band),
            ("chernoff_slack", params.chernoff_slack),
        ]
    if kind == "3":
        if args.k is None:
            raise ConfigError("--k is required for the lower-bound constants")
        c = bounds.lower_bound_constants(args.k)
        return [
            ("k", args.k),
            ("wrong_vote", c.wrong_vote),
            ("count_tail", c.count_tail),
            ("product", c.product),
        ]
    if kind == "4":
        if None in (args.n, args.smooth_exponent, args.smooth_constant, args.margin_exponent, args.margin_constant):
            raise ConfigError(
                "--n, --smooth_exponent, --smooth_constant, --margin_exponent and "
                "--margin_constant are required for the margin rate"
            )
        result = bounds.margin_rate(
            args.n,
            bounds.SmoothnessSpec(args.smooth_exponent, args.smooth_constant),
            bounds.MarginSpec(args.margin_exponent, args.margin_constant),
            delta=args.delta,
            k_scale=args.k_scale,
            c_scale=args.c_scale,
        )
        return [("n", args.n), ("k", result.k), ("bound", result.bound), ("mode", result.mode)]
    if kind == "exp":
        if None in (args.n, args.margin_floor, args.smooth_exponent, args.smooth_constant):
            raise ConfigError(
                "--n, --margin_floor, --smooth_exponent and --smooth_constant are "
                "required for the exponential regime"
            )
        regime = bounds.exponential_regime(
            args.margin_floor,
            bounds.SmoothnessSpec(args.smooth_exponent, args.smooth_constant),
            args.n,
        )
        return [
            ("n", args.n),
            ("k", regime.k),
            ("delta", regime.delta),
            ("rate_constant", regime.rate_constant),
            ("bound", regime.bound),
        ]
    # kind == "zero"
    if None in (args.n, args.k, args.delta):
        raise ConfigError("--n, --k and --delta are required for the zero-noise level")
    level = bounds.zero_bayes_params(args.n, args.k, args.delta)
    return [("n", args.n), ("k", args.k), ("delta", args.delta), ("mass_level", level)]


def _cmd_bounds_eval(args) -> int:
    try:
        pairs = [(k, _canon(v)) for k, v in _bounds_pairs(args)]
    except (ConfigError, ValueError, DomainError, InfeasibleParametersError, InapplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "csv":
        print(",".join(k for k, _ in pairs))
        print(",".join(_fmt(v) for _, v in pairs))
    else:
        for k, v in pairs:
            print(f"{k}={_fmt(v)}")
    return 0


# -- subcommand: analyze boundary ----------------------------------------------


def _cmd_analyze_boundary(args) -> int:
    dist_path = Path(args.dist)
    try:
        text = dist_path.read_text()
    except OSError as exc:
        print(f"error: cannot read distribution file: {exc}", file=sys.stderr)
        return 4
    try:
        cfg = json.loads(text)
        if not isinstance(cfg, dict):
            raise ValueError("distribution file must hold a JSON object")
        dist = load_distribution(cfg, base_dir=dist_path.parent)
        if not 0.0 < args.p <= 1.0:
            raise ValueError("--p must lie in (0, 1]")
        if not 0.0 <= args.delta <= 0.5:
            raise ValueError("--delta must lie in [0, 1/2]")
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if isinstance(dist, FiniteAtomic):
        probes = [float(i) for i in range(dist.space.size)]
    else:
        probes = list(np.linspace(0.0, 1.0, 201))
    rows = []
    for x in probes:
        verdict = region_classify(dist, x, args.p, args.delta)
        radius = "" if verdict.binding_radius is None else _canon(verdict.binding_radius)
        rows.append([_canon(x), verdict.verdict, radius])
    mass = boundary_measure(dist, args.p, args.delta)
    summary = {
        "p": args.p,
        "delta": args.delta,
        "boundary_mass": mass.value,
        "mass_error_bound": mass.error_bound,
    }
    report = _report(["x", "verdict", "binding_radius"], rows, summary)
    rendered = report.render(args.format)
    if args.output_dir:
        out_path = Path(args.output_dir)
        try:
            out_path.mkdir(parents=True, exist_ok=True)
            target = out_path / f"boundary_verdicts.{args.format}"
            target.write_text(rendered)
        except OSError as exc:
            print(f"error: I/O failure: {exc}", file=sys.stderr)
            return 4
        print(str(target))
    else:
        sys.stdout.write(rendered)
    return 0


# -- parser --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnrates",
        description="Nearest-neighbor risk bounds: experiments, formulas, region analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the experiment blocks in a JSON config")
    run_p.add_argument("config", help="path to the experiment config file")
    run_p.add_argument("--master_seed", type=int, default=None)
    run_p.add_argument("--trials", type=int, default=None)
    run_p.add_argument("--mc_points", type=int, default=None)
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.add_argument("--output_dir", default=None)
    run_p.set_defaults(func=_cmd_run)

    bounds_p = sub.add_parser("bounds", help="closed-form guarantee evaluation")
    bounds_sub = bounds_p.add_subparsers(dest="bounds_command", required=True)
    eval_p = bounds_sub.add_parser("eval", help="print guarantee parameters as key=value")
    eval_p.add_argument("--theorem", required=True, choices=("1", "3", "4", "exp", "zero"))
    eval_p.add_argument("--n", type=int, default=None)
    eval_p.add_argument("--k", type=int, default=None)
    eval_p.add_argument("--delta", type=float, default=None)
    eval_p.add_argument("--smooth_exponent", type=float, default=None)
    eval_p.add_argument("--smooth_constant", type=float, default=None)
    eval_p.add_argument("--margin_exponent", type=float, default=None)
    eval_p.add_argument("--margin_constant", type=float, default=None)
    eval_p.add_argument("--margin_floor", type=float, default=None)
    eval_p.add_argument("--k_scale", type=float, default=1.0)
    eval_p.add_argument("--c_scale", type=float, default=1.0)
    eval_p.add_argument("--format", choices=("csv", "keyvalue"), default="keyvalue")
    eval_p.set_defaults(func=_cmd_bounds_eval)

    analyze_p = sub.add_parser("analyze", help="distribution-dependent region analysis")
    analyze_sub = analyze_p.add_subparsers(dest="analyze_command", required=True)
    boundary_p = analyze_sub.add_parser("boundary", help="classify probes against the effective boundary")
    boundary_p.add_argument("--dist", required=True, help="JSON distribution config file")
    boundary_p.add_argument("--p", type=float, required=True)
    boundary_p.add_argument("--delta", type=float, required=True, help="interior band width")
    boundary_p.add_argument("--format", choices=("csv", "json"), default="csv")
    boundary_p.add_argument("--output_dir", default=None)
    boundary_p.set_defaults(func=_cmd_analyze_boundary)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad arguments, which matches the contract;
        # let --help exits pass through unchanged
        raise exc
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
