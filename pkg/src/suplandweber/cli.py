"""Command line interface: generate, run, sweep, report.

All inputs are explicit flags or JSON files; nothing is read from the
environment. Config files look like

    {"lambda": "auto",
     "steps": {"kind": "geometric", "t0": 1.0, "ratio": 0.97},
     "perturbation": {"regularizer": {"kind": "tv-1d", "weight": 1.0},
                      "smoothing_eps": 1e-8, "mode": "unconditional"},
     "max_iter": 100000, "record_every": 100,
     "stopping": {"c": 1.0, "p": 0.5, "tau": 1.5, "cap": 100000}}

and problem files are either a generator spec (has a "generator" key) or a
materialized problem (has a "kind" key); see problems.py.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .iterate import (IterationConfig, References, StepSequence,
                      default_lambda, run_iteration)
from .problems import (NoiseSpec, Problem, ProblemSpec, generate_problem,
                       inject_noise, load_problem, save_problem)
from .records import FLAG_BUDGET_EXHAUSTED, emit, load_record
from .reference import pseudoinverse_solve
from .regularizers import PerturbationMap, Regularizer
from .stopping import StoppingRule
from .sweep import run_delta_sweep


def _load_problem_arg(path: str) -> Problem:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if "generator" in data:
        return generate_problem(ProblemSpec.from_dict(data))
    return load_problem(path)


def _parse_config(path: str, op) -> tuple[IterationConfig, dict]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    lam = data.get("lambda", "auto")
    if lam == "auto":
        lam = default_lambda(op)
    steps = StepSequence.from_dict(data.get("steps", {"kind": "zero"}))
    pert_data = data.get("perturbation")
    pert = None
    if pert_data is not None:
        reg = Regularizer(**pert_data["regularizer"])
        pert = PerturbationMap(regularizer=reg,
                               smoothing_eps=pert_data.get("smoothing_eps", 1e-8),
                               mode=pert_data.get("mode", "unconditional"))
    config = IterationConfig(lam=float(lam), steps=steps, perturbation=pert,
                             max_iter=int(data.get("max_iter", 100_000)),
                             record_every=int(data.get("record_every", 1)))
    return config, data.get("stopping", {})


def _make_rule(kind: str, delta: float, stop_defaults: dict) -> StoppingRule:
    return StoppingRule(kind=kind, delta=delta,
                        c=float(stop_defaults.get("c", 1.0)),
                        p=float(stop_defaults.get("p", 0.5)),
                        tau=float(stop_defaults.get("tau", 1.5)),
                        cap=int(stop_defaults.get("cap", 100_000)))


def _check_strict(records, strict: bool) -> int:
    flagged = [r for r in records if r.stop.flag == FLAG_BUDGET_EXHAUSTED]
    if strict and flagged:
        for r in flagged:
            print(f"error: run (rule={r.stop.rule.get('kind')}, "
                  f"delta={r.delta}) exhausted its budget without firing",
                  file=sys.stderr)
        return 2
    return 0


def _cmd_generate(args) -> int:
    data = json.loads(Path(args.problem).read_text(encoding="utf-8"))
    if "generator" in data:
        if args.seed is not None:
            data["seed"] = args.seed
        problem = generate_problem(ProblemSpec.from_dict(data))
    else:
        problem = load_problem(args.problem)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = save_problem(problem, out_dir / "problem.json")
    print(f"wrote {path}")
    return 0


def _cmd_run(args) -> int:
    problem = _load_problem_arg(args.problem)
    config, stop_defaults = _parse_config(args.config, problem.op)
    delta = float(args.delta)
    rule = _make_rule(args.rule, delta, stop_defaults)
    seed = args.seed if args.seed is not None else 0
    y = inject_noise(problem.y, NoiseSpec(delta, seed=seed))
    refs = References(pinv=pseudoinverse_solve(problem.op.to_dense(),
                                               problem.y))
    _, record = run_iteration(problem.op, y, config, rule, references=refs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = emit(record, args.format,
                out_dir / f"run_{args.rule}_{delta:.3e}.{args.format}")
    print(f"wrote {path}")
    return _check_strict([record], args.strict)


def _cmd_sweep(args) -> int:
    problem = _load_problem_arg(args.problem)
    config, stop_defaults = _parse_config(args.config, problem.op)
    deltas = [float(v) for v in args.delta.split(",")]
    rules = [_make_rule(kind, deltas[0], stop_defaults)
             for kind in args.rule.split(",")]
    seed = args.seed if args.seed is not None else 0
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_delta_sweep(problem, config, rules, deltas,
                              noise_seed=seed, cache_dir=out_dir / "cache")
    for record in records:
        kind = record.stop.rule.get("kind", "rule")
        path = emit(record, args.format,
                    out_dir / f"sweep_{kind}_{record.delta:.3e}.{args.format}")
        print(f"wrote {path}")
    return _check_strict(records, args.strict)


def _cmd_report(args) -> int:
    out_dir = Path(args.out)
    paths = sorted(out_dir.glob("*.json")) or sorted(out_dir.glob("*.csv"))
    if not paths:
        print(f"no record files under {out_dir}", file=sys.stderr)
        return 1
    summary = []
    for path in paths:
        record = load_record(path)
        final = record.final_row()
        err = record.column("error_to_exact_limit")
        err_pinv = record.column("error_to_pinv")
        entry = {
            "file": path.name,
            "rule": record.stop.rule.get("kind", "?"),
            "delta": record.delta,
            "stopped_k": int(final[0]),
            "flag": record.stop.flag,
            "final_residual": final[1],
            "final_error_to_exact_limit": float(err[-1]) if err.size else None,
            "min_error_to_pinv": (float(np.nanmin(err_pinv))
                                  if err_pinv.size and not np.all(np.isnan(err_pinv))
                                  else None),
        }
        summary.append(entry)
        print(f"{entry['file']}: rule={entry['rule']} delta={entry['delta']} "
              f"k={entry['stopped_k']} flag={entry['flag']} "
              f"residual={entry['final_residual']:.6g}")
    report_path = out_dir / f"report.{args.format}"
    if args.format == "json":
        report_path.write_text(json.dumps(summary, indent=1) + "\n",
                               encoding="utf-8", newline="\n")
    else:
        cols = list(summary[0].keys())
        lines = [",".join(cols)]
        for entry in summary:
            lines.append(",".join(str(entry[c]) for c in cols))
        report_path.write_text("\n".join(lines) + "\n", encoding="utf-8",
                               newline="\n")
    print(f"wrote {report_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suplandweber",
        description="Superiorized Landweber iteration benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="materialize a problem file")
    gen.add_argument("--problem", required=True,
                     help="problem spec or problem JSON file")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seed", type=int, default=None)
    gen.set_defaults(func=_cmd_generate)

    run = sub.add_parser("run", help="single run at one noise level")
    run.add_argument("--problem", required=True)
    run.add_argument("--config", required=True)
    run.add_argument("--rule", required=True,
                     choices=["a-priori", "discrepancy", "max-iter"])
    run.add_argument("--delta", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--format", default="csv", choices=["csv", "json"])
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--strict", action="store_true",
                     help="exit nonzero if any run exhausts its budget")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="delta-grid sweep")
    sweep.add_argument("--problem", required=True)
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--rule", required=True,
                       help="comma list of rule names")
    sweep.add_argument("--delta", required=True,
                       help="comma list of decreasing noise levels")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", default="csv", choices=["csv", "json"])
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--strict", action="store_true")
    sweep.set_defaults(func=_cmd_sweep)

    rep = sub.add_parser("report", help="summarize emitted records")
    rep.add_argument("--out", required=True)
    rep.add_argument("--format", default="csv", choices=["csv", "json"])
    rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
