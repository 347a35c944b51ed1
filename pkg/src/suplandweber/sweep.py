"""Noise-level sweeps: stopped-iterate errors against the exact-data limit.

The exact-data limit of a superiorized run has no closed form, so the sweep
compares against a long exact-data run computed once per (problem, config)
and cached on disk under a content hash.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .iterate import IterationConfig, References, run_iteration
from .problems import NoiseSpec, Problem, inject_noise, problem_to_dict
from .records import ExperimentRecord
from .reference import pseudoinverse_solve, r_min_solve
from .stopping import StoppingRule


def _config_hash(problem: Problem, config: IterationConfig, cap: int) -> str:
    payload = {"problem": problem_to_dict(problem),
               "config": config.to_dict(), "cap": cap}
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode())
    return digest.hexdigest()[:16]


def exact_limit(problem: Problem, config: IterationConfig,
                cap: int = 400_000, cache_dir=None) -> np.ndarray:
    """Surrogate for the exact-data limit: a long exact-data run.

    Runs with convergence detection up to ``cap`` iterations; on severely
    ill-posed instances the slowest modes may still be moving at the cap,
    which is fine for sweep references because the stopped noisy iterates
    never reach those modes either.
    """
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        cache_file = cache_dir / f"exact_limit_{_config_hash(problem, config, cap)}.json"
        if cache_file.exists():
            return np.array(json.loads(cache_file.read_text())["x"])
    run_config = replace(config, max_iter=cap, record_every=max(cap // 10, 1))
    rule = StoppingRule(kind="max-iter", cap=cap)
    state, _ = run_iteration(problem.op, problem.y, run_config, rule)
    if cache_dir is not None:
        cache_file.write_text(json.dumps({"x": state.x.tolist()}) + "\n",
                              encoding="utf-8", newline="\n")
    return state.x


def run_delta_sweep(problem: Problem, config: IterationConfig,
                    rules: list[StoppingRule], deltas: list[float],
                    noise_seed: int = 0, cache_dir=None,
                    reference_cap: int = 400_000,
                    include_rmin: bool = False) -> list[ExperimentRecord]:
    """Run every (delta, rule) pair and record stopped-iterate errors.

    ``deltas`` must be strictly decreasing and positive. Per grid point the
    noise direction is seeded deterministically from ``noise_seed`` and
    shared across rules. Budget-exhausted runs are recorded, not dropped.
    """
    deltas = [float(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas):
        raise ValueError("deltas must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly decreasing")

    refs = References(
        pinv=pseudoinverse_solve(problem.op.to_dense(), problem.y),
        rmin=(r_min_solve(problem.op.to_dense(), problem.y,
                          config.perturbation.regularizer).x
              if include_rmin and config.perturbation is not None else None),
        exact_limit=exact_limit(problem, config, cap=reference_cap,
                                cache_dir=cache_dir),
    )

    records = []
    for i, delta in enumerate(deltas):
        y_noisy = inject_noise(problem.y, NoiseSpec(delta, seed=noise_seed + i))
        for rule in rules:
            rule_d = replace(rule, delta=delta)
            _, record = run_iteration(problem.op, y_noisy, config, rule_d,
                                      references=refs)
            records.append(record)
    return records
