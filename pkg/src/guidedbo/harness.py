"""Campaign orchestration: seeding, worker pool, aggregation, artifacts.

A campaign runs every configured algorithm over ``n_trials`` independent
trials.  Each trial draws one shared set of initial samples that every
algorithm consumes verbatim, so convergence curves are directly
comparable.  Outputs are one trace CSV per (algorithm, trial), one
aggregate CSV per algorithm, and a JSON manifest; all are a pure
function of (config, master seed, code version).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import multiprocessing
import os
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import AlgorithmConfig, CampaignConfig
from .errors import EmptyAggregate
from .optimizers import (
    InitSample,
    OptimizerSpec,
    draw_initial_samples,
    evaluate_initial_samples,
    run_trial,
)
from .trace import TrialTrace, trace_header
from .transform import build_paired_transform

OUTPUT_DIR_ENV = "GUIDEDBO_OUTPUT_DIR"

AGGREGATE_METRICS = ("run_min_E", "run_max_I", "run_min_f")


def _stable_seed(*parts) -> int:
    """Deterministic 63-bit seed from a tag tuple (independent of PYTHONHASHSEED)."""
    tag = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(tag).digest()[:8], "big") >> 1


def trial_seed(master_seed: int, trial: int) -> int:
    return _stable_seed(master_seed, trial, "init")


def algorithm_seed(master_seed: int, trial: int, kind: str) -> int:
    return _stable_seed(master_seed, trial, kind)


def make_optimizer_spec(cfg: CampaignConfig, algo: AlgorithmConfig,
                        trial: int) -> OptimizerSpec:
    transform = None
    if algo.kind in ("domain_guided", "transform_only"):
        transform = build_paired_transform(cfg.simulator.dim, cfg.simulator.pairs)
    return OptimizerSpec(
        kind=algo.kind,
        seed=algorithm_seed(cfg.master_seed, trial, algo.kind),
        budget=cfg.budget,
        n_init=cfg.n_init,
        schedule=algo.schedule(),
        transform=transform,
        acq_budget=algo.acq_budget,
        turbo=algo.turbo,
    )


def shared_initial_samples(cfg: CampaignConfig, trial: int) -> InitSample:
    """The trial's initial design, measured once at drift clock 0..n_init-1.

    Every algorithm receives these recorded (E, I) values verbatim, which
    keeps the first n_init trace rows byte-identical across algorithms
    even when drift noise is enabled.
    """
    rng = np.random.default_rng(trial_seed(cfg.master_seed, trial))
    points = draw_initial_samples(cfg.simulator, cfg.n_init, rng)
    return evaluate_initial_samples(cfg.simulator, points)


def run_single(cfg: CampaignConfig, algo: AlgorithmConfig, trial: int) -> TrialTrace:
    init = shared_initial_samples(cfg, trial)
    spec = make_optimizer_spec(cfg, algo, trial)
    bounds = cfg.resolved_normalization()
    return run_trial(spec, cfg.simulator, bounds, init, trial_id=trial)


def _run_task(args) -> TrialTrace:
    cfg, algo, trial = args
    return run_single(cfg, algo, trial)


def aggregate(traces: list[TrialTrace], column: str):
    """Per-iteration (median, q25, q75, n) over successful traces.

    Quantiles use linear interpolation; failed traces are excluded.
    """
    if column not in AGGREGATE_METRICS:
        raise ValueError(f"unknown running metric {column!r}")
    good = [t for t in traces if t.status == "ok"]
    if not good:
        raise EmptyAggregate("no successful traces to aggregate")
    data = np.asarray([getattr(t, column) for t in good])
    median = np.quantile(data, 0.5, axis=0, method="linear")
    q25 = np.quantile(data, 0.25, axis=0, method="linear")
    q75 = np.quantile(data, 0.75, axis=0, method="linear")
    return median, q25, q75, len(good)


def write_aggregate_csv(path: Path, traces: list[TrialTrace]) -> None:
    import csv

    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "metric", "median", "q25", "q75", "n_trials"])
        for metric in AGGREGATE_METRICS:
            median, q25, q75, n = aggregate(traces, metric)
            for j in range(len(median)):
                writer.writerow(
                    [str(j), metric, repr(float(median[j])), repr(float(q25[j])),
                     repr(float(q75[j])), str(n)]
                )


def _config_echo(cfg: CampaignConfig) -> dict:
    def convert(obj):
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return {f.name: convert(getattr(obj, f.name))
                    for f in dataclasses.fields(obj)}
        if isinstance(obj, (tuple, list)):
            return [convert(v) for v in obj]
        if isinstance(obj, np.ndarray):
            return [float(v) for v in obj]
        if isinstance(obj, Path):
            return str(obj)
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        return obj

    return convert(cfg)


def resolve_output_dir(cfg: CampaignConfig) -> Path:
    env = os.environ.get(OUTPUT_DIR_ENV)
    return Path(env) if env else cfg.output_dir


def trace_filename(algorithm: str, trial: int) -> str:
    return f"trace_{algorithm}_t{trial:03d}.csv"


def run_campaign(cfg: CampaignConfig, jobs: int | None = None,
                 algorithms: tuple[str, ...] | None = None) -> dict:
    """Execute the full protocol and write artifacts to the output dir.

    ``jobs`` defaults to the configured worker count or the machine's
    available parallelism.  ``algorithms`` optionally restricts the run
    to a subset of the configured kinds (used by the ablation command).
    Trial failures are recorded in the manifest and excluded from
    aggregates; the campaign itself continues.
    """
    algos = cfg.algorithms
    if algorithms is not None:
        algos = tuple(a for a in cfg.algorithms if a.kind in algorithms)
        missing = set(algorithms) - {a.kind for a in algos}
        if missing:
            algos = algos + tuple(AlgorithmConfig(kind=k) for k in sorted(missing))
    out_dir = resolve_output_dir(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(cfg, algo, trial) for algo in algos for trial in range(cfg.n_trials)]
    n_jobs = jobs or cfg.jobs or os.cpu_count() or 1
    started = time.time()
    if n_jobs > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=n_jobs) as pool:
            traces = pool.map(_run_task, tasks, chunksize=1)
    else:
        traces = [_run_task(t) for t in tasks]
    wall_time = time.time() - started

    by_algo: dict[str, list[TrialTrace]] = {a.kind: [] for a in algos}
    for (cfg_, algo, trial), trace in zip(tasks, traces):
        by_algo[algo.kind].append(trace)

    failures = {}
    clamp_events = {}
    for kind, ts in by_algo.items():
        for t in ts:
            t.write_csv(out_dir / trace_filename(kind, t.trial_id))
        write_aggregate_csv(out_dir / f"aggregate_{kind}.csv", ts)
        failures[kind] = sum(1 for t in ts if t.status != "ok")
        clamp_events[kind] = int(sum(t.clamp_events for t in ts))

    manifest = {
        "code_version": __version__,
        "master_seed": cfg.master_seed,
        "n_trials": cfg.n_trials,
        "budget": cfg.budget,
        "n_init": cfg.n_init,
        "algorithms": [a.kind for a in algos],
        "failures": failures,
        "clamp_events": clamp_events,
        "config": _config_echo(cfg),
    }
    manifest_path = out_dir / "manifest.json"
    with manifest_path.open("w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return {
        "output_dir": out_dir,
        "traces": by_algo,
        "manifest": manifest,
        "wall_time_s": wall_time,
    }


def write_landscape_csv(path: Path, rows: np.ndarray) -> None:
    import csv

    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b", "E_um", "I_au"])
        for r in rows:
            writer.writerow([repr(float(v)) for v in r])
