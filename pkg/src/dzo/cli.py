"""Experiment runner CLI.

    dzo run <config.yaml>            run every configured algorithm on one
                                     shared context; write trace CSVs, a
                                     summary, and (by default) figures
    dzo validate <config.yaml>       full validation, no side effects
    dzo tune-dsf <config.yaml>       grid-search the DSF schedules
    dzo fetch-data <name> --out DIR  download a benchmark dataset

All algorithms in one run observe the identical graph, mixing matrix,
partition, and starting point, built deterministically from the master seed;
the summary records a fingerprint of that shared context. Trace CSVs are
named `<dataset>__<algorithm>.csv` with fixed columns (see
metrics.TRACE_COLUMNS); row t reports the network-average objective of the
iterates entering round t against the cumulative oracle/communication
counters after round t.

Exit codes: 0 success, 2 config error, 3 data error, 4 runtime failure.
Failures print one machine-readable JSON line to stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import report
from .baselines import DsfConfig, run_dsf, tune_dsf
from .config import ExperimentConfig, read_config
from .data import (
    DataFormatError,
    fetch_dataset,
    load_dataset,
    partition_iid,
    scale_features_maxabs,
    synthetic_sparse_classification,
)
from .dpoem import FeasibleBall, run_dpoem
from .metrics import RunTrace, write_trace_csv
from .network import Graph, MixingMatrix, erdos_renyi, metropolis_weights, single_node_graph
from .oracle import (
    DistanceObjective,
    HingeObjective,
    LinearObjective,
    StochasticObjective,
    full_objective,
)
from .seeding import STREAM_DATA, substream

CACHE_DIR_ENV = "DZO_CACHE_DIR"
DATA_URL_ENV = "DZO_DATA_URL"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


@dataclass
class ExperimentContext:
    """The shared, seed-determined environment every algorithm runs in."""

    graph: Graph
    W: MixingMatrix
    ball: FeasibleBall
    x0: np.ndarray
    objs: list[StochasticObjective]
    dataset_label: str
    fingerprint: str


def build_context(cfg: ExperimentConfig) -> ExperimentContext:
    ball = FeasibleBall(radius=cfg.ball_radius)
    if cfg.n == 1:
        graph = single_node_graph()
    else:
        graph = erdos_renyi(cfg.n, cfg.graph_p, cfg.seed)
    W = metropolis_weights(graph)

    h = hashlib.sha256()
    h.update(f"n={cfg.n};edges={sorted(graph.edges)}".encode())
    h.update(np.ascontiguousarray(W.W).tobytes())

    data_seed = cfg.seed if cfg.data_seed is None else cfg.data_seed
    objs: list[StochasticObjective]
    if cfg.dataset == "linear":
        coef = _unit_vector(cfg.d, data_seed) * cfg.coef_norm
        objs = [LinearObjective(coef, cfg.noise_scale) for _ in range(cfg.n)]
        h.update(f"linear;d={cfg.d};norm={cfg.coef_norm};noise={cfg.noise_scale};"
                 f"ds={data_seed}".encode())
    elif cfg.dataset == "distance":
        center = _unit_vector(cfg.d, data_seed) * cfg.center_norm
        objs = [DistanceObjective(center, cfg.noise_scale) for _ in range(cfg.n)]
        h.update(f"distance;d={cfg.d};norm={cfg.center_norm};noise={cfg.noise_scale};"
                 f"ds={data_seed}".encode())
    else:
        if cfg.dataset == "synthetic-hinge":
            ds = synthetic_sparse_classification(
                cfg.d, cfg.n_samples, cfg.nnz_per_sample, data_seed, cfg.flip_prob
            )
            h.update(f"synthetic-hinge;d={cfg.d};N={cfg.n_samples};"
                     f"nnz={cfg.nnz_per_sample};flip={cfg.flip_prob};ds={data_seed}".encode())
        else:
            ds = load_dataset(cfg.dataset, d=cfg.d)
            h.update(f"file={cfg.dataset};d={ds.d};N={len(ds)}".encode())
        if cfg.scale_features:
            ds = scale_features_maxabs(ds)
            h.update(b"scaled")
        part = partition_iid(ds, cfg.n, cfg.seed)
        shards = []
        for idxs in part.assignments:
            if cfg.subsample:
                idxs = idxs[: cfg.subsample]
            shards.append(tuple(ds.samples[k] for k in idxs))
            h.update(repr(idxs).encode())
        objs = [HingeObjective(shard, ds.d) for shard in shards]

    x0 = np.zeros(objs[0].d)
    h.update(x0.tobytes())
    return ExperimentContext(
        graph=graph,
        W=W,
        ball=ball,
        x0=x0,
        objs=objs,
        dataset_label=cfg.resolved_name(),
        fingerprint=h.hexdigest(),
    )


def _unit_vector(d: int, seed: int) -> np.ndarray:
    v = substream(seed, STREAM_DATA).standard_normal(d)
    return v / np.linalg.norm(v)


def _run_one(cfg: ExperimentConfig, ctx: ExperimentContext, name: str) -> tuple[RunTrace, dict]:
    started = time.perf_counter()
    extra: dict = {}
    if name == "dpoem":
        trace = run_dpoem(
            ctx.objs, ctx.W, ctx.ball, ctx.x0, cfg.r_eps, cfg.T, cfg.seed,
            metric_stride=cfg.metric_stride, fingerprint=ctx.fingerprint,
        )
    elif name == "dsf_d":
        dsf_cfg = DsfConfig(cfg.dsf_eta0, cfg.dsf_mu0, cfg.dsf_alpha, cfg.dsf_beta)
        trace = run_dsf(
            ctx.objs, ctx.W, ctx.ball, ctx.x0, dsf_cfg, cfg.T, cfg.seed,
            metric_stride=cfg.metric_stride, fingerprint=ctx.fingerprint,
            algorithm="dsf_d",
        )
        extra = {"eta0": dsf_cfg.eta0, "mu0": dsf_cfg.mu0}
    elif name == "dsf_t":
        grid = [
            DsfConfig(e, m, cfg.dsf_alpha, cfg.dsf_beta)
            for e in cfg.dsf_grid_eta0
            for m in cfg.dsf_grid_mu0
        ]
        best = tune_dsf(ctx.objs, ctx.W, ctx.ball, ctx.x0, grid, cfg.T, cfg.seed)
        trace = run_dsf(
            ctx.objs, ctx.W, ctx.ball, ctx.x0, best, cfg.T, cfg.seed,
            metric_stride=cfg.metric_stride, fingerprint=ctx.fingerprint,
            algorithm="dsf_t",
        )
        extra = {"eta0": best.eta0, "mu0": best.mu0}
    else:
        raise ValueError(f"unknown algorithm {name!r}")

    tau, x_out = trace.select_output()
    check = trace.bound_check()
    stats = {
        "final_f_xbar": full_objective(ctx.objs, trace.final_xbar()),
        "f_xtilde_tau": full_objective(ctx.objs, x_out),
        "tau": tau,
        "bound_margin": None if check is None else check.margin,
        "bound_passed": None if check is None else check.passed,
        "oracle_calls_total": trace.oracle_calls_total,
        "comm_rounds_total": trace.comm_rounds_total,
        "wall_time_s": time.perf_counter() - started,
        **extra,
    }
    return trace, stats


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Build the shared context, run each algorithm on it, write artifacts."""
    started = time.perf_counter()
    ctx = build_context(cfg)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    algo_stats: dict[str, dict] = {}
    for name in cfg.algorithms:
        trace, stats = _run_one(cfg, ctx, name)
        trace_path = out_dir / f"{ctx.dataset_label}__{name}.csv"
        write_trace_csv(trace, trace_path)
        stats["trace"] = trace_path.name
        stats["context_fingerprint"] = ctx.fingerprint
        algo_stats[name] = stats

    summary = {
        "dataset": ctx.dataset_label,
        "sigma": ctx.W.sigma,
        "context_fingerprint": ctx.fingerprint,
        "algorithms": algo_stats,
        "wall_time_s": time.perf_counter() - started,
        "config": cfg.as_dict(),
    }
    _write_json(out_dir / "summary.json", summary)

    if cfg.plot:
        report.render_figure(out_dir, out_dir / f"{ctx.dataset_label}__figure.png")
    return summary


def _write_json(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _fail(code: int, kind: str, detail: str) -> int:
    print(json.dumps({"error": kind, "code": code, "detail": detail}), file=sys.stderr)
    return code


def _cmd_run(args: argparse.Namespace) -> int:
    cfg, errors = read_config(args.config)
    if errors:
        return _fail(EXIT_CONFIG, "config", "; ".join(errors))
    try:
        summary = run_experiment(cfg)
    except (DataFormatError, FileNotFoundError) as exc:
        return _fail(EXIT_DATA, "data", str(exc))
    except Exception as exc:  # noqa: BLE001 - boundary: map to exit code
        return _fail(EXIT_RUNTIME, "runtime", f"{type(exc).__name__}: {exc}")
    for name, stats in summary["algorithms"].items():
        print(f"{name}: final f(xbar_T) = {stats['final_f_xbar']:.6f}  "
              f"f(xtilde_tau) = {stats['f_xtilde_tau']:.6f}  trace = {stats['trace']}")
    print(f"summary: {Path(cfg.output_dir) / 'summary.json'}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    _, errors = read_config(args.config)
    if errors:
        for e in errors:
            print(f"invalid: {e}")
        return _fail(EXIT_CONFIG, "config", "; ".join(errors))
    print("ok")
    return EXIT_OK


def _cmd_tune_dsf(args: argparse.Namespace) -> int:
    cfg, errors = read_config(args.config)
    if errors:
        return _fail(EXIT_CONFIG, "config", "; ".join(errors))
    try:
        ctx = build_context(cfg)
        grid = [
            DsfConfig(e, m, cfg.dsf_alpha, cfg.dsf_beta)
            for e in cfg.dsf_grid_eta0
            for m in cfg.dsf_grid_mu0
        ]
        best = tune_dsf(ctx.objs, ctx.W, ctx.ball, ctx.x0, grid, cfg.T, cfg.seed)
    except (DataFormatError, FileNotFoundError) as exc:
        return _fail(EXIT_DATA, "data", str(exc))
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_RUNTIME, "runtime", f"{type(exc).__name__}: {exc}")
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "eta0": best.eta0,
        "mu0": best.mu0,
        "alpha": best.alpha,
        "beta": best.beta,
        "grid_size": len(grid),
        "context_fingerprint": ctx.fingerprint,
    }
    _write_json(out_dir / "tune_summary.json", payload)
    print(json.dumps(payload))
    return EXIT_OK


def _cmd_fetch_data(args: argparse.Namespace) -> int:
    out = args.out or os.environ.get(CACHE_DIR_ENV) or "data"
    base = args.base_url or os.environ.get(DATA_URL_ENV)
    try:
        kwargs = {"base_url": base} if base else {}
        path = fetch_dataset(args.name, out, **kwargs)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_DATA, "data", f"{type(exc).__name__}: {exc}")
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dzo",
        description="Decentralized stochastic zeroth-order optimization benchmark runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run all configured algorithms")
    p_run.add_argument("config", help="path to the experiment YAML")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_tune = sub.add_parser("tune-dsf", help="grid-search the DSF schedules")
    p_tune.add_argument("config")
    p_tune.set_defaults(func=_cmd_tune_dsf)

    p_fetch = sub.add_parser("fetch-data", help="download a benchmark dataset")
    p_fetch.add_argument("name", choices=["mushrooms", "a9a", "w8a"])
    p_fetch.add_argument("--out", default=None, help=f"cache dir (or ${CACHE_DIR_ENV})")
    p_fetch.add_argument("--base-url", default=None, help=f"mirror base URL (or ${DATA_URL_ENV})")
    p_fetch.set_defaults(func=_cmd_fetch_data)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
