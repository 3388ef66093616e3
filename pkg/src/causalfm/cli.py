"""Command-line pipelines: simulate, match, fit, evaluate, replicate.

Every subcommand is deterministic given its seed and flags, and writes a
manifest.json last so its presence marks a completed run. Replicates run
in a process pool with per-replicate derived seeds, so results do not
depend on the worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .data import Dataset, ModelConfig, load_dataset, write_dataset
from .design import match_1to1
from .engine import run_chain
from .errors import NumericalAbortError, ValidationError
from .estimands import effect_summary_dict, summarize_sate, summary_from_dict
from .evaluate import ReplicateMetrics, aggregate_metrics, replicate_metrics
from .io_utils import read_json, sha256_of, write_csv, write_json
from .simulate import default_spec, generate

METHOD_PRIORS = {"ddp": "ddp", "standard": "standard"}


def _require_file(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"input file not found: {path}")
    return path


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def write_manifest(out_dir: Path, subcommand: str, args: dict,
                   inputs: list[Path], outputs: list[str], seed, t0: float) -> None:
    write_json(out_dir / "manifest.json", {
        "subcommand": subcommand,
        "args": args,
        "inputs": {str(p): sha256_of(p) for p in inputs},
        "outputs": sorted(outputs),
        "seed": seed,
        "wall_clock_s": time.time() - t0,
        "version": __version__,
    })


def _truth_payload(spec, truth) -> dict:
    return {
        "scenario": spec.scenario,
        "n": spec.n, "q": spec.q, "p": spec.p, "j": spec.j,
        "cluster_counts": list(spec.cluster_counts),
        "seed": spec.rng_seed,
        "sate": truth.sate,
        "noise_sd": float(np.sqrt(1.0 / 12.0)),
        "loadings": {str(t): truth.loadings[t] for t in (0, 1)},
        "linkage": truth.linkage,
    }


def cmd_simulate(args) -> None:
    t0 = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = default_spec(args.scenario, desk_scale=not args.paper_scale, seed=args.seed)
    truth = generate(spec)
    write_dataset(truth.dataset, out / "data.csv")
    write_json(out / "truth.json", _truth_payload(spec, truth))
    write_manifest(out, "simulate", vars(args) | {"out": str(out)}, [],
                   ["data.csv", "truth.json"], args.seed, t0)


def cmd_match(args) -> None:
    t0 = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = _require_file(args.data)
    schema = read_json(_require_file(args.schema)) if args.schema else None
    data = load_dataset(data_path, schema)
    result = match_1to1(data, caliper=args.caliper)
    write_dataset(result.matched, out / "matched.csv", schema)
    write_json(out / "balance.json", {
        "n_pairs": len(result.pairs),
        "pairs": [{"treated": a, "control": b, "distance": d}
                  for a, b, d in result.pairs],
        "smd_before": result.smd_before,
        "smd_after": result.smd_after,
    })
    write_manifest(out, "match", {k: str(v) for k, v in vars(args).items()},
                   [data_path], ["matched.csv", "balance.json"], None, t0)


def _fit_config(args, q_hint=None) -> ModelConfig:
    if args.config:
        cfg = ModelConfig.from_json(_require_file(args.config))
    else:
        cfg = ModelConfig()
    overrides = {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "prior", None):
        overrides["prior"] = METHOD_PRIORS[args.prior]
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _write_fit_outputs(out: Path, chain, save_params: bool) -> list[str]:
    q = chain.sate.shape[1]
    outputs = ["sate_draws.csv", "summary.json"]
    write_csv(out / "sate_draws.csv",
              [f"sate_{k + 1}" for k in range(q)], chain.sate)
    summary = summarize_sate(chain.sate, level=chain.config["credible_level"])
    write_json(out / "summary.json", effect_summary_dict(summary))
    if save_params:
        pdir = out / "params"
        pdir.mkdir(exist_ok=True)
        for t in (0, 1):
            for name, draws in (("mu", chain.mu[t]), ("psi", chain.psi[t]),
                                ("B", chain.B[t]), ("lambda", chain.Lambda[t])):
                flat = draws.reshape(draws.shape[0], -1)
                header = [f"{name}_{i + 1}" for i in range(flat.shape[1])]
                rel = f"params/{name}_t{t}.csv"
                write_csv(out / rel, header, flat)
                outputs.append(rel)
    return outputs


def cmd_fit(args) -> None:
    t0 = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = _require_file(args.data)
    schema = read_json(_require_file(args.schema)) if args.schema else None
    data = load_dataset(data_path, schema)
    cfg = _fit_config(args)
    chain = run_chain(data, cfg)
    outputs = _write_fit_outputs(out, chain, args.save_params)
    write_manifest(out, "fit", {k: str(v) for k, v in vars(args).items()},
                   [data_path], outputs, cfg.rng_seed, t0)


def _collect_replicate_metrics(rep_dirs) -> tuple[dict, list]:
    by_method: dict[str, list[ReplicateMetrics]] = {}
    long_rows = []
    for r, rep in enumerate(rep_dirs):
        truth = read_json(Path(rep) / "truth.json")
        true_sate = np.asarray(truth["sate"], dtype=float)
        for method_dir in sorted(Path(rep).iterdir()):
            summary_path = method_dir / "summary.json"
            if not (method_dir.is_dir() and summary_path.is_file()):
                continue
            summary = summary_from_dict(read_json(summary_path))
            rm = replicate_metrics(summary, true_sate, method=method_dir.name)
            by_method.setdefault(method_dir.name, []).append(rm)
            for k in range(true_sate.size):
                long_rows.append([r, method_dir.name, k + 1, rm.bias[k],
                                  rm.squared_error[k], int(rm.covered[k])])
    return by_method, long_rows


def _write_metrics(out: Path, by_method: dict, long_rows: list) -> list[str]:
    rows = []
    for method in sorted(by_method):
        agg = aggregate_metrics(by_method[method])
        for k in range(agg["bias"].size):
            rows.append([method, k + 1, agg["bias"][k], agg["mse"][k],
                         agg["coverage"][k]])
    write_csv(out / "metrics.csv",
              ["method", "outcome", "bias", "mse", "coverage"], rows)
    write_csv(out / "metrics_long.csv",
              ["replicate", "method", "outcome", "bias", "squared_error", "covered"],
              long_rows)
    return ["metrics.csv", "metrics_long.csv"]


def cmd_evaluate(args) -> None:
    t0 = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep_dirs = [Path(d) for d in args.runs]
    for d in rep_dirs:
        _require_file(Path(d) / "truth.json")
    by_method, long_rows = _collect_replicate_metrics(rep_dirs)
    if not by_method:
        raise ValidationError("no <method>/summary.json found under the run dirs")
    outputs = _write_metrics(out, by_method, long_rows)
    write_manifest(out, "evaluate", {k: str(v) for k, v in vars(args).items()},
                   [], outputs, None, t0)


def run_replicate(out_root: str, scenario: int, rep: int, seed: int,
                  cfg_payload: dict, paper_scale: bool) -> str:
    """One replicate: simulate, then fit both priors. Returns the rep dir."""
    rep_dir = Path(out_root) / f"rep_{rep:03d}"
    rep_dir.mkdir(parents=True, exist_ok=True)
    spec = default_spec(scenario, desk_scale=not paper_scale,
                        seed=_derived_seed(seed, rep, 0))
    truth = generate(spec)
    write_dataset(truth.dataset, rep_dir / "data.csv")
    write_json(rep_dir / "truth.json", _truth_payload(spec, truth))
    base = ModelConfig(**cfg_payload) if cfg_payload else ModelConfig()
    base = dataclasses.replace(base, j_max=spec.j)
    for m, method in enumerate(sorted(METHOD_PRIORS)):
        mdir = rep_dir / method
        mdir.mkdir(exist_ok=True)
        cfg = dataclasses.replace(base, prior=METHOD_PRIORS[method],
                                  rng_seed=_derived_seed(seed, rep, 1 + m))
        chain = run_chain(truth.dataset, cfg)
        _write_fit_outputs(mdir, chain, save_params=False)
    return str(rep_dir)


def _n_workers(args) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get("CFM_THREADS")
    return int(env) if env else 1


def cmd_replicate(args) -> None:
    t0 = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_payload = {}
    if args.config:
        cfg_payload = read_json(_require_file(args.config))
        ModelConfig(**cfg_payload)  # validate early
    cfg_payload.setdefault("credible_level", 0.95)
    jobs = [(str(out), args.scenario, r, args.seed, cfg_payload, args.paper_scale)
            for r in range(args.reps)]
    workers = _n_workers(args)
    if workers > 1:
        kernels.warmup()
        with get_context("fork").Pool(workers) as pool:
            rep_dirs = pool.starmap(run_replicate, jobs)
    else:
        rep_dirs = [run_replicate(*job) for job in jobs]
    by_method, long_rows = _collect_replicate_metrics(rep_dirs)
    outputs = _write_metrics(out, by_method, long_rows)
    write_manifest(out, "replicate", {k: str(v) for k, v in vars(args).items()},
                   [], outputs + [f"rep_{r:03d}" for r in range(args.reps)],
                   args.seed, t0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalfm",
        description="Multivariate treatment-effect estimation with a "
                    "covariate-dependent factor-score prior")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a scenario dataset")
    sim.add_argument("--scenario", type=int, choices=range(1, 7), required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.add_argument("--paper-scale", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    mat = sub.add_parser("match", help="propensity-score 1-to-1 matching")
    mat.add_argument("--data", required=True)
    mat.add_argument("--schema")
    mat.add_argument("--caliper", type=float)
    mat.add_argument("--out", required=True)
    mat.set_defaults(func=cmd_match)

    fit = sub.add_parser("fit", help="run one Gibbs chain on a dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument("--schema")
    fit.add_argument("--config", help="JSON with ModelConfig fields")
    fit.add_argument("--seed", type=int)
    fit.add_argument("--prior", choices=sorted(METHOD_PRIORS), default=None)
    fit.add_argument("--save-params", action="store_true")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    ev = sub.add_parser("evaluate", help="aggregate replicate metrics")
    ev.add_argument("runs", nargs="+", help="replicate dirs with truth.json")
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=cmd_evaluate)

    rep = sub.add_parser("replicate", help="simulate+fit+evaluate R replicates")
    rep.add_argument("--scenario", type=int, choices=range(1, 7), required=True)
    rep.add_argument("--reps", type=int, default=20)
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--config", help="JSON with ModelConfig fields")
    rep.add_argument("--threads", type=int, default=0)
    rep.add_argument("--paper-scale", action="store_true")
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbortError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
