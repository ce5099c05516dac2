"""Experiment runner and command-line front door.

Subcommands: lra (relative/additive solvers), reduce (the OVP reduction),
gen (instance files), bench (matvec and leverage checks).  Every run is a
list of seeded records written as JSON-lines plus a CSV summary; records are
deterministic for a fixed config and seed except for wall-time fields.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import container
from .errors import ConfigError, ResourceLimitError
from .generate import planted_ovp, random_factors
from .leverage import exact_leverage, sketched_leverage
from .lra import additive_lra, compute_L2, relative_lra
from .oracle import best_rank_k_error, eval_error, materialize
from .reduction import OvpInstance, oracle_backend, relative_backend, run_reduction
from .transform import power, transformed_matvec

TASKS = ("relative", "additive", "reduction", "matvec-bench", "leverage-check")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

WALL_FIELDS = ("stage_seconds", "dense_seconds", "implicit_seconds", "total_seconds")


@dataclass
class ExperimentConfig:
    task: str
    n: int = 64
    d: int = 64
    r: int = 3
    p: int = 2
    k: int = 4
    epsilon: float = 0.5
    seeds: tuple = (0,)
    mS: int | None = None
    mR: int | None = None
    mT: int | None = None
    oracle: bool = False
    output: str | None = None
    alpha: float = 0.25
    backend: str = "relative"
    instance: str | None = None
    t: int = 16
    workers: int = 1
    unit_norm: bool = False

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if min(self.n, self.d, self.r) < 1:
            raise ConfigError(f"dimensions must be positive: n={self.n} d={self.d} r={self.r}")
        if not self.seeds:
            raise ConfigError("seed list must be nonempty")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.task == "reduction":
            if self.instance is None:
                raise ConfigError("reduction task needs an --instance file")
            if not Path(self.instance).exists():
                raise ConfigError(f"instance file not found: {self.instance}")
            if self.backend not in ("relative", "oracle"):
                raise ConfigError(f"unknown backend {self.backend!r}")


def _run_relative(cfg: ExperimentConfig, seed: int) -> dict:
    fm = random_factors(cfg.n, cfg.d, cfg.r, seed, unit_norm=cfg.unit_norm)
    t0 = time.perf_counter()
    rk = relative_lra(fm, cfg.p, cfg.k, cfg.epsilon, seed, mS=cfg.mS, mR=cfg.mR)
    total = time.perf_counter() - t0
    record = {
        "seed": seed,
        "task": cfg.task,
        "stage_seconds": dict(rk.stage_seconds, total=total),
        "surrogate_error": rk.surrogate_error,
    }
    if cfg.oracle:
        t0 = time.perf_counter()
        dense = materialize(fm, power(cfg.p))
        err = eval_error(dense, rk)
        opt = best_rank_k_error(dense, cfg.k)
        record["stage_seconds"]["verify"] = time.perf_counter() - t0
        record.update(
            achieved_error=err,
            oracle_opt=opt,
            bound_satisfied=bool(err <= (1.0 + cfg.epsilon) * opt + 1e-12),
        )
    return record


def _run_additive(cfg: ExperimentConfig, seed: int) -> dict:
    fm = random_factors(cfg.n, cfg.d, cfg.r, seed, unit_norm=cfg.unit_norm)
    t0 = time.perf_counter()
    rk = additive_lra(fm, cfg.p, cfg.k, cfg.epsilon, seed, mS=cfg.mS, mR=cfg.mR, mT=cfg.mT)
    total = time.perf_counter() - t0
    record = {
        "seed": seed,
        "task": cfg.task,
        "stage_seconds": dict(rk.stage_seconds, total=total),
        "surrogate_error": rk.surrogate_error,
        "L2": compute_L2(fm, cfg.p),
    }
    if cfg.oracle:
        t0 = time.perf_counter()
        dense = materialize(fm, power(cfg.p))
        err = eval_error(dense, rk)
        opt = best_rank_k_error(dense, cfg.k)
        record["stage_seconds"]["verify"] = time.perf_counter() - t0
        bound = (1.0 + cfg.epsilon) * opt + cfg.epsilon**2 * record["L2"]
        record.update(
            achieved_error=err, oracle_opt=opt, bound_satisfied=bool(err <= bound + 1e-12)
        )
    return record


def _run_reduction(cfg: ExperimentConfig, seed: int) -> dict:
    inst = OvpInstance.from_json(Path(cfg.instance).read_text())
    backend = oracle_backend() if cfg.backend == "oracle" else relative_backend(eps=cfg.epsilon)
    t0 = time.perf_counter()
    trace = run_reduction(inst, cfg.p, backend, alpha=cfg.alpha, seed=seed)
    total = time.perf_counter() - t0
    return {
        "seed": seed,
        "task": cfg.task,
        "stage_seconds": {"total": total},
        "decision": trace.decision,
        "decision_path": trace.decision_path,
        "candidates": int(trace.candidate_set.size),
        "max_residual": float(trace.residuals.max()) if trace.residuals.size else 0.0,
        "trace": json.loads(trace.to_json()),
    }


def _run_matvec(cfg: ExperimentConfig, seed: int) -> dict:
    fm = random_factors(cfg.n, cfg.d, cfg.r, seed)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=[seed, 0xBE]))
    z = rng.standard_normal(cfg.d)
    t = power(cfg.p)
    t0 = time.perf_counter()
    dense = transformed_matvec(fm, t, z, mode="dense")
    t_dense = time.perf_counter() - t0
    t0 = time.perf_counter()
    implicit = transformed_matvec(fm, t, z, mode="implicit")
    t_implicit = time.perf_counter() - t0
    denom = max(np.linalg.norm(dense), 1e-300)
    return {
        "seed": seed,
        "task": cfg.task,
        "dense_seconds": t_dense,
        "implicit_seconds": t_implicit,
        "relative_gap": float(np.linalg.norm(dense - implicit) / denom),
    }


def _run_leverage(cfg: ExperimentConfig, seed: int) -> dict:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=[seed, 0x1E]))
    mat = rng.standard_normal((cfg.n, cfg.t))
    exact = exact_leverage(mat)
    sketched = sketched_leverage(mat, seed)
    floor = 1e-12
    live = exact.scores > floor
    ratio = sketched.scores[live] / exact.scores[live]
    within = float(np.mean((ratio >= 0.5) & (ratio <= 2.0))) if live.any() else 1.0
    return {
        "seed": seed,
        "task": cfg.task,
        "within_factor_2": within,
        "rank_gap": abs(exact.rank_estimate - round(exact.rank_estimate)),
        "fallback": sketched.fallback,
    }


_RUNNERS = {
    "relative": _run_relative,
    "additive": _run_additive,
    "reduction": _run_reduction,
    "matvec-bench": _run_matvec,
    "leverage-check": _run_leverage,
}


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """One record per seed, ordered by seed index; optionally written to disk."""
    cfg.validate()
    runner = _RUNNERS[cfg.task]
    seeds = list(cfg.seeds)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(lambda s: runner(cfg, s), seeds))
    else:
        records = [runner(cfg, s) for s in seeds]
    if cfg.output:
        write_records(cfg.output, records)
    return records


def _flatten(record: dict) -> dict:
    """Scalar view of a record for the CSV summary; nested lists are dropped."""
    flat = {}
    for key, value in record.items():
        if isinstance(value, dict):
            for sub, sval in value.items():
                if not isinstance(sval, (dict, list)):
                    flat[f"{key}.{sub}"] = sval
        elif not isinstance(value, list):
            flat[key] = value
    return flat


def write_records(outdir, records: list[dict]) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "records.jsonl", "w") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    flat = [_flatten(r) for r in records]
    columns = sorted({key for row in flat for key in row})
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in flat:
            writer.writerow(row)


def generate_instance(kind: str, params: dict, seed: int, out: str) -> list[str]:
    """Write deterministic instance files; returns the created paths."""
    outpath = Path(out)
    if kind == "planted-ovp":
        inst = planted_ovp(
            n=params["n"], d=params["d"], s=params["s"], q=params.get("q", 0), seed=seed
        )
        outpath.parent.mkdir(parents=True, exist_ok=True)
        outpath.write_text(inst.to_json())
        return [str(outpath)]
    if kind in ("random-factors", "unit-norm"):
        fm = random_factors(
            params["n"], params["d"], params["r"], seed, unit_norm=(kind == "unit-norm")
        )
        outpath.parent.mkdir(parents=True, exist_ok=True)
        left = outpath.with_suffix(outpath.suffix + ".left.mat")
        right = outpath.with_suffix(outpath.suffix + ".right.mat")
        container.save_matrix(left, fm.left)
        container.save_matrix(right, fm.right)
        return [str(left), str(right)]
    raise ConfigError(f"unknown instance kind {kind!r}")


def parse_seeds(text: str) -> tuple:
    """Seed list: "7", "1,2,5", or a half-open range "0:20"."""
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":", 1)
        lo, hi = int(lo), int(hi)
        if hi <= lo:
            raise ConfigError(f"empty seed range {text!r}")
        return tuple(range(lo, hi))
    return tuple(int(part) for part in text.split(","))


def _load_config_file(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    if "seed" in payload and "seeds" not in payload:
        payload["seeds"] = [payload.pop("seed")]
    if "seeds" in payload:
        payload["seeds"] = tuple(int(s) for s in payload["seeds"])
    return payload


def _config_from_args(args, task: str) -> ExperimentConfig:
    base: dict = {"task": task}
    if getattr(args, "config", None):
        base.update(_load_config_file(args.config))
        base["task"] = base.get("task", task)
    for name in (
        "n", "d", "r", "p", "k", "epsilon", "mS", "mR", "mT", "alpha",
        "backend", "instance", "t", "workers", "output", "unit_norm",
    ):
        value = getattr(args, name, None)
        if value is not None:
            base[name] = value
    if getattr(args, "oracle", False):
        base["oracle"] = True
    if getattr(args, "seeds", None) is not None:
        base["seeds"] = parse_seeds(args.seeds)
    elif "seeds" in base:
        base["seeds"] = tuple(base["seeds"])
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(base) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**base)


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--seeds", help='seed list "1,2,5" or range "0:20"')
    sub.add_argument("--out", dest="output", help="output directory for records")
    sub.add_argument("--workers", type=int, help="worker pool size for seeds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlra", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    lra = subs.add_parser("lra", help="run a low-rank approximation experiment")
    lra.add_argument("--algorithm", choices=("relative", "additive"), default="relative")
    for flag, typ in (("--n", int), ("--d", int), ("--r", int), ("--p", int), ("--k", int)):
        lra.add_argument(flag, type=typ)
    lra.add_argument("--eps", dest="epsilon", type=float)
    lra.add_argument("--mS", type=int)
    lra.add_argument("--mR", type=int)
    lra.add_argument("--mT", type=int)
    lra.add_argument("--oracle", action="store_true", help="cross-check against the dense oracle")
    lra.add_argument("--unit-norm", dest="unit_norm", action="store_true", default=None)
    _add_common(lra)

    red = subs.add_parser("reduce", help="run the orthogonal-vectors reduction")
    red.add_argument("--instance", help="OVP instance JSON file")
    red.add_argument("--p", type=int)
    red.add_argument("--alpha", type=float)
    red.add_argument("--backend", choices=("relative", "oracle"))
    red.add_argument("--eps", dest="epsilon", type=float)
    _add_common(red)

    gen = subs.add_parser("gen", help="generate instance files")
    gen.add_argument("--kind", required=True, choices=("random-factors", "planted-ovp", "unit-norm"))
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--r", type=int)
    gen.add_argument("--s", type=int)
    gen.add_argument("--q", type=int, default=0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    bench = subs.add_parser("bench", help="consistency and timing checks")
    bench.add_argument("--task", choices=("matvec", "leverage"), required=True)
    for flag in ("--n", "--d", "--r", "--p", "--t"):
        bench.add_argument(flag, type=int)
    _add_common(bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            params = {"n": args.n, "d": args.d, "r": args.r, "s": args.s, "q": args.q}
            missing = "r" if args.kind != "planted-ovp" and args.r is None else None
            missing = "s" if args.kind == "planted-ovp" and args.s is None else missing
            if missing:
                raise ConfigError(f"--{missing} is required for kind {args.kind}")
            paths = generate_instance(args.kind, params, args.seed, args.out)
            for path in paths:
                print(path)
            return EXIT_OK
        if args.command == "lra":
            cfg = _config_from_args(args, args.algorithm)
        elif args.command == "reduce":
            cfg = _config_from_args(args, "reduction")
        else:  # bench
            task = {"matvec": "matvec-bench", "leverage": "leverage-check"}[args.task]
            cfg = _config_from_args(args, task)
        records = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    for record in records:
        print(json.dumps(record))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
