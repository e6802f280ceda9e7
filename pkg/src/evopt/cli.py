"""Batch command-line front end: ``run``, ``tune``, ``bench``, ``list``.

Configs are JSON documents mirroring the library surface: a problem (registry
name or an external command evaluator), a space, an algorithm block with its
declared hyperparameters, and run settings.  Runs write ``log.csv`` (the
per-generation RunLog) and ``summary.json`` (best point, config echo, and for
the fuel-cell benchmark the pinned physical constants), which together are
enough to reproduce the run exactly; ``--verify`` re-runs and diffs.

Validation failures exit with code 2 and runtime failures with code 1, both
printing a machine-readable error JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .algorithms import ALGORITHMS, algorithm_names, build
from .engine import EvaluationError, RunLog, config_hash
from .problems import PROBLEMS, FitnessSpec, get_problem
from .space import SearchSpace, SpaceError, parse_space
from .tune import TUNERS, make_inner

__all__ = ["main", "external_evaluator", "ConfigError"]

SUMMARY_SCHEMA = "summary-v1"
TUNE_SCHEMA = "tune-v1"
BENCH_SCHEMA = "bench-v1"

RUN_KEYS = {"problem", "space", "mode", "algorithm", "ngen", "total_generations",
            "seed", "workers", "x0"}
TUNE_KEYS = {"tuner", "hyperspace", "inner", "seed", "workers"}
EXTERNAL_KEYS = {"command", "timeout", "retries", "on_error", "sentinel"}


class ConfigError(ValueError):
    """Invalid run/tune configuration."""


def external_evaluator(command, timeout: float | None = None, retries: int = 0,
                       on_error: str = "abort", sentinel: float = 1.0e12,
                       mode: str = "min") -> FitnessSpec:
    """Wrap an external command as a fitness function.

    The child receives ``{"x": [...decoded values...]}`` as JSON on stdin and
    must print ``{"fitness": <real>}`` on stdout.  Nonzero exits and timeouts
    are retried ``retries`` times and then handled per ``on_error`` (abort the
    run, or record ``sentinel``); malformed child output always aborts with
    the captured stderr.
    """
    if not isinstance(command, (list, tuple)) or not command:
        raise ConfigError("external command must be a non-empty argv list")
    if on_error not in ("abort", "sentinel"):
        raise ConfigError(f"on_error must be 'abort' or 'sentinel', got {on_error!r}")
    command = [str(c) for c in command]

    def evaluate(decoded):
        payload = json.dumps({"x": list(decoded)})
        last_failure = None
        for _ in range(int(retries) + 1):
            try:
                proc = subprocess.run(command, input=payload, capture_output=True,
                                      text=True, timeout=timeout)
            except subprocess.TimeoutExpired:
                last_failure = f"timed out after {timeout}s"
                continue
            if proc.returncode != 0:
                last_failure = (f"exit code {proc.returncode}; "
                                f"stderr: {proc.stderr.strip()!r}")
                continue
            try:
                out = json.loads(proc.stdout)
                return float(out["fitness"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise EvaluationError(
                    f"external evaluator printed malformed output "
                    f"{proc.stdout!r}; stderr: {proc.stderr.strip()!r}",
                    decoded=list(decoded))
        if on_error == "sentinel":
            return sentinel
        raise EvaluationError(f"external evaluator failed: {last_failure}",
                              decoded=list(decoded))

    return FitnessSpec(name="external", evaluator=evaluate, mode=mode)


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")


def _resolve_problem(cfg: dict):
    """Returns (fitness_spec, space, mode) from a run config."""
    problem = cfg.get("problem")
    space = parse_space(cfg["space"]) if "space" in cfg else None
    mode = cfg.get("mode")
    if isinstance(problem, str):
        if problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {problem!r}; "
                              f"registry: {sorted(PROBLEMS)}")
        fitspec, default_space = get_problem(problem)
        space = space or default_space
        mode = mode or fitspec.mode
    elif isinstance(problem, dict) and "external" in problem:
        ext = dict(problem["external"])
        unknown = set(ext) - EXTERNAL_KEYS
        if unknown:
            raise ConfigError(f"external evaluator: unknown keys {sorted(unknown)}")
        if space is None:
            raise ConfigError("external problems require an explicit 'space'")
        if mode is None:
            raise ConfigError("external problems require an explicit 'mode'")
        fitspec = external_evaluator(mode=mode, **ext)
    else:
        raise ConfigError("config needs 'problem': a registry name or "
                          "{'external': {...}}")
    if mode not in ("min", "max"):
        raise ConfigError(f"mode must be 'min' or 'max', got {mode!r}")
    return fitspec, space, mode


def _resolve_run_config(cfg: dict, args) -> dict:
    unknown = set(cfg) - RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}; "
                          f"allowed: {sorted(RUN_KEYS)}")
    if "algorithm" not in cfg or "name" not in cfg.get("algorithm", {}):
        raise ConfigError("config needs 'algorithm': {'name': ..., ...}")
    if "ngen" not in cfg:
        raise ConfigError("config needs 'ngen'")
    resolved = dict(cfg)
    if getattr(args, "seed", None) is not None:
        resolved["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        resolved["workers"] = args.workers
    return resolved


def _build_from_config(cfg: dict):
    fitspec, space, mode = _resolve_problem(cfg)
    algo = dict(cfg["algorithm"])
    name = algo.pop("name")
    try:
        opt = build(name, mode=mode, fit=fitspec, bounds=space, params=algo,
                    seed=cfg.get("seed"), workers=int(cfg.get("workers", 1)))
    except KeyError as exc:
        raise ConfigError(str(exc.args[0]))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"algorithm {name!r}: {exc}")
    return opt, space, mode


def _echo_config(cfg: dict, space: SearchSpace, mode: str) -> dict:
    echo = dict(cfg)
    echo["space"] = space.to_dict()
    echo["mode"] = mode
    echo.setdefault("workers", 1)
    return echo


def _run_once(cfg: dict, checkpoint_out=None, resume_from=None, verbose=False):
    opt, space, mode = _build_from_config(cfg)
    t0 = time.perf_counter()
    xbest, ybest, log = opt.evolute(
        ngen=int(cfg["ngen"]),
        x0=cfg.get("x0"),
        total_generations=cfg.get("total_generations"),
        checkpoint_out=checkpoint_out,
        resume_from=resume_from,
        verbose=verbose)
    elapsed = time.perf_counter() - t0
    return opt, space, mode, xbest, ybest, log, elapsed


def _write_run_artifacts(outdir: Path, cfg: dict, space, mode, xbest, ybest,
                         log: RunLog, elapsed: float) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    log.to_csv(outdir / "log.csv")
    echo = _echo_config(cfg, space, mode)
    summary = {
        "schema": SUMMARY_SCHEMA,
        "log_schema": "runlog-v1",
        "package_version": __version__,
        "config": echo,
        "config_hash": config_hash(echo),
        "x_best": list(xbest),
        "y_best": ybest,
        "nevals": log.nevals,
        "generations": log.generations,
        "elapsed_s": elapsed,
    }
    if cfg.get("problem") == "sofc":
        from . import sofc
        summary["constants"] = sofc.CONSTANTS.to_dict()
    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=str)
    return summary


def cmd_run(args) -> int:
    cfg = _resolve_run_config(_load_config(args.config), args)
    outdir = Path(args.out)
    opt, space, mode, xbest, ybest, log, elapsed = _run_once(
        cfg, checkpoint_out=args.checkpoint, resume_from=args.resume,
        verbose=args.verbose)
    summary = _write_run_artifacts(outdir, cfg, space, mode, xbest, ybest,
                                   log, elapsed)
    print(f"run complete: y_best={ybest!r} nevals={log.nevals} "
          f"artifacts in {outdir}")
    if args.verify:
        if args.resume:
            raise ConfigError("--verify cannot be combined with --resume")
        _, _, _, x2, y2, log2, _ = _run_once(cfg)
        same = (y2 == ybest and list(x2) == list(xbest)
                and log2.same_trajectory(log))
        if not same:
            print(json.dumps({"error": {"type": "VerificationError",
                                        "message": "re-run diverged",
                                        "y_best": [ybest, y2]}}),
                  file=sys.stderr)
            return 1
        print("verify: re-run reproduced y_best, x_best, and the log exactly")
    return 0


def cmd_tune(args) -> int:
    cfg = _load_config(args.config)
    unknown = set(cfg) - TUNE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}; "
                          f"allowed: {sorted(TUNE_KEYS)}")
    tuner_cfg = dict(cfg.get("tuner", {}))
    method = tuner_cfg.pop("method", None)
    if method not in TUNERS:
        raise ConfigError(f"tuner method must be one of {sorted(TUNERS)}, "
                          f"got {method!r}")
    if "hyperspace" not in cfg or "inner" not in cfg:
        raise ConfigError("tune config needs 'hyperspace' and 'inner'")
    hspace = parse_space(cfg["hyperspace"])
    inner_cfg = dict(cfg["inner"])
    fitspec, space, mode = _resolve_problem(inner_cfg)
    algo = dict(inner_cfg.get("algorithm", {}))
    name = algo.pop("name", None)
    if name is None:
        raise ConfigError("inner config needs 'algorithm': {'name': ...}")
    seed = cfg.get("seed") if args.seed is None else args.seed
    workers = int(cfg.get("workers", 1) if args.workers is None else args.workers)
    inner = make_inner(name, fitspec, space, mode, ngen=int(inner_cfg.get("ngen", 10)),
                       base_params=algo,
                       seeds=inner_cfg.get("seeds", (101, 202, 303)))

    kwargs = dict(tuner_cfg)
    if method == "grid":
        result = TUNERS[method](hspace, inner, mode=mode, workers=workers, **kwargs)
    elif method == "bayes":
        result = TUNERS[method](hspace, inner, seed=seed, mode=mode, **kwargs)
    else:
        result = TUNERS[method](hspace, inner, seed=seed, mode=mode,
                                workers=workers, **kwargs)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    result.to_csv(outdir / "tune.csv")
    with open(outdir / "tune_ranked.csv", "w") as fh:
        fh.write(",".join(["rank", *result.names, "objective"]) + "\n")
        for rank, (c, obj) in enumerate(result.ranked(), 1):
            fh.write(",".join([str(rank)] + [repr(c[n]) for n in result.names]
                              + [repr(obj)]) + "\n")
    best_run = {
        "problem": inner_cfg.get("problem"),
        "space": space.to_dict(),
        "mode": mode,
        "algorithm": {"name": name, **algo, **result.best_config},
        "ngen": int(inner_cfg.get("ngen", 10)),
        "seed": list(inner_cfg.get("seeds", (101, 202, 303)))[0],
        "workers": workers,
    }
    with open(outdir / "best_config.json", "w") as fh:
        json.dump(best_run, fh, indent=2)
    print(f"tune complete ({method}): best objective {result.best_objective!r} at "
          f"{result.best_config}; artifacts in {outdir}")
    return 0


BENCH_DEFAULTS = {
    "sphere": {"algos": ["gwo"], "ngen": 100, "pop": 5},
    "tbtd": {"algos": ["es", "gwo", "de", "bat", "mfo"], "ngen": 150, "pop": 30},
    "sofc": {"algos": ["de", "bat", "gwo", "mfo", "pesa2"], "ngen": 300, "pop": 50},
}


def cmd_bench(args) -> int:
    if args.suite not in BENCH_DEFAULTS:
        raise ConfigError(f"unknown suite {args.suite!r}; "
                          f"suites: {sorted(BENCH_DEFAULTS)}")
    defaults = BENCH_DEFAULTS[args.suite]
    algos = args.algos.split(",") if args.algos else defaults["algos"]
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [1]
    ngen = args.ngen or defaults["ngen"]
    pop = args.pop or defaults["pop"]
    for name in algos:
        if name not in algorithm_names():
            raise ConfigError(f"unknown algorithm {name!r}; "
                              f"registry: {algorithm_names()}")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    fitspec, space = get_problem(args.suite)
    rows = []
    for name in algos:
        for seed in seeds:
            cell = {"suite": args.suite, "algorithm": name, "seed": seed}
            try:
                opt = build(name, mode=fitspec.mode, fit=fitspec, bounds=space,
                            params={ALGORITHMS[name].pop_alias: pop},
                            seed=seed, workers=args.workers or 1)
                t0 = time.perf_counter()
                xbest, ybest, log = opt.evolute(ngen=ngen)
                cell.update(status="ok", y_best=ybest, nevals=log.nevals,
                            elapsed_s=time.perf_counter() - t0, error="")
                log.to_csv(outdir / f"log_{name}_s{seed}.csv")
            except Exception as exc:  # cell failures marked, matrix continues
                cell.update(status="failed", y_best="", nevals="",
                            elapsed_s="", error=str(exc))
            rows.append(cell)
            print(f"[bench] {name} seed={seed}: "
                  f"{cell['status']} y_best={cell['y_best']!r}")
    with open(outdir / "bench.csv", "w") as fh:
        cols = ["suite", "algorithm", "seed", "status", "y_best", "nevals",
                "elapsed_s", "error"]
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(str(r[c]) for c in cols) + "\n")
    print(f"bench complete: {len(rows)} cells, artifacts in {outdir}")
    return 0


def cmd_list(args) -> int:
    what = args.what
    if what in ("algorithms", "all"):
        print("algorithms:")
        for name in algorithm_names():
            cls = ALGORITHMS[name]
            hypers = ", ".join(f"{p}={spec.default}" for p, spec in
                               cls.HYPERPARAMS.items())
            print(f"  {name:7s} population key: {cls.pop_alias}"
                  + (f"; hyperparameters: {hypers}" if hypers else ""))
    if what in ("problems", "all"):
        print("problems:")
        for name in sorted(PROBLEMS):
            print(f"  {name}")
    if what in ("tuners", "all"):
        print("tuners:")
        for name in sorted(TUNERS):
            print(f"  {name}")
    return 0


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evopt", description="Batch driver for the evopt optimizers")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one optimization from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--workers", "--ncores", type=int, default=None, dest="workers")
    run.add_argument("--out", default=".")
    run.add_argument("--checkpoint", default=None,
                     help="write a resumable checkpoint to this path")
    run.add_argument("--resume", default=None,
                     help="resume from a checkpoint written by --checkpoint")
    run.add_argument("--verify", action="store_true",
                     help="re-run and require an identical result")
    run.add_argument("--verbose", action="store_true")
    run.set_defaults(func=cmd_run)

    tune = sub.add_parser("tune", help="hyperparameter search from a config file")
    tune.add_argument("--config", required=True)
    tune.add_argument("--seed", type=int, default=None)
    tune.add_argument("--workers", "--ncores", type=int, default=None, dest="workers")
    tune.add_argument("--out", default=".")
    tune.set_defaults(func=cmd_tune)

    bench = sub.add_parser("bench", help="run a benchmark suite matrix")
    bench.add_argument("--suite", required=True)
    bench.add_argument("--algos", default=None, help="comma-separated algorithms")
    bench.add_argument("--seeds", default=None, help="comma-separated seeds")
    bench.add_argument("--ngen", type=int, default=None)
    bench.add_argument("--pop", type=int, default=None)
    bench.add_argument("--workers", "--ncores", type=int, default=1, dest="workers")
    bench.add_argument("--out", default=".")
    bench.set_defaults(func=cmd_bench)

    lst = sub.add_parser("list", help="list algorithms, problems, and tuners")
    lst.add_argument("--what", default="all",
                     choices=["algorithms", "problems", "tuners", "all"])
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpaceError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(msg)}}), file=sys.stderr)
        return 2
    except (EvaluationError, RuntimeError, ValueError, OSError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
