"""Command-line front end and benchmark harness.

All outputs are machine-readable JSON or CSV and byte-stable: rerunning a
command with the same flags (seeds included) reproduces them exactly.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional

import numpy as np

from . import baselines, cnf, poly, solution, sos, train
from .errors import ConfigError, ConvergenceError, DimacsError, SizeLimitError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config(path: Optional[str]) -> Dict:
    """Config file mirroring the flags: JSON object or key=value lines."""
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError("config JSON must be an object")
        return {str(k).replace("-", "_"): v for k, v in data.items()}
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"malformed config line {line!r}")
        key, _, value = line.partition("=")
        try:
            parsed = json.loads(value.strip())
        except json.JSONDecodeError:
            parsed = value.strip()
        out[key.strip().replace("-", "_")] = parsed
    return out


def _merge_config(args: argparse.Namespace, defaults: Dict) -> None:
    """Fill unset flags from the config file, then from hard defaults."""
    config = _read_config(getattr(args, "config", None))
    for key, value in config.items():
        if getattr(args, key, None) is None and key in defaults:
            setattr(args, key, value)
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_instance(path: str) -> cnf.CnfInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return cnf.parse_dimacs(fh.read())


def _int_list(text: str) -> List[int]:
    items = [tok for tok in str(text).split(",") if tok.strip()]
    if not items:
        raise UsageError(f"empty list {text!r}")
    return [int(tok) for tok in items]


def _float_list(text: str) -> List[float]:
    items = [tok for tok in str(text).split(",") if tok.strip()]
    if not items:
        raise UsageError(f"empty list {text!r}")
    return [float(tok) for tok in items]


def cmd_generate(args) -> int:
    _merge_config(args, {"vars": 20, "clauses": 80, "k": 3, "seed": 0, "out": None})
    inst = cnf.generate_random(int(args.vars), int(args.clauses), int(args.k), int(args.seed))
    _emit(cnf.to_dimacs(inst), args.out)
    return 0


def _train_config(args) -> train.TrainConfig:
    return train.TrainConfig(
        lam=float(args.lam),
        alpha=float(args.alpha),
        layers=None if args.layers is None else int(args.layers),
        epochs=int(args.epochs),
        learning_rate=float(args.learning_rate),
        penalty=str(args.penalty),
        grad_method=str(args.grad_method),
        mode=str(args.mode),
        seed=int(args.seed),
    )


_SOLVE_DEFAULTS = {
    "epochs": 100,
    "lam": 1.0,
    "alpha": 0.01,
    "layers": None,
    "learning_rate": 0.05,
    "penalty": train.PENALTY_SQUARED,
    "grad_method": train.GRAD_PARAM_SHIFT,
    "mode": train.MODE_EXACT,
    "seed": 0,
    "baseline": None,
    "out": None,
    "trajectory": None,
}


def cmd_solve(args) -> int:
    _merge_config(args, dict(_SOLVE_DEFAULTS))
    inst = _load_instance(args.cnf)
    obj = poly.build_objective(inst)
    cfg = _train_config(args)
    result = train.train(obj, cfg)

    baseline_name = args.baseline
    baseline_value = None
    perf = None
    if baseline_name:
        baseline_value = float(_baseline_value(inst, obj, baseline_name, int(args.seed), args))
        perf = solution.observed_performance(result.best_fst, baseline_value)
    report = solution.SolutionReport(
        see_value=result.sees[-1],
        fst_assignment=result.best_assignment,
        fst_value=result.best_fst,
        baseline_name=baseline_name,
        baseline_value=baseline_value,
        observed_performance=perf,
    )
    payload = json.loads(report.to_json())
    payload["best_epoch"] = result.best_epoch
    payload["final_fst"] = result.fsts[-1]
    payload["final_loss"] = result.losses[-1]
    payload["config"] = {
        "epochs": cfg.epochs,
        "lambda": cfg.lam,
        "alpha": cfg.alpha,
        "layers": cfg.resolve_layers(obj.qubits),
        "learning_rate": cfg.learning_rate,
        "penalty": cfg.penalty,
        "grad_method": cfg.grad_method,
        "mode": cfg.mode,
        "seed": cfg.seed,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    if args.trajectory:
        with open(args.trajectory, "w", encoding="utf-8") as fh:
            fh.write(result.trajectory_csv())
    return 0


_SOS_DEFAULTS = {
    "tol": 1e-6,
    "max_iter": 50000,
    "samples": 100,
    "seed": 0,
    "max_vars": 13,
    "reduced_basis": False,
    "out": None,
}


def cmd_sos(args) -> int:
    _merge_config(args, dict(_SOS_DEFAULTS))
    inst = _load_instance(args.cnf)
    obj = poly.build_objective(inst)
    relax = sos.build_relaxation(
        obj, max_vars=int(args.max_vars), reduced_basis=bool(args.reduced_basis)
    )
    gamma, Q = sos.solve_sdp(relax, tol=float(args.tol), max_iter=int(args.max_iter))
    result = sos.sos_round(relax, Q, samples=int(args.samples), seed=int(args.seed))
    _emit(result.to_json() + "\n", args.out)
    return 0


def cmd_brute(args) -> int:
    _merge_config(args, {"out": None})
    inst = _load_instance(args.cnf)
    optimum, witness = baselines.brute_force(inst)
    payload = {
        "optimum": optimum,
        "witness": [int(v) for v in witness.y],
        "num_clauses": inst.num_clauses,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_random(args) -> int:
    _merge_config(args, {"trials": 10000, "seed": 0, "out": None})
    inst = _load_instance(args.cnf)
    mean, best = baselines.random_guess(inst, int(args.trials), int(args.seed))
    payload = {
        "mean": mean,
        "best": best,
        "mean_fraction": mean / inst.num_clauses,
        "num_clauses": inst.num_clauses,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_localsearch(args) -> int:
    _merge_config(args, {"restarts": 20, "flips": None, "noise": 0.3, "seed": 0, "out": None})
    inst = _load_instance(args.cnf)
    flips = None if args.flips is None else int(args.flips)
    best, witness = baselines.local_search(
        inst, restarts=int(args.restarts), flips=flips,
        noise=float(args.noise), seed=int(args.seed),
    )
    payload = {
        "best": best,
        "witness": [int(v) for v in witness.y],
        "num_clauses": inst.num_clauses,
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _baseline_value(inst, obj, name: str, seed: int, args) -> float:
    if name == "brute":
        optimum, _ = baselines.brute_force(inst)
        return float(optimum)
    if name == "local-search":
        best, _ = baselines.local_search(inst, seed=seed)
        return float(best)
    if name == "sos":
        relax = sos.build_relaxation(
            obj,
            max_vars=int(getattr(args, "sos_max_vars", None) or 13),
            reduced_basis=bool(getattr(args, "sos_reduced_basis", None) or False),
        )
        gamma, Q = sos.solve_sdp(
            relax,
            tol=float(getattr(args, "sos_tol", None) or 1e-4),
            max_iter=int(getattr(args, "sos_max_iter", None) or 20000),
        )
        # a single seeded rounding draw, the literature's "rounded SOS" quantity
        samples = int(getattr(args, "sos_samples", None) or 1)
        rounded = sos.sos_round(relax, Q, samples=samples, seed=seed)
        return float(rounded.rounded_value)
    raise UsageError(f"unknown baseline {name!r}")


def _bench_job(job) -> Dict:
    """One (instance, lambda) training run; executed possibly in a worker."""
    num_vars, num_clauses, k, inst_seed, lam, params = job
    inst = cnf.generate_random(num_vars, num_clauses, k, inst_seed)
    obj = poly.build_objective(inst)
    cfg = train.TrainConfig(
        lam=lam,
        epochs=params["epochs"],
        mode=params["mode"],
        seed=inst_seed,
        alpha=params["alpha"],
        learning_rate=params["learning_rate"],
    )
    result = train.train(obj, cfg)
    return {
        "key": (num_vars, num_clauses, inst_seed, lam),
        "see": result.sees[-1],
        "fst": result.best_fst,
    }


_BENCH_DEFAULTS = {
    "vars": 20,
    "clauses": "80",
    "k": 3,
    "instances": 5,
    "baseline": "brute",
    "epochs": 100,
    "lambdas": "1.0",
    "alpha": 0.01,
    "learning_rate": 0.05,
    "mode": train.MODE_EXACT,
    "seed": 0,
    "workers": 1,
    "out": None,
    "sos_max_vars": 13,
    "sos_tol": 1e-4,
    "sos_max_iter": 20000,
    "sos_samples": 1,
    "sos_reduced_basis": False,
}


def cmd_bench(args) -> int:
    """Instance sweep x hyperparameter grid against a chosen baseline.

    Emits one CSV row per problem size with the best/mean SEE and FST values
    (over the lambda grid, per instance) divided by the baseline value and
    averaged over instances.
    """
    _merge_config(args, dict(_BENCH_DEFAULTS))
    num_vars = int(args.vars)
    k = int(args.k)
    clause_counts = _int_list(args.clauses)
    lambdas = _float_list(args.lambdas)
    instances = int(args.instances)
    if instances < 1:
        raise UsageError("need at least one instance per size")
    if not clause_counts or not lambdas:
        raise UsageError("empty benchmark grid")
    params = {
        "epochs": int(args.epochs),
        "mode": str(args.mode),
        "alpha": float(args.alpha),
        "learning_rate": float(args.learning_rate),
    }

    jobs = []
    for num_clauses in clause_counts:
        for i in range(instances):
            inst_seed = int(args.seed) * 100003 + 1009 * num_clauses + i
            for lam in lambdas:
                jobs.append((num_vars, num_clauses, k, inst_seed, lam, params))

    workers = int(args.workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bench_job, jobs))
    else:
        results = [_bench_job(j) for j in jobs]
    by_key: Dict = {}
    for res in results:
        num_vars_, num_clauses_, inst_seed_, _ = res["key"]
        by_key.setdefault((num_vars_, num_clauses_, inst_seed_), []).append(res)

    lines = [
        "vars,clauses,k,instances,baseline,best_see_ratio,mean_see_ratio,"
        "best_fst_ratio,mean_fst_ratio"
    ]
    for num_clauses in clause_counts:
        best_see, mean_see, best_fst, mean_fst = [], [], [], []
        used = 0
        for i in range(instances):
            inst_seed = int(args.seed) * 100003 + 1009 * num_clauses + i
            runs = by_key[(num_vars, num_clauses, inst_seed)]
            inst = cnf.generate_random(num_vars, num_clauses, k, inst_seed)
            obj = poly.build_objective(inst)
            try:
                base = _baseline_value(inst, obj, str(args.baseline), inst_seed, args)
            except (ConvergenceError, SizeLimitError) as exc:
                print(
                    f"note: baseline skipped for {num_vars}v/{num_clauses}c "
                    f"seed {inst_seed}: {exc}",
                    file=sys.stderr,
                )
                continue
            sees = [r["see"] for r in runs]
            fsts = [r["fst"] for r in runs]
            best_see.append(max(sees) / base)
            mean_see.append(float(np.mean(sees)) / base)
            best_fst.append(max(fsts) / base)
            mean_fst.append(float(np.mean(fsts)) / base)
            used += 1
        if used == 0:
            raise ConvergenceError(
                f"no baseline available for any instance at {num_clauses} clauses"
            )
        lines.append(
            f"{num_vars},{num_clauses},{k},{used},{args.baseline},"
            f"{float(np.mean(best_see))!r},{float(np.mean(mean_see))!r},"
            f"{float(np.mean(best_fst))!r},{float(np.mean(mean_fst))!r}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="spinsat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON or key=value file mirroring the flags")
        p.add_argument("--out", help="output path (stdout when omitted)")
        return p

    p = add("generate", cmd_generate, "write a random Max-kSAT DIMACS file")
    p.add_argument("--vars", type=int)
    p.add_argument("--clauses", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)

    p = add("solve", cmd_solve, "train the variational solver on a CNF file")
    p.add_argument("--cnf", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--layers", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--penalty", choices=[train.PENALTY_SQUARED, train.PENALTY_SIGNED])
    p.add_argument("--grad-method", choices=[train.GRAD_PARAM_SHIFT, train.GRAD_FINITE_DIFF])
    p.add_argument("--mode", choices=[train.MODE_EXACT, train.MODE_HADAMARD])
    p.add_argument("--seed", type=int)
    p.add_argument("--baseline", choices=["brute", "local-search", "sos"])
    p.add_argument("--trajectory", help="write the per-epoch CSV here")

    p = add("bench", cmd_bench, "sweep instances x hyperparameters vs a baseline")
    p.add_argument("--vars", type=int)
    p.add_argument("--clauses", help="comma-separated clause counts")
    p.add_argument("--k", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--baseline", choices=["brute", "local-search", "sos"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lambdas", help="comma-separated lambda grid")
    p.add_argument("--alpha", type=float)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--mode", choices=[train.MODE_EXACT, train.MODE_HADAMARD])
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--sos-max-vars", type=int)
    p.add_argument("--sos-tol", type=float)
    p.add_argument("--sos-max-iter", type=int)
    p.add_argument("--sos-samples", type=int)
    p.add_argument("--sos-reduced-basis", action="store_const", const=True)

    p = add("brute", cmd_brute, "exhaustive optimum of a CNF file")
    p.add_argument("--cnf", required=True)

    p = add("sos", cmd_sos, "sum-of-squares bound and rounded solution")
    p.add_argument("--cnf", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-vars", type=int)
    p.add_argument("--reduced-basis", action="store_const", const=True)

    p = add("random", cmd_random, "random-guess baseline on a CNF file")
    p.add_argument("--cnf", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)

    p = add("localsearch", cmd_localsearch, "WalkSAT-style local search on a CNF file")
    p.add_argument("--cnf", required=True)
    p.add_argument("--restarts", type=int)
    p.add_argument("--flips", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--seed", type=int)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DimacsError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, SizeLimitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
