from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import harness, reference, testers
from .config import load_settings, resolve_seed
from .errors import BadParam, SublinFrechetError
from .freespace import FreeSpaceOracle, MatrixOracle, free_space_matrix, load_matrix
from .geometry import Curve, edge_length_range, load_curve, save_curve
from .utils.log import log
from .utils.paths import curves_dir, reports_dir

# gen recipe names on the command line -> harness recipes
_GEN_RECIPES = {
    "straight": ("yes_perturb", 0.0),
    "perturb": ("yes_perturb", None),
    "far": ("far_block", None),
    "hausdorff-far": ("hausdorff_far", None),
}

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2


def _emit(body: Dict[str, Any]) -> None:
    print(json.dumps(body, indent=2, sort_keys=True))


def _load_pair(args: argparse.Namespace) -> tuple:
    if not args.P or not args.Q:
        raise BadParam("need two curve files (P and Q) or --matrix")
    return load_curve(args.P), load_curve(args.Q)


def _known_t(args: argparse.Namespace, M: Optional[np.ndarray], P: Optional[Curve], Q: Optional[Curve]) -> int:
    if args.t is not None:
        return args.t
    # without --t the locality is measured from the full matrix
    full = M if M is not None else free_space_matrix(P, Q, args.delta)
    return max(1, int(math.ceil(reference.exact_locality(full))))


# ---------------- subcommands ----------------

def cmd_gen(args: argparse.Namespace) -> int:
    name, radius = _GEN_RECIPES[args.recipe]
    recipe = harness.Recipe(
        name=name,
        n=args.n,
        dim=args.dim,
        delta=args.delta,
        eps=args.eps,
        radius=args.radius if radius is None else radius,
        margin=args.margin,
    )
    seed = resolve_seed(args.seed)
    instance = harness.build_instance(recipe, np.random.SeedSequence(seed))
    prefix = Path(args.out) if args.out else curves_dir() / f"{args.recipe}_{seed}"
    prefix.parent.mkdir(parents=True, exist_ok=True)
    p_path = save_curve(instance.P, prefix.with_name(prefix.name + "_P.json"))
    q_path = save_curve(instance.Q, prefix.with_name(prefix.name + "_Q.json"))
    log(f"Saved curves to: {p_path}, {q_path}")
    _emit({"P": str(p_path), "Q": str(q_path), "seed": seed, "kind": instance.kind,
           "certified_by": recipe.predicate, "attempts": instance.attempts})
    return EXIT_YES


def cmd_test(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(resolve_seed(args.seed))
    mode: testers.Mode = testers.OBLIVIOUS if args.oblivious else None  # type: ignore[assignment]
    trace: Dict[str, Any] = {}
    M: Optional[np.ndarray] = None
    P: Optional[Curve] = None
    Q: Optional[Curve] = None
    if args.matrix:
        M = load_matrix(args.matrix)
        o: FreeSpaceOracle = MatrixOracle(M)
    else:
        P, Q = _load_pair(args)
        o = FreeSpaceOracle.from_curves(P, Q, args.delta)

    algo = args.algo
    if algo in ("reduced", "continuous") and P is None:
        raise BadParam(f"{algo} needs curve files, not --matrix")
    if algo == "frechet1":
        params = testers.Tester1Params(t=_known_t(args, M, P, Q), eps=args.epsilon)
        verdict = testers.frechet_tester1(o, params, rng, trace)
    elif algo == "frechet2":
        verdict = testers.frechet_tester2(o, args.epsilon, rng, zeta=args.zeta, trace=trace)
    elif algo == "hausdorff":
        verdict = testers.hausdorff_tester(o, args.epsilon, rng)
    elif algo == "approx":
        verdict = testers.approx_frechet_tester(o, args.epsilon, _known_t(args, M, P, Q), rng)
    elif algo == "reduced":
        if mode is None:
            mode = testers.KnownT(_known_t(args, M, P, Q))
        alpha = args.alpha if args.alpha is not None else max(edge_length_range(c)[1] for c in (P, Q))
        verdict = testers.reduced_frechet_tester(
            P, Q, args.delta, args.epsilon, args.eps_prime, alpha, mode, rng,
            gamma=args.gamma, zeta=args.zeta, trace=trace,
        )
    else:
        if mode is None:
            if args.t is None:
                raise BadParam("continuous needs --t or --oblivious")
            mode = testers.KnownT(args.t)
        verdict = testers.continuous_frechet_tester(
            P, Q, args.delta, args.epsilon, args.eps_prime, mode, rng, zeta=args.zeta, trace=trace,
        )
    body = verdict.to_dict()
    body["trace"] = trace
    _emit(body)
    return EXIT_YES if verdict.is_yes else EXIT_NO


def cmd_exact(args: argparse.Namespace) -> int:
    body: Dict[str, Any] = {}
    if args.matrix:
        M = load_matrix(args.matrix)
    else:
        P, Q = _load_pair(args)
        M = free_space_matrix(P, Q, args.delta)
        body["discrete_frechet"] = reference.discrete_frechet(P, Q)
        body["discrete_hausdorff"] = reference.discrete_hausdorff(P, Q)
        body["delta"] = args.delta
    cols, rows = reference.count_barriers(M)
    body.update(
        shape=list(M.shape),
        min_cost_coupling=reference.min_cost_coupling(M),
        min_cost_diagonal_restricted=reference.min_cost_diagonal_restricted(M),
        exact_locality=reference.exact_locality(M),
        barrier_columns=cols,
        barrier_rows=rows,
    )
    _emit(body)
    return EXIT_YES


def _parse_values(raw: Sequence[str], axis: str) -> List[float]:
    cast = float if axis == "eps" else int
    return [cast(v) for v in raw]


def cmd_bench(args: argparse.Namespace) -> int:
    recipe = harness.Recipe(
        name=args.recipe, n=args.n, dim=args.dim, delta=args.delta, eps=args.eps,
        radius=args.radius, margin=args.margin,
    )
    params = harness.TrialParams(
        eps=args.epsilon if args.epsilon is not None else args.eps,
        t=args.t, eps_prime=args.eps_prime, gamma=args.gamma, zeta=args.zeta,
        known_t=not args.oblivious,
    )
    trials = args.trials or load_settings().trials
    cfg = harness.TrialConfig(args.algo, recipe, params, trials=trials, base_seed=args.seed, workers=args.workers)
    if args.axis:
        if not args.values:
            raise BadParam("--axis needs --values")
        rows = harness.sweep_queries(cfg, args.axis, _parse_values(args.values, args.axis))
        out = Path(args.out) if args.out else reports_dir() / f"sweep_{args.algo}_{args.axis}.csv"
        harness.write_sweep_csv(rows, out)
        log(f"Sweep saved to: {out}")
    if args.report or not args.axis:
        report = harness.run_batch(cfg)
        if args.report:
            harness.write_report_jsonl(report, args.report, include_timing=args.timing)
            log(f"Report saved to: {args.report}")
        _emit(report.aggregate())
    return EXIT_YES


def cmd_verify(args: argparse.Namespace) -> int:
    result = harness.verify_suite(seed=args.seed, instances=args.instances, mutant=args.mutant, only=args.only)
    _emit(result.summary())
    return EXIT_YES if result.passed else EXIT_NO


# ---------------- parser ----------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sublinfrechet", description="Sublinear Fréchet and Hausdorff testers")
    sub = parser.add_subparsers(dest="command", required=True)

    def curve_inputs(p: argparse.ArgumentParser) -> None:
        p.add_argument("P", nargs="?", help="curve file for P (.json or .csv)")
        p.add_argument("Q", nargs="?", help="curve file for Q (.json or .csv)")
        p.add_argument("--matrix", help="explicit free space matrix file instead of curves")
        p.add_argument("--delta", type=float, default=1.0)

    def instance_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--n", type=int, default=256)
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--delta", type=float, default=1.0)
        p.add_argument("--eps", type=float, default=0.2, help="farness of generated instances")
        p.add_argument("--radius", type=float, default=0.5, help="perturbation radius as a fraction of delta")
        p.add_argument("--margin", type=float, default=4.0, help="far-block shift as a multiple of delta")
        p.add_argument("--seed", type=int, default=None)

    def tester_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--t", type=int, default=None)
        p.add_argument("--eps-prime", dest="eps_prime", type=float, default=0.5)
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--zeta", type=float, default=None, help="locality estimator accuracy (default eps/1600)")
        p.add_argument("--oblivious", action="store_true", help="estimate t instead of using --t")

    gen = sub.add_parser("gen", help="generate a certified curve pair")
    gen.add_argument("--recipe", choices=sorted(_GEN_RECIPES), default="perturb")
    gen.add_argument("--out", help="output prefix; writes PREFIX_P.json and PREFIX_Q.json")
    instance_args(gen)
    gen.set_defaults(func=cmd_gen)

    test = sub.add_parser("test", help="run one tester")
    test.add_argument("--algo", choices=harness.ALGORITHMS, required=True)
    test.add_argument("--epsilon", type=float, default=0.2)
    test.add_argument("--alpha", type=float, default=None)
    test.add_argument("--seed", type=int, default=None)
    curve_inputs(test)
    tester_args(test)
    test.set_defaults(func=cmd_test)

    exact = sub.add_parser("exact", help="reference values for a pair or a matrix")
    curve_inputs(exact)
    exact.set_defaults(func=cmd_exact)

    bench = sub.add_parser("bench", help="seeded batches and query-count sweeps")
    bench.add_argument("--algo", choices=harness.ALGORITHMS, required=True)
    bench.add_argument("--recipe", choices=[r for r in harness.RECIPES if r != "explicit"], default="far_block")
    bench.add_argument("--axis", choices=("n", "t", "eps"))
    bench.add_argument("--values", nargs="+")
    bench.add_argument("--epsilon", type=float, default=None, help="tester eps (defaults to --eps)")
    bench.add_argument("--trials", type=int, default=None)
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--out", help="sweep CSV path")
    bench.add_argument("--report", help="per-trial JSONL path")
    bench.add_argument("--timing", action="store_true", help="include wall times in the JSONL report")
    instance_args(bench)
    tester_args(bench)
    bench.set_defaults(func=cmd_bench)

    verify = sub.add_parser("verify", help="run the structural property suite")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--instances", type=int, default=1000)
    verify.add_argument("--mutant", action="store_true", help="break the diagonal-restricted path finder")
    verify.add_argument("--only", nargs="+", default=None)
    verify.set_defaults(func=cmd_verify)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SublinFrechetError, OSError) as e:
        log(f"{args.command} failed: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(run())
