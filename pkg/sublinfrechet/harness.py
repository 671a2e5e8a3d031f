"""Seeded trial batches, query-count sweeps, reports and the property suite."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from . import properties, reference, testers
from .config import resolve_seed
from .errors import BadParam, RecipeVerificationFailed
from .freespace import FreeSpaceOracle, MatrixOracle, free_space_matrix
from .geometry import (
    Curve,
    _edge_lengths,
    gen_hausdorff_far_pair,
    gen_straight_curve,
    make_far_pair,
    perturb_within,
    subsample,
)
from .utils.log import debug, log
from .utils.stats import percentile, quartiles, wilson_lower

ALGORITHMS = ("frechet1", "frechet2", "hausdorff", "approx", "reduced", "continuous")
RECIPES = ("yes_perturb", "far_block", "hausdorff_far", "explicit")
MAX_ATTEMPTS = 25


# ---------------- instances ----------------

@dataclass(frozen=True)
class Recipe:
    """How to generate an instance and which reference predicate certifies it.

    yes_perturb    Q = P moved by at most radius*delta per vertex; certified by a cost-zero coupling
    far_block      a block of Q shifted by margin*delta; certified by min coupling cost > eps*n
    hausdorff_far  a run of Q pushed off P; certified by >= ceil(eps(n+m)) barriers
    explicit       a given matrix; certified by the predicate named in expect
    """

    name: str
    n: int = 256
    dim: int = 2
    delta: float = 1.0
    eps: float = 0.2
    radius: float = 0.5
    margin: float = 4.0
    max_turn_degrees: float = 20.0
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    expect: str = "yes"

    def __post_init__(self) -> None:
        if self.name not in RECIPES:
            raise BadParam(f"unknown recipe {self.name!r}; expected one of {RECIPES}")
        if self.name == "explicit" and self.matrix is None:
            raise BadParam("explicit recipe needs a matrix")
        if self.expect not in ("yes", "far", "barriers"):
            raise BadParam(f"expect must be yes, far or barriers, got {self.expect!r}")

    @property
    def kind(self) -> str:
        if self.name == "yes_perturb" or (self.name == "explicit" and self.expect == "yes"):
            return "yes"
        return "far"

    @property
    def predicate(self) -> str:
        if self.name == "yes_perturb" or (self.name == "explicit" and self.expect == "yes"):
            return "min_cost_coupling == 0"
        if self.name == "hausdorff_far" or self.expect == "barriers":
            return "barriers >= ceil(eps * (n + m))"
        return "min_cost_coupling > eps * n"


@dataclass
class Instance:
    matrix: np.ndarray
    delta: float
    kind: str
    P: Optional[Curve] = None
    Q: Optional[Curve] = None
    attempts: int = 1

    @property
    def has_curves(self) -> bool:
        return self.P is not None and self.Q is not None


def certify(recipe: Recipe, M: np.ndarray) -> bool:
    n, m = M.shape
    if recipe.predicate == "min_cost_coupling == 0":
        return reference.min_cost_coupling(M) == 0
    if recipe.predicate == "min_cost_coupling > eps * n":
        return reference.min_cost_coupling(M) > recipe.eps * n
    cols, rows = reference.count_barriers(M)
    return cols + rows >= math.ceil(recipe.eps * (n + m))


def _generate(recipe: Recipe, rng: np.random.Generator) -> Instance:
    delta = recipe.delta
    if recipe.name == "explicit":
        return Instance(np.asarray(recipe.matrix, dtype=np.uint8), delta, recipe.kind)
    if recipe.name == "hausdorff_far":
        P, Q = gen_hausdorff_far_pair(recipe.n, recipe.n, recipe.eps, delta, rng)
    else:
        P = gen_straight_curve(recipe.n, recipe.dim, (delta / 2, delta), rng, recipe.max_turn_degrees)
        if recipe.name == "yes_perturb":
            Q = perturb_within(P, recipe.radius * delta, rng)
        else:
            Q = make_far_pair(P, recipe.eps, delta, recipe.margin, rng)
    return Instance(free_space_matrix(P, Q, delta), delta, recipe.kind, P, Q)


def build_instance(recipe: Recipe, seq: np.random.SeedSequence) -> Instance:
    """Generate and certify; an uncertified draw is replaced by the next sub-seed's draw."""
    for attempt, child in enumerate(seq.spawn(MAX_ATTEMPTS), start=1):
        instance = _generate(recipe, np.random.default_rng(child))
        if certify(recipe, instance.matrix):
            instance.attempts = attempt
            return instance
        debug(f"{recipe.name}: attempt {attempt} failed '{recipe.predicate}'")
        if recipe.name == "explicit":
            break
    raise RecipeVerificationFailed(f"{recipe.name}: no instance satisfied '{recipe.predicate}'")


# ---------------- batches ----------------

@dataclass(frozen=True)
class TrialParams:
    eps: float = 0.2
    t: Optional[int] = None
    eps_prime: float = 0.5
    alpha: Optional[float] = None
    gamma: float = 1.0
    c: int = 4
    zeta: Optional[float] = None
    k_factor: float = 4800.0
    known_t: bool = True


@dataclass(frozen=True)
class TrialConfig:
    algorithm: str
    recipe: Recipe
    params: TrialParams = TrialParams()
    trials: int = 400
    base_seed: Optional[int] = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise BadParam(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.trials < 1:
            raise BadParam(f"trials must be positive, got {self.trials}")


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    answer: str
    queries_used: int
    witness: Optional[Dict[str, Any]]
    wall_time: float = 0.0
    estimated_t: Optional[int] = None

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        out = {"seed": self.seed, "answer": self.answer, "queries_used": self.queries_used, "witness": self.witness}
        # only oblivious runs estimate t
        if self.estimated_t is not None:
            out["estimated_t"] = self.estimated_t
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


@dataclass
class TrialReport:
    algorithm: str
    recipe: str
    n: int
    t: Optional[int]
    records: List[TrialRecord]

    @property
    def trials(self) -> int:
        return len(self.records)

    @property
    def no_count(self) -> int:
        return sum(1 for r in self.records if r.answer == testers.NO)

    @property
    def no_rate(self) -> float:
        return self.no_count / self.trials if self.records else 0.0

    @property
    def yes_rate(self) -> float:
        return 1.0 - self.no_rate if self.records else 0.0

    @property
    def wilson_lb(self) -> float:
        return wilson_lower(self.no_count, self.trials)

    @property
    def queries(self) -> List[int]:
        return [r.queries_used for r in self.records]

    @property
    def median_estimated_t(self) -> Optional[float]:
        found = [r.estimated_t for r in self.records if r.estimated_t is not None]
        return percentile(found, 50) if found else None

    def aggregate(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "recipe": self.recipe,
            "n": self.n,
            "t": self.t,
            "median_estimated_t": self.median_estimated_t,
            "trials": self.trials,
            "yes_rate": self.yes_rate,
            "no_rate": self.no_rate,
            "wilson_lb": self.wilson_lb,
            "query_quartiles": list(quartiles(self.queries)),
        }

    def to_jsonl(self, include_timing: bool = False) -> str:
        lines = [json.dumps(r.to_dict(include_timing), sort_keys=True) for r in self.records]
        lines.append(json.dumps({"aggregate": self.aggregate()}, sort_keys=True))
        return "\n".join(lines) + "\n"


def _mode(params: TrialParams, t: Optional[int]) -> testers.Mode:
    return testers.KnownT(t) if params.known_t else testers.OBLIVIOUS


def _alpha(instance: Instance, params: TrialParams) -> float:
    if params.alpha is not None:
        return params.alpha
    return max(float(_edge_lengths(c).max()) for c in (instance.P, instance.Q) if len(c) > 1)


def _locality_t(M: np.ndarray) -> int:
    return max(1, int(math.ceil(reference.exact_locality(M))))


def resolve_t(algorithm: str, instance: Instance, params: TrialParams) -> Optional[int]:
    """Locality handed to known-t testers; measured from the instance unless given."""
    if params.t is not None:
        return params.t
    if algorithm in ("frechet1", "approx") or (algorithm == "reduced" and params.known_t):
        return _locality_t(instance.matrix)
    if algorithm == "continuous" and params.known_t:
        eps2 = params.eps_prime / 4
        a = eps2 * instance.delta
        P_a, Q_a = subsample(instance.P, a), subsample(instance.Q, a)
        if len(P_a) != len(Q_a):
            return None
        return _locality_t(free_space_matrix(P_a, Q_a, (1 + 2 * eps2) * instance.delta))
    return None


def run_algorithm(
    algorithm: str,
    instance: Instance,
    base: FreeSpaceOracle,
    params: TrialParams,
    t: Optional[int],
    rng: np.random.Generator,
    trace: Optional[Dict[str, Any]] = None,
) -> testers.Verdict:
    if algorithm in ("reduced", "continuous") and not instance.has_curves:
        raise BadParam(f"{algorithm} needs curve input, not a bare matrix")
    if algorithm == "frechet1":
        p = testers.Tester1Params(t=t, eps=params.eps, c=params.c)
        return testers.frechet_tester1(base.fresh(), p, rng, trace)
    if algorithm == "frechet2":
        return testers.frechet_tester2(base.fresh(), params.eps, rng, params.zeta, params.k_factor, trace)
    if algorithm == "hausdorff":
        return testers.hausdorff_tester(base.fresh(), params.eps, rng)
    if algorithm == "approx":
        return testers.approx_frechet_tester(base.fresh(), params.eps, t, rng)
    if algorithm == "reduced":
        return testers.reduced_frechet_tester(
            instance.P, instance.Q, instance.delta, params.eps, params.eps_prime,
            _alpha(instance, params), _mode(params, t), rng, params.gamma, params.zeta, trace,
        )
    return testers.continuous_frechet_tester(
        instance.P, instance.Q, instance.delta, params.eps, params.eps_prime,
        _mode(params, t), rng, params.zeta, trace,
    )


def run_batch(cfg: TrialConfig) -> TrialReport:
    seed = resolve_seed(cfg.base_seed)
    instance_seq, trial_seq = np.random.SeedSequence(seed).spawn(2)
    instance = build_instance(cfg.recipe, instance_seq)
    t = resolve_t(cfg.algorithm, instance, cfg.params)
    base = MatrixOracle(instance.matrix)
    streams = trial_seq.spawn(cfg.trials)

    def one(i: int) -> TrialRecord:
        rng = np.random.default_rng(streams[i])
        trace: Dict[str, Any] = {}
        started = time.perf_counter()
        verdict = run_algorithm(cfg.algorithm, instance, base, cfg.params, t, rng, trace)
        return TrialRecord(
            seed=seed + i,
            answer=verdict.answer,
            queries_used=verdict.queries_used,
            witness=verdict.to_dict()["witness"],
            wall_time=time.perf_counter() - started,
            estimated_t=trace.get("estimated_t"),
        )

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(one, range(cfg.trials)))
    else:
        records = [one(i) for i in range(cfg.trials)]
    records.sort(key=lambda r: r.seed)
    report = TrialReport(cfg.algorithm, cfg.recipe.name, instance.matrix.shape[0], t, records)
    log(
        f"{cfg.algorithm} on {cfg.recipe.name} (n={report.n}, t={t}): {report.trials} trials, "
        f"no-rate {report.no_rate:.3f}, wilson lb {report.wilson_lb:.3f}"
    )
    return report


# ---------------- sweeps ----------------

@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    median_q: float
    p90_q: float
    no_rate: float
    wilson_lb: float
    fitted_ratio: Optional[float]


def fitted_ratio(algorithm: str, median_q: float, n: int, t: Optional[float], eps: float) -> Optional[float]:
    """Median queries over the asymptotic bound of the algorithm, or None where no bound is fitted."""
    if t is None:
        return None
    if algorithm == "frechet1":
        x = t / eps
        return median_q / (x * max(1.0, math.log2(x)))
    if algorithm == "frechet2":
        loglog = max(1.0, math.log2(max(2.0, math.log2(t))))
        return median_q / ((t ** 3 + t ** 2 * math.log2(max(n, 2))) * loglog / eps)
    return None


def sweep_queries(cfg: TrialConfig, axis: str, values: Sequence[Union[int, float]]) -> List[SweepRow]:
    if axis not in ("n", "t", "eps"):
        raise BadParam(f"axis must be n, t or eps, got {axis!r}")
    if list(values) != sorted(values):
        raise BadParam("sweep values must be sorted")
    rows = []
    for v in values:
        if axis == "n":
            point = replace(cfg, recipe=replace(cfg.recipe, n=int(v)))
        elif axis == "t":
            point = replace(cfg, params=replace(cfg.params, t=int(v)))
        else:
            point = replace(cfg, params=replace(cfg.params, eps=float(v)))
        report = run_batch(point)
        median_q = percentile(report.queries, 50)
        t = report.t if report.t is not None else report.median_estimated_t
        rows.append(
            SweepRow(
                axis=axis,
                axis_value=v,
                median_q=median_q,
                p90_q=percentile(report.queries, 90),
                no_rate=report.no_rate,
                wilson_lb=report.wilson_lb,
                fitted_ratio=fitted_ratio(cfg.algorithm, median_q, report.n, t, point.params.eps),
            )
        )
    return rows


# ---------------- files ----------------

SWEEP_COLUMNS = ("axis_value", "median_q", "p90_q", "no_rate", "wilson_lb", "fitted_ratio")


def write_sweep_csv(rows: Sequence[SweepRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for r in rows:
            writer.writerow([r.axis_value, r.median_q, r.p90_q, r.no_rate, r.wilson_lb,
                             "" if r.fitted_ratio is None else r.fitted_ratio])
    return path


def write_report_jsonl(report: TrialReport, path: Union[str, Path], include_timing: bool = False) -> Path:
    path = Path(path)
    path.write_text(report.to_jsonl(include_timing), encoding="utf-8")
    return path


# ---------------- property suite ----------------

@dataclass
class SuiteResult:
    outcomes: List[properties.CheckOutcome]

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def summary(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [
                {"name": o.name, "checked": o.checked, "skipped": o.skipped, "failures": o.failures,
                 "counterexamples": o.counterexamples}
                for o in self.outcomes
            ],
        }


def verify_suite(seed: Optional[int] = None, instances: int = 1000, mutant: bool = False,
                 only: Optional[Sequence[str]] = None) -> SuiteResult:
    """Run every registered property check on its own seeded stream."""
    names = list(properties.CHECKS)
    if only is not None:
        unknown = set(only) - set(names)
        if unknown:
            raise BadParam(f"unknown checks: {sorted(unknown)}")
    streams = np.random.SeedSequence(resolve_seed(seed)).spawn(len(names))
    path_fn = properties.restricted_path(mutant)
    outcomes = []
    for name, stream in zip(names, streams):
        if only is not None and name not in only:
            continue
        outcome = properties.CHECKS[name](np.random.default_rng(stream), instances, path_fn)
        status = "ok" if outcome.passed else f"FAILED ({outcome.failures})"
        log(f"verify {name}: {outcome.checked} checked, {outcome.skipped} skipped, {status}")
        outcomes.append(outcome)
    return SuiteResult(outcomes)
