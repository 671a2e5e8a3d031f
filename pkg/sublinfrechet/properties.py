"""Structural property checks run by harness.verify_suite.

Each check draws small random instances, compares a structural claim against
the exact reference oracles and reports every counterexample it finds.
The registered checks are:

    box_of_ones                  gaps on a min-cost diagonal-restricted path are all-ones boxes
    layers_bracket               z <= L <= 2z for zero-corner rectangles
    diagonal_restricted_factor   coupling <= diagonal-restricted <= 3 * coupling
    coupling_frechet             cost-zero coupling exists iff d_dF <= delta
    straightness_locality        exact_locality(M_delta) <= alpha^2 * kappa
    hausdorff_barriers           d_H <= delta iff there are no barriers
    reduction_sandwich           reduced cost-zero path brackets d_dF within (1 -/+ eps) delta
    hausdorff_frechet_bound      d_dF <= (1.5 kappa + 2.5) d_H under its preconditions
    one_row                      zeros in one slice bound every vertex between them by (kappa+1) delta
    locality_tester_complete     the locality tester never rejects a t-local matrix
    permeable_agreement          sweep permeability equals breadth-first reachability
    subsample_spacing            subsampled vertices are at most one step apart
    reduced_locality             the beta-reduced matrix stays (4 gamma kappa / eps' + 4 gamma kappa)-local
    subsample_aspect_bound       subsampling at eps' delta / 4 leaves at most ceil(4 n phi / eps') edges
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import reference, testers
from .errors import CoincidentVertices
from .freespace import Axis, MatrixOracle, compute_beta, free_space_matrix, materialize, reduce
from .geometry import (
    Curve,
    _edge_lengths,
    aspect_ratio,
    curve_length,
    gen_straight_curve,
    pairwise_distances,
    straightness,
    subsample,
)
from .utils.log import log

REL_TOL = 1e-9
MAX_REPORTED = 5

PathFn = Callable[[np.ndarray], Tuple[int, reference.CouplingPath]]


@dataclass
class CheckOutcome:
    name: str
    checked: int = 0
    skipped: int = 0
    failures: int = 0
    counterexamples: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def fail(self, text: str) -> None:
        self.failures += 1
        if len(self.counterexamples) < MAX_REPORTED:
            self.counterexamples.append(text)
            log(f"{self.name} counterexample:\n{text}")


def _random_matrix(rng: np.random.Generator, max_side: int, square: bool = False) -> np.ndarray:
    n = int(rng.integers(1, max_side + 1))
    m = n if square else int(rng.integers(1, max_side + 1))
    density = rng.uniform(0.2, 0.8)
    return (rng.random((n, m)) >= density).astype(np.uint8)


def _max_edge(*curves: Curve) -> float:
    return max(float(_edge_lengths(c).max()) for c in curves if len(c) > 1)


def _kappa(*curves: Curve) -> float:
    return max(straightness(c) for c in curves if len(c) > 1)


def _jitter(P: Curve, r: float, rng: np.random.Generator) -> Curve:
    return Curve(P.points + rng.uniform(-r, r, size=P.points.shape))


# ---------------- matrix checks ----------------

def _bottom_row_staircase() -> np.ndarray:
    # zeros along the bottom row plus the top-right corner; the cheapest
    # restricted path walks the row, the cheapest unrestricted one cuts the diagonal
    M = np.ones((6, 6), dtype=np.uint8)
    M[:, 0] = 0
    M[5, 5] = 0
    return M


def check_box_of_ones(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("box_of_ones")
    for _ in range(instances):
        M = _random_matrix(rng, 10)
        _, path = path_fn(M)
        out.checked += 1
        zeros = [k for k, (i, j) in enumerate(path.steps) if M[i - 1, j - 1] == 0]
        for a, b in zip(zeros, zeros[1:]):
            (i, j), (i2, j2) = path.steps[a], path.steps[b]
            if b == a + 1 and i2 == i + 1 and j2 == j + 1:
                continue
            box = M[i - 1:i2, j - 1:j2].copy()
            box[0, 0] = box[-1, -1] = 1
            if (box == 0).any():
                out.fail(f"gap ({i},{j})->({i2},{j2}) on path {path.steps}\n{reference.render(M)}")
                break
    return out


def check_layers_bracket(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("layers_bracket")
    corpus = [_bottom_row_staircase()]
    corpus.extend(_random_matrix(rng, 8) for _ in range(max(0, instances - 1)))
    for M in corpus:
        zeros = np.argwhere(M == 0) + 1
        if zeros.shape[0] == 0:
            out.skipped += 1
            continue
        if M is corpus[0]:
            first, last = (1, 1), M.shape
        else:
            a = zeros[rng.integers(0, zeros.shape[0])]
            above = zeros[(zeros[:, 0] >= a[0]) & (zeros[:, 1] >= a[1])]
            b = above[rng.integers(0, above.shape[0])]
            first, last = (int(a[0]), int(a[1])), (int(b[0]), int(b[1]))
        L = reference.layer_count(M, (first, last))
        block = M[first[0] - 1:last[0], first[1] - 1:last[1]]
        _, path = path_fn(block)
        z = len(path.zero_entries(block))
        out.checked += 1
        if not z <= L <= 2 * z:
            out.fail(f"rect {first}-{last}: z={z}, L={L}\n{reference.render(M)}")
    return out


def check_diagonal_restricted_factor(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("diagonal_restricted_factor")
    for _ in range(instances):
        M = _random_matrix(rng, 8)
        c = reference.min_cost_coupling(M)
        r = reference.min_cost_diagonal_restricted(M)
        out.checked += 1
        if not c <= r <= 3 * c:
            out.fail(f"coupling={c}, diagonal-restricted={r}\n{reference.render(M)}")
    return out


def check_permeable_agreement(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("permeable_agreement")
    for _ in range(instances):
        M = _random_matrix(rng, 8)
        o = MatrixOracle(M)
        out.checked += 1
        for axis in (Axis.COLUMNS, Axis.ROWS):
            extent = o.extent(axis)
            for lo in range(1, extent + 1):
                for hi in range(lo, extent + 1):
                    fast = testers.permeable(o, axis, lo, hi)
                    slow = reference.brute_permeable(M, axis, lo, hi)
                    if fast != slow:
                        out.fail(f"{axis.value} [{lo},{hi}]: sweep={fast}, bfs={slow}\n{reference.render(M)}")
    return out


def check_locality_tester_complete(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("locality_tester_complete")
    for _ in range(instances):
        M = _random_matrix(rng, 10, square=True)
        t = max(1, int(math.ceil(reference.exact_locality(M))))
        verdict = testers.locality_tester(MatrixOracle(M), 0.5, t, rng)
        out.checked += 1
        if not verdict.is_yes:
            out.fail(f"t={t} rejected with {verdict.witness}\n{reference.render(M)}")
    return out


# ---------------- curve checks ----------------

def check_coupling_frechet(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("coupling_frechet")
    for _ in range(instances):
        P = Curve(rng.uniform(-3, 3, size=(int(rng.integers(1, 9)), 2)))
        Q = Curve(rng.uniform(-3, 3, size=(int(rng.integers(1, 9)), 2)))
        d = reference.discrete_frechet(P, Q)
        delta = d if rng.random() < 0.25 else d * rng.uniform(0.5, 1.5)
        zero_path = reference.min_cost_coupling(free_space_matrix(P, Q, delta)) == 0
        out.checked += 1
        if zero_path != (d <= delta):
            out.fail(f"d_dF={d!r}, delta={delta!r}, cost-zero path={zero_path}")
    return out


def check_straightness_locality(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("straightness_locality")
    delta = 1.0
    for _ in range(instances):
        n = int(rng.integers(3, 41))
        spread = rng.uniform(1.0, 2.0)
        P = gen_straight_curve(n, 2, (delta / spread, delta * spread), rng)
        Q = _jitter(P, delta / 2, rng)
        try:
            kappa = _kappa(P, Q)
        except CoincidentVertices:
            out.skipped += 1
            continue
        edges = np.concatenate([_edge_lengths(P), _edge_lengths(Q)])
        alpha = max(1.0, float(edges.max()) / delta, delta / float(edges.min()))
        loc = reference.exact_locality(free_space_matrix(P, Q, delta))
        out.checked += 1
        if loc > alpha * alpha * kappa * (1 + REL_TOL):
            out.fail(f"n={n}: locality={loc}, alpha={alpha}, kappa={kappa}")
    return out


def check_hausdorff_barriers(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("hausdorff_barriers")
    for _ in range(instances):
        P = Curve(rng.uniform(-3, 3, size=(int(rng.integers(1, 11)), 2)))
        Q = Curve(rng.uniform(-3, 3, size=(int(rng.integers(1, 11)), 2)))
        h = reference.discrete_hausdorff(P, Q)
        delta = h if rng.random() < 0.25 else h * rng.uniform(0.5, 1.5)
        barriers = reference.count_barriers(free_space_matrix(P, Q, delta))
        out.checked += 1
        if (h <= delta) != (barriers == (0, 0)):
            out.fail(f"d_H={h!r}, delta={delta!r}, barriers={barriers}")
    return out


def check_reduction_sandwich(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("reduction_sandwich")
    for _ in range(instances):
        n = int(rng.integers(8, 41))
        P = gen_straight_curve(n, 2, (0.5, 1.0), rng)
        shift = rng.standard_normal(2)
        shift *= rng.uniform(0.0, 10.0) / max(float(np.linalg.norm(shift)), 1e-12)
        Q = _jitter(Curve(P.points + shift), 0.1, rng)
        d = reference.discrete_frechet(P, Q)
        delta = max(d, 1.0) * rng.uniform(0.8, 1.25)
        eps = float(rng.choice([0.25, 0.5, 1.0]))
        alpha = _max_edge(P, Q)
        beta = compute_beta(eps, delta, alpha)
        if beta > n:
            out.skipped += 1
            continue
        R = materialize(reduce(MatrixOracle(free_space_matrix(P, Q, delta)), beta))
        zero_path = reference.min_cost_coupling(R) == 0
        out.checked += 1
        if zero_path and d > (1 + eps) * delta * (1 + REL_TOL):
            out.fail(f"beta={beta}: reduced path exists but d_dF={d} > (1+{eps})*{delta}")
        if not zero_path and d <= (1 - eps) * delta * (1 - REL_TOL):
            out.fail(f"beta={beta}: no reduced path but d_dF={d} <= (1-{eps})*{delta}")
    return out


def check_hausdorff_frechet_bound(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("hausdorff_frechet_bound")
    for _ in range(instances):
        n = int(rng.integers(3, 26))
        P = gen_straight_curve(n, 2, (0.5, 1.0), rng)
        shift = rng.standard_normal(2)
        shift *= rng.uniform(1.0, 3.0) / max(float(np.linalg.norm(shift)), 1e-12)
        Q = _jitter(Curve(P.points + shift), 0.1, rng)
        h = reference.discrete_hausdorff(P, Q)
        D = pairwise_distances(P, Q)
        if _max_edge(P, Q) > h or max(D[0, 0], D[-1, -1]) > h:
            out.skipped += 1
            continue
        try:
            kappa = _kappa(P, Q)
        except CoincidentVertices:
            out.skipped += 1
            continue
        d = reference.discrete_frechet(P, Q)
        out.checked += 1
        if d > (1.5 * kappa + 2.5) * h * (1 + REL_TOL):
            out.fail(f"n={n}: d_dF={d}, d_H={h}, kappa={kappa}")
    return out


def check_one_row(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("one_row")
    delta = 1.0
    for _ in range(instances):
        n = int(rng.integers(3, 31))
        P = gen_straight_curve(n, 2, (0.3, 1.0), rng)
        Q = _jitter(Curve(P.points[::-1] if rng.random() < 0.2 else P.points), 0.8, rng)
        try:
            kappa = _kappa(P, Q)
        except CoincidentVertices:
            out.skipped += 1
            continue
        D = pairwise_distances(P, Q)
        bound = (kappa + 1) * delta * (1 + REL_TOL)
        out.checked += 1
        for name, table in (("column", D), ("row", D.T)):
            for k, line in enumerate(table):
                near = np.flatnonzero(line <= delta)
                if near.size < 2:
                    continue
                worst = float(line[near[0]:near[-1] + 1].max())
                if worst > bound:
                    out.fail(f"{name} {k + 1}: zeros {near[0] + 1}..{near[-1] + 1}, max distance {worst} > {bound}")
    return out


def check_subsample_spacing(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("subsample_spacing")
    for _ in range(instances):
        n = int(rng.integers(2, 21))
        P = gen_straight_curve(n, int(rng.integers(1, 4)), (0.1, 2.0), rng)
        total = curve_length(P)
        a = total * rng.uniform(0.01, 1.0)
        P_a = subsample(P, a)
        steps = _edge_lengths(P_a) if len(P_a) > 1 else np.zeros(0)
        out.checked += 1
        if len(P_a) != int(math.floor(total / a)) + 1:
            out.fail(f"length {total}, step {a}: {len(P_a)} vertices")
        elif steps.size and (steps[:-1] > a * (1 + REL_TOL)).any():
            out.fail(f"length {total}, step {a}: inner spacing {float(steps[:-1].max())}")
        elif steps.size and steps[-1] >= 2 * a * (1 + REL_TOL):
            out.fail(f"length {total}, step {a}: last spacing {float(steps[-1])}")
    return out


def check_reduced_locality(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("reduced_locality")
    for _ in range(instances):
        n = int(rng.integers(8, 41))
        P = gen_straight_curve(n, 2, (0.5, 1.0), rng)
        Q = _jitter(P, 0.3, rng)
        try:
            kappa = _kappa(P, Q)
        except CoincidentVertices:
            out.skipped += 1
            continue
        edges = np.concatenate([_edge_lengths(P), _edge_lengths(Q)])
        alpha = float(edges.max())
        gamma = alpha / float(edges.min())
        delta = alpha * rng.uniform(2.0, 8.0)
        eps_prime = float(rng.choice([0.5, 1.0]))
        beta = compute_beta(eps_prime, delta, alpha)
        if beta > n:
            out.skipped += 1
            continue
        R = materialize(reduce(MatrixOracle(free_space_matrix(P, Q, delta)), beta))
        loc = reference.exact_locality(R)
        bound = 4 * gamma * kappa / eps_prime + 4 * gamma * kappa
        out.checked += 1
        if loc > bound * (1 + REL_TOL):
            out.fail(f"n={n}, beta={beta}: reduced locality {loc} > {bound} (gamma={gamma}, kappa={kappa}, eps'={eps_prime})")
    return out


def check_subsample_aspect_bound(rng: np.random.Generator, instances: int, path_fn: PathFn) -> CheckOutcome:
    out = CheckOutcome("subsample_aspect_bound")
    for _ in range(instances):
        n = int(rng.integers(2, 31))
        P = gen_straight_curve(n, 2, (0.2, 2.0), rng)
        Q = _jitter(P, 0.3, rng)
        delta = rng.uniform(0.5, 4.0)
        eps_prime = float(rng.choice([0.5, 1.0]))
        phi = aspect_ratio(P, Q, delta)
        a = eps_prime * delta / 4
        bound = int(math.ceil(4 * max(len(P), len(Q)) * phi / eps_prime))
        curves = [C for C in (P, Q) if a <= curve_length(C)]
        if not curves:
            out.skipped += 1
            continue
        out.checked += 1
        for C in curves:
            edges = len(subsample(C, a)) - 1
            if edges > bound:
                out.fail(f"n={n}, phi={phi}, a={a}: {edges} subsampled edges > {bound}")
    return out


CHECKS: Dict[str, Callable[[np.random.Generator, int, PathFn], CheckOutcome]] = {
    "box_of_ones": check_box_of_ones,
    "layers_bracket": check_layers_bracket,
    "diagonal_restricted_factor": check_diagonal_restricted_factor,
    "coupling_frechet": check_coupling_frechet,
    "straightness_locality": check_straightness_locality,
    "hausdorff_barriers": check_hausdorff_barriers,
    "reduction_sandwich": check_reduction_sandwich,
    "hausdorff_frechet_bound": check_hausdorff_frechet_bound,
    "one_row": check_one_row,
    "locality_tester_complete": check_locality_tester_complete,
    "permeable_agreement": check_permeable_agreement,
    "subsample_spacing": check_subsample_spacing,
    "reduced_locality": check_reduced_locality,
    "subsample_aspect_bound": check_subsample_aspect_bound,
}


def restricted_path(mutant: bool) -> PathFn:
    """Diagonal-restricted path finder; the mutant lets diagonal steps cross ones."""
    if mutant:
        return reference.min_cost_coupling_path
    return reference.min_cost_diagonal_restricted_path
