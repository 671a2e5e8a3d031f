"""Randomized testers that read the free space matrix only through oracle queries.

A "no" verdict always carries a witness that can be re-checked against the
reference oracles; "yes" verdicts are never wrong on yes-instances.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from . import reference
from .errors import BadParam, DegenerateRange, IndexOutOfRange, LengthMismatch, NonSquare
from .freespace import Axis, CurveOracle, FreeSpaceOracle, ZeroList, compute_beta, materialize, reduce
from .geometry import Curve, curve_length, subsample
from .utils.log import debug

YES = "yes"
NO = "no"


# ---------------- witnesses and verdicts ----------------

@dataclass(frozen=True)
class CornerOne:
    i: int
    j: int
    kind: str = field(default="corner_one", init=False)


@dataclass(frozen=True)
class Barrier:
    axis: Axis
    index: int
    kind: str = field(default="barrier", init=False)


@dataclass(frozen=True)
class ImpermeableBlock:
    axis: Axis
    lo: int
    hi: int
    kind: str = field(default="impermeable_block", init=False)


@dataclass(frozen=True)
class LocalityBreach:
    """Slices failing t-locality; second is None for a second-order failure of first."""

    axis: Axis
    first: int
    second: Optional[int]
    t: float
    kind: str = field(default="locality_breach", init=False)


Witness = Union[CornerOne, Barrier, ImpermeableBlock, LocalityBreach]


@dataclass(frozen=True)
class Verdict:
    answer: str
    witness: Optional[Witness] = None
    queries_used: int = 0

    def __post_init__(self) -> None:
        if self.answer not in (YES, NO):
            raise BadParam(f"answer must be 'yes' or 'no', got {self.answer!r}")
        if self.answer == NO and self.witness is None:
            raise BadParam("a 'no' verdict needs a witness")

    @property
    def is_yes(self) -> bool:
        return self.answer == YES

    def to_dict(self) -> Dict[str, Any]:
        witness = None
        if self.witness is not None:
            witness = {k: (v.value if isinstance(v, Axis) else v) for k, v in asdict(self.witness).items()}
        return {"answer": self.answer, "witness": witness, "queries_used": self.queries_used}


def check_witness(verdict: Verdict, source: Union[FreeSpaceOracle, np.ndarray]) -> bool:
    """Re-verify a "no" witness against the fully materialized matrix."""
    if verdict.is_yes:
        return True
    M = materialize(source) if isinstance(source, FreeSpaceOracle) else np.asarray(source)
    w = verdict.witness
    if isinstance(w, CornerOne):
        return bool(M[w.i - 1, w.j - 1] == 1)
    if isinstance(w, Barrier):
        line = M[w.index - 1, :] if w.axis is Axis.COLUMNS else M[:, w.index - 1]
        return bool((line == 1).all())
    if isinstance(w, ImpermeableBlock):
        return not reference.brute_permeable(M, w.axis, w.lo, w.hi)
    if isinstance(w, LocalityBreach):
        census = reference.locality_census(M, w.t)
        if w.second is None:
            return (w.axis, w.first) in census.second_order_failures
        pair = {w.first, w.second}
        return any(f.axis is w.axis and {f.first, f.second} == pair for f in census.pair_failures)
    return False


def _yes(o: FreeSpaceOracle, start: int) -> Verdict:
    return Verdict(YES, None, o.query_count - start)


def _no(o: FreeSpaceOracle, start: int, witness: Witness) -> Verdict:
    debug(f"no: {witness}")
    return Verdict(NO, witness, o.query_count - start)


def _require_square(o: FreeSpaceOracle) -> int:
    if not o.is_square:
        raise NonSquare(f"Fréchet testers need a square matrix, got {o.n_cols}x{o.n_rows}")
    return o.n_cols


# ---------------- primitive checks ----------------

def is_barrier(o: FreeSpaceOracle, axis: Axis, i: int) -> bool:
    return len(o.query(axis, i)) == 0


def permeable(o: FreeSpaceOracle, axis: Axis, lo: int, hi: int) -> bool:
    """Is there a cost-zero path from slice lo to slice hi?

    Queries every slice of the block once, then sweeps the zero-entries in
    order; the sweep is linear in the number of zeros returned.
    """
    axis = Axis(axis)
    extent = o.extent(axis)
    if not 1 <= lo <= hi <= extent:
        raise IndexOutOfRange(f"block [{lo}, {hi}] outside [1, {extent}]")
    slices: List[ZeroList] = [o.query(axis, k) for k in range(lo, hi + 1)]
    reached: set = set(slices[0])
    for zeros in slices[1:]:
        if not reached:
            return False
        current: set = set()
        for r in zeros:
            # horizontal or diagonal from the previous slice, or a step along this one
            if r in reached or (r - 1) in reached or (r - 1) in current:
                current.add(r)
        reached = current
    return bool(reached)


def slices_pass(o: FreeSpaceOracle, axis: Axis, a: int, b: int, t: float) -> bool:
    """Two queries; compares the extreme zeros of slices a and b."""
    za = o.query(axis, a)
    zb = o.query(axis, b)
    if not za or not zb:
        return True
    gap = max(zb[-1] - za[0], za[-1] - zb[0])
    return gap <= t * (2 + abs(a - b))


def columns_pass(o: FreeSpaceOracle, i1: int, i2: int, t: float) -> bool:
    return slices_pass(o, Axis.COLUMNS, i1, i2, t)


def rows_pass(o: FreeSpaceOracle, j1: int, j2: int, t: float) -> bool:
    return slices_pass(o, Axis.ROWS, j1, j2, t)


def second_order_passes(o: FreeSpaceOracle, axis: Axis, i: int, t: float) -> bool:
    axis = Axis(axis)
    zeros = o.query(axis, i)
    if not zeros:
        return True
    if zeros[-1] - zeros[0] > 2 * t:
        return False
    # passing the spread check leaves at most 2t+1 crossing slices to read
    for z in zeros:
        crossing = o.query(axis.other, z)
        if crossing and crossing[-1] - crossing[0] > 2 * t:
            return False
    return True


# ---------------- Fréchet tester with known locality ----------------

@dataclass(frozen=True)
class Tester1Params:
    t: int
    eps: float
    k: Optional[float] = None
    c: int = 4

    def __post_init__(self) -> None:
        if int(self.t) != self.t or self.t < 1:
            raise BadParam(f"t must be an integer >= 1, got {self.t}")
        if not 0 < self.eps < 2:
            raise BadParam(f"eps must lie in (0, 2), got {self.eps}")
        if int(self.c) != self.c or self.c < 1:
            raise BadParam(f"c must be an integer >= 1, got {self.c}")
        if self.k is not None and not self.k > 0:
            raise BadParam(f"k must be positive, got {self.k}")

    @property
    def barrier_samples(self) -> float:
        return 24 * self.t / self.eps if self.k is None else float(self.k)

    def K(self, n: int) -> int:
        return int(math.ceil(self.eps * n / (32 * self.t))) - 1

    @property
    def ell(self) -> int:
        return int(math.ceil(128 * self.t / self.eps))


@dataclass
class IntervalSet:
    intervals: List[Tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def total_length(self) -> int:
        return sum(hi - lo for lo, hi in self.intervals)


def sample_intervals(n: int, K: int, ell: int, c: int, rng: np.random.Generator) -> IntervalSet:
    """Dyadic interval sampling: level i draws ceil(4cn / (2^(i+1) K)) distinct starts.

    Raises DegenerateRange when K <= 0 or n is too small for level 0;
    callers then scan the whole range.
    """
    if n < 1 or c < 1 or ell < 1:
        raise BadParam(f"need n, c, ell >= 1; got n={n}, c={c}, ell={ell}")
    if K <= 0:
        raise DegenerateRange(f"K={K} leaves nothing to sample")
    if n // 2 - 1 <= 0:
        raise DegenerateRange(f"n={n} is too small for width-2 intervals")
    out = IntervalSet()
    for level in range(int(math.floor(math.log2(ell))) + 1):
        width = 2 ** (level + 1)
        population = n // width - 1
        if population <= 0:
            # wider levels are empty too; one full-range block covers them all
            out.intervals.append((1, n))
            break
        want = int(math.ceil(4 * c * n / (width * K)))
        if want >= population:
            starts = np.arange(population)
        else:
            starts = rng.choice(population, size=want, replace=False)
        for j in starts:
            lo = max(1, int(j) * width)
            hi = min(n, (int(j) + 2) * width)
            out.intervals.append((lo, hi))
    return out


def frechet_tester1(
    o: FreeSpaceOracle,
    p: Tester1Params,
    rng: np.random.Generator,
    trace: Optional[Dict[str, Any]] = None,
) -> Verdict:
    n = _require_square(o)
    start = o.query_count

    # corner entries, each read through a column query
    if 1 not in o.query_column(1):
        return _no(o, start, CornerOne(1, 1))
    if n not in o.query_column(n):
        return _no(o, start, CornerOne(n, n))

    for _ in range(int(math.ceil(p.barrier_samples))):
        j = int(rng.integers(1, n + 1))
        if is_barrier(o, Axis.ROWS, j):
            return _no(o, start, Barrier(Axis.ROWS, j))
        if is_barrier(o, Axis.COLUMNS, j):
            return _no(o, start, Barrier(Axis.COLUMNS, j))

    K, ell = p.K(n), p.ell
    try:
        intervals = sample_intervals(n, K, ell, p.c, rng)
        fallback = False
    except DegenerateRange:
        # small n: a full scan stays within the O(t/eps) budget
        intervals = IntervalSet([(1, n)])
        fallback = True
    bound = tester1_query_bound(p, intervals)
    if trace is not None:
        trace.update(
            t=p.t, eps=p.eps, k=p.barrier_samples, c=p.c, K=K, ell=ell,
            intervals=len(intervals), interval_length=intervals.total_length,
            fallback=fallback, query_bound=bound,
        )

    witness = _scan_blocks(o, intervals)
    if o.query_count - start > bound:
        raise AssertionError(f"tester spent {o.query_count - start} queries, bound is {bound}")
    if witness is not None:
        return _no(o, start, witness)
    return _yes(o, start)


def _scan_blocks(o: FreeSpaceOracle, intervals: IntervalSet) -> Optional[ImpermeableBlock]:
    for lo, hi in intervals:
        if not permeable(o, Axis.COLUMNS, lo, hi):
            return ImpermeableBlock(Axis.COLUMNS, lo, hi)
        if not permeable(o, Axis.ROWS, lo, hi):
            return ImpermeableBlock(Axis.ROWS, lo, hi)
    return None


def tester1_query_bound(p: Tester1Params, intervals: IntervalSet) -> int:
    """Corner reads, two per barrier sample, then one query per slice of every block."""
    return 2 + 2 * int(math.ceil(p.barrier_samples)) + sum(2 * (hi - lo + 1) for lo, hi in intervals)


# ---------------- locality testing ----------------

def search_path(n: int, i: int) -> List[int]:
    """Proper ancestors of i in the balanced search tree on [1, n] with root ceil(n/2)."""
    lo, hi = 1, n
    path: List[int] = []
    while lo <= hi:
        mid = lo + (hi - lo + 2) // 2 - 1
        if mid == i:
            return path
        path.append(mid)
        if i < mid:
            hi = mid - 1
        else:
            lo = mid + 1
    raise BadParam(f"index {i} outside [1, {n}]")


def locality_tester(o: FreeSpaceOracle, sigma: float, t: int, rng: np.random.Generator) -> Verdict:
    if not sigma > 0 or t < 1:
        raise BadParam(f"need sigma > 0 and t >= 1; got sigma={sigma}, t={t}")
    n = _require_square(o)
    start = o.query_count
    rounds = int(math.ceil(3 / sigma)) + 2
    for it in range(rounds):
        if it == 0:
            i = 1
        elif it == 1:
            i = n
        elif n > 2:
            i = int(rng.integers(2, n))
        else:
            i = int(rng.integers(1, n + 1))
        for axis in (Axis.COLUMNS, Axis.ROWS):
            if not second_order_passes(o, axis, i, t):
                return _no(o, start, LocalityBreach(axis, i, None, t))
        for j in search_path(n, i):
            if not columns_pass(o, i, j, t):
                return _no(o, start, LocalityBreach(Axis.COLUMNS, i, j, t))
            if not rows_pass(o, i, j, t):
                return _no(o, start, LocalityBreach(Axis.ROWS, i, j, t))
    return _yes(o, start)


def locality_query_bound(n: int, sigma: float, t: int) -> int:
    return (int(math.ceil(3 / sigma)) + 2) * (2 * (2 * t + 2) + 4 * int(math.ceil(math.log2(max(n, 2)))))


def _repetitions(round_index: int) -> int:
    if round_index == 1:
        return 2
    return max(2, int(math.ceil(2 * (1 + math.log2(round_index)))))


def estimate_locality(
    o: FreeSpaceOracle,
    zeta: float,
    rng: np.random.Generator,
    trace: Optional[Dict[str, Any]] = None,
) -> int:
    """Doubling search: round i runs the locality tester at t=2^i; all-yes returns 2^(i+1)."""
    if not zeta > 0:
        raise BadParam(f"zeta must be positive, got {zeta}")
    n = _require_square(o)
    i = 1
    while True:
        t = 2 ** i
        sigma = zeta / 2 ** (2 * (i + 1))
        reps = _repetitions(i)
        if all(locality_tester(o, sigma, t, rng).is_yes for _ in range(reps)):
            if trace is not None:
                trace.update(rounds=i, estimated_t=2 ** (i + 1))
            return 2 ** (i + 1)
        if t >= n:
            # spreads are at most n-1 < 2t here, so this round cannot fail
            raise AssertionError(f"locality tester rejected at t={t} >= n={n}")
        i += 1


def frechet_tester2(
    o: FreeSpaceOracle,
    eps: float,
    rng: np.random.Generator,
    zeta: Optional[float] = None,
    k_factor: float = 4800.0,
    trace: Optional[Dict[str, Any]] = None,
) -> Verdict:
    """Estimate the locality, then run the known-locality tester at eps/3."""
    if not 0 < eps < 2:
        raise BadParam(f"eps must lie in (0, 2), got {eps}")
    _require_square(o)
    start = o.query_count
    t = estimate_locality(o, eps / 1600 if zeta is None else zeta, rng, trace)
    params = Tester1Params(t=t, eps=eps / 3, k=k_factor * t * t / eps, c=2)
    verdict = frechet_tester1(o, params, rng, trace)
    return Verdict(verdict.answer, verdict.witness, o.query_count - start)


# ---------------- Hausdorff and approximate testers ----------------

def _sample_barriers(o: FreeSpaceOracle, samples: int, rng: np.random.Generator) -> Verdict:
    start = o.query_count
    cols = rng.integers(1, o.n_cols + 1, size=samples)
    rows = rng.integers(1, o.n_rows + 1, size=samples)
    found: Optional[Barrier] = None
    # every sample is read, so the query count does not depend on the answer
    for axis, picks in ((Axis.COLUMNS, cols), (Axis.ROWS, rows)):
        for k in picks:
            if is_barrier(o, axis, int(k)) and found is None:
                found = Barrier(axis, int(k))
    if found is not None:
        return _no(o, start, found)
    return _yes(o, start)


def hausdorff_tester(o: FreeSpaceOracle, eps: float, rng: np.random.Generator) -> Verdict:
    if not 0 < eps < 1:
        raise BadParam(f"eps must lie in (0, 1), got {eps}")
    return _sample_barriers(o, int(math.ceil(2 / eps)), rng)


def approx_frechet_tester(o: FreeSpaceOracle, eps: float, t: int, rng: np.random.Generator) -> Verdict:
    """Hausdorff tester at eps/(8t): ceil(16t/eps) column and row samples."""
    if not 0 < eps < 2 or t < 1:
        raise BadParam(f"need 0 < eps < 2 and t >= 1; got eps={eps}, t={t}")
    return _sample_barriers(o, int(math.ceil(16 * t / eps)), rng)


# ---------------- adapters ----------------

@dataclass(frozen=True)
class KnownT:
    t: int


OBLIVIOUS = "oblivious"
Mode = Union[KnownT, str]


def _run_discrete(
    o: FreeSpaceOracle,
    eps: float,
    mode: Mode,
    rng: np.random.Generator,
    trace: Optional[Dict[str, Any]],
    t_override: Optional[int] = None,
    zeta: Optional[float] = None,
) -> Verdict:
    if isinstance(mode, KnownT):
        t = mode.t if t_override is None else t_override
        return frechet_tester1(o, Tester1Params(t=t, eps=eps), rng, trace)
    if mode == OBLIVIOUS:
        return frechet_tester2(o, eps, rng, zeta=zeta, trace=trace)
    raise BadParam(f"unknown mode {mode!r}")


def reduced_frechet_tester(
    P: Curve,
    Q: Curve,
    delta: float,
    eps: float,
    eps_prime: float,
    alpha: float,
    mode: Mode,
    rng: np.random.Generator,
    gamma: float = 1.0,
    zeta: Optional[float] = None,
    trace: Optional[Dict[str, Any]] = None,
) -> Verdict:
    """(1+eps')-approximate tester on the beta-reduced view of the delta-free space."""
    if gamma < 1:
        raise BadParam(f"gamma must be >= 1, got {gamma}")
    beta = compute_beta(eps_prime, delta, alpha)
    view = reduce(CurveOracle(P, Q, delta), beta)
    t_reduced = None
    if isinstance(mode, KnownT) and beta > 1:
        t_reduced = int(math.ceil(4 * gamma * mode.t / eps_prime))
    if trace is not None:
        trace.update(beta=beta, reduced_n=view.n_cols, t_reduced=t_reduced)
    return _run_discrete(view, eps, mode, rng, trace, t_override=t_reduced, zeta=zeta)


def continuous_frechet_tester(
    P: Curve,
    Q: Curve,
    delta: float,
    eps: float,
    eps_prime: float,
    mode: Mode,
    rng: np.random.Generator,
    zeta: Optional[float] = None,
    trace: Optional[Dict[str, Any]] = None,
) -> Verdict:
    """Subsample both curves at a = eps'/4 * delta and test the discrete pair at (1 + eps'/2) delta.

    With KnownT, t is the locality of the subsampled pair's free space.
    """
    if not 0 < eps < 1 or not eps_prime > 0 or not delta > 0:
        raise BadParam(f"need 0<eps<1, eps'>0, delta>0; got eps={eps}, eps'={eps_prime}, delta={delta}")
    len_p, len_q = curve_length(P), curve_length(Q)
    if abs(len_p - len_q) > 1e-9 * max(len_p, len_q):
        raise LengthMismatch(f"curve lengths differ: {len_p} vs {len_q}")
    eps2 = eps_prime / 4
    a = eps2 * delta
    delta_prime = (1 + 2 * eps2) * delta
    P_a, Q_a = subsample(P, a), subsample(Q, a)
    if len(P_a) != len(Q_a):
        raise LengthMismatch(f"subsampled curves have {len(P_a)} and {len(Q_a)} vertices")
    if trace is not None:
        trace.update(eps2=eps2, a=a, delta_prime=delta_prime, n_a=len(P_a), eps_discrete=eps / 12)
    o = CurveOracle(P_a, Q_a, delta_prime)
    return _run_discrete(o, eps / 12, mode, rng, trace, zeta=zeta)
