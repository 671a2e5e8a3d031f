"""Exact, exhaustive oracles over fully materialized matrices and curves.

Everything here reads the whole input; it is the ground truth that the
sublinear testers and the structural properties are checked against.
Matrix arguments are 0/1 arrays indexed [column-1, row-1]; every index in
inputs and outputs is 1-based.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BadParam, IndexOutOfRange, NoZeros, NotZeroCorners
from .freespace import Axis
from .geometry import Curve, pairwise_distances

Entry = Tuple[int, int]

_INF = np.iinfo(np.int64).max // 4
_PAIR_BLOCK = 256


@dataclass(frozen=True)
class CouplingPath:
    """Monotone lattice path from (1, 1) to (n, m)."""

    steps: Tuple[Entry, ...]

    def __post_init__(self) -> None:
        if not self.steps or self.steps[0] != (1, 1):
            raise BadParam("coupling path must start at (1, 1)")
        for (i, j), (a, b) in zip(self.steps, self.steps[1:]):
            if (a - i, b - j) not in ((1, 0), (0, 1), (1, 1)):
                raise BadParam(f"illegal step ({i},{j}) -> ({a},{b})")

    @property
    def end(self) -> Entry:
        return self.steps[-1]

    def cost(self, M: np.ndarray) -> int:
        return int(sum(int(M[i - 1, j - 1]) for i, j in self.steps))

    def zero_entries(self, M: np.ndarray) -> List[Entry]:
        return [(i, j) for i, j in self.steps if M[i - 1, j - 1] == 0]


@dataclass(frozen=True)
class DiagonalRestrictedPath(CouplingPath):
    """Coupling path whose diagonal steps join two zero-entries."""

    def is_valid_for(self, M: np.ndarray) -> bool:
        for (i, j), (a, b) in zip(self.steps, self.steps[1:]):
            if a == i + 1 and b == j + 1 and (M[i - 1, j - 1] or M[a - 1, b - 1]):
                return False
        return True


@dataclass(frozen=True)
class LocalityFailure:
    """Two columns (or rows) failing t-locality, with a violating zero-entry pair."""

    axis: Axis
    first: int
    second: int
    entries: Tuple[Entry, Entry]


@dataclass
class LocalityCensus:
    t_min: float
    t: float
    pair_failures: List[LocalityFailure] = field(default_factory=list)
    second_order_failures: List[Tuple[Axis, int]] = field(default_factory=list)

    @property
    def passes(self) -> bool:
        return not self.pair_failures and not self.second_order_failures


@dataclass(frozen=True)
class StrongWitness:
    """Witness set W of a strong (t, zeta)-locality certificate; I is everything else."""

    columns: FrozenSet[int]
    rows: FrozenSet[int]
    ignored_columns: FrozenSet[int]
    ignored_rows: FrozenSet[int]
    zeta: float


def _checked(M: np.ndarray) -> np.ndarray:
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise BadParam(f"need a non-empty 2-D matrix, got shape {arr.shape}")
    return arr


def _as_matrix(M: np.ndarray) -> np.ndarray:
    return _checked(M).astype(np.int64)


# ---------------- distances ----------------

def discrete_frechet(P: Curve, Q: Curve) -> float:
    """Min over couplings of the max vertex distance along the coupling."""
    D = pairwise_distances(P, Q)
    n, m = D.shape
    F = np.full((n, m), np.inf)
    for s in range(n + m - 1):
        i = np.arange(max(0, s - m + 1), min(n - 1, s) + 1)
        j = s - i
        best = np.full(i.shape, np.inf)
        if s == 0:
            best[:] = -np.inf
        left = i > 0
        best[left] = np.minimum(best[left], F[i[left] - 1, j[left]])
        down = j > 0
        best[down] = np.minimum(best[down], F[i[down], j[down] - 1])
        diag = left & down
        best[diag] = np.minimum(best[diag], F[i[diag] - 1, j[diag] - 1])
        F[i, j] = np.maximum(D[i, j], best)
    return float(F[-1, -1])


def discrete_hausdorff(P: Curve, Q: Curve) -> float:
    D = pairwise_distances(P, Q)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


# ---------------- coupling costs ----------------

def _cost_table(M: np.ndarray, restrict_diagonal: bool) -> np.ndarray:
    n, m = M.shape
    C = np.full((n, m), _INF, dtype=np.int64)
    for s in range(n + m - 1):
        i = np.arange(max(0, s - m + 1), min(n - 1, s) + 1)
        j = s - i
        best = np.full(i.shape, _INF, dtype=np.int64)
        if s == 0:
            best[:] = 0
        left = i > 0
        best[left] = np.minimum(best[left], C[i[left] - 1, j[left]])
        down = j > 0
        best[down] = np.minimum(best[down], C[i[down], j[down] - 1])
        diag = left & down
        if restrict_diagonal:
            diag &= M[i, j] == 0
            diag[diag] &= M[i[diag] - 1, j[diag] - 1] == 0
        best[diag] = np.minimum(best[diag], C[i[diag] - 1, j[diag] - 1])
        C[i, j] = M[i, j] + best
    return C


def _trace(M: np.ndarray, C: np.ndarray, restrict_diagonal: bool) -> Tuple[Entry, ...]:
    # walk back from the far corner preferring diagonal, then right, then up
    i, j = M.shape[0] - 1, M.shape[1] - 1
    path = [(i + 1, j + 1)]
    while (i, j) != (0, 0):
        need = C[i, j] - M[i, j]
        diag_ok = i > 0 and j > 0 and (not restrict_diagonal or (M[i, j] == 0 and M[i - 1, j - 1] == 0))
        if diag_ok and C[i - 1, j - 1] == need:
            i, j = i - 1, j - 1
        elif i > 0 and C[i - 1, j] == need:
            i -= 1
        else:
            j -= 1
        path.append((i + 1, j + 1))
    return tuple(reversed(path))


def min_cost_coupling(M: np.ndarray) -> int:
    """Fewest one-entries on any coupling path from (1, 1) to (n, m)."""
    A = _as_matrix(M)
    return int(_cost_table(A, False)[-1, -1])


def min_cost_coupling_path(M: np.ndarray) -> Tuple[int, CouplingPath]:
    A = _as_matrix(M)
    C = _cost_table(A, False)
    return int(C[-1, -1]), CouplingPath(_trace(A, C, False))


def min_cost_diagonal_restricted(M: np.ndarray) -> int:
    A = _as_matrix(M)
    return int(_cost_table(A, True)[-1, -1])


def min_cost_diagonal_restricted_path(M: np.ndarray) -> Tuple[int, DiagonalRestrictedPath]:
    A = _as_matrix(M)
    C = _cost_table(A, True)
    return int(C[-1, -1]), DiagonalRestrictedPath(_trace(A, C, True))


# ---------------- locality ----------------

def _extremes(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Lowest and highest zero index (1-based) per column; -1 where the column has none."""
    zero = A == 0
    has = zero.any(axis=1)
    m = A.shape[1]
    low = np.where(has, zero.argmax(axis=1) + 1, -1)
    high = np.where(has, m - zero[:, ::-1].argmax(axis=1), -1)
    return low, high


def _pair_gap(low: np.ndarray, high: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Largest |Δ| between zeros of every slice pair, the index distance, and a validity mask."""
    idx = np.arange(low.shape[0])
    valid = (low > 0)[:, None] & (low > 0)[None, :]
    gap = np.maximum(high[None, :] - low[:, None], high[:, None] - low[None, :])
    dist = np.abs(idx[:, None] - idx[None, :])
    return gap, dist, valid


def exact_locality(M: np.ndarray, strict: bool = False) -> float:
    """Smallest t for which M is t-local.

    An all-ones matrix is t-local for every t; it yields 0, or NoZeros when
    strict is set.
    """
    A = _checked(M)
    if not (A == 0).any():
        if strict:
            raise NoZeros("matrix has no zero-entries")
        return 0.0
    best = 0.0
    for B in (A, A.T):
        # for a fixed pair of slices the ratio only depends on the widest zero gap
        low, high = _extremes(B)
        idx = np.flatnonzero(low > 0)
        low, high = low[idx], high[idx]
        # blocks of rows keep the pair table small for large n
        for s in range(0, idx.size, _PAIR_BLOCK):
            e = s + _PAIR_BLOCK
            gap = np.maximum(high[None, :] - low[s:e, None], high[s:e, None] - low[None, :])
            dist = np.abs(idx[s:e, None] - idx[None, :])
            best = max(best, float((gap / (2.0 + dist)).max()))
    return best


def is_t_local(M: np.ndarray, t: float) -> bool:
    return exact_locality(M) <= t


def _axis_view(A: np.ndarray, axis: Axis) -> np.ndarray:
    return A if Axis(axis) is Axis.COLUMNS else A.T


def _orient(axis: Axis, a: int, b: int) -> Entry:
    return (a, b) if axis is Axis.COLUMNS else (b, a)


def locality_census(M: np.ndarray, t: float) -> LocalityCensus:
    """Every slice pair failing t-locality and every slice failing second-order t-locality."""
    if t < 0:
        raise BadParam(f"t must be non-negative, got {t}")
    A = _as_matrix(M)
    census = LocalityCensus(t_min=exact_locality(A), t=float(t))
    spreads = {}
    for axis in (Axis.COLUMNS, Axis.ROWS):
        B = _axis_view(A, axis)
        low, high = _extremes(B)
        spreads[axis] = np.where(low > 0, high - low, 0)
        gap, dist, valid = _pair_gap(low, high)
        bad = valid & (gap > t * (2 + dist))
        for a, b in zip(*np.nonzero(np.triu(bad, k=1))):
            if high[b] - low[a] >= high[a] - low[b]:
                pair = ((a + 1, int(low[a])), (b + 1, int(high[b])))
            else:
                pair = ((a + 1, int(high[a])), (b + 1, int(low[b])))
            census.pair_failures.append(
                LocalityFailure(axis, int(a) + 1, int(b) + 1, (_orient(axis, *pair[0]), _orient(axis, *pair[1])))
            )
    for axis in (Axis.COLUMNS, Axis.ROWS):
        B = _axis_view(A, axis)
        own = spreads[axis]
        crossing = spreads[axis.other]
        for k in range(B.shape[0]):
            zeros = np.flatnonzero(B[k] == 0)
            if zeros.size == 0:
                continue
            if own[k] > 2 * t or (crossing[zeros] > 2 * t).any():
                census.second_order_failures.append((axis, k + 1))
    return census


# ---------------- permeability and barriers ----------------

def brute_permeable(M: np.ndarray, axis: Axis, lo: int, hi: int) -> bool:
    """Cost-zero monotone path from a zero in slice lo to a zero in slice hi.

    Breadth-first search over the zero-entries of the block.
    """
    A = _axis_view(_as_matrix(M), axis)
    extent, other = A.shape
    if not 1 <= lo <= hi <= extent:
        raise IndexOutOfRange(f"block [{lo}, {hi}] outside [1, {extent}]")
    zero = A == 0
    queue = deque((lo - 1, int(r)) for r in np.flatnonzero(zero[lo - 1]))
    seen = set(queue)
    while queue:
        k, r = queue.popleft()
        if k == hi - 1:
            return True
        for dk, dr in ((1, 0), (0, 1), (1, 1)):
            nk, nr = k + dk, r + dr
            if nk <= hi - 1 and nr < other and zero[nk, nr] and (nk, nr) not in seen:
                seen.add((nk, nr))
                queue.append((nk, nr))
    return False


def count_barriers(M: np.ndarray) -> Tuple[int, int]:
    """(all-ones columns, all-ones rows)."""
    A = _as_matrix(M)
    ones = A != 0
    return int(ones.all(axis=1).sum()), int(ones.all(axis=0).sum())


def barrier_indices(M: np.ndarray, axis: Axis) -> List[int]:
    B = _axis_view(_as_matrix(M), axis)
    return [int(k) + 1 for k in np.flatnonzero((B != 0).all(axis=1))]


# ---------------- layers ----------------

def _layers(zeros: np.ndarray) -> List[np.ndarray]:
    remaining = zeros
    layers = []
    while remaining.shape[0]:
        ci, cj = remaining[:, 0], remaining[:, 1]
        # dom[a, b]: a dominates b (componentwise >=, distinct)
        dom = (ci[:, None] >= ci[None, :]) & (cj[:, None] >= cj[None, :])
        np.fill_diagonal(dom, False)
        bottom = ~dom.any(axis=1)
        layers.append(remaining[bottom])
        remaining = remaining[~bottom]
    return layers


def layer_labels(M: np.ndarray, rect: Tuple[Entry, Entry]) -> dict:
    """Map every zero-entry of rect to its 1-based layer number."""
    A = _as_matrix(M)
    (i, j), (i2, j2) = rect
    if not (1 <= i <= i2 <= A.shape[0] and 1 <= j <= j2 <= A.shape[1]):
        raise IndexOutOfRange(f"rectangle {rect} outside the matrix or not ordered")
    if A[i - 1, j - 1] or A[i2 - 1, j2 - 1]:
        raise NotZeroCorners(f"corners {rect} must both be zero-entries")
    block = A[i - 1:i2, j - 1:j2]
    zeros = np.argwhere(block == 0) + np.array([i, j])
    labels = {}
    for level, members in enumerate(_layers(zeros), start=1):
        for a, b in members:
            labels[(int(a), int(b))] = level
    return labels


def layer_count(M: np.ndarray, rect: Tuple[Entry, Entry]) -> int:
    labels = layer_labels(M, rect)
    return max(labels.values())


# ---------------- strong locality ----------------

def greedy_strong_witness(M: np.ndarray, t: float) -> Optional[StrongWitness]:
    """Drop every slice named by a failure; a sufficient certificate, not an optimal one."""
    A = _as_matrix(M)
    n_cols, n_rows = A.shape
    census = locality_census(A, t)
    drop = {Axis.COLUMNS: set(), Axis.ROWS: set()}
    for failure in census.pair_failures:
        drop[failure.axis].update((failure.first, failure.second))
    for axis, k in census.second_order_failures:
        drop[axis].add(k)
    if {1, n_cols} & drop[Axis.COLUMNS] or {1, n_rows} & drop[Axis.ROWS]:
        return None
    removed = len(drop[Axis.COLUMNS]) + len(drop[Axis.ROWS])
    return StrongWitness(
        columns=frozenset(range(1, n_cols + 1)) - drop[Axis.COLUMNS],
        rows=frozenset(range(1, n_rows + 1)) - drop[Axis.ROWS],
        ignored_columns=frozenset(drop[Axis.COLUMNS]),
        ignored_rows=frozenset(drop[Axis.ROWS]),
        zeta=removed / n_cols,
    )


def render(M: np.ndarray) -> str:
    """Matrix as text, one line per row from the top row down, columns left to right."""
    A = _as_matrix(M)
    return "\n".join("".join(str(int(A[i, j])) for i in range(A.shape[0])) for j in range(A.shape[1] - 1, -1, -1))


def entries_zero(M: np.ndarray, entries: Sequence[Entry]) -> bool:
    A = _as_matrix(M)
    return all(A[i - 1, j - 1] == 0 for i, j in entries)
