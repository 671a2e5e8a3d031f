"""Query oracle over the delta-free space matrix.

Column i corresponds to vertex p_i of P, row j to vertex q_j of Q; entry
(i, j) is 0 when d(p_i, q_j) <= delta and 1 otherwise. A query returns the
sorted 1-based indices of the zero-entries of one column or one row.
Explicit matrices are uint8 arrays indexed [i-1, j-1].
"""

from __future__ import annotations

import math
import threading
from enum import Enum
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from .errors import BadParam, CurveFormatError, IndexOutOfRange
from .geometry import Curve, distances_from

ZeroList = Tuple[int, ...]


class Axis(str, Enum):
    COLUMNS = "columns"
    ROWS = "rows"

    @property
    def other(self) -> "Axis":
        return Axis.ROWS if self is Axis.COLUMNS else Axis.COLUMNS


class FreeSpaceOracle:
    """Query-counted access to the rows and columns of a free space matrix.

    query_count is the only mutable state and is guarded by a lock, so one
    instance may be shared between threads. Answers are memoized; a repeated
    query is still charged.
    """

    def __init__(self, n_cols: int, n_rows: int) -> None:
        if n_cols < 1 or n_rows < 1:
            raise BadParam(f"free space matrix needs positive extents, got {n_cols}x{n_rows}")
        self.n_cols = int(n_cols)
        self.n_rows = int(n_rows)
        self._query_count = 0
        self._lock = threading.Lock()
        self._memo: Dict[Tuple[Axis, int], ZeroList] = {}

    # -- constructors --
    @staticmethod
    def from_curves(P: Curve, Q: Curve, delta: float) -> "CurveOracle":
        return CurveOracle(P, Q, delta)

    @staticmethod
    def from_matrix(M: np.ndarray) -> "MatrixOracle":
        return MatrixOracle(M)

    # -- queries --
    @property
    def query_count(self) -> int:
        return self._query_count

    @property
    def is_square(self) -> bool:
        return self.n_cols == self.n_rows

    def extent(self, axis: Axis) -> int:
        return self.n_cols if Axis(axis) is Axis.COLUMNS else self.n_rows

    def query(self, axis: Axis, index: int) -> ZeroList:
        axis = Axis(axis)
        self._check(axis, index)
        with self._lock:
            self._query_count += 1
        key = (axis, int(index))
        cached = self._memo.get(key)
        if cached is None:
            cached = self._compute(axis, int(index))
            self._memo[key] = cached
        return cached

    def query_column(self, i: int) -> ZeroList:
        return self.query(Axis.COLUMNS, i)

    def query_row(self, j: int) -> ZeroList:
        return self.query(Axis.ROWS, j)

    def _check(self, axis: Axis, index: int) -> None:
        limit = self.extent(axis)
        if not 1 <= index <= limit:
            raise IndexOutOfRange(f"{axis.value[:-1]} index {index} outside [1, {limit}]")

    def _compute(self, axis: Axis, index: int) -> ZeroList:
        raise NotImplementedError

    def fresh(self) -> "FreeSpaceOracle":
        """Same backend, zero query count, empty memo."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.n_cols}x{self.n_rows}, queries={self.query_count})"


class CurveOracle(FreeSpaceOracle):
    """Backend computing each query by a linear scan over the other curve."""

    def __init__(self, P: Curve, Q: Curve, delta: float) -> None:
        if not delta >= 0:
            raise BadParam(f"delta must be non-negative, got {delta}")
        if P.dim != Q.dim:
            raise BadParam(f"curves live in different dimensions ({P.dim} vs {Q.dim})")
        super().__init__(len(P), len(Q))
        self.P = P
        self.Q = Q
        self.delta = float(delta)

    def _compute(self, axis: Axis, index: int) -> ZeroList:
        if axis is Axis.COLUMNS:
            dist = distances_from(self.Q.points, self.P.points[index - 1])
        else:
            dist = distances_from(self.P.points, self.Q.points[index - 1])
        return tuple(int(k) + 1 for k in np.flatnonzero(dist <= self.delta))

    def fresh(self) -> "CurveOracle":
        return CurveOracle(self.P, self.Q, self.delta)


class MatrixOracle(FreeSpaceOracle):
    """Backend over an explicit 0/1 matrix indexed [column-1, row-1]."""

    def __init__(self, M: np.ndarray) -> None:
        arr = np.asarray(M)
        if arr.ndim != 2:
            raise BadParam(f"explicit matrix must be 2-D, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise BadParam("explicit matrix entries must be 0 or 1")
        super().__init__(arr.shape[0], arr.shape[1])
        self.M = arr.astype(np.uint8, copy=True)
        self.M.setflags(write=False)

    def _compute(self, axis: Axis, index: int) -> ZeroList:
        line = self.M[index - 1, :] if axis is Axis.COLUMNS else self.M[:, index - 1]
        return tuple(int(k) + 1 for k in np.flatnonzero(line == 0))

    def fresh(self) -> "MatrixOracle":
        # the read-only matrix is shared; only the counter and memo are new
        clone = MatrixOracle.__new__(MatrixOracle)
        FreeSpaceOracle.__init__(clone, self.n_cols, self.n_rows)
        clone.M = self.M
        return clone


class ReducedOracle(FreeSpaceOracle):
    """View R[i, j] = M[i*beta, j*beta] of an inner oracle.

    Each reduced query issues exactly one inner query, so accounting lives on
    the inner oracle.
    """

    def __init__(self, inner: FreeSpaceOracle, beta: int) -> None:
        if beta < 1 or beta > min(inner.n_cols, inner.n_rows):
            raise BadParam(f"beta must lie in [1, {min(inner.n_cols, inner.n_rows)}], got {beta}")
        super().__init__(inner.n_cols // beta, inner.n_rows // beta)
        self.inner = inner
        self.beta = int(beta)

    @property
    def query_count(self) -> int:
        return self.inner.query_count

    def query(self, axis: Axis, index: int) -> ZeroList:
        axis = Axis(axis)
        self._check(axis, index)
        zeros = self.inner.query(axis, index * self.beta)
        return self._remap(zeros)

    def _compute(self, axis: Axis, index: int) -> ZeroList:
        return self._remap(self.inner._compute(axis, index * self.beta))

    def fresh(self) -> "ReducedOracle":
        return ReducedOracle(self.inner.fresh(), self.beta)

    def _remap(self, zeros: ZeroList) -> ZeroList:
        b = self.beta
        return tuple(k // b for k in zeros if k % b == 0)


def compute_beta(eps_prime: float, delta: float, alpha: float) -> int:
    """max(1, floor(eps_prime * delta / (2 * alpha)))."""
    if not (eps_prime > 0 and delta > 0 and alpha > 0):
        raise BadParam(f"eps_prime, delta, alpha must be positive; got {eps_prime}, {delta}, {alpha}")
    return max(1, int(math.floor(eps_prime * delta / (2 * alpha))))


def reduce(o: FreeSpaceOracle, beta: int) -> ReducedOracle:
    return ReducedOracle(o, beta)


def materialize(o: FreeSpaceOracle) -> np.ndarray:
    """Explicit matrix of o, built without charging any queries."""
    M = np.ones((o.n_cols, o.n_rows), dtype=np.uint8)
    for i in range(1, o.n_cols + 1):
        zeros = o._compute(Axis.COLUMNS, i)
        if zeros:
            M[i - 1, np.asarray(zeros) - 1] = 0
    return M


def free_space_matrix(P: Curve, Q: Curve, delta: float) -> np.ndarray:
    return materialize(CurveOracle(P, Q, delta))


# ---------------- File IO ----------------

_HEADER_NOTE = "line i = column i (vertex p_i), character j = row j (vertex q_j), 0 = within delta"


def save_matrix(M: np.ndarray, path: Union[str, Path]) -> Path:
    arr = np.asarray(M, dtype=np.uint8)
    path = Path(path)
    lines = [f"{arr.shape[0]} {arr.shape[1]}  # {_HEADER_NOTE}"]
    lines.extend("".join("1" if v else "0" for v in col) for col in arr)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise CurveFormatError(f"Failed to read matrix from {path}: {e}") from e
    lines = [ln.split("#", 1)[0].strip() for ln in raw]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise CurveFormatError(f"{path}: empty matrix file")
    try:
        n, m = (int(tok) for tok in lines[0].split())
    except ValueError as e:
        raise CurveFormatError(f"{path}: first line must be 'n m', got {lines[0]!r}") from e
    body = lines[1:]
    if len(body) != n or any(len(ln) != m or set(ln) - {"0", "1"} for ln in body):
        raise CurveFormatError(f"{path}: expected {n} lines of {m} characters from {{0,1}}")
    return np.array([[ch == "1" for ch in ln] for ln in body], dtype=np.uint8).reshape(n, m)
