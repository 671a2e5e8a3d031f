"""Curves in Euclidean space: measurements, subsampling, file IO and instance generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist

from .errors import BadParam, BadStep, CoincidentVertices, CurveFormatError

Point = Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Curve:
    """Ordered vertex sequence, stored as a read-only (n, d) float64 array."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            # a bare list of scalars is a curve in R^1
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise BadParam(f"curve needs shape (n>=1, d>=1), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise BadParam("curve coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "Curve":
        return cls(np.asarray(list(points), dtype=np.float64))

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def point(self, i: int) -> Point:
        """Vertex i, 1-based."""
        return tuple(float(x) for x in self.points[i - 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Curve):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def __repr__(self) -> str:
        return f"Curve(n={len(self)}, dim={self.dim})"


@dataclass(frozen=True)
class CurveStats:
    arc_length: float
    straightness: float
    edge_min: float
    edge_max: float


def _edge_lengths(P: Curve) -> np.ndarray:
    return np.linalg.norm(np.diff(P.points, axis=0), axis=1)


def _prefix_lengths(P: Curve) -> np.ndarray:
    return np.concatenate(([0.0], np.cumsum(_edge_lengths(P))))


def curve_length(P: Curve) -> float:
    """Sum of consecutive vertex distances; 0 for a single vertex."""
    if len(P) < 2:
        return 0.0
    return float(_edge_lengths(P).sum())


def straightness(P: Curve) -> float:
    """Largest ratio of subcurve length to endpoint distance over all vertex pairs."""
    n = len(P)
    if n < 2:
        raise BadParam("straightness needs at least two vertices")
    prefix = _prefix_lengths(P)
    pts = P.points
    best = 1.0
    # one row of the pair table at a time keeps memory linear in n
    for i in range(n - 1):
        dist = np.linalg.norm(pts[i + 1:] - pts[i], axis=1)
        zero = np.flatnonzero(dist == 0.0)
        if zero.size:
            raise CoincidentVertices(f"vertices {i + 1} and {i + 2 + int(zero[0])} coincide")
        ratio = float(np.max((prefix[i + 1:] - prefix[i]) / dist))
        if ratio > best:
            best = ratio
    return best


def edge_length_range(P: Curve) -> Tuple[float, float]:
    if len(P) < 2:
        raise BadParam("edge_length_range needs at least two vertices")
    edges = _edge_lengths(P)
    return float(edges.min()), float(edges.max())


def curve_stats(P: Curve) -> CurveStats:
    lo, hi = edge_length_range(P)
    return CurveStats(arc_length=curve_length(P), straightness=straightness(P), edge_min=lo, edge_max=hi)


def subsample(P: Curve, a: float) -> Curve:
    """Vertices at arc-lengths 0, a, 2a, ... plus the final vertex; floor(length/a) edges."""
    total = curve_length(P)
    if not (a > 0) or a > total:
        raise BadStep(f"step a={a} must lie in (0, {total}]")
    edges = int(math.floor(total / a))
    # the last edge absorbs the remainder, so it is in [a, 2a)
    stations = np.arange(edges, dtype=np.float64) * a
    prefix = _prefix_lengths(P)
    pts = P.points
    seg = np.searchsorted(prefix, stations, side="right") - 1
    seg = np.clip(seg, 0, len(P) - 2)
    seg_len = prefix[seg + 1] - prefix[seg]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(seg_len > 0, (stations - prefix[seg]) / seg_len, 0.0)
    frac = np.clip(frac, 0.0, 1.0)[:, None]
    sampled = pts[seg] + frac * (pts[seg + 1] - pts[seg])
    return Curve(np.vstack([sampled, pts[-1:]]))


def aspect_ratio(P: Curve, Q: Curve, delta: float) -> float:
    """Diameter of P∪Q over min(delta, closest distinct vertex pair)."""
    if not delta > 0:
        raise BadParam(f"delta must be positive, got {delta}")
    allpts = np.vstack([P.points, Q.points])
    if allpts.shape[0] < 2:
        return 0.0
    dists = pdist(allpts)
    positive = dists[dists > 0]
    if positive.size == 0:
        return 0.0
    return float(dists.max() / min(delta, float(positive.min())))


# ---------------- File IO ----------------

def save_curve(P: Curve, path: Union[str, Path]) -> Path:
    """Write P as JSON ({"dim", "points"}) or, for a .csv suffix, one point per line."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        np.savetxt(path, P.points, delimiter=",", fmt="%.17g")
    else:
        body = {"dim": P.dim, "points": P.points.tolist()}
        path.write_text(json.dumps(body), encoding="utf-8")
    return path


def load_curve(path: Union[str, Path]) -> Curve:
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            pts = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
            return Curve(pts)
        body = json.loads(path.read_text(encoding="utf-8"))
        pts = np.asarray(body["points"], dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != int(body["dim"]):
            raise CurveFormatError(f"{path}: points do not match dim={body['dim']}")
        return Curve(pts)
    except CurveFormatError:
        raise
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise CurveFormatError(f"Failed to read curve from {path}: {e}") from e


# ---------------- Instance generators ----------------

def _random_unit(d: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(d)
        norm = float(np.linalg.norm(v))
        if norm > 1e-12:
            return v / norm


def gen_straight_curve(
    n: int,
    d: int,
    edge_range: Tuple[float, float],
    rng: np.random.Generator,
    max_turn_degrees: float = 30.0,
) -> Curve:
    """Walk whose edges each tilt away from one fixed heading by at most max_turn_degrees.

    Every edge advances along the heading by at least cos(theta) of its length,
    so straightness stays below 1/cos(theta) whatever n is. The result is still
    measured with straightness(); no particular value is targeted.
    """
    lo, hi = edge_range
    if n < 2 or d < 1 or not (0 < lo <= hi):
        raise BadParam(f"need n>=2, d>=1, 0<edge_min<=edge_max; got n={n}, d={d}, range={edge_range}")
    if not 0 <= max_turn_degrees < 90:
        raise BadParam(f"max_turn_degrees must lie in [0, 90), got {max_turn_degrees}")
    max_turn = math.radians(max_turn_degrees)
    heading = _random_unit(d, rng)
    pts = np.zeros((n, d))
    for i in range(1, n):
        direction = heading
        if d > 1 and max_turn > 0:
            w = rng.standard_normal(d)
            w -= w.dot(heading) * heading
            w_norm = float(np.linalg.norm(w))
            if w_norm > 1e-12:
                theta = rng.uniform(-max_turn, max_turn)
                direction = math.cos(theta) * heading + math.sin(theta) * (w / w_norm)
                direction = direction / np.linalg.norm(direction)
        step = lo if lo == hi else rng.uniform(lo, hi)
        pts[i] = pts[i - 1] + step * direction
    return Curve(pts)


def perturb_within(P: Curve, r: float, rng: np.random.Generator) -> Curve:
    """Move every vertex by at most r, so the identity coupling certifies d_dF(P, Q) <= r."""
    if r < 0:
        raise BadParam(f"radius must be non-negative, got {r}")
    if r == 0:
        return P
    n, d = P.points.shape
    offsets = np.stack([_random_unit(d, rng) for _ in range(n)])
    radii = r * rng.uniform(0.0, 1.0, size=n) * (1.0 - 1e-12)
    out = P.points + offsets * radii[:, None]
    # rounding may push a vertex past r; pull those back onto p_i
    moved = np.linalg.norm(out - P.points, axis=1)
    out[moved > r] = P.points[moved > r]
    return Curve(out)


def make_far_pair(
    P: Curve,
    eps: float,
    delta: float,
    margin: float,
    rng: np.random.Generator,
) -> Curve:
    """Translate a block of ceil(2*eps*n) consecutive vertices by delta*margin.

    The output is not guaranteed to be far; callers certify it with the
    reference min-cost coupling before use.
    """
    if not (0 < eps < 2) or not delta > 0 or not margin > 0:
        raise BadParam(f"need 0<eps<2, delta>0, margin>0; got eps={eps}, delta={delta}, margin={margin}")
    n, d = P.points.shape
    block = min(n, max(1, int(math.ceil(2 * eps * n))))
    start = int(rng.integers(0, n - block + 1))
    shift = _random_unit(d, rng) * (delta * margin)
    out = P.points.copy()
    out[start:start + block] += shift
    return Curve(out)


def _diameter(P: Curve) -> float:
    if len(P) < 2:
        return 0.0
    return float(pdist(P.points).max())


def gen_hausdorff_far_pair(
    n: int,
    m: int,
    eps: float,
    delta: float,
    rng: np.random.Generator,
) -> Tuple[Curve, Curve]:
    """Curves of n and m vertices whose delta-free space has at least ceil(eps(n+m)) barriers.

    Q follows P within delta/4 except for a run of vertices pushed beyond the
    diameter of P, which turns their rows into barriers. Callers still certify
    the barrier count against the reference.
    """
    if n < 2 or m < 2 or not (0 < eps < 1) or not delta > 0:
        raise BadParam(f"need n,m>=2, 0<eps<1, delta>0; got n={n}, m={m}, eps={eps}, delta={delta}")
    P = gen_straight_curve(n, 2, (delta / 2, delta), rng)
    picks = np.round(np.linspace(0, n - 1, m)).astype(int)
    base = perturb_within(Curve(P.points[picks]), delta / 4, rng).points.copy()
    moved = min(m, int(math.ceil(eps * (n + m))))
    start = int(rng.integers(0, m - moved + 1))
    shift = _random_unit(2, rng) * (_diameter(P) + 2 * delta)
    base[start:start + moved] += shift
    return P, Curve(base)


def max_vertex_offset(P: Curve, Q: Curve) -> float:
    """max_i d(p_i, q_i) for equal-length curves (the identity coupling cost)."""
    if len(P) != len(Q):
        raise BadParam("identity coupling needs curves of equal length")
    return float(np.max(np.linalg.norm(P.points - Q.points, axis=1)))


def distances_from(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Distances from x to every row of points.

    Every distance in the package goes through here so that column queries,
    row queries and the reference tables agree bit-for-bit.
    """
    diff = points - x
    return np.sqrt((diff * diff).sum(axis=1))


def pairwise_distances(P: Curve, Q: Curve) -> np.ndarray:
    """(n, m) Euclidean distance table, entry [i-1, j-1] = d(p_i, q_j)."""
    out = np.empty((len(P), len(Q)))
    for i in range(len(P)):
        out[i] = distances_from(Q.points, P.points[i])
    return out
