"""Metric spaces, augmented points, and tie-broken neighbor ordering.

Three concrete spaces cover every supported experiment: a finite atom set
with an explicit distance matrix, a closed real interval under the absolute
difference, and an axis-aligned box under the Euclidean norm.

Each training point carries an auxiliary draw ``z`` in [0, 1) next to its
location.  Neighbor queries order points lexicographically by
``(distance, z, source_index)``, which keeps the order total even when
distances coincide.  An :class:`AugmentedBall` pairs an ordinary closed ball
with a ``z`` cutoff on its sphere: the ball contains every point strictly
inside the radius, plus the sphere points whose ``z`` falls below the
cutoff.  With that convention "the first k points in neighbor order" and
"the points inside the ball spanned by the (k+1)-th neighbor" describe the
same set, which is what makes the augmented machinery worth the bother.

Neighbor search is a deliberate linear scan.  Sample sizes stay at desk
scale throughout, and no spatial index could change any answer, only the
constant factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError

__all__ = [
    "AugmentedBall",
    "AugmentedPoint",
    "BoxMetric",
    "FiniteMetric",
    "IntervalMetric",
    "MetricSpace",
    "Point",
    "augmented_ball_contains",
    "distance",
    "load_finite_metric",
    "neighbor_order",
]

Point = Union[int, float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class AugmentedPoint:
    """A location joined with its tie-breaking draw and provenance index."""

    location: Point
    z: float
    source_index: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.z < 1.0:
            raise ValueError(f"z must lie in [0, 1), got {self.z}")
        if self.source_index < 0:
            raise ValueError("source_index must be nonnegative")


@dataclass(frozen=True)
class AugmentedBall:
    """Closed ball plus a z cutoff governing membership on the sphere.

    ``z_cut`` may equal 1.0, in which case the whole sphere is included and
    the augmented ball coincides with the closed ball.
    """

    center: Point
    radius: float
    z_cut: float

    def __post_init__(self) -> None:
        if self.radius < 0.0:
            raise ValueError("radius must be nonnegative")
        if not 0.0 <= self.z_cut <= 1.0:
            raise ValueError(f"z_cut must lie in [0, 1], got {self.z_cut}")


class MetricSpace:
    """Common interface of the three point domains."""

    def contains(self, x: Point) -> bool:
        raise NotImplementedError

    def distance(self, a: Point, b: Point) -> float:
        raise NotImplementedError

    def distances_to(self, x: Point, xs: np.ndarray) -> np.ndarray:
        """Vectorized distances from ``x`` to an array of stored locations."""
        raise NotImplementedError

    def check_point(self, x: Point) -> None:
        if not self.contains(x):
            raise DomainError(f"point {x!r} lies outside {self!r}")


class FiniteMetric(MetricSpace):
    """Finite atom set whose metric is an explicit symmetric matrix.

    Points are atom indices ``0 .. m-1``.  The matrix is validated on
    construction: symmetry, zero diagonal, strictly positive off-diagonal
    entries, and the triangle inequality (exhaustively for small matrices,
    on sampled triples for large ones).
    """

    _TRIANGLE_EXHAUSTIVE_LIMIT = 128

    def __init__(self, matrix: np.ndarray | Sequence[Sequence[float]]):
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {mat.shape}")
        m = mat.shape[0]
        if m == 0:
            raise ValueError("distance matrix must have at least one atom")
        if not np.all(np.isfinite(mat)):
            raise ValueError("distance matrix entries must be finite")
        if np.any(mat < 0.0):
            raise ValueError("distances must be nonnegative")
        if np.any(np.diag(mat) != 0.0):
            raise ValueError("self-distances must be zero")
        if m > 1:
            off = mat[~np.eye(m, dtype=bool)]
            if np.any(off <= 0.0):
                raise ValueError("distinct atoms must have positive distance")
        if not np.array_equal(mat, mat.T):
            raise ValueError("distance matrix must be symmetric")
        self._check_triangle(mat)
        self.matrix = mat
        self.matrix.setflags(write=False)
        self.size = m

    @classmethod
    def _check_triangle(cls, mat: np.ndarray) -> None:
        m = mat.shape[0]
        if m <= cls._TRIANGLE_EXHAUSTIVE_LIMIT:
            for k in range(m):
                relaxed = mat[:, k][:, None] + mat[k, :][None, :]
                if np.any(mat > relaxed + 1e-12):
                    i, j = np.unravel_index(np.argmax(mat - relaxed), mat.shape)
                    raise ValueError(
                        f"triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                    )
        else:
            rng = np.random.Generator(np.random.PCG64(0))
            triples = rng.integers(0, m, size=(4 * m, 3))
            for i, j, k in triples:
                if mat[i, j] > mat[i, k] + mat[k, j] + 1e-12:
                    raise ValueError(
                        f"triangle inequality fails on sampled triple ({i},{j},{k})"
                    )

    def __repr__(self) -> str:
        return f"FiniteMetric(m={self.size})"

    def contains(self, x: Point) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= int(x) < self.size

    def distance(self, a: Point, b: Point) -> float:
        self.check_point(a)
        self.check_point(b)
        return float(self.matrix[int(a), int(b)])

    def distances_to(self, x: Point, xs: np.ndarray) -> np.ndarray:
        self.check_point(x)
        return self.matrix[int(x)][np.asarray(xs, dtype=np.intp)]


class IntervalMetric(MetricSpace):
    """Closed real interval [low, high] under the absolute difference."""

    def __init__(self, low: float, high: float):
        if not (np.isfinite(low) and np.isfinite(high) and low < high):
            raise ValueError(f"interval bounds must be finite with low < high, got [{low}, {high}]")
        self.low = float(low)
        self.high = float(high)

    def __repr__(self) -> str:
        return f"IntervalMetric([{self.low}, {self.high}])"

    def contains(self, x: Point) -> bool:
        try:
            v = float(x)
        except (TypeError, ValueError):
            return False
        return np.isfinite(v) and self.low <= v <= self.high

    def distance(self, a: Point, b: Point) -> float:
        self.check_point(a)
        self.check_point(b)
        return abs(float(a) - float(b))

    def distances_to(self, x: Point, xs: np.ndarray) -> np.ndarray:
        self.check_point(x)
        return np.abs(np.asarray(xs, dtype=float) - float(x))


class BoxMetric(MetricSpace):
    """Axis-aligned box in R^d under the Euclidean norm."""

    def __init__(self, lows: Sequence[float], highs: Sequence[float]):
        lo = np.asarray(lows, dtype=float)
        hi = np.asarray(highs, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape or lo.size == 0:
            raise ValueError("lows and highs must be equal-length 1-D sequences")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise ValueError("box bounds must be finite with lows < highs")
        self.lows = lo
        self.highs = hi
        self.dim = lo.size

    def __repr__(self) -> str:
        return f"BoxMetric(dim={self.dim})"

    def contains(self, x: Point) -> bool:
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.dim,):
            return False
        return bool(np.all(np.isfinite(arr)) and np.all(arr >= self.lows) and np.all(arr <= self.highs))

    def distance(self, a: Point, b: Point) -> float:
        self.check_point(a)
        self.check_point(b)
        diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        return float(np.sqrt(np.dot(diff, diff)))

    def distances_to(self, x: Point, xs: np.ndarray) -> np.ndarray:
        self.check_point(x)
        diff = np.asarray(xs, dtype=float) - np.asarray(x, dtype=float)[None, :]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def distance(space: MetricSpace, a: Point, b: Point) -> float:
    """Metric value between two domain points; raises DomainError otherwise."""
    return space.distance(a, b)


def neighbor_order(
    space: MetricSpace, query: Point, training: Sequence[AugmentedPoint]
) -> list[int]:
    """Permutation of list positions sorted by (distance, z, source_index).

    The returned list contains positions into ``training``, nearest first.
    The ordering is total: exact distance ties fall back to the stored z
    draws, and exact (distance, z) ties to the source index.
    """
    if len(training) == 0:
        raise ValueError("training sequence must be nonempty")
    space.check_point(query)
    keys = [
        (space.distance(query, p.location), p.z, p.source_index)
        for p in training
    ]
    return sorted(range(len(training)), key=keys.__getitem__)


def augmented_ball_contains(
    ball: AugmentedBall, point: AugmentedPoint, space: MetricSpace
) -> bool:
    """Membership test: strictly inside, or on the sphere with z below the cutoff.

    The comparison against the radius is exact on purpose; the augmented
    semantics lose their meaning if sphere membership is fuzzed.
    """
    d = space.distance(ball.center, point.location)
    return d < ball.radius or (d == ball.radius and point.z < ball.z_cut)


def load_finite_metric(path: str) -> FiniteMetric:
    """Read a finite metric from text: first line the atom count m, then an
    m-by-m matrix of whitespace-separated distances, one row per line."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"{path}: empty metric file")
    try:
        m = int(tokens[0])
    except ValueError as exc:
        raise ValueError(f"{path}: first token must be the atom count") from exc
    expected = 1 + m * m
    if len(tokens) != expected:
        raise ValueError(
            f"{path}: expected {m}x{m} matrix entries after the count, got {len(tokens) - 1}"
        )
    values = np.array([float(t) for t in tokens[1:]], dtype=float).reshape(m, m)
    return FiniteMetric(values)
