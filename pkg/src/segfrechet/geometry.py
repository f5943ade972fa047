"""Planar primitives: points, horizontal segments, trajectories, positions.

All comparisons use an absolute tolerance of ``TOL`` unless a caller says
otherwise.  Arithmetic is plain double precision; there is no robust
predicate filtering.
"""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

TOL = 1e-9


class Point(NamedTuple):
    x: float
    y: float


def dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class HorizontalSegment:
    """The segment from ``p = (x0, y)`` to ``q = (x1, y)``.

    ``x0 == x1`` is allowed and describes a single point.
    """

    x0: float
    x1: float
    y: float

    def __post_init__(self):
        if not _finite(self.x0, self.x1, self.y):
            raise ValueError(f"non-finite segment {self}")
        if self.x0 > self.x1:
            raise ValueError(f"segment requires x0 <= x1, got {self.x0} > {self.x1}")

    @property
    def p(self) -> Point:
        return Point(self.x0, self.y)

    @property
    def q(self) -> Point:
        return Point(self.x1, self.y)

    @property
    def length(self) -> float:
        return self.x1 - self.x0

    def at(self, x: float) -> Point:
        return Point(x, self.y)


@dataclass(frozen=True, order=True)
class TrajectoryPos:
    """A point on a trajectory: ``fraction`` of the way along ``edge``.

    Ordering is lexicographic on ``(edge, fraction)``, which is the order
    along the curve once positions are canonical (see ``Trajectory.pos``).
    """

    edge: int
    fraction: float

    def __post_init__(self):
        if self.edge < 0:
            raise ValueError(f"negative edge index {self.edge}")
        if not (0.0 <= self.fraction <= 1.0):
            raise ValueError(f"fraction {self.fraction} outside [0, 1]")

    @property
    def param(self) -> float:
        """Position as a single number in ``[0, n - 1]``."""
        return self.edge + self.fraction


class Trajectory:
    """Immutable polyline ``p_0, ..., p_{n-1}`` with ``n >= 1``."""

    __slots__ = ("vertices", "xs", "ys", "duplicates", "_cum")

    def __init__(self, vertices: Iterable[Sequence[float]]):
        pts = tuple(Point(float(x), float(y)) for x, y in vertices)
        if not pts:
            raise ValueError("trajectory needs at least one vertex")
        for i, (x, y) in enumerate(pts):
            if not _finite(x, y):
                raise ValueError(f"vertex {i} is not finite: {(x, y)}")
        self.vertices = pts
        self.xs = np.array([p.x for p in pts], dtype=float)
        self.ys = np.array([p.y for p in pts], dtype=float)
        self.xs.flags.writeable = False
        self.ys.flags.writeable = False
        self.duplicates = tuple(i for i in range(1, len(pts)) if pts[i] == pts[i - 1])
        if self.duplicates:
            log.info("trajectory has %d consecutive duplicate vertices", len(self.duplicates))
        seg = np.hypot(np.diff(self.xs), np.diff(self.ys))
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, i: int) -> Point:
        return self.vertices[i]

    def __repr__(self) -> str:
        return f"Trajectory(n={len(self)})"

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def last_edge(self) -> int:
        return max(self.n - 2, 0)

    @property
    def arclength(self) -> float:
        return float(self._cum[-1])

    def pos(self, edge: int, fraction: float) -> TrajectoryPos:
        """Canonical position: fraction in ``[0, 1)`` except at the curve end."""
        if self.n == 1:
            if edge != 0 or fraction not in (0.0, 1.0):
                raise ValueError("a single-vertex trajectory only has position (0, 0)")
            return TrajectoryPos(0, 0.0)
        if not (0 <= edge <= self.last_edge):
            raise ValueError(f"edge {edge} outside [0, {self.last_edge}]")
        if fraction == 1.0 and edge < self.last_edge:
            return TrajectoryPos(edge + 1, 0.0)
        return TrajectoryPos(edge, float(fraction))

    def start(self) -> TrajectoryPos:
        return self.pos(0, 0.0)

    def end(self) -> TrajectoryPos:
        return self.pos(self.last_edge, 1.0 if self.n > 1 else 0.0)

    def vertex_pos(self, k: int) -> TrajectoryPos:
        if k == self.n - 1:
            return self.end()
        return self.pos(k, 0.0)

    def pos_at_param(self, t: float) -> TrajectoryPos:
        """Position from the scalar parameter ``edge + fraction``."""
        if self.n == 1:
            return self.start()
        t = min(max(t, 0.0), float(self.n - 1))
        edge = min(int(math.floor(t)), self.last_edge)
        return self.pos(edge, t - edge)

    def pos_at_arclength(self, frac: float) -> TrajectoryPos:
        """Position at ``frac`` of the total arclength."""
        if not (0.0 <= frac <= 1.0):
            raise ValueError(f"arclength fraction {frac} outside [0, 1]")
        if self.n == 1 or self.arclength == 0.0:
            return self.start()
        target = frac * self.arclength
        cum = self._cum
        edge = min(bisect.bisect_right(cum, target) - 1, self.last_edge)
        # skip zero-length edges so the fraction is well defined
        while edge < self.last_edge and cum[edge + 1] - cum[edge] == 0.0:
            edge += 1
        span = cum[edge + 1] - cum[edge]
        f = 0.0 if span == 0.0 else min(max((target - cum[edge]) / span, 0.0), 1.0)
        return self.pos(edge, f)

    def point_at(self, pos: TrajectoryPos) -> Point:
        if self.n == 1:
            return self.vertices[0]
        a = self.vertices[pos.edge]
        if pos.fraction == 0.0:
            return a
        b = self.vertices[pos.edge + 1]
        if pos.fraction == 1.0:
            return b
        f = pos.fraction
        return Point(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))

    def vertex_at(self, pos: TrajectoryPos) -> Optional[int]:
        """Vertex index if ``pos`` coincides with a vertex, else None."""
        if self.n == 1:
            return 0
        if pos.fraction == 0.0:
            return pos.edge
        if pos.fraction == 1.0:
            return pos.edge + 1
        return None

    def interior_range(self, u: TrajectoryPos, v: TrajectoryPos) -> tuple[int, int]:
        """Inclusive index range of vertices strictly between ``u`` and ``v``.

        Empty ranges come back with ``a > b``.
        """
        tu, tv = u.param, v.param
        a = int(math.floor(tu)) + 1
        b = int(math.ceil(tv)) - 1
        return a, b

    def bbox(self) -> tuple[float, float, float, float]:
        return float(self.xs.min()), float(self.ys.min()), float(self.xs.max()), float(self.ys.max())


def check_order(u: TrajectoryPos, v: TrajectoryPos) -> None:
    if u > v:
        raise ValueError(f"positions out of order: u={u} after v={v}")


def project_onto_segment(r: Sequence[float], seg: HorizontalSegment) -> Point:
    return Point(min(max(r[0], seg.x0), seg.x1), seg.y)


def bisector_x_on_line(a: Sequence[float], b: Sequence[float], y: float) -> Optional[float]:
    """Where the perpendicular bisector of ``a`` and ``b`` meets the line at height ``y``.

    None when ``a == b`` or when the bisector is horizontal at another height.
    A horizontal bisector lying on the line itself yields the midpoint's x.
    """
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    mx = 0.5 * (a[0] + b[0])
    my = 0.5 * (a[1] + b[1])
    if dx == 0.0:
        if dy == 0.0:
            return None
        return mx if abs(my - y) <= TOL else None
    return mx - (y - my) * dy / dx


def backward_pair_distance(a: Sequence[float], b: Sequence[float], y: float) -> float:
    """``min_x max(|a - (x, y)|, |b - (x, y)|)``.

    The max of the two distance profiles is minimised either at their
    crossing (the bisector) or at the foot of whichever one dominates.
    """
    da = abs(a[1] - y)
    db = abs(b[1] - y)
    best = math.inf
    xb = bisector_x_on_line(a, b, y)
    for x in (a[0], b[0]) if xb is None else (xb, a[0], b[0]):
        val = max(math.hypot(x - a[0], da), math.hypot(x - b[0], db))
        if val < best:
            best = val
    return best


def backward_pair_distance_array(ax, ay, bx, by, y: float) -> np.ndarray:
    """Elementwise ``backward_pair_distance`` over broadcastable arrays."""
    ax = np.asarray(ax, dtype=float)
    ay = np.asarray(ay, dtype=float)
    bx = np.asarray(bx, dtype=float)
    by = np.asarray(by, dtype=float)
    da = np.abs(ay - y)
    db = np.abs(by - y)
    dx = bx - ax
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = 0.5 * (ax + bx) - (y - 0.5 * (ay + by)) * (by - ay) / dx
    xs = np.where(dx == 0.0, ax, xs)

    def profile(x):
        return np.maximum(np.hypot(x - ax, da), np.hypot(x - bx, db))

    with np.errstate(invalid="ignore", over="ignore"):
        out = np.minimum(profile(ax), profile(bx))
        cross = profile(xs)
    return np.where(cross < out, cross, out)


def ordered_pair_bound_array(ax, ay, bx, by, y: float) -> np.ndarray:
    """Backward-pair distance with ``a`` before ``b``, relaxed to all pairs.

    Equals ``backward_pair_distance`` when ``a.x >= b.x`` and the larger
    vertical offset otherwise.  This is the value of the best monotone
    assignment of the two points to the line, so it is jointly convex in
    both points and its maximum over two point sets sits on their hulls.
    """
    full = backward_pair_distance_array(ax, ay, bx, by, y)
    flat = np.maximum(np.abs(np.asarray(ay) - y), np.abs(np.asarray(by) - y))
    return np.where(np.asarray(ax) >= np.asarray(bx), full, flat)


def cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Subcurve:
    """``pi[u, v]`` as its two end points plus the vertex range between them.

    ``start_label``/``end_label`` are vertex indices when the end points
    coincide with vertices and ``"u"``/``"v"`` otherwise.
    """

    start: Point
    end: Point
    a: int
    b: int
    start_label: object
    end_label: object
    single: bool

    @property
    def has_interior(self) -> bool:
        return self.a <= self.b


def subcurve(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos) -> Subcurve:
    check_order(u, v)
    a, b = traj.interior_range(u, v)
    ku, kv = traj.vertex_at(u), traj.vertex_at(v)
    return Subcurve(
        start=traj.point_at(u),
        end=traj.point_at(v),
        a=a,
        b=b,
        start_label=ku if ku is not None else "u",
        end_label=kv if kv is not None else "v",
        single=(u == v),
    )
