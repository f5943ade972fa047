"""Optimal placement of a horizontal segment against a subtrajectory.

Two problems, both convex and both solved by bisection driven by a
decision procedure that reads the attaining terms of the current
breakdown:

* ``optimize_vertical``: the segment spans a fixed strip ``[x1, x2]``; find
  its height.
* ``optimize_placement``: the segment has fixed length ``L``; find its left
  endpoint and height.  For a candidate left endpoint the best height is
  found first; the terms attaining there are turned into disks (terms
  measured to an endpoint) and half-planes (terms measured vertically)
  whose common interior holds every strictly better placement.

All disks and half-plane boundaries pass through the current left
endpoint ``p``, so their common interior is non-empty exactly when the
inward normals fit in an open half-plane of directions.  That angular
test replaces explicit circle intersection.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .breakdown import TIE, FrechetBreakdown, Term
from .geometry import HorizontalSegment, Point, Trajectory, TrajectoryPos, subcurve
from .oracle import search_bracket, subtrajectory_vertices
from .query import Move, QueryInstance, as_index, formula_breakdown, frechet_query
from .rangeindex import RangeIndex

log = logging.getLogger(__name__)

ANGLE_TOL = 1e-9
ON_LINE_TOL = 1e-9
C1_TERMS = (Term.UP, Term.VQ, Term.HL, Term.HR)
C2_TERMS = (Term.HM, Term.BWD)


class VerticalDecision(str, Enum):
    UP = "Up"
    DOWN = "Down"
    STOP = "Stop"

    def __repr__(self) -> str:
        return self.value


HorizontalDecision = Move


@dataclass(frozen=True)
class TermClass:
    """One attaining term as a constraint on where ``p`` may move.

    C1 terms are disks of radius ``radius`` around ``center`` (already
    shifted into ``p``'s frame); C2 terms are the open half-plane
    ``side`` ("above" or "below") of the current line.
    """

    term: Term
    cls: str
    center: Optional[Point] = None
    radius: float = 0.0
    side: Optional[str] = None


@dataclass(frozen=True)
class VerticalResult:
    y: float
    value: float
    breakdown: FrechetBreakdown
    trace: tuple = ()

    def __iter__(self):
        return iter((self.y, self.value, self.breakdown))


@dataclass(frozen=True)
class PlacementResult:
    x1: float
    y: float
    value: float
    breakdown: FrechetBreakdown
    trace: tuple = ()

    def __iter__(self):
        return iter((self.x1, self.y, self.value, self.breakdown))


class _Problem:
    """A fixed ``pi[u, v]`` with the index and the evaluation route."""

    def __init__(self, source, u: TrajectoryPos, v: TrajectoryPos, method: str = "formula",
                 mode: str = "exact"):
        if method not in ("formula", "query"):
            raise ValueError(f"unknown evaluation method {method!r}")
        self.idx = as_index(source)
        self.traj = self.idx.trajectory
        self.u, self.v = u, v
        self.sc = subcurve(self.traj, u, v)
        self.points = subtrajectory_vertices(self.traj, u, v)
        self.method = method
        self.mode = mode
        sc = self.sc
        if sc.single:
            self.ylo = self.yhi = sc.start.y
        else:
            lo, hi = self.idx.y_extent(sc.a, sc.b)
            self.ylo = min(lo, sc.start.y, sc.end.y)
            self.yhi = max(hi, sc.start.y, sc.end.y)

    def breakdown(self, seg: HorizontalSegment) -> FrechetBreakdown:
        if self.method == "query":
            return frechet_query(self.idx, self.u, self.v, seg, self.mode)
        return QueryInstance(self.idx, self.u, self.v, seg).whole()

    def bracket(self, extra_x: Sequence[float] = ()):
        return search_bracket(self.points, extra_x)


def _problem(source, u, v, method, mode) -> _Problem:
    if isinstance(source, _Problem):
        return source
    return _Problem(source, u, v, method, mode)


def _side(target: float, y: float, tol: float):
    if target > y + tol:
        return VerticalDecision.UP
    if target < y - tol:
        return VerticalDecision.DOWN
    return VerticalDecision.STOP


def _term_heights(prob: _Problem, bd: FrechetBreakdown, term: Term, y: float) -> list[float]:
    """Heights the line should move toward to shrink ``term``."""
    tv = bd.terms[term]
    if term is Term.BWD:
        a, b = tv.points
        return [0.5 * (a.y + b.y)]
    if term is Term.HM:
        # both extremes may tie; each pulls its own way
        out = []
        top = max(prob.yhi - y, y - prob.ylo)
        if top - (prob.yhi - y) <= TIE:
            out.append(prob.yhi)
        if top - (y - prob.ylo) <= TIE:
            out.append(prob.ylo)
        return out
    return [tv.points[0].y]


def decide_vertical(source, u: TrajectoryPos, v: TrajectoryPos, x1: float, x2: float, y_c: float,
                    method: str = "formula", mode: str = "exact",
                    breakdown: Optional[FrechetBreakdown] = None) -> VerticalDecision:
    """Which way the line at height ``y_c`` over ``[x1, x2]`` should move."""
    if x1 > x2:
        raise ValueError(f"strip requires x1 <= x2, got {x1} > {x2}")
    prob = _problem(source, u, v, method, mode)
    bd = prob.breakdown(HorizontalSegment(x1, x2, y_c)) if breakdown is None else breakdown
    moves = set()
    for term in bd.attaining:
        for h in _term_heights(prob, bd, term, y_c):
            d = _side(h, y_c, ON_LINE_TOL)
            if d is VerticalDecision.STOP:
                return d
            moves.add(d)
    return moves.pop() if len(moves) == 1 else VerticalDecision.STOP


def optimize_vertical(source, u: TrajectoryPos, v: TrajectoryPos, x1: float, x2: float,
                      method: str = "formula", mode: str = "exact") -> VerticalResult:
    """Height minimising the distance between ``pi[u, v]`` and ``(x1, x2, y)``."""
    if x1 > x2:
        raise ValueError(f"strip requires x1 <= x2, got {x1} > {x2}")
    prob = _problem(source, u, v, method, mode)
    _, _, y_lo, y_hi, D = prob.bracket((x1, x2))
    lo, hi = y_lo - D, y_hi + D
    eps = 1e-10 * (1.0 + (hi - lo))
    best = None
    trace = []

    def consider(y):
        nonlocal best
        bd = prob.breakdown(HorizontalSegment(x1, x2, y))
        if best is None or bd.value < best[1].value:
            best = (y, bd)
        return bd

    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        bd = consider(mid)
        move = decide_vertical(prob, u, v, x1, x2, mid, breakdown=bd)
        trace.append((mid, move.value))
        if move is VerticalDecision.STOP:
            break
        if move is VerticalDecision.UP:
            lo = mid
        else:
            hi = mid
    else:
        consider(0.5 * (lo + hi))
    y, bd = best
    return VerticalResult(y, bd.value, bd, tuple(trace))


# -- horizontal decision -------------------------------------------------------

def classify_terms(breakdown: FrechetBreakdown, line: HorizontalSegment, L: Optional[float] = None,
                   tol: float = TIE) -> list[TermClass]:
    """Constraints from the terms within ``tol`` of the breakdown's maximum."""
    L = line.length if L is None else L
    d = breakdown.value
    out = []
    for term in sorted(breakdown.attaining_within(tol), key=lambda t: t.value):
        tv = breakdown.terms[term]
        if term in (Term.UP, Term.HL):
            c = tv.points[0]
            out.append(TermClass(term, "C1", center=Point(c.x, c.y), radius=d))
        elif term in (Term.VQ, Term.HR):
            c = tv.points[0]
            out.append(TermClass(term, "C1", center=Point(c.x - L, c.y), radius=d))
        elif term is Term.HM:
            c = tv.points[0]
            out.append(TermClass(term, "C2", side=_half(c.y, line.y)))
        elif term is Term.BWD:
            a, b = tv.points
            out.append(TermClass(term, "C2", side=_half(0.5 * (a.y + b.y), line.y)))
    return out


def _half(target: float, y: float) -> Optional[str]:
    if target > y + ON_LINE_TOL:
        return "above"
    if target < y - ON_LINE_TOL:
        return "below"
    return None


def _normal_angle(c: TermClass, p: Point) -> Optional[float]:
    if c.cls == "C1":
        dx, dy = c.center.x - p.x, c.center.y - p.y
        if dx == 0.0 and dy == 0.0:
            return None
        return math.atan2(dy, dx)
    if c.side is None:
        return None
    return math.pi / 2 if c.side == "above" else -math.pi / 2


def _largest_gap(angles: Sequence[float]) -> tuple[float, float, int, int]:
    """Largest cyclic gap between angles.

    Returns ``(gap, middle of the covering arc, arc start, arc end)``; the
    last two are positions in ``angles``.
    """
    two_pi = 2 * math.pi
    order = sorted(range(len(angles)), key=lambda i: angles[i] % two_pi)
    a = [angles[i] % two_pi for i in order]
    gaps = [a[i + 1] - a[i] for i in range(len(a) - 1)] + [a[0] + two_pi - a[-1]]
    k = max(range(len(gaps)), key=gaps.__getitem__)
    g = gaps[k]
    start = (k + 1) % len(a)
    return g, a[start] + 0.5 * (two_pi - g), order[start], order[k]


def region_nonempty(constraints: Sequence[TermClass], p: Point) -> tuple[bool, Optional[float]]:
    """Whether the open constraints share points arbitrarily close to ``p``.

    Returns ``(nonempty, direction angle)``.  A constraint whose normal is
    undefined (zero-radius disk, half-plane with its witness on the line)
    cannot be improved and makes the region empty.
    """
    angles = []
    for c in constraints:
        ang = _normal_angle(c, p)
        if ang is None:
            return False, None
        angles.append(ang)
    if not angles:
        return True, None
    gap, mid, _, _ = _largest_gap(angles)
    if gap <= math.pi + ANGLE_TOL:
        return False, None
    return True, mid


def select_three_disks(centers: Sequence[Sequence[float]], p: Sequence[float]) -> Optional[tuple[int, int, int]]:
    """Insertion rule for equal disks whose boundaries all pass through ``p``.

    Disks are inserted in order while tracking the two angular extremes of
    the inserted normals.  The first insertion that empties the common
    interior yields ``(last inserted, extreme, extreme)``, which is then
    empty on its own.  None when the whole set has a non-empty interior.
    """
    ang = [math.atan2(c[1] - p[1], c[0] - p[0]) for c in centers]
    if not ang:
        return None
    ext = (0, 0)
    for k in range(1, len(ang)):
        trio = (ext[0], ext[1], k)
        g, _, first, last = _largest_gap([ang[i] for i in trio])
        if g <= math.pi + ANGLE_TOL:
            return k, ext[0], ext[1]
        ext = (trio[first], trio[last])
    return None


def sample_region_nonempty(constraints: Sequence[TermClass], p: Point, samples: int = 10_000,
                           radius: Optional[float] = None) -> tuple[bool, Optional[float]]:
    """Sampling cross-check of ``region_nonempty`` on a small circle around ``p``."""
    if radius is None:
        r = [c.radius for c in constraints if c.cls == "C1"]
        radius = 1e-4 * (min(r) if r and min(r) > 0 else 1.0)
    th = np.linspace(-math.pi, math.pi, samples, endpoint=False)
    x = p.x + radius * np.cos(th)
    y = p.y + radius * np.sin(th)
    ok = np.ones(samples, dtype=bool)
    for c in constraints:
        if c.cls == "C1":
            ok &= np.hypot(x - c.center.x, y - c.center.y) < c.radius
        elif c.side == "above":
            ok &= y > p.y
        elif c.side == "below":
            ok &= y < p.y
        else:
            ok &= False
    if not ok.any():
        return False, None
    return True, float(np.mean(np.cos(th[ok])))


@dataclass(frozen=True)
class HorizontalStep:
    decision: Move
    y: float
    value: float
    breakdown: FrechetBreakdown
    constraints: tuple = ()


def decide_horizontal(source, u: TrajectoryPos, v: TrajectoryPos, L: float, x1_c: float,
                      method: str = "formula", mode: str = "exact", debug: bool = False,
                      detail: bool = False):
    """Whether the left endpoint at ``x1_c`` should move left, right or stop."""
    if L < 0:
        raise ValueError(f"segment length must be non-negative, got {L}")
    prob = _problem(source, u, v, method, mode)
    vr = optimize_vertical(prob, u, v, x1_c, x1_c + L)
    step = _horizontal_step(prob, L, x1_c, vr, debug)
    return step if detail else step.decision


def _horizontal_step(prob: _Problem, L: float, x1_c: float, vr: VerticalResult, debug: bool) -> HorizontalStep:
    line = HorizontalSegment(x1_c, x1_c + L, vr.y)
    if vr.value <= TIE:
        return HorizontalStep(Move.STOP, vr.y, vr.value, vr.breakdown)
    _, _, y_lo, y_hi, D = prob.bracket((x1_c, x1_c + L))
    tol = 1e-8 * (1.0 + (y_hi - y_lo) + 2 * D)
    cons = classify_terms(vr.breakdown, line, L, tol)
    p = line.p
    c1 = [c for c in cons if c.cls == "C1"]
    if len(c1) > 3:
        sel = select_three_disks([c.center for c in c1], p)
        if sel is not None:
            return HorizontalStep(Move.STOP, vr.y, vr.value, vr.breakdown, tuple(c1[i] for i in sel))
    nonempty, ang = region_nonempty(cons, p)
    if debug:
        s_nonempty, _ = sample_region_nonempty(cons, p)
        if s_nonempty != nonempty:
            log.warning("region test disagrees with sampling at x1=%r: analytic=%s sampled=%s",
                        x1_c, nonempty, s_nonempty)
    if not nonempty or ang is None:
        return HorizontalStep(Move.STOP, vr.y, vr.value, vr.breakdown, tuple(cons))
    cx = math.cos(ang)
    if abs(cx) <= ANGLE_TOL:
        move = Move.STOP
    else:
        move = Move.RIGHT if cx > 0 else Move.LEFT
    return HorizontalStep(move, vr.y, vr.value, vr.breakdown, tuple(cons))


def optimize_placement(source, u: TrajectoryPos, v: TrajectoryPos, L: float,
                       method: str = "formula", mode: str = "exact", debug: bool = False) -> PlacementResult:
    """Left endpoint and height of the best length-``L`` horizontal segment."""
    if L < 0:
        raise ValueError(f"segment length must be non-negative, got {L}")
    prob = _problem(source, u, v, method, mode)
    x_lo, x_hi, _, _, D = prob.bracket()
    lo, hi = x_lo - L - D, x_hi + D
    eps = 1e-10 * (1.0 + (hi - lo))
    best = None
    trace = []

    def evaluate(x1):
        nonlocal best
        vr = optimize_vertical(prob, u, v, x1, x1 + L)
        if best is None or vr.value < best[1].value:
            best = (x1, vr)
        return vr

    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        vr = evaluate(mid)
        step = _horizontal_step(prob, L, mid, vr, debug)
        trace.append((mid, step.decision.value))
        if step.decision is Move.STOP:
            break
        if step.decision is Move.RIGHT:
            lo = mid
        else:
            hi = mid
    else:
        evaluate(0.5 * (lo + hi))
    x1, vr = best
    return PlacementResult(x1, vr.y, vr.value, vr.breakdown, tuple(trace))


def vertical_objective(source, u, v, x1: float, L: float, method: str = "formula") -> float:
    """Best distance with the left endpoint fixed at ``x1``."""
    return optimize_vertical(source, u, v, x1, x1 + L, method).value
