"""Fréchet distance between a subtrajectory and a horizontal segment.

With ``p_u``/``p_v`` the first/last vertex strictly inside ``pi[u, v]``
and ``p'``/``q'`` their images under an optimal matching, the distance
splits into the two end-edge pieces (segment against segment) and the
four-term formula on ``pi[p_u, p_v]`` against ``p'q'``.  ``p'`` minimises
the convex function F(s); with ``p'`` fixed, ``q'`` minimises G(t).  Both
minimisers are found either over a finite candidate set (``"exact"``) or
by bisection driven by the sign of the attaining terms (``"bisect"``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .breakdown import TIE, FrechetBreakdown, Term, TermValue
from .geometry import (
    TOL,
    HorizontalSegment,
    Point,
    Trajectory,
    TrajectoryPos,
    backward_pair_distance,
    dist,
    subcurve,
)
from .rangeindex import FIRST, LAST, RangeIndex

log = logging.getLogger(__name__)

MODES = ("exact", "bisect")


class Move(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"
    STOP = "Stop"

    def __repr__(self) -> str:
        return self.value


HorizontalDecision = Move


@dataclass(frozen=True)
class CandidateSet:
    """Sorted, deduplicated x-coordinates on the query segment."""

    xs: np.ndarray
    lo: float
    hi: float

    def __len__(self) -> int:
        return len(self.xs)

    def __iter__(self):
        return iter(self.xs.tolist())


@dataclass(frozen=True)
class SplitResult:
    p_prime: Point
    q_prime: Point
    F_value: float
    G_value: float
    mode: str
    trace: tuple = ()


@dataclass(frozen=True)
class QueryResult(FrechetBreakdown):
    """Breakdown of the whole query plus how it was obtained."""

    split: Optional[SplitResult] = None
    trace: tuple = ()


def _seg(Q) -> HorizontalSegment:
    if isinstance(Q, HorizontalSegment):
        return Q
    x0, x1, y = Q
    return HorizontalSegment(float(x0), float(x1), float(y))


def as_index(source: Union[RangeIndex, Trajectory], **kw) -> RangeIndex:
    if isinstance(source, RangeIndex):
        return source
    if isinstance(source, Trajectory):
        return RangeIndex(source, **kw)
    return RangeIndex(Trajectory(source), **kw)


def formula_breakdown(idx: RangeIndex, a: int, b: int, seg: HorizontalSegment,
                      first: Optional[Point] = None, last: Optional[Point] = None,
                      first_label: object = "u", last_label: object = "v") -> FrechetBreakdown:
    """Four-term formula for ``[first] + vertices a..b + [last]`` against ``seg``."""
    traj = idx.trajectory
    has_range = a <= b
    if not has_range and first is None and last is None:
        raise ValueError("empty point sequence")

    def label(k):
        return first_label if k == FIRST else last_label if k == LAST else k

    def point(k):
        return first if k == FIRST else last if k == LAST else traj[k]

    start_k = FIRST if first is not None else a
    end_k = LAST if last is not None else (b if has_range else FIRST)
    p, q, y = seg.p, seg.q, seg.y
    terms = {
        Term.UP: TermValue(dist(point(start_k), p), (point(start_k),), (label(start_k),)),
        Term.VQ: TermValue(dist(point(end_k), q), (point(end_k),), (label(end_k),)),
    }
    extras = [(k, point(k)) for k, pt in ((FIRST, first), (LAST, last)) if pt is not None]
    for term, fn, anchor, keep in (
        (Term.HL, idx.hausdorff_left, p, lambda e: e.x <= p.x),
        (Term.HR, idx.hausdorff_right, q, lambda e: e.x >= q.x),
    ):
        val, k = fn(a, b, anchor) if has_range else (0.0, -1)
        best = (val, k) if k >= 0 else None
        for ek, e in extras:
            if keep(e):
                d = dist(e, anchor)
                if best is None or d > best[0]:
                    best = (d, ek)
        if best is not None:
            terms[term] = TermValue(best[0], (point(best[1]),), (label(best[1]),))
    val, k = idx.hausdorff_mid(a, b, y) if has_range else (-1.0, -1)
    best = (val, k)
    for ek, e in extras:
        d = abs(e.y - y)
        if d > best[0]:
            best = (d, ek)
    terms[Term.HM] = TermValue(best[0], (point(best[1]),), (label(best[1]),))
    if has_range:
        bv, pair = idx.backward_max(a, b, y, first, last)
    elif first is not None and last is not None and first.x >= last.x:
        bv, pair = backward_pair_distance(first, last, y), (FIRST, LAST)
    else:
        bv, pair = None, None
    if bv is not None:
        i, j = pair
        terms[Term.BWD] = TermValue(bv, (point(i), point(j)), (label(i), label(j)))
    return FrechetBreakdown.from_terms(terms)


class QueryInstance:
    """One ``(pi[u, v], Q)`` pair with the pieces every split routine needs."""

    def __init__(self, idx: RangeIndex, u: TrajectoryPos, v: TrajectoryPos, Q):
        self.idx = idx
        self.traj = idx.trajectory
        self.seg = _seg(Q)
        self.u, self.v = u, v
        self.sc = sc = subcurve(self.traj, u, v)
        self.U, self.V = sc.start, sc.end
        self.a, self.b = sc.a, sc.b
        self.has_interior = sc.has_interior and not sc.single
        if self.has_interior:
            self.pu = self.traj[self.a]
            self.pv = self.traj[self.b]
        self._f_const = None
        self._g_const = {}

    @property
    def up(self) -> float:
        return dist(self.U, self.seg.p)

    @property
    def vq(self) -> float:
        return dist(self.V, self.seg.q)

    def _require_interior(self):
        if not self.has_interior:
            raise ValueError("subtrajectory has no interior vertex")

    def whole(self) -> FrechetBreakdown:
        sc = self.sc
        if sc.single:
            return formula_breakdown(self.idx, 0, -1, self.seg, first=self.U, first_label=sc.start_label)
        return formula_breakdown(self.idx, self.a, self.b, self.seg, self.U, self.V,
                                 sc.start_label, sc.end_label)

    # -- F(s): split point of p_u ------------------------------------------

    def f_constants(self) -> dict:
        if self._f_const is None:
            self._require_interior()
            seg, idx, V, a, b = self.seg, self.idx, self.V, self.a, self.b
            lab = self.sc.end_label
            terms = {
                Term.UP: TermValue(self.up, (self.U,), (self.sc.start_label,)),
                Term.VQ: TermValue(self.vq, (V,), (lab,)),
            }
            val, k = idx.hausdorff_right(a, b, seg.q)
            best = (val, self.traj[k], k) if k >= 0 else None
            if V.x >= seg.q.x and (best is None or dist(V, seg.q) > best[0]):
                best = (dist(V, seg.q), V, lab)
            if best is not None:
                terms[Term.HR] = TermValue(best[0], (best[1],), (best[2],))
            val, k = idx.hausdorff_mid(a, b, seg.y)
            best = (val, self.traj[k], k)
            if abs(V.y - seg.y) > best[0]:
                best = (abs(V.y - seg.y), V, lab)
            terms[Term.HM] = TermValue(best[0], (best[1],), (best[2],))
            bv, pair = idx.backward_max(a, b, seg.y, last=V)
            if bv is not None:
                i, j = pair
                pts = tuple(V if k == LAST else self.traj[k] for k in (i, j))
                labs = tuple(lab if k == LAST else k for k in (i, j))
                terms[Term.BWD] = TermValue(bv, pts, labs)
            self._f_const = terms
        return self._f_const

    def eval_F(self, x: float) -> FrechetBreakdown:
        terms = dict(self.f_constants())
        y = self.seg.y
        s = Point(x, y)
        terms[Term.SPLIT_U] = TermValue(dist(self.pu, s), (self.pu,), (self.a,))
        val, k = self.idx.hausdorff_left(self.a, self.b, s)
        best = (val, self.traj[k], k) if k >= 0 else None
        if self.V.x <= x and (best is None or dist(self.V, s) > best[0]):
            best = (dist(self.V, s), self.V, self.sc.end_label)
        if best is not None:
            terms[Term.HL] = TermValue(best[0], (best[1],), (best[2],))
        return FrechetBreakdown.from_terms(terms)

    def decide_p(self, x: float, bd: Optional[FrechetBreakdown] = None) -> Move:
        bd = self.eval_F(x) if bd is None else bd
        moves = set()
        for term in bd.attaining:
            if term is Term.SPLIT_U:
                moves.add(_toward(self.pu.x, x))
            elif term is Term.HL:
                moves.add(Move.LEFT)
            else:
                return Move.STOP
        return moves.pop() if len(moves) == 1 else Move.STOP

    def candidates_p(self) -> CandidateSet:
        self._require_interior()
        a, b = self.a, self.b
        xs = np.append(np.asarray(self.idx.xs[a:b + 1]), self.V.x)
        ys = np.append(np.asarray(self.idx.ys[a:b + 1]), self.V.y)
        return candidate_set(self.pu, xs, ys, self.seg.x0, self.seg.x1, self.seg.y)

    # -- G(t): split point of p_v, with p' fixed ----------------------------

    def g_constants(self, px: float) -> dict:
        key = px
        if key not in self._g_const:
            self._require_interior()
            seg, idx, a, b = self.seg, self.idx, self.a, self.b
            pp = Point(px, seg.y)
            terms = {
                Term.UP: TermValue(self.up, (self.U,), (self.sc.start_label,)),
                Term.VQ: TermValue(self.vq, (self.V,), (self.sc.end_label,)),
                Term.SPLIT_U: TermValue(dist(self.pu, pp), (self.pu,), (a,)),
            }
            val, k = idx.hausdorff_left(a, b, pp)
            if k >= 0:
                terms[Term.HL] = TermValue(val, (self.traj[k],), (k,))
            val, k = idx.hausdorff_mid(a, b, seg.y)
            terms[Term.HM] = TermValue(val, (self.traj[k],), (k,))
            bv, pair = idx.backward_max(a, b, seg.y)
            if bv is not None:
                terms[Term.BWD] = TermValue(bv, tuple(self.traj[k] for k in pair), pair)
            self._g_const = {key: terms}
        return self._g_const[key]

    def eval_G(self, px: float, x: float) -> FrechetBreakdown:
        terms = dict(self.g_constants(px))
        t = Point(x, self.seg.y)
        terms[Term.SPLIT_V] = TermValue(dist(self.pv, t), (self.pv,), (self.b,))
        val, k = self.idx.hausdorff_right(self.a, self.b, t)
        if k >= 0:
            terms[Term.HR] = TermValue(val, (self.traj[k],), (k,))
        return FrechetBreakdown.from_terms(terms)

    def decide_q(self, px: float, x: float, bd: Optional[FrechetBreakdown] = None) -> Move:
        bd = self.eval_G(px, x) if bd is None else bd
        moves = set()
        for term in bd.attaining:
            if term is Term.SPLIT_V:
                moves.add(_toward(self.pv.x, x))
            elif term is Term.HR:
                moves.add(Move.RIGHT)
            else:
                return Move.STOP
        return moves.pop() if len(moves) == 1 else Move.STOP

    def candidates_q(self, px: float) -> CandidateSet:
        self._require_interior()
        x1 = self.seg.x1
        xs = np.asarray(self.idx.xs[self.a:self.b + 1])
        ys = np.asarray(self.idx.ys[self.a:self.b + 1])
        return candidate_set(self.pv, xs, ys, min(px, x1), x1, self.seg.y)


def _toward(target: float, x: float) -> Move:
    if target > x + TOL:
        return Move.RIGHT
    if target < x - TOL:
        return Move.LEFT
    return Move.STOP


def _bisectors(c: Point, xs: np.ndarray, ys: np.ndarray, y: float) -> np.ndarray:
    """x where the bisector of ``c`` and each ``(xs, ys)`` crosses height ``y``."""
    dx = xs - c.x
    dy = ys - c.y
    mx = 0.5 * (xs + c.x)
    my = 0.5 * (ys + c.y)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = mx - (y - my) * dy / dx
    flat = dx == 0.0
    on_line = flat & (dy != 0.0) & (np.abs(my - y) <= TOL)
    out = np.where(flat, np.where(on_line, mx, np.nan), out)
    return out[np.isfinite(out)]


def candidate_set(anchor: Point, xs, ys, lo: float, hi: float, y: float) -> CandidateSet:
    """Endpoints, clamped projections of the points, and bisectors with ``anchor`` inside ``[lo, hi]``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    bis = _bisectors(anchor, xs, ys, y)
    bis = bis[(bis >= lo) & (bis <= hi)]
    out = np.unique(np.concatenate([[lo, hi], np.clip(xs, lo, hi), bis]))
    return CandidateSet(xs=out, lo=lo, hi=hi)


def _convex_argmin(xs: list, f, scan: bool = False):
    """Leftmost minimiser of a convex function sampled at sorted ``xs``.

    Returns ``(x, value, evaluations)``.
    """
    cache = {}

    def val(i):
        if i not in cache:
            cache[i] = f(xs[i])
        return cache[i]

    if scan or len(xs) <= 3:
        best = min(range(len(xs)), key=lambda i: (val(i), i))
    else:
        lo, hi = 0, len(xs) - 1
        # first i with f(x_i) <= f(x_{i+1}); the minimum sits there
        while lo < hi:
            mid = (lo + hi) // 2
            if val(mid) <= val(mid + 1):
                hi = mid
            else:
                lo = mid + 1
        best = lo
        for i in (lo - 1, lo + 1):
            if 0 <= i < len(xs) and val(i) < val(best):
                best = i
    steps = tuple((xs[i], cache[i]) for i in sorted(cache))
    return xs[best], val(best), steps


def _bisect_split(lo: float, hi: float, evaluate, decide):
    """Bisection on ``[lo, hi]``; returns the best evaluated point."""
    eps = 1e-10 * (1.0 + abs(hi - lo))
    best_x, best_v = None, math.inf
    trace = []
    for x in (lo, hi):
        v = evaluate(x).value
        if v < best_v:
            best_x, best_v = x, v
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        bd = evaluate(mid)
        move = decide(mid, bd)
        trace.append((mid, move.value))
        if bd.value < best_v or (bd.value == best_v and mid < best_x):
            best_x, best_v = mid, bd.value
        if move is Move.STOP:
            break
        if move is Move.RIGHT:
            lo = mid
        else:
            hi = mid
    return best_x, best_v, tuple(trace)


def build_candidate_set_p(inst: QueryInstance) -> CandidateSet:
    return inst.candidates_p()


def build_candidate_set_q(inst: QueryInstance, p_prime: Point) -> CandidateSet:
    return inst.candidates_q(p_prime.x)


def eval_F(inst: QueryInstance, s: Union[Point, float]) -> FrechetBreakdown:
    return inst.eval_F(s if isinstance(s, (int, float)) else s[0])


def decide_p_prime(inst: QueryInstance, s: Union[Point, float]) -> Move:
    return inst.decide_p(s if isinstance(s, (int, float)) else s[0])


def eval_G(inst: QueryInstance, p_prime: Point, t: Union[Point, float]) -> FrechetBreakdown:
    return inst.eval_G(p_prime.x, t if isinstance(t, (int, float)) else t[0])


def decide_q_prime(inst: QueryInstance, p_prime: Point, t: Union[Point, float]) -> Move:
    return inst.decide_q(p_prime.x, t if isinstance(t, (int, float)) else t[0])


def _p_split(inst: QueryInstance, mode: str, scan: bool = False):
    seg = inst.seg
    if seg.x0 == seg.x1:
        return seg.x0, inst.eval_F(seg.x0).value, ()
    if mode == "exact":
        cs = inst.candidates_p()
        return _convex_argmin(cs.xs.tolist(), lambda x: inst.eval_F(x).value, scan)
    return _bisect_split(seg.x0, seg.x1, inst.eval_F, inst.decide_p)


def _q_split(inst: QueryInstance, px: float, mode: str, scan: bool = False):
    x1 = inst.seg.x1
    if px >= x1:
        return x1, inst.eval_G(px, x1).value, ()
    if mode == "exact":
        cs = inst.candidates_q(px)
        return _convex_argmin(cs.xs.tolist(), lambda x: inst.eval_G(px, x).value, scan)
    return _bisect_split(px, x1, lambda x: inst.eval_G(px, x), lambda x, bd: inst.decide_q(px, x, bd))


def compute_p_prime(inst: QueryInstance, mode: str = "exact", scan: bool = False) -> Point:
    _check_mode(mode)
    x, _, _ = _p_split(inst, mode, scan)
    return Point(x, inst.seg.y)


def compute_q_prime(inst: QueryInstance, p_prime: Point, mode: str = "exact", scan: bool = False) -> Point:
    _check_mode(mode)
    x, _, _ = _q_split(inst, p_prime.x, mode, scan)
    return Point(x, inst.seg.y)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def split_points(inst: QueryInstance, mode: str = "exact", scan: bool = False) -> SplitResult:
    _check_mode(mode)
    px, fv, ftr = _p_split(inst, mode, scan)
    qx, gv, gtr = _q_split(inst, px, mode, scan)
    y = inst.seg.y
    return SplitResult(Point(px, y), Point(qx, y), fv, gv, mode,
                       tuple(("p", x, d) for x, d in ftr) + tuple(("q", x, d) for x, d in gtr))


def frechet_query(source: Union[RangeIndex, Trajectory], u: TrajectoryPos, v: TrajectoryPos, Q,
                  mode: str = "exact", scan: bool = False) -> QueryResult:
    """Fréchet distance between ``pi[u, v]`` and the horizontal segment ``Q``.

    ``source`` is a prebuilt index or a trajectory (indexed on the fly).
    The value comes from the split decomposition; the attached terms are
    the formula over the whole subtrajectory, which names the witnesses.
    """
    _check_mode(mode)
    idx = as_index(source)
    inst = QueryInstance(idx, u, v, Q)
    whole = inst.whole()
    if not inst.has_interior:
        value = max(inst.up, inst.vq)
        return QueryResult(value=value, terms=whole.terms, attaining=whole.attaining)
    sp = split_points(inst, mode, scan)
    seg = inst.seg
    middle = formula_breakdown(idx, inst.a, inst.b, HorizontalSegment(sp.p_prime.x, sp.q_prime.x, seg.y))
    value = max(inst.up, dist(inst.pu, sp.p_prime), middle.value, dist(inst.pv, sp.q_prime), inst.vq)
    log.debug("query value %.17g (whole formula %.17g), %d split steps", value, whole.value, len(sp.trace))
    return QueryResult(value=value, terms=whole.terms, attaining=whole.attaining, split=sp,
                       trace=sp.trace)


def frechet_value(source, u, v, Q, mode: str = "exact") -> float:
    return frechet_query(source, u, v, Q, mode).value
