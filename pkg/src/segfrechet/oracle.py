"""Reference implementations used as ground truth.

Nothing here touches the range index.  ``frechet_formula_scan`` evaluates
the four-term formula by direct scans; ``frechet_freespace`` is the
classical free-space reachability test driven over the finite set of
critical distances and never consults the formula.  The two optimizers
search the (convex) objectives with golden-section search.
"""
from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .breakdown import FrechetBreakdown, Term, TermValue
from .geometry import (
    HorizontalSegment,
    Point,
    Trajectory,
    TrajectoryPos,
    backward_pair_distance_array,
    dist,
    subcurve,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def subtrajectory_vertices(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos) -> list[Point]:
    """``pi[u, v]`` as an explicit point list: u, interior vertices, v."""
    pts, _ = _subtrajectory(traj, u, v)
    return pts


def _subtrajectory(traj, u, v):
    sc = subcurve(traj, u, v)
    if sc.single:
        return [sc.start], [sc.start_label]
    inner = range(sc.a, sc.b + 1)
    pts = [sc.start] + [traj[k] for k in inner] + [sc.end]
    labels = [sc.start_label] + list(inner) + [sc.end_label]
    return pts, labels


class FormulaScan:
    """Direct evaluation of the four-term formula over a fixed point list.

    Backward pairs are enumerated once (all ``i < j`` with
    ``x_i >= x_j``); every evaluation then costs O(m) plus one vectorised
    pass over those pairs.
    """

    def __init__(self, points: Sequence[Sequence[float]], labels: Optional[Sequence[object]] = None):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.points = [Point(float(x), float(y)) for x, y in pts]
        self.labels = list(labels) if labels is not None else list(range(len(pts)))
        self.xs = pts[:, 0].copy()
        self.ys = pts[:, 1].copy()
        m = len(pts)
        i, j = np.triu_indices(m, k=1)
        keep = self.xs[i] >= self.xs[j]
        self.pi, self.pj = i[keep], j[keep]
        self._pax, self._pay = self.xs[self.pi], self.ys[self.pi]
        self._pbx, self._pby = self.xs[self.pj], self.ys[self.pj]

    def _backward(self, y: float) -> np.ndarray:
        return backward_pair_distance_array(self._pax, self._pay, self._pbx, self._pby, y)

    def value(self, seg: HorizontalSegment) -> float:
        xs, ys, y = self.xs, self.ys, seg.y
        best = max(
            math.hypot(xs[0] - seg.x0, ys[0] - y),
            math.hypot(xs[-1] - seg.x1, ys[-1] - y),
            float(np.max(np.abs(ys - y))),
        )
        left = xs <= seg.x0
        if left.any():
            best = max(best, float(np.max(np.hypot(xs[left] - seg.x0, ys[left] - y))))
        right = xs >= seg.x1
        if right.any():
            best = max(best, float(np.max(np.hypot(xs[right] - seg.x1, ys[right] - y))))
        if len(self.pi):
            best = max(best, float(np.max(self._backward(y))))
        return best

    def breakdown(self, seg: HorizontalSegment) -> FrechetBreakdown:
        xs, ys, y = self.xs, self.ys, seg.y
        P, lab = self.points, self.labels
        last = len(P) - 1
        terms = {
            Term.UP: TermValue(dist(P[0], seg.p), (P[0],), (lab[0],)),
            Term.VQ: TermValue(dist(P[last], seg.q), (P[last],), (lab[last],)),
        }
        for term, mask, anchor in (
            (Term.HL, xs <= seg.x0, seg.p),
            (Term.HR, xs >= seg.x1, seg.q),
        ):
            idx = np.flatnonzero(mask)
            if len(idx):
                d = np.hypot(xs[idx] - anchor.x, ys[idx] - anchor.y)
                k = int(idx[int(np.argmax(d))])
                terms[term] = TermValue(float(d.max()), (P[k],), (lab[k],))
        off = np.abs(ys - y)
        k = int(np.argmax(off))
        terms[Term.HM] = TermValue(float(off[k]), (P[k],), (lab[k],))
        if len(self.pi):
            b = self._backward(y)
            k = int(np.argmax(b))
            i, j = int(self.pi[k]), int(self.pj[k])
            terms[Term.BWD] = TermValue(float(b[k]), (P[i], P[j]), (lab[i], lab[j]))
        return FrechetBreakdown.from_terms(terms)


def formula_scanner(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos) -> FormulaScan:
    pts, labels = _subtrajectory(traj, u, v)
    return FormulaScan(pts, labels)


def frechet_formula_scan(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos,
                         seg: HorizontalSegment) -> FrechetBreakdown:
    return formula_scanner(traj, u, v).breakdown(seg)


# -- free-space diagram ------------------------------------------------------

def _free_interval(c, a, b, eps):
    """Parameters t in [0, 1] with |a + t (b - a) - c| <= eps, or None."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    ex, ey = a[0] - c[0], a[1] - c[1]
    A = dx * dx + dy * dy
    C = ex * ex + ey * ey - eps * eps
    if A == 0.0:
        return (0.0, 1.0) if C <= 0.0 else None
    B = 2.0 * (dx * ex + dy * ey)
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return None
    s = math.sqrt(disc)
    lo = max(0.0, (-B - s) / (2.0 * A))
    hi = min(1.0, (-B + s) / (2.0 * A))
    if lo > hi:
        return None
    return lo, hi


def frechet_decide(P: Sequence[Sequence[float]], Q: Sequence[Sequence[float]], eps: float) -> bool:
    """Is the Fréchet distance between polylines P and Q at most ``eps``?"""
    m, k = len(P), len(Q)
    if dist(P[0], Q[0]) > eps or dist(P[-1], Q[-1]) > eps:
        return False
    if m == 1 or k == 1:
        c, other = (P[0], Q) if m == 1 else (Q[0], P)
        return all(dist(c, w) <= eps for w in other)
    # LF[i][j]: free part of the boundary s = i inside row j (P vertex i vs Q edge j)
    # BF[i][j]: free part of the boundary t = j inside column i (Q vertex j vs P edge i)
    LF = [[_free_interval(P[i], Q[j], Q[j + 1], eps) for j in range(k - 1)] for i in range(m)]
    BF = [[_free_interval(Q[j], P[i], P[i + 1], eps) for j in range(k)] for i in range(m - 1)]
    LR = [[None] * (k - 1) for _ in range(m)]
    BR = [[None] * k for _ in range(m - 1)]
    for j in range(k - 1):
        iv = LF[0][j]
        if iv is None or iv[0] > 0.0:
            break
        LR[0][j] = iv
        if iv[1] < 1.0:
            break
    for i in range(m - 1):
        iv = BF[i][0]
        if iv is None or iv[0] > 0.0:
            break
        BR[i][0] = iv
        if iv[1] < 1.0:
            break
    for i in range(m - 1):
        for j in range(k - 1):
            L, B = LR[i][j], BR[i][j]
            right, top = LF[i + 1][j], BF[i][j + 1]
            if right is not None:
                if B is not None:
                    LR[i + 1][j] = right
                elif L is not None and max(right[0], L[0]) <= right[1]:
                    LR[i + 1][j] = (max(right[0], L[0]), right[1])
            if top is not None:
                if L is not None:
                    BR[i][j + 1] = top
                elif B is not None and max(top[0], B[0]) <= top[1]:
                    BR[i][j + 1] = (max(top[0], B[0]), top[1])
    end_l, end_b = LR[m - 1][k - 2], BR[m - 2][k - 1]
    return (end_l is not None and end_l[1] >= 1.0) or (end_b is not None and end_b[1] >= 1.0)


def _point_segment_distance(c, a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    A = dx * dx + dy * dy
    t = 0.0 if A == 0.0 else min(max(((c[0] - a[0]) * dx + (c[1] - a[1]) * dy) / A, 0.0), 1.0)
    return math.hypot(a[0] + t * dx - c[0], a[1] + t * dy - c[1])


def _bisector_hits(c1, c2, a, b):
    """Distance from c1 to the point of segment ab equidistant from c1 and c2."""
    wx, wy = 2.0 * (c2[0] - c1[0]), 2.0 * (c2[1] - c1[1])
    r = (c2[0] ** 2 + c2[1] ** 2) - (c1[0] ** 2 + c1[1] ** 2)
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * wx + dy * wy
    if den == 0.0:
        return None
    t = (r - (a[0] * wx + a[1] * wy)) / den
    if not (0.0 <= t <= 1.0):
        return None
    return math.hypot(a[0] + t * dx - c1[0], a[1] + t * dy - c1[1])


def critical_values(P, Q) -> list[float]:
    """Alt-Godau candidate distances for polylines P and Q."""
    vals = [dist(P[0], Q[0]), dist(P[-1], Q[-1])]
    for A, Bc in ((P, Q), (Q, P)):
        for c in A:
            for j in range(len(Bc) - 1):
                vals.append(_point_segment_distance(c, Bc[j], Bc[j + 1]))
        for i1 in range(len(A)):
            for i2 in range(i1 + 1, len(A)):
                for j in range(len(Bc) - 1):
                    h = _bisector_hits(A[i1], A[i2], Bc[j], Bc[j + 1])
                    if h is not None:
                        vals.append(h)
    return vals


def frechet_distance_curves(P, Q) -> float:
    """Exact continuous Fréchet distance between two polylines."""
    P = [tuple(map(float, p)) for p in P]
    Q = [tuple(map(float, q)) for q in Q]
    if len(P) == 1 or len(Q) == 1:
        c, other = (P[0], Q) if len(P) == 1 else (Q[0], P)
        return max(dist(c, w) for w in other)
    lb = max(dist(P[0], Q[0]), dist(P[-1], Q[-1]))
    cands = sorted({c for c in critical_values(P, Q) if c >= lb})

    def ok(e):
        return frechet_decide(P, Q, e * (1.0 + 1e-10) + 1e-12)

    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


def frechet_freespace(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos,
                      seg: HorizontalSegment) -> float:
    P = subtrajectory_vertices(traj, u, v)
    Q = [seg.p] if seg.x0 == seg.x1 else [seg.p, seg.q]
    return frechet_distance_curves(P, Q)


# -- optimisers --------------------------------------------------------------

def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-10) -> tuple[float, float]:
    """Minimise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best = min((fc, c), (fd, d), (f(a), a), (f(b), b))
    return best[1], best[0]


def search_bracket(points: Sequence[Point], extra_x: Sequence[float] = ()) -> tuple[float, float, float, float, float]:
    """Bounding box of the points (and extra x values) plus its diameter."""
    xs = [p.x for p in points] + list(extra_x)
    ys = [p.y for p in points]
    x_lo, x_hi, y_lo, y_hi = min(xs), max(xs), min(ys), max(ys)
    D = math.hypot(x_hi - x_lo, y_hi - y_lo)
    return x_lo, x_hi, y_lo, y_hi, D


def brute_force_vertical_opt(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos,
                             x1: float, x2: float, tol: float = 1e-10) -> tuple[float, float]:
    if x1 > x2:
        raise ValueError(f"strip requires x1 <= x2, got {x1} > {x2}")
    scan = formula_scanner(traj, u, v)
    return _vertical(scan, x1, x2, tol)


def _vertical(scan: FormulaScan, x1: float, x2: float, tol: float) -> tuple[float, float]:
    _, _, y_lo, y_hi, D = search_bracket(scan.points, (x1, x2))
    return golden_section(lambda y: scan.value(HorizontalSegment(x1, x2, y)), y_lo - D, y_hi + D, tol)


def brute_force_placement_opt(traj: Trajectory, u: TrajectoryPos, v: TrajectoryPos,
                              L: float, tol: float = 1e-9) -> tuple[float, float, float]:
    if L < 0:
        raise ValueError(f"segment length must be non-negative, got {L}")
    scan = formula_scanner(traj, u, v)
    x_lo, x_hi, _, _, D = search_bracket(scan.points)
    inner_tol = tol * 0.1

    def outer(x1):
        return _vertical(scan, x1, x1 + L, inner_tol)[1]

    x1, d = golden_section(outer, x_lo - L - D, x_hi + D, tol)
    y, d = _vertical(scan, x1, x1 + L, inner_tol)
    # local grid polish around the golden-section answer
    h = max(tol, 1e-9)
    for dx in (-4 * h, -2 * h, -h, h, 2 * h, 4 * h):
        yy, dd = _vertical(scan, x1 + dx, x1 + dx + L, inner_tol)
        if dd < d:
            x1, y, d = x1 + dx, yy, dd
    return x1, y, d
