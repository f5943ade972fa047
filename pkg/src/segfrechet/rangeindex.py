"""Range queries over trajectory vertices.

A balanced tree over vertex indices splits any range ``[a, b]`` into
O(log n) canonical nodes.  Each node keeps its vertices sorted by x
together with persistent monotone-chain hulls of every x-prefix and
x-suffix, which answers "farthest vertex left of p" (right of q) by
walking one prefix (suffix) hull.  Per-node min/max y answers the vertical
offset term.

The backward-pair maximum is evaluated by branch and bound.  For two
vertex sets A before B, the monotone two-point assignment cost
(``ordered_pair_bound_array``) upper-bounds every backward pair, is
convex in each point and so peaks on hull vertices; when the peak is
itself a backward pair the bound is exact, otherwise the larger side is
split.  Nodes of at most ``envelope_cap`` vertices store their backward
pairs explicitly and are evaluated in one vectorised pass.

``mode="brute"`` answers everything by linear (quadratic for pairs)
scans of the range and is the oracle twin behind the same interface.
"""
from __future__ import annotations

import hashlib
import io
import math
import struct
from bisect import bisect_left, bisect_right
from typing import Optional, Sequence

import numpy as np

from .geometry import (
    Point,
    Trajectory,
    backward_pair_distance_array,
    ordered_pair_bound_array,
)

FIRST = -1  # label for an extra point placed before the range
LAST = -2  # label for an extra point placed after the range

MAGIC = b"FQI1"
VERSION = 1
_FLAG_BRUTE = 1
_FLAG_EXHAUSTIVE = 2

EXHAUSTIVE_PAIRS = 1024
_BRUTE_CHUNK = 2048


class _Node:
    __slots__ = (
        "lo", "hi", "left", "right", "sidx", "sx", "sy",
        "up_pre", "lo_pre", "up_suf", "lo_suf",
        "ymin", "ymin_idx", "ymax", "ymax_idx",
        "hx", "hy", "hidx", "pairs",
    )

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


class _Block:
    """A contiguous piece of a query: a tree node or a lone extra point."""

    __slots__ = ("node", "size", "hx", "hy", "hidx", "ax", "ay", "aidx")

    def __init__(self, node, size, hx, hy, hidx, ax, ay, aidx):
        self.node = node
        self.size = size
        self.hx, self.hy, self.hidx = hx, hy, hidx
        self.ax, self.ay, self.aidx = ax, ay, aidx


def _point_block(pt: Sequence[float], label: int) -> _Block:
    x = np.array([float(pt[0])])
    y = np.array([float(pt[1])])
    i = np.array([label])
    return _Block(None, 1, x, y, i, x, y, i)


def _chains(sx, sy, positions):
    """Parent pointers of the two monotone chains, inserting in ``positions`` order."""
    k = len(sx)
    up = [-1] * k
    lo = [-1] * k
    prev = -1
    for pos in positions:
        if prev >= 0:
            px, py = sx[pos], sy[pos]
            c = prev
            while up[c] >= 0:
                o = up[c]
                if (sx[c] - sx[o]) * (py - sy[o]) - (sy[c] - sy[o]) * (px - sx[o]) >= 0.0:
                    c = o
                else:
                    break
            up[pos] = c
            c = prev
            while lo[c] >= 0:
                o = lo[c]
                if (sx[c] - sx[o]) * (py - sy[o]) - (sy[c] - sy[o]) * (px - sx[o]) <= 0.0:
                    c = o
                else:
                    break
            lo[pos] = c
        prev = pos
    return up, lo


def _walk(chain, start):
    out = []
    k = start
    while k >= 0:
        out.append(k)
        k = chain[k]
    return out


class _Best:
    __slots__ = ("value", "pair")

    def __init__(self):
        self.value = -1.0
        self.pair = None

    def offer(self, value: float, pair) -> None:
        if value > self.value:
            self.value = value
            self.pair = pair


class RangeIndex:
    """Preprocessed vertex index for one trajectory.

    Parameters
    ----------
    traj : Trajectory
    mode : ``"fast"`` or ``"brute"``
    envelope_cap : nodes up to this size keep explicit backward-pair lists
    exhaustive_cross : evaluate every cross-node pair instead of pruning
    """

    def __init__(self, traj: Trajectory, mode: str = "fast", envelope_cap: int = 32,
                 exhaustive_cross: bool = False, _nodes: Optional[list] = None):
        if mode not in ("fast", "brute"):
            raise ValueError(f"unknown index mode {mode!r}")
        self.trajectory = traj
        self.mode = mode
        self.envelope_cap = int(envelope_cap)
        self.exhaustive_cross = bool(exhaustive_cross)
        self.xs = np.asarray(traj.xs)
        self.ys = np.asarray(traj.ys)
        self._xl = self.xs.tolist()
        self._yl = self.ys.tolist()
        self._arange = np.arange(traj.n)
        self.nodes: list[_Node] = []
        self.root = -1
        self._blocks: list[_Block] = []
        if mode == "fast":
            if _nodes is None:
                self.root = self._build(0, traj.n - 1)
            else:
                self.nodes = _nodes
                self.root = 0 if _nodes else -1
            self._blocks = [self._node_block(i, nd) for i, nd in enumerate(self.nodes)]

    @classmethod
    def build(cls, traj: Trajectory, **kw) -> "RangeIndex":
        return cls(traj, **kw)

    @property
    def n(self) -> int:
        return self.trajectory.n

    def with_options(self, mode: Optional[str] = None, exhaustive_cross: Optional[bool] = None) -> "RangeIndex":
        """Same trajectory, different query options (shares built nodes when possible)."""
        mode = self.mode if mode is None else mode
        exh = self.exhaustive_cross if exhaustive_cross is None else exhaustive_cross
        if mode == self.mode and exh == self.exhaustive_cross:
            return self
        nodes = self.nodes if (mode == "fast" and self.nodes) else None
        return RangeIndex(self.trajectory, mode=mode, envelope_cap=self.envelope_cap,
                          exhaustive_cross=exh, _nodes=nodes)

    # -- construction --------------------------------------------------------

    def _build(self, lo: int, hi: int) -> int:
        nid = len(self.nodes)
        nd = _Node()
        self.nodes.append(nd)
        nd.lo, nd.hi = lo, hi
        if lo == hi:
            nd.left = nd.right = -1
        else:
            mid = (lo + hi) // 2
            nd.left = self._build(lo, mid)
            nd.right = self._build(mid + 1, hi)
        order = lo + np.lexsort((self.ys[lo:hi + 1], self.xs[lo:hi + 1]))
        self._fill(nd, order, None)
        return nid

    def _fill(self, nd: _Node, order: np.ndarray, saved):
        nd.sidx = order.tolist()
        nd.sx = self.xs[order].tolist()
        nd.sy = self.ys[order].tolist()
        k = len(order)
        if saved is None:
            nd.up_pre, nd.lo_pre = _chains(nd.sx, nd.sy, range(k))
            nd.up_suf, nd.lo_suf = _chains(nd.sx, nd.sy, range(k - 1, -1, -1))
        else:
            nd.up_pre, nd.lo_pre, nd.up_suf, nd.lo_suf = saved[:4]
        seg = self.ys[nd.lo:nd.hi + 1]
        i_min, i_max = int(np.argmin(seg)), int(np.argmax(seg))
        nd.ymin, nd.ymin_idx = float(seg[i_min]), nd.lo + i_min
        nd.ymax, nd.ymax_idx = float(seg[i_max]), nd.lo + i_max
        hull = sorted(set(_walk(nd.up_pre, k - 1)) | set(_walk(nd.lo_pre, k - 1)))
        h = order[hull]
        nd.hx, nd.hy, nd.hidx = self.xs[h], self.ys[h], h
        nd.pairs = None
        if k <= self.envelope_cap:
            if saved is None or len(saved) < 5:
                i, j = np.triu_indices(k, k=1)
                i, j = i + nd.lo, j + nd.lo
                keep = self.xs[i] >= self.xs[j]
                i, j = i[keep], j[keep]
            else:
                i, j = saved[4]
            nd.pairs = (i, j, self.xs[i], self.ys[i], self.xs[j], self.ys[j])

    def _node_block(self, nid: int, nd: _Node) -> _Block:
        s = slice(nd.lo, nd.hi + 1)
        return _Block(nid, nd.size, nd.hx, nd.hy, nd.hidx, self.xs[s], self.ys[s], self._arange[s])

    def canonical(self, a: int, b: int) -> list[int]:
        """Node ids covering ``[a, b]``, left to right."""
        self._check_range(a, b)
        out: list[int] = []
        if a > b or self.root < 0:
            return out
        stack = [self.root]
        nodes = self.nodes
        while stack:
            nid = stack.pop()
            nd = nodes[nid]
            if nd.hi < a or nd.lo > b:
                continue
            if a <= nd.lo and nd.hi <= b:
                out.append(nid)
            else:
                stack.append(nd.right)
                stack.append(nd.left)
        return out

    def _check_range(self, a: int, b: int) -> None:
        if a <= b and (a < 0 or b >= self.n):
            raise IndexError(f"invalid vertex range [{a}, {b}] for n={self.n}")

    # -- Hausdorff terms -------------------------------------------------

    def hausdorff_left(self, a: int, b: int, p: Sequence[float]) -> tuple[float, int]:
        """Farthest vertex of ``[a, b]`` from ``p`` among those with ``x <= p.x``.

        Returns ``(distance, vertex)``; ``(0.0, -1)`` when no vertex qualifies.
        """
        return self._hausdorff_side(a, b, p, left=True)

    def hausdorff_right(self, a: int, b: int, q: Sequence[float]) -> tuple[float, int]:
        """Mirror of ``hausdorff_left`` for vertices with ``x >= q.x``."""
        return self._hausdorff_side(a, b, q, left=False)

    def _hausdorff_side(self, a, b, p, left):
        px, py = float(p[0]), float(p[1])
        if self.mode == "brute":
            self._check_range(a, b)
            if a > b:
                return 0.0, -1
            xs, ys = self.xs[a:b + 1], self.ys[a:b + 1]
            sel = np.flatnonzero(xs <= px if left else xs >= px)
            if not len(sel):
                return 0.0, -1
            d = np.hypot(xs[sel] - px, ys[sel] - py)
            k = int(np.argmax(d))
            return float(d[k]), a + int(sel[k])
        best, arg = -1.0, -1
        for nid in self.canonical(a, b):
            nd = self.nodes[nid]
            sx, sy = nd.sx, nd.sy
            if left:
                start = bisect_right(sx, px) - 1
                if start < 0:
                    continue
                chains = (nd.up_pre, nd.lo_pre)
            else:
                start = bisect_left(sx, px)
                if start >= len(sx):
                    continue
                chains = (nd.up_suf, nd.lo_suf)
            for chain in chains:
                k = start
                while k >= 0:
                    dx, dy = sx[k] - px, sy[k] - py
                    d = dx * dx + dy * dy
                    if d > best:
                        best, arg = d, nd.sidx[k]
                    k = chain[k]
        if arg < 0:
            return 0.0, -1
        return float(np.hypot(self._xl[arg] - px, self._yl[arg] - py)), arg

    def hausdorff_mid(self, a: int, b: int, y: float) -> tuple[float, int]:
        """Largest ``|y - p_i.y|`` over the range, with its vertex."""
        if self.mode == "brute":
            self._check_range(a, b)
            if a > b:
                return 0.0, -1
            d = np.abs(self.ys[a:b + 1] - y)
            k = int(np.argmax(d))
            return float(d[k]), a + k
        best, arg = -1.0, -1
        for nid in self.canonical(a, b):
            nd = self.nodes[nid]
            d1, d2 = y - nd.ymin, nd.ymax - y
            if d1 > best:
                best, arg = d1, nd.ymin_idx
            if d2 > best:
                best, arg = d2, nd.ymax_idx
        if arg < 0:
            return 0.0, -1
        return abs(y - self._yl[arg]), arg

    def y_extent(self, a: int, b: int) -> tuple[float, float]:
        """``(min y, max y)`` over the range; ``(inf, -inf)`` when empty."""
        self._check_range(a, b)
        if a > b:
            return math.inf, -math.inf
        if self.mode == "brute":
            seg = self.ys[a:b + 1]
            return float(seg.min()), float(seg.max())
        lo, hi = math.inf, -math.inf
        for nid in self.canonical(a, b):
            nd = self.nodes[nid]
            lo, hi = min(lo, nd.ymin), max(hi, nd.ymax)
        return lo, hi

    # -- backward pairs ----------------------------------------------------

    def backward_max(self, a: int, b: int, y: float, first: Optional[Sequence[float]] = None,
                     last: Optional[Sequence[float]] = None):
        """Largest backward-pair distance at height ``y`` over ``[a, b]``.

        ``first``/``last`` are extra points placed before/after the range;
        they are labelled ``FIRST``/``LAST`` in the returned pair.  Returns
        ``(value, (i, j))`` or ``(None, None)`` without any backward pair.
        """
        self._check_range(a, b)
        if self.mode == "brute":
            return self._brute_backward(a, b, y, first, last)
        blocks = [self._blocks[nid] for nid in self.canonical(a, b)]
        if first is not None:
            blocks.insert(0, _point_block(first, FIRST))
        if last is not None:
            blocks.append(_point_block(last, LAST))
        best = _Best()
        if blocks:
            self._solve(blocks, y, best)
        return self._result(best)

    def point_backward_max(self, a: int, b: int, y: float, point: Sequence[float], before: bool):
        """Backward pairs formed by one extra point and the vertices of ``[a, b]``.

        ``before=True`` puts the point ahead of the range (label ``FIRST``),
        otherwise after it (``LAST``).
        """
        self._check_range(a, b)
        if self.mode == "brute":
            return self._brute_point(a, b, y, point, before)
        blocks = [self._blocks[nid] for nid in self.canonical(a, b)]
        best = _Best()
        if blocks:
            if before:
                self._cross([_point_block(point, FIRST)], blocks, y, best)
            else:
                self._cross(blocks, [_point_block(point, LAST)], y, best)
        return self._result(best)

    @staticmethod
    def _result(best: _Best):
        if best.pair is None:
            return None, None
        return best.value, best.pair

    def _solve(self, blocks, y, best):
        if len(blocks) == 1:
            self._internal(blocks[0], y, best)
            return
        mid = len(blocks) // 2
        L, R = blocks[:mid], blocks[mid:]
        self._solve(L, y, best)
        self._solve(R, y, best)
        self._cross(L, R, y, best)

    def _internal(self, blk: _Block, y, best):
        if blk.node is None:
            return
        nd = self.nodes[blk.node]
        if nd.pairs is not None:
            i, j, ax, ay, bx, by = nd.pairs
            if len(i):
                vals = backward_pair_distance_array(ax, ay, bx, by, y)
                k = int(np.argmax(vals))
                best.offer(float(vals[k]), (int(i[k]), int(j[k])))
            return
        hx, hy, hi = nd.hx, nd.hy, nd.hidx
        vals = backward_pair_distance_array(hx[:, None], hy[:, None], hx[None, :], hy[None, :], y)
        earlier = hi[:, None] < hi[None, :]
        real = np.where(earlier, hx[:, None] >= hx[None, :], (hi[:, None] > hi[None, :]) & (hx[None, :] >= hx[:, None]))
        ub = float(vals.max())
        if real.any():
            masked = np.where(real, vals, -1.0)
            k = int(np.argmax(masked))
            r, c = divmod(k, len(hx))
            pair = (int(hi[r]), int(hi[c])) if hi[r] < hi[c] else (int(hi[c]), int(hi[r]))
            best.offer(float(masked.flat[k]), pair)
        if ub <= best.value:
            return
        left, right = self._blocks[nd.left], self._blocks[nd.right]
        self._internal(left, y, best)
        self._internal(right, y, best)
        self._cross([left], [right], y, best)

    def _cross(self, L, R, y, best):
        na = sum(b.size for b in L)
        nb = sum(b.size for b in R)
        if self.exhaustive_cross or na * nb <= EXHAUSTIVE_PAIRS:
            self._cross_exhaustive(L, R, y, best)
            return
        ax, ay, ai = _concat(L, "h")
        bx, by, bi = _concat(R, "h")
        vals = ordered_pair_bound_array(ax[:, None], ay[:, None], bx[None, :], by[None, :], y)
        real = ax[:, None] >= bx[None, :]
        ub = float(vals.max())
        if real.any():
            masked = np.where(real, vals, -1.0)
            k = int(np.argmax(masked))
            r, c = divmod(k, len(bx))
            best.offer(float(masked.flat[k]), (int(ai[r]), int(bi[c])))
        if ub <= best.value:
            return
        if na >= nb:
            parts = self._split(L)
            if parts is not None:
                for part in parts:
                    self._cross(part, R, y, best)
                return
        parts = self._split(R)
        if parts is not None:
            for part in parts:
                self._cross(L, part, y, best)
            return
        parts = self._split(L)
        for part in parts:
            self._cross(part, R, y, best)

    def _split(self, blocks):
        if len(blocks) > 1:
            mid = len(blocks) // 2
            return blocks[:mid], blocks[mid:]
        b = blocks[0]
        if b.node is None:
            return None
        nd = self.nodes[b.node]
        if nd.is_leaf:
            return None
        return [self._blocks[nd.left]], [self._blocks[nd.right]]

    def _cross_exhaustive(self, L, R, y, best):
        ax, ay, ai = _concat(L, "a")
        bx, by, bi = _concat(R, "a")
        for s in range(0, len(ax), _BRUTE_CHUNK):
            cx, cy = ax[s:s + _BRUTE_CHUNK, None], ay[s:s + _BRUTE_CHUNK, None]
            real = cx >= bx[None, :]
            if not real.any():
                continue
            vals = np.where(real, backward_pair_distance_array(cx, cy, bx[None, :], by[None, :], y), -1.0)
            k = int(np.argmax(vals))
            r, c = divmod(k, len(bx))
            best.offer(float(vals.flat[k]), (int(ai[s + r]), int(bi[c])))

    def _gather(self, a, b, first, last):
        xs = [self.xs[a:b + 1]] if a <= b else []
        ys = [self.ys[a:b + 1]] if a <= b else []
        ids = [self._arange[a:b + 1]] if a <= b else []
        if first is not None:
            xs.insert(0, np.array([float(first[0])]))
            ys.insert(0, np.array([float(first[1])]))
            ids.insert(0, np.array([FIRST]))
        if last is not None:
            xs.append(np.array([float(last[0])]))
            ys.append(np.array([float(last[1])]))
            ids.append(np.array([LAST]))
        if not xs:
            return np.empty(0), np.empty(0), np.empty(0, dtype=int)
        return np.concatenate(xs), np.concatenate(ys), np.concatenate(ids)

    def _brute_backward(self, a, b, y, first, last):
        xs, ys, ids = self._gather(a, b, first, last)
        best = _Best()
        m = len(xs)
        for s in range(0, m, _BRUTE_CHUNK):
            rows = np.arange(s, min(m, s + _BRUTE_CHUNK))
            real = (rows[:, None] < np.arange(m)[None, :]) & (xs[rows, None] >= xs[None, :])
            if not real.any():
                continue
            vals = np.where(real, backward_pair_distance_array(xs[rows, None], ys[rows, None],
                                                               xs[None, :], ys[None, :], y), -1.0)
            k = int(np.argmax(vals))
            r, c = divmod(k, m)
            best.offer(float(vals.flat[k]), (int(ids[rows[r]]), int(ids[c])))
        return self._result(best)

    def _brute_point(self, a, b, y, point, before):
        xs, ys, ids = self._gather(a, b, None, None)
        best = _Best()
        if not len(xs):
            return None, None
        px, py = float(point[0]), float(point[1])
        real = (px >= xs) if before else (xs >= px)
        if not real.any():
            return None, None
        if before:
            vals = backward_pair_distance_array(px, py, xs, ys, y)
        else:
            vals = backward_pair_distance_array(xs, ys, px, py, y)
        vals = np.where(real, vals, -1.0)
        k = int(np.argmax(vals))
        pair = (FIRST, int(ids[k])) if before else (int(ids[k]), LAST)
        best.offer(float(vals[k]), pair)
        return self._result(best)

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        flags = (_FLAG_BRUTE if self.mode == "brute" else 0) | (_FLAG_EXHAUSTIVE if self.exhaustive_cross else 0)
        buf.write(struct.pack("<4sHHqqq", MAGIC, VERSION, flags, self.n, len(self.nodes), self.envelope_cap))
        buf.write(np.stack([self.xs, self.ys], axis=1).astype("<f8").tobytes())
        for nd in self.nodes:
            npairs = -1 if nd.pairs is None else len(nd.pairs[0])
            buf.write(struct.pack("<qqqqq", nd.lo, nd.hi, nd.left, nd.right, npairs))
            for arr in (nd.sidx, nd.up_pre, nd.lo_pre, nd.up_suf, nd.lo_suf):
                buf.write(np.asarray(arr, dtype="<i8").tobytes())
            if nd.pairs is not None:
                buf.write(np.asarray(nd.pairs[0], dtype="<i8").tobytes())
                buf.write(np.asarray(nd.pairs[1], dtype="<i8").tobytes())
        body = buf.getvalue()
        return body + hashlib.sha256(body).digest()

    @classmethod
    def load(cls, path) -> "RangeIndex":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @classmethod
    def from_bytes(cls, data: bytes) -> "RangeIndex":
        if len(data) < 36 + 32 or data[:4] != MAGIC:
            raise ValueError("not an FQI1 index file")
        body, digest = data[:-32], data[-32:]
        if hashlib.sha256(body).digest() != digest:
            raise ValueError("index checksum mismatch")
        _, version, flags, n, n_nodes, cap = struct.unpack_from("<4sHHqqq", body, 0)
        if version != VERSION:
            raise ValueError(f"unsupported index version {version}")
        off = struct.calcsize("<4sHHqqq")
        verts = np.frombuffer(body, dtype="<f8", count=2 * n, offset=off).reshape(n, 2)
        off += 16 * n
        traj = Trajectory(verts.tolist())
        mode = "brute" if flags & _FLAG_BRUTE else "fast"
        exhaustive = bool(flags & _FLAG_EXHAUSTIVE)
        self = cls.__new__(cls)
        RangeIndex.__init__(self, traj, mode="brute", envelope_cap=cap, exhaustive_cross=exhaustive)
        nodes = []
        for _ in range(n_nodes):
            lo, hi, left, right, npairs = struct.unpack_from("<qqqqq", body, off)
            off += 40
            k = hi - lo + 1
            arrs = []
            for _ in range(5):
                arrs.append(np.frombuffer(body, dtype="<i8", count=k, offset=off).astype(np.int64))
                off += 8 * k
            saved = [a.tolist() for a in arrs[1:]]
            pair_ij = None
            if npairs >= 0:
                pi = np.frombuffer(body, dtype="<i8", count=npairs, offset=off).astype(np.int64)
                off += 8 * npairs
                pj = np.frombuffer(body, dtype="<i8", count=npairs, offset=off).astype(np.int64)
                off += 8 * npairs
                pair_ij = (pi, pj)
            nd = _Node()
            nd.lo, nd.hi, nd.left, nd.right = lo, hi, left, right
            self._fill(nd, arrs[0], saved + ([pair_ij] if pair_ij is not None else []))
            nodes.append(nd)
        if off != len(body):
            raise ValueError("trailing bytes in index file")
        self.mode = mode
        self.nodes = nodes
        self.root = 0 if nodes else -1
        self._blocks = [self._node_block(i, nd) for i, nd in enumerate(nodes)]
        return self


def _concat(blocks, which):
    if len(blocks) == 1:
        b = blocks[0]
        return (b.hx, b.hy, b.hidx) if which == "h" else (b.ax, b.ay, b.aidx)
    if which == "h":
        return (np.concatenate([b.hx for b in blocks]), np.concatenate([b.hy for b in blocks]),
                np.concatenate([b.hidx for b in blocks]))
    return (np.concatenate([b.ax for b in blocks]), np.concatenate([b.ay for b in blocks]),
            np.concatenate([b.aidx for b in blocks]))


def build(traj: Trajectory, **kw) -> RangeIndex:
    return RangeIndex.build(traj, **kw)
