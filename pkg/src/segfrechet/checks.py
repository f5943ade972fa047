"""Randomised engine-versus-oracle sweeps and timing, shared by the CLI."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import HorizontalSegment, Trajectory
from .oracle import (
    brute_force_placement_opt,
    brute_force_vertical_opt,
    frechet_formula_scan,
    frechet_freespace,
    subtrajectory_vertices,
)
from .query import frechet_query
from .rangeindex import RangeIndex
from .translation import optimize_placement, optimize_vertical

FREESPACE_MAX_POINTS = 40
PLACEMENT_MAX_POINTS = 60


@dataclass
class CheckSummary:
    records: list = field(default_factory=list)  # (check, trial, error, tolerance)
    failures: list = field(default_factory=list)

    def add(self, check: str, trial: int, error: float, tol: float) -> None:
        self.records.append((check, trial, float(error), float(tol)))
        if not error <= tol:
            self.failures.append(f"{check} trial {trial}: error {error:.3e} > {tol:.1e}")

    @property
    def ok(self) -> bool:
        return not self.failures

    def counts(self) -> dict:
        out = {}
        for check, _, err, tol in self.records:
            n, bad = out.get(check, (0, 0))
            out[check] = (n + 1, bad + (not err <= tol))
        return {k: list(v) for k, v in out.items()}

    def max_errors(self) -> dict:
        out = {}
        for check, _, err, _ in self.records:
            out[check] = max(out.get(check, 0.0), err)
        return out


def random_positions(traj: Trajectory, rng):
    if traj.n == 1:
        return traj.start(), traj.start()
    a, b = np.sort(rng.uniform(0.0, traj.n - 1, size=2))
    return traj.pos_at_param(float(a)), traj.pos_at_param(float(b))


def random_segment(traj: Trajectory, rng) -> HorizontalSegment:
    x_lo, y_lo, x_hi, y_hi = traj.bbox()
    pad = 0.25 * (1.0 + max(x_hi - x_lo, y_hi - y_lo))
    x0, x1 = np.sort(rng.uniform(x_lo - pad, x_hi + pad, size=2))
    return HorizontalSegment(float(x0), float(x1), float(rng.uniform(y_lo - pad, y_hi + pad)))


def oracle_check(idx: RangeIndex, trials: int = 100, seed: int = 0) -> CheckSummary:
    traj = idx.trajectory
    brute = idx.with_options(mode="brute")
    rng = np.random.default_rng(seed)
    out = CheckSummary()
    for t in range(trials):
        u, v = random_positions(traj, rng)
        Q = random_segment(traj, rng)
        ref = frechet_formula_scan(traj, u, v, Q).value
        for mode in ("exact", "bisect"):
            got = frechet_query(idx, u, v, Q, mode).value
            out.add(f"query-{mode}", t, abs(got - ref), 1e-8)
        m = len(subtrajectory_vertices(traj, u, v))
        if m <= FREESPACE_MAX_POINTS:
            fs = frechet_freespace(traj, u, v, Q)
            out.add("freespace", t, abs(fs - ref), 1e-6 * (1.0 + ref))

        a = int(rng.integers(0, traj.n))
        b = int(rng.integers(a, traj.n))
        y = float(Q.y)
        for name in ("backward_max", "hausdorff_left", "hausdorff_right", "hausdorff_mid"):
            arg = y if name in ("backward_max", "hausdorff_mid") else (Q.x0, y)
            f, g = getattr(idx, name)(a, b, arg)[0], getattr(brute, name)(a, b, arg)[0]
            err = 0.0 if f is None and g is None else (np.inf if f is None or g is None else abs(f - g))
            out.add("range-twin", t, err, 1e-9)

        if t % 10 == 0:
            r = optimize_vertical(idx, u, v, Q.x0, Q.x1)
            _, d = brute_force_vertical_opt(traj, u, v, Q.x0, Q.x1)
            out.add("vertical", t, abs(r.value - d), 1e-6)
        if t % 25 == 0 and m <= PLACEMENT_MAX_POINTS:
            L = float(Q.length)
            r = optimize_placement(idx, u, v, L)
            _, _, d = brute_force_placement_opt(traj, u, v, L)
            out.add("placement", t, abs(r.value - d), 1e-5)
    return out


def benchmark(name: str, traj: Trajectory, queries: int = 100, seed: int = 0, mode: str = "exact") -> dict:
    t0 = time.perf_counter()
    idx = RangeIndex(traj)
    build = time.perf_counter() - t0
    rng = np.random.default_rng(seed)
    cases = [(*random_positions(traj, rng), random_segment(traj, rng)) for _ in range(queries)]
    times = []
    for u, v, Q in cases:
        t0 = time.perf_counter()
        frechet_query(idx, u, v, Q, mode)
        times.append(time.perf_counter() - t0)
    times = np.asarray(times)
    return {
        "name": name,
        "n": traj.n,
        "queries": queries,
        "mode": mode,
        "build_s": build,
        "query_mean_s": float(times.mean()) if queries else 0.0,
        "query_p90_s": float(np.percentile(times, 90)) if queries else 0.0,
    }
