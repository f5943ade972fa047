"""CSV tables and matplotlib figures for ``bench`` and ``oracle-check``."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

BENCH_FIELDS = ("name", "n", "queries", "mode", "build_s", "query_mean_s", "query_p90_s")


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_bench_report(rows, directory) -> tuple[Path, Path]:
    out = _outdir(directory)
    table = out / "bench.csv"
    with open(table, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow({k: r[k] for k in BENCH_FIELDS})

    rows = sorted(rows, key=lambda r: r["n"])
    n = [r["n"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.loglog(n, [r["build_s"] for r in rows], "o-")
    ax1.set_xlabel("vertices")
    ax1.set_ylabel("build time [s]")
    ax2.loglog(n, [1e3 * r["query_mean_s"] for r in rows], "o-", label="mean")
    ax2.loglog(n, [1e3 * r["query_p90_s"] for r in rows], "s--", label="p90")
    ax2.set_xlabel("vertices")
    ax2.set_ylabel("query latency [ms]")
    ax2.legend(frameon=False)
    for ax in (ax1, ax2):
        ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    figure = out / "bench.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return table, figure


def write_oracle_report(summary, directory) -> tuple[Path, Path]:
    out = _outdir(directory)
    table = out / "oracle_check.csv"
    with open(table, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("check", "trial", "error", "tolerance"))
        w.writerows(summary.records)

    checks = sorted({r[0] for r in summary.records})
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for i, name in enumerate(checks):
        errs = [max(r[2], 1e-18) for r in summary.records if r[0] == name]
        ax.scatter([i] * len(errs), errs, s=8, alpha=0.5)
        tol = max(r[3] for r in summary.records if r[0] == name)
        ax.hlines(tol, i - 0.3, i + 0.3, colors="k", linewidth=1)
    ax.set_yscale("log")
    ax.set_xticks(range(len(checks)))
    ax.set_xticklabels(checks, rotation=30, ha="right")
    ax.set_ylabel("absolute error (bar: tolerance)")
    fig.tight_layout()
    figure = out / "oracle_check.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return table, figure
