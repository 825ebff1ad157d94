"""Figure rendering for benchmark results.

Turns a list of BenchRecord rows into two log-log figures, wall time
and peak element count against batch size, one series per method.
Skipped rows are dropped from the time panel and annotated in the peak
panel legend.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

MARKERS = ("o", "s", "^", "v", "D", "x")


def _series(records):
    by_method: dict[str, list] = {}
    for r in records:
        by_method.setdefault(r.method, []).append(r)
    for rows in by_method.values():
        rows.sort(key=lambda r: r.batch)
    return by_method


def render_figures(records, out_dir, stem: str = "bench") -> list[Path]:
    """Write <stem>_time_vs_batch.png and <stem>_peak_vs_batch.png.

    Returns the written paths in that order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_method = _series(records)
    paths = []

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for i, (method, rows) in enumerate(sorted(by_method.items())):
        kept = [r for r in rows if not r.skipped]
        if not kept:
            continue
        ax.loglog(
            [r.batch for r in kept],
            [r.median_seconds for r in kept],
            marker=MARKERS[i % len(MARKERS)],
            label=method,
        )
    ax.set_xlabel("batch size")
    ax.set_ylabel("median seconds")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out_dir / f"{stem}_time_vs_batch.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for i, (method, rows) in enumerate(sorted(by_method.items())):
        kept = [r for r in rows if not r.skipped]
        if not kept:
            continue
        skipped = len(rows) - len(kept)
        label = method if not skipped else f"{method} ({skipped} skipped)"
        ax.loglog(
            [r.batch for r in kept],
            [max(r.peak_elements, 1) for r in kept],
            marker=MARKERS[i % len(MARKERS)],
            label=label,
        )
    ax.set_xlabel("batch size")
    ax.set_ylabel("peak engine elements")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out_dir / f"{stem}_peak_vs_batch.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)
    return paths
