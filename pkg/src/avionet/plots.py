"""Figure rendering for run reports and the bench scaling plot.

Figures are written next to the delimited output of a run; everything they
show is also available in the CSV files, so skipping them loses nothing.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .configio import ReportDocument
from .metrics import FitResult


def render_report_figures(report: ReportDocument, outdir: Path | str) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    with_delays = [(vl_id, st) for vl_id, st in report.vls if st.delay_us]
    if with_delays:
        fig, ax = plt.subplots(figsize=(8, 4))
        xs = [vl_id for vl_id, _ in with_delays]
        means = [st.delay_us.mean for _, st in with_delays]
        lo = [st.delay_us.mean - st.delay_us.min for _, st in with_delays]
        hi = [st.delay_us.max - st.delay_us.mean for _, st in with_delays]
        ax.errorbar(xs, means, yerr=[lo, hi], fmt="o", markersize=3,
                    capsize=2, linewidth=0.8)
        ax.set_xlabel("VL")
        ax.set_ylabel("delay (us)")
        ax.set_title("End-to-end delay per VL (min / mean / max)")
        ax.grid(True, alpha=0.3)
        path = outdir / "delays.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    for sw in report.switches:
        if not sw.capacity:
            continue
        fig, ax = plt.subplots(figsize=(8, 3))
        times = [t_ns / 1000.0 for t_ns, _, _, _ in sw.capacity]
        used = [u for _, u, _, _ in sw.capacity]
        ax.step([0.0] + times, [0] + used, where="post")
        ax.set_xlabel("time (us)")
        ax.set_ylabel("memory used (bytes)")
        ax.set_title(f"Switch {sw.switch_id} memory occupancy")
        ax.grid(True, alpha=0.3)
        path = outdir / f"switch_capacity_{sw.switch_id}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    return written


def render_scaling_figure(n_packets: list[int], runtime_min: list[float],
                          fit: FitResult | None, path: Path | str) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(n_packets, runtime_min, "o", label="measured")
    if fit is not None:
        xs = sorted(n_packets)
        ax.plot(xs, [fit.slope * x + fit.intercept for x in xs], "-",
                label=f"fit: {fit.slope:.3e}*N + {fit.intercept:.3f} "
                      f"(R2={fit.r_squared:.4f})")
    ax.set_xlabel("messages sent")
    ax.set_ylabel("execution time (min)")
    ax.set_title("Runtime scaling")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
