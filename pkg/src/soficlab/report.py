"""Report rendering: delimited tables and matplotlib figures for artifacts.

Every statistics or defect artifact can be rendered as a CSV table plus a
PNG figure written next to it; pipeline runs do this automatically for the
artifacts they produce.
"""

from __future__ import annotations

import csv
import io
from typing import Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .approx import DefectReport
from .localstats import LocalStats, stats_distance


def stats_csv(stats: LocalStats, target: Optional[LocalStats] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    if target is None:
        writer.writerow(["encoding", "mass"])
        for enc in stats.support():
            writer.writerow([enc, float(stats.masses[enc])])
    else:
        writer.writerow(["encoding", "mass", "target", "abs_diff"])
        for enc in sorted(set(stats.masses) | set(target.masses)):
            m = float(stats.masses.get(enc, 0))
            t = float(target.masses.get(enc, 0))
            writer.writerow([enc, m, t, abs(m - t)])
    return buf.getvalue()


def defect_csv(report: DefectReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["kind", "word", "value"])
    for w, d in report.relator_defects:
        writer.writerow(["relator_defect", w.to_text(), float(d)])
    for w, t in report.word_traces:
        writer.writerow(["word_trace", w.to_text(), float(t)])
    return buf.getvalue()


def render_stats_figure(stats: LocalStats, path: str,
                        target: Optional[LocalStats] = None,
                        title: str = "neighborhood class distribution"):
    keys = sorted(set(stats.masses) | (set(target.masses) if target else set()))
    xs = range(len(keys))
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(keys)), 4))
    cand = [float(stats.masses.get(k, 0)) for k in keys]
    if target is not None:
        width = 0.4
        ax.bar([x - width / 2 for x in xs], cand, width, label="candidate")
        ax.bar([x + width / 2 for x in xs],
               [float(target.masses.get(k, 0)) for k in keys],
               width, label="target")
        ax.legend()
        sup, tv = stats_distance(stats, target)
        title = f"{title} (sup={float(sup):.4g}, tv={float(tv):.4g})"
    else:
        ax.bar(list(xs), cand)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(keys, rotation=90, fontsize=6)
    ax.set_ylabel("mass")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_defect_figure(report: DefectReport, path: str,
                         title: str = "defects and word traces"):
    labels = [f"rel {w.to_text()}" for w, _ in report.relator_defects]
    values = [float(d) for _, d in report.relator_defects]
    labels += [f"w {w.to_text()}" for w, _ in report.word_traces]
    values += [float(t) for _, t in report.word_traces]
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(labels)), 4))
    colors = (["tab:red"] * len(report.relator_defects)
              + ["tab:blue"] * len(report.word_traces))
    ax.bar(range(len(values)), values, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("normalized defect / trace")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_convergence_figure(points: Sequence[Tuple[int, float]], path: str,
                              title: str = "sup distance to target"):
    ns = [p[0] for p in points]
    ds = [float(p[1]) for p in points]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, ds, marker="o")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("points")
    ax.set_ylabel("sup distance")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
