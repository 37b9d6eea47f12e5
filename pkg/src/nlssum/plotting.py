"""Figures written next to the CSV/JSON outputs.

Uses ``matplotlib.figure.Figure`` directly so no interactive backend is touched.
"""

from __future__ import annotations

from typing import Mapping

from matplotlib.figure import Figure

from .evaluation import DensityCurve, EvalReport

PALETTE = ("#1f4e79", "#c0504d", "#4f8a3c", "#8064a2", "#e08a1e")


def _style(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.grid(alpha=0.3)


def plot_densities(curves: Mapping[str, DensityCurve], path, title: str | None = None) -> None:
    fig = Figure(figsize=(6, 4), dpi=120)
    ax = fig.add_subplot()
    for (name, curve), color in zip(curves.items(), PALETTE * 4):
        ax.plot(curve.grid, curve.density, color=color, lw=2, label=f"{name} (h={curve.bandwidth:.3f})")
        ax.fill_between(curve.grid, curve.density, color=color, alpha=0.12)
    ax.set_xlim(0, 1)
    ax.set_ylim(bottom=0)
    _style(ax, "relative sentence position", "density")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)


def plot_report(report: EvalReport, path) -> None:
    langs = sorted(report.languages)
    means = [report.languages[l].mean for l in langs]
    err = [[m - report.languages[l].lo for l, m in zip(langs, means)],
           [report.languages[l].hi - m for l, m in zip(langs, means)]]
    fig = Figure(figsize=(max(3, 1.2 * len(langs) + 1.5), 4), dpi=120)
    ax = fig.add_subplot()
    ax.bar(langs, means, yerr=err, capsize=4, color=PALETTE[0], alpha=0.85)
    ax.set_ylim(0, 1)
    _style(ax, "language", "ROUGE-L F1 (95% CI)")
    ax.set_title(report.system)
    fig.tight_layout()
    fig.savefig(path)
