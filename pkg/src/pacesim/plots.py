"""Render report figures from ensemble statistics.

Figures mirror the delimited outputs: headline bars (utility, cost, index),
final-state distribution, utility and cumulative cost over time with the
crisis onset marked, and the total-cost histogram with its CDF.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import EnsembleStats
from .graph import StateClass

POLICY_COLORS = {
    "static": "#d62728",
    "adaptive": "#ff7f0e",
    "greedy": "#2ca02c",
}

_CLASS_ORDER = (StateClass.NOMINAL, StateClass.DEGRADED, StateClass.FAILURE)


def _color(name: str) -> str:
    return POLICY_COLORS.get(name, "#1f77b4")


def plot_summary_bars(stats_by_policy: dict[str, EnsembleStats], path: Path) -> None:
    names = list(stats_by_policy)
    fig, axes = plt.subplots(1, 3, figsize=(9.5, 3.2))
    panels = [
        ("Final utility", [float(s.mean_utility[-1]) for s in stats_by_policy.values()]),
        ("Total cost", [float(s.mean_cumulative_cost[-1]) for s in stats_by_policy.values()]),
        ("DREI", [float(s.drei_series[-1]) for s in stats_by_policy.values()]),
    ]
    for ax, (title, values) in zip(axes, panels):
        ax.bar(names, values, color=[_color(n) for n in names])
        ax.set_title(title)
        ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_final_state_distribution(stats_by_policy: dict[str, EnsembleStats], path: Path) -> None:
    names = list(stats_by_policy)
    x = np.arange(len(names))
    width = 0.25
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    for k, cls in enumerate(_CLASS_ORDER):
        values = [s.final_class_fractions[cls] * 100.0 for s in stats_by_policy.values()]
        ax.bar(x + (k - 1) * width, values, width, label=cls.value)
    ax.set_xticks(x, names)
    ax.set_ylabel("share of trials (%)")
    ax.set_title("Final operational state distribution")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_timeseries(
    stats_by_policy: dict[str, EnsembleStats], path: Path, crisis_start: int | None = None
) -> None:
    fig, (ax_u, ax_c) = plt.subplots(2, 1, figsize=(6.5, 5.6), sharex=True)
    for name, stats in stats_by_policy.items():
        t = np.arange(stats.horizon + 1)
        ax_u.plot(t, stats.mean_utility, marker="o", ms=3, label=name, color=_color(name))
        ax_c.plot(t, stats.mean_cumulative_cost, marker="o", ms=3, label=name,
                  color=_color(name))
    for ax in (ax_u, ax_c):
        if crisis_start is not None:
            ax.axvline(crisis_start, color="red", ls="--", lw=1, label="crisis onset")
        ax.grid(alpha=0.3)
    ax_u.set_ylabel("mean utility")
    ax_c.set_ylabel("mean cumulative cost")
    ax_c.set_xlabel("timestep")
    ax_u.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_cost_distribution(stats_by_policy: dict[str, EnsembleStats], path: Path) -> None:
    fig, (ax_h, ax_c) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    for name, stats in stats_by_policy.items():
        costs = stats.trial_total_costs
        if costs is None:
            continue
        ax_h.hist(costs, bins=40, alpha=0.5, label=name, color=_color(name))
        xs = np.sort(costs)
        ys = np.arange(1, len(xs) + 1) / len(xs)
        ax_c.step(xs, ys, where="post", label=name, color=_color(name))
    ax_h.set_xlabel("total cost")
    ax_h.set_ylabel("trials")
    ax_h.set_title("Total cost distribution")
    ax_c.set_xlabel("total cost")
    ax_c.set_ylabel("cumulative fraction")
    ax_c.set_title("Total cost CDF")
    for ax in (ax_h, ax_c):
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
