"""Trial traces, ensemble aggregation, and the redundancy-efficiency index.

The index (DREI) divides the occupancy-weighted adjusted utility at a
timestep by the cumulative transition cost accrued so far. Returning to the
nominal state after the start of a run is rewarded with a multiplier on that
state's utility.

Aggregation keeps per-trial arrays sorted by trial index, so merging
aggregates of any partition of a trial set reproduces the full aggregate
bit for bit and permuting trial order changes nothing.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, ValidationError
from .graph import NOMINAL_STATE_ID, PaceGraph, StateClass
from .policies import Action

#: Guard against division by zero before any cost has accrued.
COST_FLOOR = 1e-9


@dataclass(frozen=True)
class TrialTrace:
    """One realized walk: T+1 states, T actions with their costs."""

    trial_index: int
    states: tuple[str, ...]
    actions: tuple[Action, ...]
    step_costs: tuple[float, ...]
    step_utilities: tuple[float, ...]

    def __post_init__(self):
        horizon = len(self.actions)
        if len(self.states) != horizon + 1 or len(self.step_utilities) != horizon + 1:
            raise ValidationError(
                f"trial {self.trial_index}: expected {horizon + 1} states/utilities "
                f"for {horizon} actions"
            )
        if len(self.step_costs) != horizon:
            raise ValidationError(
                f"trial {self.trial_index}: expected {horizon} step costs, "
                f"got {len(self.step_costs)}"
            )

    @property
    def horizon(self) -> int:
        return len(self.actions)

    @property
    def total_cost(self) -> float:
        return float(sum(self.step_costs))


def adjusted_utility(
    state_id: str, t: int, nominal_multiplier: float, utilities: Mapping[str, float]
) -> float:
    """State utility, amplified for the nominal state once the run has begun."""
    if nominal_multiplier <= 1.0:
        raise ConfigurationError(
            f"nominal_multiplier must exceed 1, got {nominal_multiplier}"
        )
    if state_id not in utilities:
        raise KeyError(f"unknown state id {state_id!r}")
    utility = utilities[state_id]
    if state_id == NOMINAL_STATE_ID and t > 0:
        return utility * nominal_multiplier
    return utility


def drei_at(
    occupancy_t: Mapping[str, float],
    cumulative_cost_t: float,
    t: int,
    nominal_multiplier: float,
    utilities: Mapping[str, float],
) -> float:
    """Occupancy-weighted adjusted utility per unit of accumulated cost."""
    numerator = sum(
        prob * adjusted_utility(sid, t, nominal_multiplier, utilities)
        for sid, prob in occupancy_t.items()
    )
    return numerator / max(cumulative_cost_t, COST_FLOOR)


def classify_final(trace: TrialTrace, graph: PaceGraph) -> StateClass:
    return graph.state(trace.states[-1]).classification


def _adjusted_utility_matrix(
    state_ids: Sequence[str],
    utilities: Mapping[str, float],
    horizon: int,
    nominal_multiplier: float,
) -> np.ndarray:
    base = np.array([utilities[sid] for sid in state_ids], dtype=float)
    matrix = np.tile(base, (horizon + 1, 1))
    if horizon >= 1 and NOMINAL_STATE_ID in state_ids:
        matrix[1:, list(state_ids).index(NOMINAL_STATE_ID)] *= nominal_multiplier
    return matrix


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Aggregated distributions over a trial ensemble (or an exact model).

    Monte Carlo aggregates retain per-trial arrays (in trial-index order);
    exact-propagation results carry probabilities instead and leave the
    per-trial fields as None.
    """

    state_ids: tuple[str, ...]
    state_classes: tuple[StateClass, ...]
    occupancy: np.ndarray  # (T+1, n_states) row-stochastic
    mean_utility: np.ndarray  # (T+1,) adjusted
    mean_cumulative_cost: np.ndarray  # (T+1,)
    drei_series: np.ndarray  # (T+1,)
    drei_defined: np.ndarray  # (T+1,) bool, False where no cost has accrued
    n_trials: int
    nominal_multiplier: float
    exact: bool = False
    trial_indices: np.ndarray | None = None
    trial_total_costs: np.ndarray | None = None
    trial_cumulative_costs: np.ndarray | None = None  # (n, T+1)
    trial_final_utilities: np.ndarray | None = None
    trial_dreis: np.ndarray | None = None
    trial_final_classes: tuple[StateClass, ...] | None = None

    @property
    def horizon(self) -> int:
        return self.occupancy.shape[0] - 1

    @property
    def final_class_fractions(self) -> dict[StateClass, float]:
        """Probability mass of each classification at the final timestep."""
        final_row = self.occupancy[-1]
        fractions = {cls: 0.0 for cls in StateClass}
        for weight, cls in zip(final_row, self.state_classes):
            fractions[cls] += float(weight)
        return fractions

    @property
    def final_counts(self) -> dict[StateClass, int]:
        if self.trial_final_classes is None:
            raise ValidationError("final counts require per-trial data")
        counts = Counter(self.trial_final_classes)
        return {cls: counts.get(cls, 0) for cls in StateClass}


def _derive(
    state_ids: tuple[str, ...],
    occupancy: np.ndarray,
    mean_cumulative_cost: np.ndarray,
    utilities: Mapping[str, float],
    nominal_multiplier: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    horizon = occupancy.shape[0] - 1
    weights = _adjusted_utility_matrix(state_ids, utilities, horizon, nominal_multiplier)
    mean_utility = (occupancy * weights).sum(axis=1)
    drei_series = mean_utility / np.maximum(mean_cumulative_cost, COST_FLOOR)
    drei_defined = mean_cumulative_cost > 0.0
    return mean_utility, drei_series, drei_defined


def aggregate(
    traces: Sequence[TrialTrace], graph: PaceGraph, nominal_multiplier: float
) -> EnsembleStats:
    """Aggregate equal-horizon traces into ensemble statistics."""
    if not traces:
        raise ValidationError("cannot aggregate an empty list of traces")
    horizon = traces[0].horizon
    for trace in traces:
        if trace.horizon != horizon:
            raise ValidationError(
                f"mismatched horizons: trial {trace.trial_index} has {trace.horizon}, "
                f"expected {horizon}"
            )

    ordered = sorted(traces, key=lambda tr: tr.trial_index)
    n = len(ordered)
    state_ids = graph.state_ids
    index_of = {sid: i for i, sid in enumerate(state_ids)}
    utilities = graph.utilities

    counts = np.zeros((horizon + 1, len(state_ids)), dtype=np.int64)
    cumcosts = np.zeros((n, horizon + 1), dtype=float)
    final_states = np.zeros(n, dtype=np.int64)
    for row, trace in enumerate(ordered):
        for t, sid in enumerate(trace.states):
            counts[t, index_of[sid]] += 1
        cumcosts[row, 1:] = np.cumsum(trace.step_costs)
        final_states[row] = index_of[trace.states[-1]]

    occupancy = counts / n
    mean_cumulative_cost = cumcosts.mean(axis=0)
    mean_utility, drei_series, drei_defined = _derive(
        state_ids, occupancy, mean_cumulative_cost, utilities, nominal_multiplier
    )

    weights = _adjusted_utility_matrix(state_ids, utilities, horizon, nominal_multiplier)
    trial_final_utilities = weights[horizon, final_states]
    trial_total_costs = cumcosts[:, -1]
    trial_dreis = trial_final_utilities / np.maximum(trial_total_costs, COST_FLOOR)
    state_classes = tuple(graph.state(sid).classification for sid in state_ids)
    trial_final_classes = tuple(state_classes[i] for i in final_states)

    return EnsembleStats(
        state_ids=state_ids,
        state_classes=state_classes,
        occupancy=occupancy,
        mean_utility=mean_utility,
        mean_cumulative_cost=mean_cumulative_cost,
        drei_series=drei_series,
        drei_defined=drei_defined,
        n_trials=n,
        nominal_multiplier=nominal_multiplier,
        trial_indices=np.array([tr.trial_index for tr in ordered], dtype=np.int64),
        trial_total_costs=trial_total_costs,
        trial_cumulative_costs=cumcosts,
        trial_final_utilities=trial_final_utilities,
        trial_dreis=trial_dreis,
        trial_final_classes=trial_final_classes,
    )


def merge(parts: Sequence[EnsembleStats], utilities: Mapping[str, float]) -> EnsembleStats:
    """Merge aggregates of disjoint trial batches into one aggregate.

    Per-trial arrays are concatenated and re-sorted by trial index, so the
    result is identical to aggregating all traces at once regardless of how
    the batches were split.
    """
    if not parts:
        raise ValidationError("cannot merge an empty list of aggregates")
    first = parts[0]
    for part in parts:
        if part.exact or part.trial_indices is None:
            raise ValidationError("only Monte Carlo aggregates can be merged")
        if part.state_ids != first.state_ids or part.horizon != first.horizon:
            raise ValidationError("aggregates to merge must share states and horizon")
        if part.nominal_multiplier != first.nominal_multiplier:
            raise ValidationError("aggregates to merge must share the nominal multiplier")

    indices = np.concatenate([p.trial_indices for p in parts])
    order = np.argsort(indices, kind="stable")
    cumcosts = np.concatenate([p.trial_cumulative_costs for p in parts])[order]
    final_utilities = np.concatenate([p.trial_final_utilities for p in parts])[order]
    total_costs = np.concatenate([p.trial_total_costs for p in parts])[order]
    dreis = np.concatenate([p.trial_dreis for p in parts])[order]
    all_classes = [cls for p in parts for cls in p.trial_final_classes]
    final_classes = tuple(all_classes[i] for i in order)

    counts = sum(np.round(p.occupancy * p.n_trials).astype(np.int64) for p in parts)
    n = int(sum(p.n_trials for p in parts))
    occupancy = counts / n
    mean_cumulative_cost = cumcosts.mean(axis=0)
    mean_utility, drei_series, drei_defined = _derive(
        first.state_ids, occupancy, mean_cumulative_cost, utilities, first.nominal_multiplier
    )

    return EnsembleStats(
        state_ids=first.state_ids,
        state_classes=first.state_classes,
        occupancy=occupancy,
        mean_utility=mean_utility,
        mean_cumulative_cost=mean_cumulative_cost,
        drei_series=drei_series,
        drei_defined=drei_defined,
        n_trials=n,
        nominal_multiplier=first.nominal_multiplier,
        trial_indices=indices[order],
        trial_total_costs=total_costs,
        trial_cumulative_costs=cumcosts,
        trial_final_utilities=final_utilities,
        trial_dreis=dreis,
        trial_final_classes=final_classes,
    )


def bootstrap_metric_cis(
    stats: EnsembleStats, n_boot: int = 1000, seed: int = 0
) -> dict[str, tuple[float, float]]:
    """95% bootstrap confidence intervals for the three headline metrics.

    Trials are resampled jointly; the DREI replicate is the ratio of the
    resampled utility and cost means, matching the reporting path.
    """
    if stats.trial_final_utilities is None:
        raise ValidationError("bootstrap requires per-trial data")
    rng = np.random.default_rng([seed, 0xB0075])
    n = stats.n_trials
    idx = rng.integers(0, n, size=(n_boot, n))
    utilities = stats.trial_final_utilities[idx].mean(axis=1)
    costs = stats.trial_total_costs[idx].mean(axis=1)
    dreis = utilities / np.maximum(costs, COST_FLOOR)
    out = {}
    for name, values in (("utility", utilities), ("cost", costs), ("drei", dreis)):
        lo, hi = np.percentile(values, [2.5, 97.5])
        out[name] = (float(lo), float(hi))
    return out
