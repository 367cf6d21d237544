"""Seeded trial ensembles plus an exact forward-propagation oracle.

Each trial owns a random stream derived from (master seed, trial index), so
results do not depend on execution order or worker count. Aggregation sorts
by trial index, which makes an ensemble a pure function of its run spec.

The oracle covers the configurations whose per-step transition behavior is
exactly computable: the static policy (whose distributions ignore the
environment) via Chapman-Kolmogorov propagation, and the greedy policy with
no exploration (whose walk is a single deterministic path) by direct
evaluation. Both need a noise-free jamming trajectory.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .environment import (
    EnvironmentState,
    effective_transitions,
    initial_environment,
    step_environment,
)
from .errors import ConfigurationError, UnsupportedConfigError
from .graph import NOMINAL_STATE_ID, StateClass, TransitionEdge, normalized_move_distribution
from .metrics import EnsembleStats, TrialTrace, _derive, aggregate
from .policies import (
    STAY,
    Action,
    PolicyKind,
    decide_adaptive,
    decide_greedy,
    decide_static,
)
from .scenario import ScenarioConfig


@dataclass(frozen=True)
class RunSpec:
    """One ensemble: a scenario, a policy, and the trial/seed bookkeeping."""

    scenario: ScenarioConfig
    policy: PolicyKind
    n_trials: int = 5000
    horizon: int = 12
    master_seed: int = 42

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigurationError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.horizon < 0:
            raise ConfigurationError(f"horizon must be >= 0, got {self.horizon}")
        if self.master_seed < 0:
            raise ConfigurationError(f"master_seed must be >= 0, got {self.master_seed}")

    @classmethod
    def from_scenario(cls, scenario: ScenarioConfig, policy: PolicyKind,
                      n_trials=None, horizon=None, master_seed=None) -> "RunSpec":
        return cls(
            scenario=scenario,
            policy=policy,
            n_trials=scenario.n_trials if n_trials is None else n_trials,
            horizon=scenario.horizon if horizon is None else horizon,
            master_seed=scenario.seed if master_seed is None else master_seed,
        )


def _trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    # Entropy-keyed streams: independent per trial, order-independent.
    return np.random.default_rng([master_seed, trial_index])


def _successor_views(scenario: ScenarioConfig) -> dict[bool, dict[str, tuple[TransitionEdge, ...]]]:
    """Outgoing-edge views keyed by crisis activity, computed once per run."""
    graph = scenario.graph
    crisis = scenario.environment.crisis
    probe_off = EnvironmentState(t=0, jamming=0.0, energy=1.0, concurrency=1, crisis_active=False)
    probe_on = EnvironmentState(t=0, jamming=0.0, energy=1.0, concurrency=1, crisis_active=True)
    views = {
        False: {sid: tuple(effective_transitions(graph, sid, probe_off, crisis))
                for sid in graph.states},
        True: {sid: tuple(effective_transitions(graph, sid, probe_on, crisis))
               for sid in graph.states},
    }
    return views


def _run_trial(run: RunSpec, trial_index: int, views, utilities) -> TrialTrace:
    scenario = run.scenario
    params = scenario.policy
    policy = run.policy
    rng = _trial_rng(run.master_seed, trial_index)
    env = initial_environment(scenario.environment, rng)

    state = NOMINAL_STATE_ID
    states = [state]
    actions: list[Action] = []
    costs: list[float] = []
    utils = [utilities[state]]
    last_cost = 0.0
    classes = {sid: node.classification for sid, node in scenario.graph.states.items()}

    for _ in range(run.horizon):
        env = step_environment(env, scenario.environment, last_cost, rng)
        edges = views[env.crisis_active][state]
        if policy is PolicyKind.STATIC:
            action = decide_static(edges, params, rng)
        elif policy is PolicyKind.ADAPTIVE:
            action = decide_adaptive(edges, env, params, rng)
        else:
            action = decide_greedy(edges, env, params, utilities, rng)

        if action.edge is None:
            cost = 0.0
        else:
            state = action.edge.dst
            cost = action.effective_cost
        states.append(state)
        actions.append(action)
        costs.append(cost)
        utils.append(utilities[state])
        last_cost = cost

        if scenario.terminate_on_failure and classes[state] is StateClass.FAILURE:
            remaining = run.horizon - len(actions)
            states.extend([state] * remaining)
            actions.extend([STAY] * remaining)
            costs.extend([0.0] * remaining)
            utils.extend([utilities[state]] * remaining)
            break

    return TrialTrace(
        trial_index=trial_index,
        states=tuple(states),
        actions=tuple(actions),
        step_costs=tuple(costs),
        step_utilities=tuple(utils),
    )


def run_trial(run: RunSpec, trial_index: int) -> TrialTrace:
    """Run a single trial; deterministic in (run spec, trial index)."""
    if trial_index < 0 or trial_index >= run.n_trials:
        raise ConfigurationError(
            f"trial_index must lie in [0, {run.n_trials}), got {trial_index}"
        )
    views = _successor_views(run.scenario)
    return _run_trial(run, trial_index, views, run.scenario.graph.utilities)


def _run_chunk(args) -> list[TrialTrace]:
    run, start, stop = args
    views = _successor_views(run.scenario)
    utilities = run.scenario.graph.utilities
    return [_run_trial(run, i, views, utilities) for i in range(start, stop)]


def run_ensemble(run: RunSpec, workers: int = 1) -> EnsembleStats:
    """Run every trial and aggregate; identical output for any worker count."""
    if workers <= 1:
        traces = _run_chunk((run, 0, run.n_trials))
    else:
        chunk = -(-run.n_trials // workers)
        jobs = [
            (run, start, min(start + chunk, run.n_trials))
            for start in range(0, run.n_trials, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = [trace for batch in pool.map(_run_chunk, jobs) for trace in batch]
    return aggregate(traces, run.scenario.graph, run.scenario.nominal_multiplier)


def _deterministic_jamming(scenario: ScenarioConfig, t: int) -> tuple[float, bool]:
    crisis = scenario.environment.crisis
    if crisis is not None and crisis.active_at(t):
        return crisis.jamming_level, True
    return scenario.environment.baseline_jamming, False


def _oracle_static(run: RunSpec) -> EnsembleStats:
    scenario = run.scenario
    graph = scenario.graph
    state_ids = graph.state_ids
    index_of = {sid: i for i, sid in enumerate(state_ids)}
    views = _successor_views(scenario)
    p_stay = scenario.policy.p_stay

    # Per-view sampling tables: state -> list of (target index or None, prob, cost).
    tables: dict[bool, dict[str, list[tuple[int | None, float, float]]]] = {}
    for active, view in views.items():
        table = {}
        for sid, edges in view.items():
            costs = {e.dst: e.cost for e in edges}
            rows = []
            for target, prob in normalized_move_distribution(edges, p_stay):
                if target is None:
                    rows.append((None, prob, 0.0))
                else:
                    rows.append((index_of[target], prob, costs[target]))
            table[sid] = rows
        tables[active] = table

    horizon = run.horizon
    occupancy = np.zeros((horizon + 1, len(state_ids)))
    occupancy[0, index_of[NOMINAL_STATE_ID]] = 1.0
    expected_cost = np.zeros(horizon + 1)

    for t in range(1, horizon + 1):
        _, active = _deterministic_jamming(scenario, t)
        step_cost = 0.0
        row = np.zeros(len(state_ids))
        for sid, i in index_of.items():
            mass = occupancy[t - 1, i]
            if mass == 0.0:
                continue
            for target, prob, cost in tables[active][sid]:
                if target is None:
                    row[i] += mass * prob
                else:
                    row[target] += mass * prob
                    step_cost += mass * prob * cost
        occupancy[t] = row
        expected_cost[t] = expected_cost[t - 1] + step_cost

    return _exact_stats(run, occupancy, expected_cost)


def _oracle_greedy_exploit(run: RunSpec) -> EnsembleStats:
    scenario = run.scenario
    graph = scenario.graph
    params = scenario.policy
    env_spec = scenario.environment
    state_ids = graph.state_ids
    index_of = {sid: i for i, sid in enumerate(state_ids)}
    utilities = graph.utilities
    views = _successor_views(scenario)

    horizon = run.horizon
    occupancy = np.zeros((horizon + 1, len(state_ids)))
    expected_cost = np.zeros(horizon + 1)

    state = NOMINAL_STATE_ID
    occupancy[0, index_of[state]] = 1.0
    energy = 1.0
    last_cost = 0.0

    for t in range(1, horizon + 1):
        energy -= env_spec.energy_drain_per_step + env_spec.energy_cost_coupling * last_cost
        energy = min(1.0, max(0.0, energy))
        concurrency = 2 if energy > env_spec.concurrency_energy_threshold else 1
        jamming, active = _deterministic_jamming(scenario, t)

        best_dst, best_cost, best_reward = None, 0.0, -np.inf
        for edge in views[active][state]:
            scale = params.jamming_cost_gain * jamming
            c_t = max(0.0, edge.cost + scale - params.concurrency_relief * (concurrency - 1))
            reward = utilities[edge.dst] - c_t
            if reward > best_reward or (reward == best_reward and edge.dst < best_dst):
                best_dst, best_cost, best_reward = edge.dst, c_t, reward

        cost = 0.0
        if best_dst is not None and best_reward >= utilities[state]:
            state = best_dst
            cost = best_cost
        occupancy[t, index_of[state]] = 1.0
        expected_cost[t] = expected_cost[t - 1] + cost
        last_cost = cost

    return _exact_stats(run, occupancy, expected_cost)


def _exact_stats(run: RunSpec, occupancy: np.ndarray, expected_cost: np.ndarray) -> EnsembleStats:
    graph = run.scenario.graph
    state_ids = graph.state_ids
    mean_utility, drei_series, drei_defined = _derive(
        state_ids, occupancy, expected_cost, graph.utilities, run.scenario.nominal_multiplier
    )
    return EnsembleStats(
        state_ids=state_ids,
        state_classes=tuple(graph.state(sid).classification for sid in state_ids),
        occupancy=occupancy,
        mean_utility=mean_utility,
        mean_cumulative_cost=expected_cost,
        drei_series=drei_series,
        drei_defined=drei_defined,
        n_trials=0,
        nominal_multiplier=run.scenario.nominal_multiplier,
        exact=True,
    )


def oracle_exact(run: RunSpec) -> EnsembleStats:
    """Exact occupancy and expected cost for oracle-supported configurations."""
    if run.scenario.environment.jamming_noise != 0.0:
        raise UnsupportedConfigError(
            "oracle requires a deterministic jamming trajectory (jamming_noise = 0), "
            f"got noise {run.scenario.environment.jamming_noise}"
        )
    if run.policy is PolicyKind.STATIC:
        return _oracle_static(run)
    if run.policy is PolicyKind.GREEDY:
        if run.scenario.policy.epsilon != 0.0:
            raise UnsupportedConfigError(
                "oracle supports the greedy policy only without exploration "
                f"(epsilon = 0), got epsilon {run.scenario.policy.epsilon}"
            )
        return _oracle_greedy_exploit(run)
    raise UnsupportedConfigError(
        "oracle supports only the static policy or the greedy policy with epsilon = 0, "
        f"got {run.policy.value}"
    )
