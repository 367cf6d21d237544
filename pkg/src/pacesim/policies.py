"""The three fallback decision rules sharing one contract.

* static: ignores the environment entirely; stays with probability
  ``p_stay`` and otherwise samples the base transition distribution.
* adaptive: scales move probabilities up with jamming and adjusts costs for
  jamming and recovery concurrency, staying only in the residual mass.
* greedy: one-step reward maximization (target utility minus adapted cost)
  with epsilon-uniform exploration over the valid successors.

All rules are stateless; per-trial state lives in the caller. Every rule
returns a stay action when offered no edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .environment import EnvironmentState
from .errors import ConfigurationError
from .graph import EdgeKind, TransitionEdge, normalized_move_distribution


class PolicyKind(Enum):
    STATIC = "static"
    ADAPTIVE = "adaptive"
    GREEDY = "greedy"


_SCALE_SCOPES = ("all", "downward")


@dataclass(frozen=True)
class PolicyParams:
    """Hyperparameters shared by the decision rules.

    ``jamming_prob_gain`` multiplies move probabilities by (1 + gain * J),
    ``jamming_cost_gain`` adds gain * J to every move cost, and
    ``concurrency_relief`` discounts costs per extra concurrent recovery
    slot. ``adaptive_scale_scope`` selects whether jamming scales every
    edge's probability or only downward ones.
    """

    p_stay: float = 0.55
    jamming_prob_gain: float = 0.5
    jamming_cost_gain: float = 0.25
    concurrency_relief: float = 0.1
    epsilon: float = 0.1
    adaptive_scale_scope: str = "all"

    def __post_init__(self):
        for name in ("p_stay", "epsilon"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {value}")
        for name in ("jamming_prob_gain", "jamming_cost_gain", "concurrency_relief"):
            value = getattr(self, name)
            if value < 0.0:
                raise ConfigurationError(f"{name} must be nonnegative, got {value}")
        if self.adaptive_scale_scope not in _SCALE_SCOPES:
            raise ConfigurationError(
                f"adaptive_scale_scope must be one of {_SCALE_SCOPES}, "
                f"got {self.adaptive_scale_scope!r}"
            )


@dataclass(frozen=True)
class Action:
    """Either a stay (edge is None) or a move carrying the cost charged."""

    edge: TransitionEdge | None
    effective_cost: float = 0.0

    @property
    def is_stay(self) -> bool:
        return self.edge is None


STAY = Action(edge=None, effective_cost=0.0)


def adapt_edge(
    edge: TransitionEdge, env: EnvironmentState, params: PolicyParams
) -> tuple[float, float]:
    """Environment-adjusted (probability, cost) for one edge.

    The returned probability is not yet clipped to [0, 1]; the cost is
    already clipped at zero so no move can pay the system.
    """
    scale_prob = params.adaptive_scale_scope == "all" or edge.kind is EdgeKind.DOWNWARD
    p_t = edge.prob * (1.0 + params.jamming_prob_gain * env.jamming) if scale_prob else edge.prob
    c_t = edge.cost + params.jamming_cost_gain * env.jamming
    c_t -= params.concurrency_relief * (env.concurrency - 1)
    return p_t, max(0.0, c_t)


def _sample(entries: Sequence[tuple[object, float]], rng: np.random.Generator):
    """Draw from a list of (outcome, probability) pairs summing to one."""
    u = rng.random()
    acc = 0.0
    for outcome, prob in entries:
        acc += prob
        if u < acc:
            return outcome
    return entries[-1][0]


def decide_static(
    edges: Sequence[TransitionEdge], params: PolicyParams, rng: np.random.Generator
) -> Action:
    """Sample the fixed stay/move distribution over the offered edges."""
    if not edges:
        return STAY
    by_target = {e.dst: e for e in edges}
    target = _sample(normalized_move_distribution(edges, params.p_stay), rng)
    if target is None:
        return STAY
    edge = by_target[target]
    return Action(edge=edge, effective_cost=edge.cost)


def decide_adaptive(
    edges: Sequence[TransitionEdge],
    env: EnvironmentState,
    params: PolicyParams,
    rng: np.random.Generator,
) -> Action:
    """Sample the jamming-scaled distribution; stay in the residual mass.

    Scaled probabilities are clipped to [0, 1]; if they sum past one the
    whole move mass is renormalized and the stay probability drops to zero.
    """
    if not edges:
        return STAY
    adapted = [(e, adapt_edge(e, env, params)) for e in edges]
    probs = [min(1.0, max(0.0, p_t)) for _, (p_t, _) in adapted]
    mass = sum(probs)
    if mass > 1.0:
        probs = [p / mass for p in probs]
        stay_mass = 0.0
    else:
        stay_mass = 1.0 - mass
    entries: list[tuple[int | None, float]] = [(None, stay_mass)]
    entries += [(i, p) for i, p in enumerate(probs)]
    choice = _sample(entries, rng)
    if choice is None:
        return STAY
    edge, (_, c_t) = adapted[choice]
    return Action(edge=edge, effective_cost=c_t)


def decide_greedy(
    edges: Sequence[TransitionEdge],
    env: EnvironmentState,
    params: PolicyParams,
    utilities: Mapping[str, float],
    rng: np.random.Generator,
) -> Action:
    """Explore uniformly with probability epsilon, otherwise exploit.

    Exploitation compares each edge's reward (target utility minus adapted
    cost) against the reward of staying, which is the current state's
    utility at zero cost; ties between edges break toward the
    lexicographically smallest target, and a tie with staying moves.
    """
    if not edges:
        return STAY
    adapted = [(e, adapt_edge(e, env, params)[1]) for e in edges]

    if rng.random() < params.epsilon:
        edge, c_t = adapted[int(rng.integers(len(adapted)))]
        return Action(edge=edge, effective_cost=c_t)

    best_edge: TransitionEdge | None = None
    best_cost = 0.0
    best_reward = -np.inf
    for edge, c_t in adapted:
        reward = utilities[edge.dst] - c_t
        if reward > best_reward or (reward == best_reward and edge.dst < best_edge.dst):
            best_edge, best_cost, best_reward = edge, c_t, reward

    stay_reward = utilities[edges[0].src]
    if best_reward < stay_reward:
        return STAY
    return Action(edge=best_edge, effective_cost=best_cost)
