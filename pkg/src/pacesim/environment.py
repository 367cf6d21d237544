"""Per-timestep environmental context and scheduled crisis effects.

Each step updates jamming intensity, drains the energy reserve (a fixed
amount plus a share of the previous step's transition cost), and derives the
recovery concurrency from the remaining energy. A crisis window overrides
jamming, removes blocked or suppressed transitions from the per-step view of
the graph, and scales the surviving edge costs. The graph itself is never
mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .graph import NOMINAL_STATE_ID, Layer, PaceGraph, TransitionEdge


@dataclass(frozen=True)
class CrisisSpec:
    start_t: int
    duration: int
    jamming_level: float
    cost_multiplier: float = 1.0
    blocked_transitions: frozenset[tuple[str, str]] = frozenset()
    suppressed_states: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.duration < 1:
            raise ValidationError(f"crisis duration must be >= 1, got {self.duration}")
        if not 0.0 <= self.jamming_level <= 1.0:
            raise ValidationError(
                f"crisis jamming_level must lie in [0, 1], got {self.jamming_level}"
            )
        if self.cost_multiplier < 1.0:
            raise ValidationError(
                f"crisis cost_multiplier must be >= 1, got {self.cost_multiplier}"
            )

    def active_at(self, t: int) -> bool:
        return self.start_t <= t < self.start_t + self.duration


@dataclass(frozen=True)
class EnvironmentSpec:
    baseline_jamming: float = 0.2
    jamming_noise: float = 0.1
    energy_drain_per_step: float = 0.02
    energy_cost_coupling: float = 0.005
    concurrency_energy_threshold: float = 0.3
    crisis: CrisisSpec | None = None

    def __post_init__(self):
        if not 0.0 <= self.baseline_jamming <= 1.0:
            raise ValidationError(
                f"baseline_jamming must lie in [0, 1], got {self.baseline_jamming}"
            )
        for name in ("jamming_noise", "energy_drain_per_step", "energy_cost_coupling"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be nonnegative, got {getattr(self, name)}")
        if not 0.0 <= self.concurrency_energy_threshold <= 1.0:
            raise ValidationError(
                "concurrency_energy_threshold must lie in [0, 1], "
                f"got {self.concurrency_energy_threshold}"
            )


@dataclass(frozen=True)
class EnvironmentState:
    t: int
    jamming: float
    energy: float
    concurrency: int
    crisis_active: bool


def _jamming_at(spec: EnvironmentSpec, t: int, rng: np.random.Generator) -> tuple[float, bool]:
    if spec.crisis is not None and spec.crisis.active_at(t):
        return spec.crisis.jamming_level, True
    jamming = spec.baseline_jamming
    if spec.jamming_noise > 0.0:
        jamming += rng.uniform(-spec.jamming_noise, spec.jamming_noise)
    return min(1.0, max(0.0, jamming)), False


def _concurrency(spec: EnvironmentSpec, energy: float) -> int:
    return 2 if energy > spec.concurrency_energy_threshold else 1


def initial_environment(spec: EnvironmentSpec, rng: np.random.Generator) -> EnvironmentState:
    """Environment at t = 0 with a full energy reserve."""
    jamming, active = _jamming_at(spec, 0, rng)
    return EnvironmentState(
        t=0,
        jamming=jamming,
        energy=1.0,
        concurrency=_concurrency(spec, 1.0),
        crisis_active=active,
    )


def step_environment(
    env: EnvironmentState,
    spec: EnvironmentSpec,
    last_step_cost: float,
    rng: np.random.Generator,
) -> EnvironmentState:
    """Advance the environment one timestep.

    Energy loses the fixed drain plus ``energy_cost_coupling`` times the cost
    charged in the previous step, clamped to [0, 1]. With zero jamming noise
    the result is a pure function of the inputs.
    """
    if last_step_cost < 0.0:
        raise ValidationError(f"last_step_cost must be nonnegative, got {last_step_cost}")
    t = env.t + 1
    energy = env.energy - spec.energy_drain_per_step - spec.energy_cost_coupling * last_step_cost
    energy = min(1.0, max(0.0, energy))
    jamming, active = _jamming_at(spec, t, rng)
    return EnvironmentState(
        t=t,
        jamming=jamming,
        energy=energy,
        concurrency=_concurrency(spec, energy),
        crisis_active=active,
    )


def effective_transitions(
    graph: PaceGraph,
    state_id: str,
    env: EnvironmentState,
    crisis: CrisisSpec | None,
) -> list[TransitionEdge]:
    """Per-step view of a state's outgoing edges.

    Outside a crisis this is exactly ``graph.successors``. During one,
    blocked pairs and edges into suppressed states disappear and the
    surviving costs are scaled by the crisis multiplier. May return an empty
    list, which callers treat as a forced stay.
    """
    edges = graph.successors(state_id)
    if crisis is None or not env.crisis_active:
        return list(edges)
    out = []
    for edge in edges:
        if (edge.src, edge.dst) in crisis.blocked_transitions:
            continue
        if edge.dst in crisis.suppressed_states:
            continue
        out.append(replace(edge, cost=edge.cost * crisis.cost_multiplier))
    return out


def validate_crisis_against_graph(crisis: CrisisSpec, graph: PaceGraph) -> None:
    """Reject crisis specs that reference unknown states or strand a layer.

    Suppressing the nominal state, or every cross-layer escape target of any
    layer, would make recovery structurally impossible rather than merely
    expensive, so both are validation errors.
    """
    for sid in sorted(crisis.suppressed_states):
        if sid not in graph.states:
            raise ValidationError(f"crisis suppresses unknown state {sid!r}")
    for src, dst in sorted(crisis.blocked_transitions):
        for sid in (src, dst):
            if sid not in graph.states:
                raise ValidationError(
                    f"crisis blocks transition {src}->{dst} with unknown state {sid!r}"
                )
    if NOMINAL_STATE_ID in crisis.suppressed_states:
        raise ValidationError(f"crisis must not suppress {NOMINAL_STATE_ID!r}")

    for layer in Layer:
        escape_targets = {
            e.dst
            for e in graph.edges
            if graph.states[e.src].layer is layer and graph.states[e.dst].layer is not layer
        }
        if escape_targets and escape_targets <= crisis.suppressed_states:
            raise ValidationError(
                f"crisis suppresses every escape target of layer {layer.name}: "
                f"{sorted(escape_targets)}"
            )
