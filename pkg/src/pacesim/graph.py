"""Directed multi-layer state graph with per-state utilities and weighted edges.

States live in one of four layers ordered by descending operational
viability (P, A, C, E). Edges between states carry a base probability and a
base cost; their kind (horizontal, downward, upward) follows from the layer
ordering. Staying put is not an edge: it is modeled by the stay probability
of whichever policy drives the walk.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Iterable, Sequence

from .errors import ConfigurationError, ValidationError

#: Reserved id of the fully operational state every run starts from.
NOMINAL_STATE_ID = "P_Nominal"


class Layer(IntEnum):
    """Operating layers, ordered best to worst."""

    P = 0
    A = 1
    C = 2
    E = 3


class StateClass(Enum):
    NOMINAL = "nominal"
    DEGRADED = "degraded"
    FAILURE = "failure"


class EdgeKind(Enum):
    HORIZONTAL = "horizontal"
    DOWNWARD = "downward"
    UPWARD = "upward"


@dataclass(frozen=True)
class StateNode:
    id: str
    layer: Layer
    utility: float
    classification: StateClass = StateClass.DEGRADED

    def __post_init__(self):
        if not self.id:
            raise ValidationError("state id must be a non-empty string")
        if not 0.0 <= self.utility <= 1.0:
            raise ValidationError(
                f"state {self.id!r}: utility must lie in [0, 1], got {self.utility}"
            )


@dataclass(frozen=True)
class TransitionEdge:
    src: str
    dst: str
    prob: float
    cost: float
    kind: EdgeKind | None = None

    def __post_init__(self):
        if not 0.0 <= self.prob <= 1.0:
            raise ValidationError(
                f"edge {self.src}->{self.dst}: probability must lie in [0, 1], got {self.prob}"
            )
        if self.cost < 0.0:
            raise ValidationError(
                f"edge {self.src}->{self.dst}: cost must be nonnegative, got {self.cost}"
            )


def edge_kind(from_layer: Layer, to_layer: Layer) -> EdgeKind:
    if to_layer == from_layer:
        return EdgeKind.HORIZONTAL
    return EdgeKind.DOWNWARD if to_layer > from_layer else EdgeKind.UPWARD


@dataclass(frozen=True, eq=False)
class PaceGraph:
    """Validated, immutable state graph. Build via :func:`build_graph`."""

    states: dict[str, StateNode]
    edges: tuple[TransitionEdge, ...]
    _successors: dict[str, tuple[TransitionEdge, ...]] = field(repr=False)

    def state(self, state_id: str) -> StateNode:
        try:
            return self.states[state_id]
        except KeyError:
            raise KeyError(f"unknown state id {state_id!r}") from None

    def successors(self, state_id: str) -> tuple[TransitionEdge, ...]:
        """Outgoing edges of a state, sorted by target id."""
        if state_id not in self.states:
            raise KeyError(f"unknown state id {state_id!r}")
        return self._successors.get(state_id, ())

    @property
    def state_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.states))

    @property
    def utilities(self) -> dict[str, float]:
        return {sid: node.utility for sid, node in self.states.items()}

    def __eq__(self, other):
        if not isinstance(other, PaceGraph):
            return NotImplemented
        return self.states == other.states and set(self.edges) == set(other.edges)


def build_graph(states: Iterable[StateNode], transitions: Iterable[TransitionEdge]) -> PaceGraph:
    """Assemble and validate a graph; edge kinds are recomputed from layers."""
    state_map: dict[str, StateNode] = {}
    for node in states:
        if node.id in state_map:
            raise ValidationError(f"duplicate state id {node.id!r}")
        state_map[node.id] = node

    if NOMINAL_STATE_ID not in state_map:
        raise ValidationError(f"graph must contain the {NOMINAL_STATE_ID!r} state")
    nominal = state_map[NOMINAL_STATE_ID]
    if nominal.classification is not StateClass.NOMINAL:
        raise ValidationError(
            f"{NOMINAL_STATE_ID!r} must be classified as nominal, got {nominal.classification.value}"
        )
    max_utility = max(node.utility for node in state_map.values())
    if nominal.utility < max_utility:
        raise ValidationError(
            f"{NOMINAL_STATE_ID!r} must carry the maximal utility in the graph "
            f"({nominal.utility} < {max_utility})"
        )

    failures = [n for n in state_map.values() if n.classification is StateClass.FAILURE]
    if not failures:
        raise ValidationError("graph must contain at least one failure-classified state")
    for node in failures:
        if node.layer is not Layer.E:
            raise ValidationError(
                f"failure state {node.id!r} must lie in layer E, got layer {node.layer.name}"
            )

    resolved: list[TransitionEdge] = []
    seen_pairs: set[tuple[str, str]] = set()
    for edge in transitions:
        for endpoint in (edge.src, edge.dst):
            if endpoint not in state_map:
                raise ValidationError(
                    f"edge {edge.src}->{edge.dst} references unknown state {endpoint!r}"
                )
        if edge.src == edge.dst:
            raise ValidationError(f"self-loop on {edge.src!r} is not allowed")
        pair = (edge.src, edge.dst)
        if pair in seen_pairs:
            raise ValidationError(f"duplicate edge {edge.src}->{edge.dst}")
        seen_pairs.add(pair)
        kind = edge_kind(state_map[edge.src].layer, state_map[edge.dst].layer)
        resolved.append(replace(edge, kind=kind))

    successors: dict[str, tuple[TransitionEdge, ...]] = {}
    for sid in state_map:
        outgoing = sorted((e for e in resolved if e.src == sid), key=lambda e: e.dst)
        successors[sid] = tuple(outgoing)

    return PaceGraph(states=state_map, edges=tuple(resolved), _successors=successors)


def normalized_move_distribution(
    edges: Sequence[TransitionEdge], p_stay: float
) -> list[tuple[str | None, float]]:
    """Distribution over staying put (``None``) and each edge target.

    The stay entry gets exactly ``p_stay``; the remaining mass is split
    across targets in proportion to their base probabilities, or uniformly
    when every base probability is zero. With no edges the walker must stay.
    """
    if not 0.0 <= p_stay <= 1.0:
        raise ConfigurationError(f"p_stay must lie in [0, 1], got {p_stay}")
    if not edges:
        return [(None, 1.0)]
    sources = {e.src for e in edges}
    if len(sources) != 1:
        raise ValidationError(f"edges must share a source state, got {sorted(sources)}")

    move_mass = 1.0 - p_stay
    total = sum(e.prob for e in edges)
    if total > 0.0:
        entries = [(e.dst, move_mass * e.prob / total) for e in edges]
    else:
        entries = [(e.dst, move_mass / len(edges)) for e in edges]
    return [(None, p_stay)] + entries
