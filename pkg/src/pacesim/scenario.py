"""Scenario files: schema, loading, validation, and serialization.

A scenario is a JSON document (schema version 1) holding everything one
experiment needs: the state graph, threat scoring inputs used to derive
downward edge probabilities and default costs, environment dynamics, an
optional crisis, policy hyperparameters, and run defaults. Every validation
failure names the file and the field path that caused it.

Default edge weights follow three rules:

* downward edges take their probability from the scenario's threat score
  times ``max_fallback_prob`` unless given explicitly;
* utility-losing or neutral edges cost ``cost_scale`` times the utility
  drop;
* utility-gaining (recovery) edges cost ``recovery_cost_per_layer`` per
  layer climbed (at least one unit for in-layer recovery).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .environment import CrisisSpec, EnvironmentSpec, validate_crisis_against_graph
from .errors import PaceSimError, ScenarioError
from .graph import (
    Layer,
    PaceGraph,
    StateClass,
    StateNode,
    TransitionEdge,
    NOMINAL_STATE_ID,
    build_graph,
    edge_kind,
    EdgeKind,
)
from .policies import PolicyParams
from .threat import (
    RiskMatrixBin,
    ThreatScore,
    ThreatSource,
    base_cost,
    base_transition_probability,
    nasa_lookup,
    normalize_cvss,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully validated experiment description."""

    name: str
    graph: PaceGraph
    environment: EnvironmentSpec
    policy: PolicyParams
    nominal_multiplier: float
    threat: ThreatScore | None
    max_fallback_prob: float | None
    cost_scale: float
    recovery_cost_per_layer: float
    n_trials: int = 5000
    horizon: int = 12
    seed: int = 42
    terminate_on_failure: bool = False


class _Reader:
    """Mapping access that reports schema problems with full field paths."""

    def __init__(self, data: Mapping[str, Any], source: str, path: str = ""):
        if not isinstance(data, Mapping):
            raise ScenarioError(f"{source}: {path or 'document'}: expected an object")
        self._data = data
        self._source = source
        self._path = path

    def _at(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def fail(self, key: str, message: str):
        raise ScenarioError(f"{self._source}: {self._at(key)}: {message}")

    def has(self, key: str) -> bool:
        return key in self._data and self._data[key] is not None

    def child(self, key: str, required: bool = True) -> "_Reader | None":
        if key not in self._data:
            if required:
                self.fail(key, "missing required section")
            return None
        value = self._data[key]
        if value is None and not required:
            return None
        if not isinstance(value, Mapping):
            self.fail(key, "expected an object")
        return _Reader(value, self._source, self._at(key))

    def list_of(self, key: str) -> list[tuple[str, Any]]:
        if key not in self._data:
            self.fail(key, "missing required list")
        value = self._data[key]
        if not isinstance(value, list):
            self.fail(key, "expected a list")
        return [(f"{self._at(key)}[{i}]", item) for i, item in enumerate(value)]

    def number(self, key: str, default=None, minimum=None, maximum=None,
               exclusive_min=None, exclusive_max=None) -> float:
        if key not in self._data or self._data[key] is None:
            if default is None:
                self.fail(key, "missing required number")
            return default
        value = self._data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"expected a number, got {value!r}")
        value = float(value)
        if minimum is not None and value < minimum:
            self.fail(key, f"must be >= {minimum}, got {value}")
        if maximum is not None and value > maximum:
            self.fail(key, f"must be <= {maximum}, got {value}")
        if exclusive_min is not None and value <= exclusive_min:
            self.fail(key, f"must be > {exclusive_min}, got {value}")
        if exclusive_max is not None and value >= exclusive_max:
            self.fail(key, f"must be < {exclusive_max}, got {value}")
        return value

    def integer(self, key: str, default=None, minimum=None) -> int:
        if key not in self._data or self._data[key] is None:
            if default is None:
                self.fail(key, "missing required integer")
            return default
        value = self._data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(key, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(key, f"must be >= {minimum}, got {value}")
        return value

    def string(self, key: str, default=None, choices=None) -> str:
        if key not in self._data or self._data[key] is None:
            if default is None:
                self.fail(key, "missing required string")
            return default
        value = self._data[key]
        if not isinstance(value, str):
            self.fail(key, f"expected a string, got {value!r}")
        if choices is not None and value not in choices:
            self.fail(key, f"must be one of {sorted(choices)}, got {value!r}")
        return value

    def boolean(self, key: str, default=None) -> bool:
        if key not in self._data or self._data[key] is None:
            if default is None:
                self.fail(key, "missing required boolean")
            return default
        value = self._data[key]
        if not isinstance(value, bool):
            self.fail(key, f"expected a boolean, got {value!r}")
        return value


def _parse_threat(reader: _Reader | None, source: str) -> ThreatScore | None:
    if reader is None:
        return None
    kind = reader.string("source", choices={"cvss", "nasa", "direct"})
    try:
        if kind == "cvss":
            return normalize_cvss(reader.number("score"))
        if kind == "nasa":
            return nasa_lookup(
                RiskMatrixBin(reader.integer("likelihood"), reader.integer("severity"))
            )
        return ThreatScore(reader.number("value", minimum=0.0, maximum=1.0))
    except PaceSimError as exc:
        raise ScenarioError(f"{source}: graph.threat: {exc}") from exc


def _parse_states(graph_reader: _Reader, source: str) -> list[StateNode]:
    states = []
    for path, item in graph_reader.list_of("states"):
        reader = _Reader(item, source, path)
        sid = reader.string("id")
        layer_name = reader.string("layer", choices={l.name for l in Layer})
        utility = reader.number("utility", minimum=0.0, maximum=1.0)
        default_class = "nominal" if sid == NOMINAL_STATE_ID else "degraded"
        cls = reader.string(
            "classification",
            default=default_class,
            choices={c.value for c in StateClass},
        )
        states.append(
            StateNode(
                id=sid,
                layer=Layer[layer_name],
                utility=utility,
                classification=StateClass(cls),
            )
        )
    return states


def _parse_edges(
    graph_reader: _Reader,
    source: str,
    states: list[StateNode],
    threat: ThreatScore | None,
    max_fallback_prob: float | None,
    cost_scale: float,
    recovery_cost_per_layer: float,
) -> list[TransitionEdge]:
    by_id = {s.id: s for s in states}
    edges = []
    for path, item in graph_reader.list_of("edges"):
        reader = _Reader(item, source, path)
        src = reader.string("from")
        dst = reader.string("to")
        for endpoint in (src, dst):
            if endpoint not in by_id:
                reader.fail("from" if endpoint == src else "to",
                            f"references unknown state {endpoint!r}")
        kind = edge_kind(by_id[src].layer, by_id[dst].layer)

        if reader.has("p"):
            prob = reader.number("p", minimum=0.0, maximum=1.0)
        elif kind is EdgeKind.DOWNWARD and threat is not None and max_fallback_prob is not None:
            prob = base_transition_probability(threat, max_fallback_prob)
        else:
            reader.fail("p", f"required for {kind.value} edge {src}->{dst} "
                             "(only downward edges default to the threat-derived probability)")

        if reader.has("cost"):
            cost = reader.number("cost", minimum=0.0)
        elif by_id[dst].utility > by_id[src].utility:
            climbed = max(1, by_id[src].layer - by_id[dst].layer)
            cost = recovery_cost_per_layer * climbed
        else:
            cost = base_cost(by_id[src].utility, by_id[dst].utility, cost_scale)

        edges.append(TransitionEdge(src=src, dst=dst, prob=prob, cost=cost))
    return edges


def _parse_crisis(reader: _Reader | None, source: str) -> CrisisSpec | None:
    if reader is None:
        return None
    blocked = []
    if reader.has("blocked_transitions"):
        for path, item in reader.list_of("blocked_transitions"):
            if (not isinstance(item, list) or len(item) != 2
                    or not all(isinstance(x, str) for x in item)):
                raise ScenarioError(f"{source}: {path}: expected a [from, to] pair of state ids")
            blocked.append((item[0], item[1]))
    suppressed = []
    if reader.has("suppressed_states"):
        for path, item in reader.list_of("suppressed_states"):
            if not isinstance(item, str):
                raise ScenarioError(f"{source}: {path}: expected a state id string")
            suppressed.append(item)
    try:
        return CrisisSpec(
            start_t=reader.integer("start_t", minimum=0),
            duration=reader.integer("duration", default=3, minimum=1),
            jamming_level=reader.number("jamming_level", minimum=0.0, maximum=1.0),
            cost_multiplier=reader.number("cost_multiplier", default=1.0, minimum=1.0),
            blocked_transitions=frozenset(blocked),
            suppressed_states=frozenset(suppressed),
        )
    except PaceSimError as exc:
        raise ScenarioError(f"{source}: environment.crisis: {exc}") from exc


def parse_scenario(data: Mapping[str, Any], source: str = "<dict>") -> ScenarioConfig:
    """Validate a scenario document and build the runnable configuration."""
    root = _Reader(data, source)
    version = root.integer("version")
    if version != SCHEMA_VERSION:
        root.fail("version", f"unsupported schema version {version}, expected {SCHEMA_VERSION}")
    name = root.string("name", default="scenario")
    nominal_multiplier = root.number("nominal_multiplier", default=1.2, exclusive_min=1.0)

    graph_reader = root.child("graph")
    threat = _parse_threat(graph_reader.child("threat", required=False), source)
    max_fallback_prob = None
    if graph_reader.has("max_fallback_prob"):
        max_fallback_prob = graph_reader.number(
            "max_fallback_prob", exclusive_min=0.0, exclusive_max=1.0
        )
    cost_scale = graph_reader.number("cost_scale", default=10.0, exclusive_min=0.0)
    recovery_cost_per_layer = graph_reader.number(
        "recovery_cost_per_layer", default=2.0, minimum=0.0
    )

    states = _parse_states(graph_reader, source)
    edges = _parse_edges(
        graph_reader, source, states, threat, max_fallback_prob,
        cost_scale, recovery_cost_per_layer,
    )
    try:
        graph = build_graph(states, edges)
    except PaceSimError as exc:
        raise ScenarioError(f"{source}: graph: {exc}") from exc

    env_reader = root.child("environment")
    crisis = _parse_crisis(env_reader.child("crisis", required=False), source)
    try:
        environment = EnvironmentSpec(
            baseline_jamming=env_reader.number("baseline_jamming", default=0.2,
                                               minimum=0.0, maximum=1.0),
            jamming_noise=env_reader.number("jamming_noise", default=0.1, minimum=0.0),
            energy_drain_per_step=env_reader.number("energy_drain_per_step",
                                                    default=0.02, minimum=0.0),
            energy_cost_coupling=env_reader.number("energy_cost_coupling",
                                                   default=0.005, minimum=0.0),
            concurrency_energy_threshold=env_reader.number("concurrency_energy_threshold",
                                                           default=0.3, minimum=0.0, maximum=1.0),
            crisis=crisis,
        )
    except PaceSimError as exc:
        raise ScenarioError(f"{source}: environment: {exc}") from exc
    if crisis is not None:
        try:
            validate_crisis_against_graph(crisis, graph)
        except PaceSimError as exc:
            raise ScenarioError(f"{source}: environment.crisis: {exc}") from exc

    policy_reader = root.child("policy", required=False)
    if policy_reader is None:
        policy = PolicyParams()
    else:
        try:
            policy = PolicyParams(
                p_stay=policy_reader.number("p_stay", default=0.55, minimum=0.0, maximum=1.0),
                jamming_prob_gain=policy_reader.number("jamming_prob_gain",
                                                       default=0.5, minimum=0.0),
                jamming_cost_gain=policy_reader.number("jamming_cost_gain",
                                                       default=0.25, minimum=0.0),
                concurrency_relief=policy_reader.number("concurrency_relief",
                                                        default=0.1, minimum=0.0),
                epsilon=policy_reader.number("epsilon", default=0.1, minimum=0.0, maximum=1.0),
                adaptive_scale_scope=policy_reader.string("adaptive_scale_scope", default="all",
                                                          choices={"all", "downward"}),
            )
        except PaceSimError as exc:
            raise ScenarioError(f"{source}: policy: {exc}") from exc

    run_reader = root.child("run", required=False)
    if run_reader is None:
        n_trials, horizon, seed, terminate = 5000, 12, 42, False
    else:
        n_trials = run_reader.integer("n_trials", default=5000, minimum=1)
        horizon = run_reader.integer("horizon", default=12, minimum=0)
        seed = run_reader.integer("seed", default=42, minimum=0)
        terminate = run_reader.boolean("terminate_on_failure", default=False)

    return ScenarioConfig(
        name=name,
        graph=graph,
        environment=environment,
        policy=policy,
        nominal_multiplier=nominal_multiplier,
        threat=threat,
        max_fallback_prob=max_fallback_prob,
        cost_scale=cost_scale,
        recovery_cost_per_layer=recovery_cost_per_layer,
        n_trials=n_trials,
        horizon=horizon,
        seed=seed,
        terminate_on_failure=terminate,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario(data, source=str(path))


def serialize_scenario(config: ScenarioConfig) -> dict[str, Any]:
    """Canonical JSON-compatible form; reloading it yields an equal config."""
    threat_block = None
    if config.threat is not None:
        if config.threat.source is ThreatSource.DIRECT:
            threat_block = {"source": "direct", "value": config.threat.value}
        elif config.threat.source is ThreatSource.CVSS:
            threat_block = {"source": "cvss", "score": config.threat.value * 10.0}
        else:
            threat_block = {"source": "direct", "value": config.threat.value}

    crisis = config.environment.crisis
    crisis_block = None
    if crisis is not None:
        crisis_block = {
            "start_t": crisis.start_t,
            "duration": crisis.duration,
            "jamming_level": crisis.jamming_level,
            "cost_multiplier": crisis.cost_multiplier,
            "blocked_transitions": [list(pair) for pair in sorted(crisis.blocked_transitions)],
            "suppressed_states": sorted(crisis.suppressed_states),
        }

    return {
        "version": SCHEMA_VERSION,
        "name": config.name,
        "nominal_multiplier": config.nominal_multiplier,
        "graph": {
            "threat": threat_block,
            "max_fallback_prob": config.max_fallback_prob,
            "cost_scale": config.cost_scale,
            "recovery_cost_per_layer": config.recovery_cost_per_layer,
            "states": [
                {
                    "id": node.id,
                    "layer": node.layer.name,
                    "utility": node.utility,
                    "classification": node.classification.value,
                }
                for node in config.graph.states.values()
            ],
            "edges": [
                {"from": e.src, "to": e.dst, "p": e.prob, "cost": e.cost}
                for e in config.graph.edges
            ],
        },
        "environment": {
            "baseline_jamming": config.environment.baseline_jamming,
            "jamming_noise": config.environment.jamming_noise,
            "energy_drain_per_step": config.environment.energy_drain_per_step,
            "energy_cost_coupling": config.environment.energy_cost_coupling,
            "concurrency_energy_threshold": config.environment.concurrency_energy_threshold,
            "crisis": crisis_block,
        },
        "policy": {
            "p_stay": config.policy.p_stay,
            "jamming_prob_gain": config.policy.jamming_prob_gain,
            "jamming_cost_gain": config.policy.jamming_cost_gain,
            "concurrency_relief": config.policy.concurrency_relief,
            "epsilon": config.policy.epsilon,
            "adaptive_scale_scope": config.policy.adaptive_scale_scope,
        },
        "run": {
            "n_trials": config.n_trials,
            "horizon": config.horizon,
            "seed": config.seed,
            "terminate_on_failure": config.terminate_on_failure,
        },
    }
