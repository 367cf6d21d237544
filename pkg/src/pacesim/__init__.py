"""Monte Carlo simulator for layered PACE fallback policies.

Models a system as a four-layer state graph (Primary, Alternate,
Contingency, Emergency) walked under jamming-style disruptions by three
decision rules, and scores each rule by utility, cost, and the dynamic
redundancy efficiency index (DREI).
"""

from .environment import (
    CrisisSpec,
    EnvironmentSpec,
    EnvironmentState,
    effective_transitions,
    initial_environment,
    step_environment,
)
from .errors import (
    ConfigurationError,
    PaceSimError,
    ScenarioError,
    UnsupportedConfigError,
    ValidationError,
)
from .graph import (
    NOMINAL_STATE_ID,
    EdgeKind,
    Layer,
    PaceGraph,
    StateClass,
    StateNode,
    TransitionEdge,
    build_graph,
    normalized_move_distribution,
)
from .metrics import (
    COST_FLOOR,
    EnsembleStats,
    TrialTrace,
    adjusted_utility,
    aggregate,
    bootstrap_metric_cis,
    classify_final,
    drei_at,
    merge,
)
from .montecarlo import RunSpec, oracle_exact, run_ensemble, run_trial
from .policies import (
    Action,
    PolicyKind,
    PolicyParams,
    STAY,
    adapt_edge,
    decide_adaptive,
    decide_greedy,
    decide_static,
)
from .scenario import ScenarioConfig, load_scenario, parse_scenario, serialize_scenario
from .threat import (
    RiskMatrixBin,
    ThreatScore,
    ThreatSource,
    base_cost,
    base_transition_probability,
    nasa_lookup,
    normalize_cvss,
)

__version__ = "0.1.0"
