"""Command-line interface and result-file emission.

Subcommands:

* ``run``      one policy on a scenario; writes summary.json, timeseries.csv,
               final_states.csv, cost_distribution.csv, and figures.
* ``compare``  all three policies on one scenario/seed; adds comparison.json
               with bootstrap confidence intervals and metric orderings.
* ``oracle``   exact occupancy/cost for oracle-supported configurations.
* ``validate`` load a scenario and report whether it is well-formed.

Exit codes: 0 success, 1 usage or validation failure, 2 runtime failure.
All numeric outputs are deterministic for identical arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import PaceSimError
from .graph import StateClass
from .metrics import EnsembleStats, bootstrap_metric_cis
from .montecarlo import RunSpec, oracle_exact, run_ensemble
from .policies import PolicyKind
from .scenario import ScenarioConfig, load_scenario, serialize_scenario
from . import plots

LOW_CONFIDENCE_TRIALS = 100
_METRICS = ("utility", "cost", "drei")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this interface reserves 2
    # for runtime failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _policy_from_flag(flag: str) -> PolicyKind:
    return PolicyKind(flag)


def _build_run(scenario: ScenarioConfig, policy: PolicyKind, args) -> RunSpec:
    return RunSpec.from_scenario(
        scenario,
        policy,
        n_trials=args.trials,
        horizon=args.horizon,
        master_seed=args.seed,
    )


def _summary_payload(stats: EnsembleStats, run: RunSpec, scenario: ScenarioConfig) -> dict:
    fractions = {cls.value: stats.final_class_fractions[cls] for cls in StateClass}
    counts = {cls.value: stats.final_counts[cls] for cls in StateClass}
    undefined = [int(t) for t in np.nonzero(~stats.drei_defined)[0]]
    return {
        "schema_version": 1,
        "policy": run.policy.value,
        "n_trials": run.n_trials,
        "horizon": run.horizon,
        "seed": run.master_seed,
        "mean_final_utility": float(stats.mean_utility[-1]),
        "mean_total_cost": float(stats.mean_cumulative_cost[-1]),
        "final_drei": float(stats.drei_series[-1]),
        "final_drei_defined": bool(stats.drei_defined[-1]),
        "drei_undefined_timesteps": undefined,
        "final_state_counts": counts,
        "final_state_fractions": fractions,
        "scenario": serialize_scenario(scenario),
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_timeseries(path: Path, stats: EnsembleStats) -> None:
    header = ["t", "mean_utility", "mean_cumulative_cost", "drei", "drei_defined"]
    header += [f"occupancy_{sid}" for sid in stats.state_ids]
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for t in range(stats.horizon + 1):
            row = [
                t,
                repr(float(stats.mean_utility[t])),
                repr(float(stats.mean_cumulative_cost[t])),
                repr(float(stats.drei_series[t])),
                int(stats.drei_defined[t]),
            ]
            row += [repr(float(x)) for x in stats.occupancy[t]]
            writer.writerow(row)


def _write_final_states(path: Path, stats: EnsembleStats) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["classification", "count", "fraction"])
        counts = stats.final_counts
        for cls in StateClass:
            writer.writerow(
                [cls.value, counts[cls], repr(counts[cls] / stats.n_trials)]
            )


def _write_cost_distribution(path: Path, stats: EnsembleStats) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["trial", "total_cost", "final_utility", "drei", "final_class"])
        for i in range(stats.n_trials):
            writer.writerow(
                [
                    int(stats.trial_indices[i]),
                    repr(float(stats.trial_total_costs[i])),
                    repr(float(stats.trial_final_utilities[i])),
                    repr(float(stats.trial_dreis[i])),
                    stats.trial_final_classes[i].value,
                ]
            )


def _write_run_outputs(out_dir: Path, stats: EnsembleStats, run: RunSpec,
                       scenario: ScenarioConfig, render_plots: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "summary.json", _summary_payload(stats, run, scenario))
    _write_timeseries(out_dir / "timeseries.csv", stats)
    _write_final_states(out_dir / "final_states.csv", stats)
    _write_cost_distribution(out_dir / "cost_distribution.csv", stats)
    if render_plots:
        crisis = scenario.environment.crisis
        start = crisis.start_t if crisis is not None else None
        name = run.policy.value
        plots.plot_timeseries({name: stats}, out_dir / "utility_cost_over_time.png", start)
        plots.plot_cost_distribution({name: stats}, out_dir / "cost_distribution.png")


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    run = _build_run(scenario, _policy_from_flag(args.policy), args)
    stats = run_ensemble(run, workers=args.workers)
    out_dir = Path(args.out)
    _write_run_outputs(out_dir, stats, run, scenario, not args.no_plots)
    print(f"wrote {run.policy.value} results for scenario {scenario.name!r} to {out_dir}")
    return 0


def _ordering(values: dict[str, float], descending: bool) -> list[str]:
    return sorted(values, key=lambda k: (-values[k] if descending else values[k], k))


def _cis_separated(cis: dict[str, tuple[float, float]], order: list[str]) -> bool:
    for better, worse in zip(order, order[1:]):
        lo_b, hi_b = cis[better]
        lo_w, hi_w = cis[worse]
        if min(hi_b, hi_w) >= max(lo_b, lo_w):  # intervals touch or overlap
            return False
    return True


def cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    stats_by_policy: dict[str, EnsembleStats] = {}
    runs: dict[str, RunSpec] = {}
    for policy in (PolicyKind.STATIC, PolicyKind.ADAPTIVE, PolicyKind.GREEDY):
        run = _build_run(scenario, policy, args)
        stats = run_ensemble(run, workers=args.workers)
        stats_by_policy[policy.value] = stats
        runs[policy.value] = run
        _write_run_outputs(out_dir / policy.value, stats, run, scenario, False)

    values = {
        "utility": {n: float(s.mean_utility[-1]) for n, s in stats_by_policy.items()},
        "cost": {n: float(s.mean_cumulative_cost[-1]) for n, s in stats_by_policy.items()},
        "drei": {n: float(s.drei_series[-1]) for n, s in stats_by_policy.items()},
    }
    cis = {
        name: bootstrap_metric_cis(stats, n_boot=args.bootstrap,
                                   seed=runs[name].master_seed)
        for name, stats in stats_by_policy.items()
    }
    orderings = {
        "utility": _ordering(values["utility"], descending=True),
        "cost": _ordering(values["cost"], descending=False),
        "drei": _ordering(values["drei"], descending=True),
    }
    separated = {
        metric: _cis_separated({n: cis[n][metric] for n in stats_by_policy},
                               orderings[metric])
        for metric in _METRICS
    }
    n_trials = next(iter(runs.values())).n_trials
    low_confidence = n_trials < LOW_CONFIDENCE_TRIALS or not all(separated.values())

    payload = {
        "schema_version": 1,
        "scenario": scenario.name,
        "seed": next(iter(runs.values())).master_seed,
        "n_trials": n_trials,
        "horizon": next(iter(runs.values())).horizon,
        "policies": {
            name: {
                "mean_final_utility": values["utility"][name],
                "mean_total_cost": values["cost"][name],
                "final_drei": values["drei"][name],
                "final_state_fractions": {
                    cls.value: stats_by_policy[name].final_class_fractions[cls]
                    for cls in StateClass
                },
                "ci95": {metric: list(cis[name][metric]) for metric in _METRICS},
            }
            for name in stats_by_policy
        },
        "orderings": orderings,
        "ci_separated": separated,
        "low_confidence": low_confidence,
    }
    _write_json(out_dir / "comparison.json", payload)

    if not args.no_plots:
        crisis = scenario.environment.crisis
        start = crisis.start_t if crisis is not None else None
        plots.plot_summary_bars(stats_by_policy, out_dir / "summary_bars.png")
        plots.plot_final_state_distribution(
            stats_by_policy, out_dir / "final_state_distribution.png"
        )
        plots.plot_timeseries(stats_by_policy, out_dir / "utility_cost_over_time.png", start)
        plots.plot_cost_distribution(stats_by_policy, out_dir / "cost_distribution.png")

    print(f"wrote comparison for scenario {scenario.name!r} to {out_dir}")
    return 0


def cmd_oracle(args) -> int:
    scenario = load_scenario(args.scenario)
    run = _build_run(scenario, _policy_from_flag(args.policy), args)
    stats = oracle_exact(run)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema_version": 1,
        "mode": "exact",
        "n_trials": "exact",
        "policy": run.policy.value,
        "horizon": run.horizon,
        "state_ids": list(stats.state_ids),
        "occupancy": [[float(x) for x in row] for row in stats.occupancy],
        "mean_utility": [float(x) for x in stats.mean_utility],
        "mean_cumulative_cost": [float(x) for x in stats.mean_cumulative_cost],
        "drei": [float(x) for x in stats.drei_series],
        "final_state_fractions": {
            cls.value: stats.final_class_fractions[cls] for cls in StateClass
        },
    }
    _write_json(out_dir / "oracle.json", payload)
    print(f"wrote exact oracle results to {out_dir / 'oracle.json'}")
    return 0


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    graph = scenario.graph
    print(
        f"scenario {scenario.name!r} is valid: "
        f"{len(graph.states)} states, {len(graph.edges)} edges, "
        f"horizon {scenario.horizon}, {scenario.n_trials} trials"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pacesim", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_policy: bool, with_out: bool = True):
        p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
        if with_policy:
            p.add_argument("--policy", required=True,
                           choices=[k.value for k in PolicyKind])
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--horizon", type=int, default=None, help="override horizon")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        if with_out:
            p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="process count for trial execution")

    p_run = sub.add_parser("run", help="run one policy and write result files")
    add_common(p_run, with_policy=True)
    p_run.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run all three policies on one scenario")
    add_common(p_cmp, with_policy=False)
    p_cmp.add_argument("--bootstrap", type=int, default=1000,
                       help="bootstrap replicates for confidence intervals")
    p_cmp.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p_cmp.set_defaults(func=cmd_compare)

    p_orc = sub.add_parser("oracle", help="exact forward-propagation results")
    add_common(p_orc, with_policy=True)
    p_orc.set_defaults(func=cmd_oracle)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("--scenario", required=True)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PaceSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
