"""Command-line surface: reproducible JSON/CSV reports for every subsystem.

Every report embeds the resolved run configuration, floats are printed with
at most 12 significant digits, and exact fractions are printed as "p/q", so a
rerun with the same seed and flags is byte-identical.  Failures exit nonzero
with a machine-readable error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import noise, optics, stats, strategies, switch

OUTPUT_DIR_ENV = "QSWITCH_OUTPUT_DIR"

_DEFAULT_SEED = 20250101
_OPTICS_TOLERANCE = 1e-9

# Reference spacetime layout: source at the origin, the two analyzers 9 m and
# 15 m away and 20 m apart, measurements separated by the 22.6 ns switching
# window (light crosses only 6.78 m in that time).
_DEFAULT_EVENTS = (
    {"name": "source_emission", "t": 0.0, "position": [0.0, 0.0, 0.0]},
    {"name": "bob_measurement", "t": 9.8e-08, "position": [9.0, 0.0, 0.0]},
    {
        "name": "charlie_measurement",
        "t": 1.206e-07,
        "position": [-5.222222222222222, 14.061592906272333, 0.0],
    },
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    shots: int = 1_000_000
    seed: int = _DEFAULT_SEED
    visibility: float = 1.0
    dephasing: float = 0.0
    jitter: float = 0.0
    format: str = "json"
    output: str | None = None
    threads: int = 1


def _round12(value: float) -> float:
    return float(format(float(value), ".12g"))


def _jsonable(obj):
    if isinstance(obj, float):
        return _round12(obj)
    if isinstance(obj, (np.floating,)):
        return _round12(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _emit(text: str, config: RunConfig) -> None:
    if config.output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    path = config.output
    base_dir = os.environ.get(OUTPUT_DIR_ENV)
    if base_dir and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as handle:
        handle.write(text)
    sys.stdout.write(path + "\n")


def _report(payload: dict, config: RunConfig) -> None:
    document = {"config": asdict(config)}
    document.update(payload)
    _emit(json.dumps(_jsonable(document), indent=2), config)


def _noise_params(config: RunConfig) -> noise.NoiseParams:
    return noise.NoiseParams(
        visibility=config.visibility,
        control_dephasing=config.dephasing,
        angle_jitter=config.jitter,
    )


def _breakdown_dict(breakdown: switch.VbcBreakdown) -> dict:
    return {
        "term1": breakdown.term1,
        "term2": breakdown.term2,
        "term3": breakdown.term3,
        "total": breakdown.total,
    }


# -- subcommands ---------------------------------------------------------------


def cmd_predict(config: RunConfig) -> int:
    table = noise.noisy_table(_noise_params(config))
    breakdown = switch.vbc_terms(table)
    if config.format == "csv":
        _emit(table.to_csv(), config)
        return 0
    payload = {
        "terms": _breakdown_dict(breakdown),
        "classical_bound": switch.CLASSICAL_BOUND,
        "table": {s.key: [_round12(p) for p in table.row(s)] for s in switch.all_settings()},
    }
    _report(payload, config)
    return 0


def cmd_bound(config: RunConfig, restricted: bool) -> int:
    result = strategies.classical_max(restricted=restricted, threads=config.threads)
    exemplar_index = int(result.optimal_indices[0])
    exemplar = strategies.DeterministicStrategy.decode(exemplar_index)
    c1, c2, c3 = strategies.satisfied_counts(exemplar)
    terms = (Fraction(c1, 8), Fraction(c2, 8), Fraction(c3, 4))
    payload = {
        "restricted": restricted,
        "max": str(result.value),
        "max_float": float(result.value),
        "strategies_scanned": result.strategies_scanned,
        "optimal_count": result.optimal_count,
        "sample_optima": [int(i) for i in result.optimal_indices[:8]],
        "exemplar": {
            "index": exemplar_index,
            "order": exemplar.order,
            "f1": list(exemplar.f1),
            "f2": list(exemplar.f2),
            "h": list(exemplar.h),
            "k": list(exemplar.k),
            "terms": [str(t) for t in terms],
            "total": str(sum(terms)),
        },
    }
    _report(payload, config)
    return 0


def cmd_simulate(config: RunConfig, counts_output: str | None) -> int:
    table = noise.noisy_table(_noise_params(config))
    counts = stats.sample_counts(table, config.shots, config.seed, threads=config.threads)
    estimate = stats.estimate_vbc(counts)
    sigmas = stats.significance(estimate.total, switch.CLASSICAL_BOUND)
    if counts_output:
        with open(counts_output, "w") as handle:
            handle.write(counts.to_csv())
    payload = {
        "n_trials": counts.n_trials,
        "terms": {
            name: {"value": est.value, "std_error": est.std_error}
            for name, est in (
                ("term1", estimate.term1),
                ("term2", estimate.term2),
                ("term3", estimate.term3),
                ("total", estimate.total),
            )
        },
        "classical_bound": switch.CLASSICAL_BOUND,
        "sigmas_above_bound": sigmas,
    }
    _report(payload, config)
    return 0


def cmd_optics_check(config: RunConfig, corrupt_angle: float) -> int:
    states = [("ideal", noise.werner_state(1.0))] + [
        (f"werner_v{v:g}", noise.werner_state(v)) for v in (0.0, 0.5, 1.0)
    ]
    results = []
    overall = 0.0
    for label, state in states:
        per_setting = {}
        worst = 0.0
        for setting in switch.all_settings():
            reference = switch.joint_distribution(state, setting)
            simulated = optics.simulate_network(state, setting, hwp_offset=corrupt_angle)
            deviation = float(np.max(np.abs(simulated - reference)))
            per_setting[setting.key] = deviation
            worst = max(worst, deviation)
        results.append({"state": label, "max_deviation": worst, "per_setting": per_setting})
        overall = max(overall, worst)
    passed = overall < _OPTICS_TOLERANCE
    payload = {
        "tolerance": _OPTICS_TOLERANCE,
        "max_deviation": overall,
        "pass": passed,
        "states": results,
    }
    _report(payload, config)
    return 0 if passed else 1


def cmd_sweep(config: RunConfig, grid_points: int) -> int:
    grid = np.linspace(0.0, 1.0, grid_points)
    rows = noise.sweep_rows(grid, grid, angle_jitter=config.jitter)
    lines = ["v,gamma,sigma_theta,term1,term2,term3,total"]
    for row in rows:
        lines.append(
            ",".join(
                format(row[key], ".12g")
                for key in ("v", "gamma", "sigma_theta", "term1", "term2", "term3", "total")
            )
        )
    _emit("\n".join(lines) + "\n", config)
    return 0


def cmd_spacetime(config: RunConfig, events_path: str | None) -> int:
    if events_path is None:
        raw = list(_DEFAULT_EVENTS)
    else:
        with open(events_path) as handle:
            raw = json.load(handle)
    events = [
        stats.SpacetimeEvent(e["t"], tuple(e["position"]), e.get("name", f"event_{i}"))
        for i, e in enumerate(raw)
    ]
    pairs = []
    for i in range(len(events)):
        for j in range(i + 1, len(events)):
            a, b = events[i], events[j]
            distance = float(np.linalg.norm(np.subtract(a.position, b.position)))
            light = stats.SPEED_OF_LIGHT * abs(a.t - b.t)
            pairs.append(
                {
                    "pair": [a.name, b.name],
                    "distance_m": distance,
                    "light_travel_m": light,
                    "spacelike": stats.is_spacelike(a, b),
                }
            )
    payload = {
        "speed_of_light_m_per_s": stats.SPEED_OF_LIGHT,
        "events": [{"name": e.name, "t": e.t, "position": list(e.position)} for e in events],
        "pairs": pairs,
    }
    _report(payload, config)
    return 0


# -- argument parsing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qswitch",
        description="Entangled-control quantum switch: predictions, classical bound, "
        "optics validation, counting statistics, and spacetime checks.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(sub, noise_flags=True):
        sub.add_argument("--format", choices=("json", "csv"), default="json")
        sub.add_argument("--output", default=None, help=f"write to file (relative to ${OUTPUT_DIR_ENV} if set)")
        sub.add_argument("--threads", type=int, default=1)
        sub.add_argument("--seed", type=int, default=_DEFAULT_SEED)
        sub.add_argument("--shots", type=int, default=1_000_000)
        if noise_flags:
            sub.add_argument("--visibility", type=float, default=1.0)
            sub.add_argument("--dephasing", type=float, default=0.0)
            sub.add_argument("--jitter", type=float, default=0.0)

    predict = subparsers.add_parser("predict", help="exact terms, total, and the full 256-entry table")
    add_common(predict)

    bound = subparsers.add_parser("bound", help="exhaustive classical maximum over 2^21 strategies")
    add_common(bound, noise_flags=False)
    bound.add_argument("--restricted", action="store_true", help="restrict to constant b and a blind second instrument")

    simulate = subparsers.add_parser("simulate", help="sample shots, estimate terms, report significance")
    add_common(simulate)
    simulate.add_argument("--counts-output", default=None, help="also write the raw counts CSV here")

    check = subparsers.add_parser("optics-check", help="compare the interferometer against the abstract switch")
    add_common(check, noise_flags=False)
    check.add_argument("--corrupt-angle", type=float, default=0.0, help=argparse.SUPPRESS)

    sweep = subparsers.add_parser("sweep", help="noise-grid CSV including threshold-visibility rows")
    add_common(sweep)
    sweep.add_argument("--grid-points", type=int, default=21)

    spacetime = subparsers.add_parser("spacetime", help="pairwise spacelike/timelike classification of events")
    add_common(spacetime, noise_flags=False)
    spacetime.add_argument("--events", default=None, help="JSON file of {name, t, position} events")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        shots=getattr(args, "shots", 0),
        seed=getattr(args, "seed", _DEFAULT_SEED),
        visibility=getattr(args, "visibility", 1.0),
        dephasing=getattr(args, "dephasing", 0.0),
        jitter=getattr(args, "jitter", 0.0),
        format=getattr(args, "format", "json"),
        output=getattr(args, "output", None),
        threads=getattr(args, "threads", 1),
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    try:
        if args.command == "predict":
            return cmd_predict(config)
        if args.command == "bound":
            return cmd_bound(config, args.restricted)
        if args.command == "simulate":
            return cmd_simulate(config, args.counts_output)
        if args.command == "optics-check":
            return cmd_optics_check(config, args.corrupt_angle)
        if args.command == "sweep":
            return cmd_sweep(config, args.grid_points)
        if args.command == "spacetime":
            return cmd_spacetime(config, args.events)
        raise ValueError(f"unknown command {args.command}")
    except (ValueError, OSError) as error:
        sys.stderr.write(
            json.dumps({"error": {"type": type(error).__name__, "message": str(error)}}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
