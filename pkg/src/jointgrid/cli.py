"""Command-line interface: synthesis, cascade runs, estimation, pipelines.

Subcommands:

    synth     build the communication overlay and write rule files
    validate  check a grid file and its synthesized network
    cascade   run failure scenarios and emit traces plus availability masks
    estimate  Monte-Carlo estimation errors under an availability mask
    run       full pipeline for a scenario file (synth -> cascade -> compare)

Every output is deterministic for fixed inputs: JSON is sorted, no
timestamps are embedded, and all randomness is seed-driven.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from jointgrid import cascade as cascade_mod
from jointgrid import estimation
from jointgrid.cascade import (
    AvailabilityMask,
    CascadeTrace,
    FailureScenario,
    data_availability,
    footprint_diff,
    run_cascade,
)
from jointgrid.entities import EntityError, parse_entity_id
from jointgrid.grid import Grid, GridError, load_grid
from jointgrid.idr import IIM, MIIM, format_idr_file
from jointgrid.network import JointNetwork, validate as validate_network
from jointgrid.synthesis import SynthesisError, build_joint_network

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2

SCENARIO_VERSION = 1


class ScenarioFileError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jointgrid",
        description="Joint power/communication dependency modeling and estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize the joint network and rule files")
    synth.add_argument("--grid", required=True, help="grid JSON file")
    synth.add_argument("--out-dir", required=True, help="output directory")

    validate = sub.add_parser("validate", help="validate a grid and its network")
    validate.add_argument("--grid", required=True, help="grid JSON file")

    casc = sub.add_parser("cascade", help="run a failure scenario to its fixpoint")
    casc.add_argument("--scenario", required=True, help="scenario JSON file")
    casc.add_argument("--model", choices=[MIIM, IIM, "both"], default=None)
    casc.add_argument("--case", type=int, choices=[1, 2], default=None)
    casc.add_argument("--out-dir", required=True)

    est = sub.add_parser("estimate", help="Monte-Carlo estimation under a mask")
    est.add_argument("--mask", required=True, help="availability JSON file")
    est.add_argument("--grid", default=None, help="grid JSON (defaults to mask's grid)")
    est.add_argument("--seeds", type=int, default=100)
    est.add_argument("--seed-base", type=int, default=0)
    est.add_argument("--true-state", default=None)
    est.add_argument("--out", required=True, help="errors CSV path")

    run = sub.add_parser("run", help="full pipeline for a scenario file")
    run.add_argument("--scenario", required=True)
    run.add_argument("--out-dir", required=True)

    return parser


# --- serialization helpers ---------------------------------------------------


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _trace_payload(trace: CascadeTrace, model: str, case: int, label: str) -> dict:
    return {
        "label": label,
        "model": model,
        "case": case,
        "converged_at": trace.converged_at,
        "steps": [
            {str(entity): value for entity, value in step.items()}
            for step in trace.changed
        ],
        "final": {str(entity): value for entity, value in trace.final_state().items()},
    }


def _trace_tsv(trace: CascadeTrace) -> str:
    lines = ["step\tentity\tvalue"]
    for step_number, changes in enumerate(trace.changed, start=1):
        for entity in sorted(changes):
            lines.append(f"{step_number}\t{entity}\t{changes[entity]}")
    return "\n".join(lines) + "\n"


def _mask_payload(mask: AvailabilityMask, grid_path: str, model: str, case: int) -> dict:
    return {
        "grid": grid_path,
        "model": model,
        "case": case,
        "scada": {str(bus): ok for bus, ok in sorted(mask.scada.items())},
        "pmu": {str(bus): ok for bus, ok in sorted(mask.pmu.items())},
        "pmu_equipped": sorted(mask.pmu_equipped),
    }


def _mask_from_payload(payload: dict) -> AvailabilityMask:
    return AvailabilityMask(
        scada={int(bus): bool(ok) for bus, ok in payload["scada"].items()},
        pmu={int(bus): bool(ok) for bus, ok in payload["pmu"].items()},
        pmu_equipped=frozenset(int(b) for b in payload.get("pmu_equipped", [])),
    )


def network_payload(network: JointNetwork) -> dict:
    """Joint-network fixture: registry, placements, and rule files as text."""
    return {
        "substations": [
            {
                "id": sub.id,
                "buses": sub.buses,
                "has_pmu": sub.has_pmu,
                "role": sub.role,
            }
            for sub in network.substations
        ],
        "control_centers": list(network.control_centers),
        "sadm_ring": {
            "hosts": network.sadm_ring.hosts,
            "edges": [list(edge) for edge in network.sadm_ring.edges],
        },
        "oadm_ring": {
            "hosts": network.oadm_ring.hosts,
            "edges": [list(edge) for edge in network.oadm_ring.edges],
        },
        "sadm_homing": {str(sub): node for sub, node in sorted(network.sadm_homing.items())},
        "oadm_homing": {str(sub): node for sub, node in sorted(network.oadm_homing.items())},
        "rtus": {str(sub): ids for sub, ids in sorted(network.rtus.items())},
        "pmus": {str(sub): ids for sub, ids in sorted(network.pmus.items()) if ids},
        "registry": {
            str(entity): {
                "substation": meta.substation,
                "endpoints": list(meta.endpoints) if meta.endpoints else None,
            }
            for entity, meta in sorted(network.registry.items())
        },
        "rules": {
            f"{model}_case{case}": rule_file_text(network, model, case)
            for (model, case) in sorted(network.rule_sets)
        },
    }


def rule_file_text(network: JointNetwork, model: str, case: int) -> str:
    rule_set = network.rule_set(model, case)
    ordered = list(rule_set.rules)
    for sub_id in sorted(rule_set.availability):
        avail = rule_set.availability[sub_id]
        ordered.append(avail.scada)
        if avail.pmu:
            ordered.append(avail.pmu)
    header = [
        f"dependency rules: model={model} case={case}",
        "GS(s)/GP(s) entries are data-path expressions evaluated at a fixpoint",
    ]
    return format_idr_file(ordered, header=header)


# --- scenario files -----------------------------------------------------------


def load_scenario(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"{path}: not valid JSON: {exc}") from exc
    if data.get("version") != SCENARIO_VERSION:
        raise ScenarioFileError(f"{path}: unknown schema version {data.get('version')!r}")
    if "grid" not in data:
        raise ScenarioFileError(f"{path}: missing grid path")
    grid_path = (path.parent / data["grid"]).resolve()
    if not grid_path.exists():
        raise ScenarioFileError(f"{path}: grid file not found: {grid_path}")
    data["_grid_path"] = grid_path
    data.setdefault("label", path.stem)
    data.setdefault("model", "both")
    data.setdefault("case", 1)
    if data["model"] not in (MIIM, IIM, "both"):
        raise ScenarioFileError(f"{path}: bad model {data['model']!r}")
    if data["case"] not in (1, 2):
        raise ScenarioFileError(f"{path}: bad case {data['case']!r}")
    killed = []
    for text in data.get("killed", []):
        try:
            killed.append(parse_entity_id(text))
        except EntityError as exc:
            raise ScenarioFileError(f"{path}: bad killed entity {text!r}: {exc}") from exc
    data["_killed"] = killed
    est = data.get("estimation") or {}
    if est:
        if not isinstance(est.get("seeds"), int) or est["seeds"] < 1:
            raise ScenarioFileError(f"{path}: estimation.seeds must be a positive integer")
        if est.get("true_state"):
            ts_path = (path.parent / est["true_state"]).resolve()
            if not ts_path.exists():
                raise ScenarioFileError(f"{path}: true-state file not found: {ts_path}")
            est["_true_state_path"] = ts_path
    return data


def load_true_state(path, grid: Grid) -> estimation.StateVector:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    buses = data.get("buses", {})
    missing = [b for b in grid.bus_ids if str(b) not in buses]
    if missing:
        raise ScenarioFileError(f"true-state file misses buses {missing}")
    voltages = [complex(buses[str(b)][0], buses[str(b)][1]) for b in grid.bus_ids]
    return estimation.StateVector.from_complex(grid.bus_ids, voltages)


# --- command implementations ----------------------------------------------------


def _build_validated(grid_path) -> Tuple[Grid, JointNetwork, List[str]]:
    grid = load_grid(grid_path)
    network = build_joint_network(grid)
    return grid, network, validate_network(network)


def _cmd_synth(args) -> int:
    grid, network, problems = _build_validated(args.grid)
    if problems:
        for problem in problems:
            print(f"violation: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "network.json", network_payload(network))
    for model, case in sorted(network.rule_sets):
        text = rule_file_text(network, model, case)
        (out / f"rules_{model}_case{case}.idr").write_text(text, encoding="utf-8")
    print(f"wrote network.json and 4 rule files to {out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    grid, network, problems = _build_validated(args.grid)
    if problems:
        for problem in problems:
            print(f"violation: {problem}")
        return EXIT_VALIDATION
    print(
        f"ok: {len(grid.buses)} buses, {len(grid.branches)} branches, "
        f"{len(network.substations)} substations, {len(network.registry)} entities"
    )
    return EXIT_OK


def _models_cases(scenario: dict, args) -> List[Tuple[str, int]]:
    model = args.model if getattr(args, "model", None) else scenario["model"]
    case = args.case if getattr(args, "case", None) else scenario["case"]
    models = [MIIM, IIM] if model == "both" else [model]
    return [(m, case) for m in models]


def _cmd_cascade(args) -> int:
    scenario = load_scenario(args.scenario)
    grid, network, problems = _build_validated(scenario["_grid_path"])
    if problems:
        for problem in problems:
            print(f"violation: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failure = FailureScenario.of(scenario["_killed"], scenario["label"])
    for model, case in _models_cases(scenario, args):
        rule_set = network.rule_set(model, case)
        trace = run_cascade(network, rule_set, failure)
        mask = data_availability(trace.final_state(), network, rule_set)
        stem = f"{model}_case{case}"
        (out / f"trace_{stem}.tsv").write_text(_trace_tsv(trace), encoding="utf-8")
        _write_json(out / f"trace_{stem}.json", _trace_payload(trace, model, case, scenario["label"]))
        _write_json(
            out / f"availability_{stem}.json",
            _mask_payload(mask, str(scenario["_grid_path"]), model, case),
        )
        print(f"{stem}: fixpoint at T{trace.converged_at}, scada lost at {sorted(mask.scada_lost())}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    payload = json.loads(Path(args.mask).read_text(encoding="utf-8"))
    grid_path = args.grid or (Path(args.mask).parent / payload["grid"])
    grid = load_grid(grid_path)
    mask = _mask_from_payload(payload)
    if args.true_state:
        true_state = load_true_state(args.true_state, grid)
    else:
        true_state = estimation.default_true_state(grid)
    label = payload.get("model", "mask")
    seeds = [args.seed_base + i for i in range(args.seeds)]
    result = estimation.compare_models(grid, {label: mask}, true_state, seeds)
    estimation.write_errors_csv(result, args.out)
    print(f"wrote {args.out} ({args.seeds} seeds, model={label})")
    return EXIT_OK


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    grid, network, problems = _build_validated(scenario["_grid_path"])
    if problems:
        for problem in problems:
            print(f"violation: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    _write_json(out / "network.json", network_payload(network))
    for model, case in sorted(network.rule_sets):
        (out / f"rules_{model}_case{case}.idr").write_text(
            rule_file_text(network, model, case), encoding="utf-8"
        )

    failure = FailureScenario.of(scenario["_killed"], scenario["label"])
    case = scenario["case"]
    masks: Dict[str, AvailabilityMask] = {}
    report: dict = {
        "label": scenario["label"],
        "grid": str(scenario["grid"]),
        "case": case,
        "killed": sorted(str(e) for e in failure.killed),
        "models": {},
    }
    models = [MIIM, IIM] if scenario["model"] == "both" else [scenario["model"]]
    for model in models:
        rule_set = network.rule_set(model, case)
        trace = run_cascade(network, rule_set, failure)
        mask = data_availability(trace.final_state(), network, rule_set)
        masks[model] = mask
        stem = f"{model}_case{case}"
        (out / f"trace_{stem}.tsv").write_text(_trace_tsv(trace), encoding="utf-8")
        _write_json(out / f"trace_{stem}.json", _trace_payload(trace, model, case, scenario["label"]))
        _write_json(
            out / f"availability_{stem}.json",
            _mask_payload(mask, str(scenario["_grid_path"]), model, case),
        )
        report["models"][model] = {
            "converged_at": trace.converged_at,
            "scada_lost": sorted(mask.scada_lost()),
            "pmu_lost": sorted(mask.pmu_lost()),
        }

    if len(masks) == 2:
        diff = footprint_diff(masks[MIIM], masks[IIM])
        diff_payload = {
            "scada_lost_only_miim": sorted(diff.scada_only_a),
            "scada_lost_only_iim": sorted(diff.scada_only_b),
            "pmu_lost_only_miim": sorted(diff.pmu_only_a),
            "pmu_lost_only_iim": sorted(diff.pmu_only_b),
        }
        _write_json(out / "footprint_diff.json", diff_payload)
        report["footprint_diff"] = diff_payload

    est_cfg = scenario.get("estimation") or {}
    if est_cfg and len(masks) >= 1:
        seeds = [est_cfg.get("seed_base", 0) + i for i in range(est_cfg["seeds"])]
        if est_cfg.get("_true_state_path"):
            true_state = load_true_state(est_cfg["_true_state_path"], grid)
        else:
            true_state = estimation.default_true_state(grid)
        result = estimation.compare_models(grid, masks, true_state, seeds)
        estimation.write_errors_csv(result, out / "errors.csv")
        report["estimation"] = {
            "seeds": est_cfg["seeds"],
            "errors_csv": "errors.csv",
            "mean_abs_error": {
                model: float(result.errors[model].mean()) for model in result.models
            },
            "anchored": {model: sorted(result.anchored[model]) for model in result.models},
        }

    _write_json(out / "report.json", report)
    print(f"report written to {out / 'report.json'}")
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "validate": _cmd_validate,
    "cascade": _cmd_cascade,
    "estimate": _cmd_estimate,
    "run": _cmd_run,
}

_VALIDATION_ERRORS = (
    GridError,
    SynthesisError,
    ScenarioFileError,
    cascade_mod.ScenarioError,
    EntityError,
)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
