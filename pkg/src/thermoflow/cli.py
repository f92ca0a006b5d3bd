"""Command-line front end: problem ingestion, pipeline orchestration, reports.

Subcommands: compile, run, transient, circuit, validate. All documents are
JSON (problem files, compiled programs, run reports); traces are CSV; netlists
use the circuit module's text grammar. Physical quantities in files are in
natural units (hbar = k_B = 1); only qfactor inputs are SI and namespaced.

Exit codes: 0 success, 2 input validation, 3 solvability/physics constraint,
4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from thermoflow import compiler, dynamics, physics
from thermoflow.circuit import (
    SolvabilityError,
    build_crossbar,
    crossbar_currents,
    export_netlist,
)
from thermoflow.compiler import CompiledProgram, EncodeSettings, GroupSpec
from thermoflow.physics import ConfigError, DeviceConfig, Mode, Reservoir

SCHEMA_VERSION = 1

log = logging.getLogger("thermoflow")

EXIT_VALIDATION = 2
EXIT_SOLVABILITY = 3
EXIT_NUMERICAL = 4


class InputError(ValueError):
    """Problem/compiled document failed schema validation."""


# --- document (de)serialization ----------------------------------------------


def config_to_dict(config: DeviceConfig) -> dict:
    return {
        "modes": [
            {"frequency": m.frequency, "group_id": m.group_id} for m in config.modes
        ],
        "reservoirs": [
            {"temperature": r.temperature, "is_drain": r.is_drain}
            for r in config.reservoirs
        ],
        "couplings": config.couplings.tolist(),
    }


def config_from_dict(doc: dict) -> DeviceConfig:
    try:
        modes = tuple(
            Mode(frequency=float(m["frequency"]), group_id=int(m.get("group_id", 1)))
            for m in doc["modes"]
        )
        reservoirs = tuple(
            Reservoir(
                temperature=float(r["temperature"]),
                is_drain=bool(r.get("is_drain", False)),
            )
            for r in doc["reservoirs"]
        )
        couplings = np.array(doc["couplings"], dtype=float)
    except KeyError as exc:
        raise InputError(f"raw config missing field: {exc.args[0]}") from exc
    return DeviceConfig(modes=modes, reservoirs=reservoirs, couplings=couplings)


def program_to_dict(program: CompiledProgram) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "compiled_program",
        "kind": program.kind,
        "config": config_to_dict(program.config),
        "groups": [
            {
                "group_id": g.group_id,
                "mode_indices": list(g.mode_indices),
                "base_frequency": g.base_frequency,
                "spread": g.spread,
                "max_occupancy_dev": g.max_occupancy_dev,
                "degenerate": g.degenerate,
                "input_occupancies": g.input_occupancies.tolist(),
            }
            for g in program.groups
        ],
        "drain_ratio": program.drain_ratio,
        "row_scales": program.row_scales.tolist(),
        "occupancy_floor": program.occupancy_floor,
        "target_shape": list(program.target_shape),
        "row_dots": program.row_dots.tolist(),
    }


def program_from_dict(doc: dict) -> CompiledProgram:
    try:
        groups = tuple(
            GroupSpec(
                group_id=int(g["group_id"]),
                mode_indices=tuple(int(i) for i in g["mode_indices"]),
                base_frequency=float(g["base_frequency"]),
                spread=float(g["spread"]),
                max_occupancy_dev=float(g["max_occupancy_dev"]),
                degenerate=bool(g["degenerate"]),
                input_occupancies=np.array(g["input_occupancies"], dtype=float),
            )
            for g in doc["groups"]
        )
        return CompiledProgram(
            config=config_from_dict(doc["config"]),
            groups=groups,
            drain_ratio=float(doc["drain_ratio"]),
            row_scales=np.array(doc["row_scales"], dtype=float),
            occupancy_floor=float(doc["occupancy_floor"]),
            target_shape=tuple(doc["target_shape"]),
            row_dots=np.array(doc["row_dots"], dtype=float),
            kind=doc["kind"],
        )
    except KeyError as exc:
        raise InputError(f"compiled program missing field: {exc.args[0]}") from exc


def dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def config_hash(config: DeviceConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


# --- problem files ------------------------------------------------------------

_SETTING_KEYS = {
    "base_frequency",
    "drain_ratio",
    "total_rate",
    "group_tol",
    "occupancy_floor",
}


def _settings_from(doc: dict) -> EncodeSettings:
    overrides = doc.get("settings", {})
    unknown = set(overrides) - _SETTING_KEYS - {"rel_tol"}
    if unknown:
        raise InputError(f"unknown settings: {sorted(unknown)}")
    kwargs = {k: float(v) for k, v in overrides.items() if k in _SETTING_KEYS}
    return EncodeSettings(**kwargs)


def _require(doc: dict, field: str):
    if field not in doc:
        raise InputError(f"problem file missing field: {field!r}")
    return doc[field]


def load_document(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top-level document must be a mapping")
    return doc


def compile_problem(doc: dict):
    """Problem document -> compiled document (dict)."""
    kind = _require(doc, "kind")
    s = _settings_from(doc)
    if kind == "scalar":
        a = np.array(_require(doc, "a"), dtype=float)
        b = np.array(_require(doc, "b"), dtype=float)
        program = compiler.encode_scalar_product(
            a,
            b,
            base_frequency=s.base_frequency,
            drain_ratio=s.drain_ratio,
            total_rate=s.total_rate,
            occupancy_floor=s.occupancy_floor,
        )
        return program_to_dict(program)
    if kind == "matvec":
        p = np.array(_require(doc, "matrix"), dtype=float)
        b = np.array(_require(doc, "vector"), dtype=float)
        program = compiler.encode_matvec(
            p,
            b,
            base_frequency=s.base_frequency,
            group_tol=s.group_tol,
            drain_ratio=s.drain_ratio,
            total_rate=s.total_rate,
            occupancy_floor=s.occupancy_floor,
        )
        return program_to_dict(program)
    if kind == "signed_matvec":
        a = np.array(_require(doc, "matrix"), dtype=float)
        b = np.array(_require(doc, "vector"), dtype=float)
        plus, minus = compiler.signed_split(a)
        parts = {}
        for name, part in (("plus", plus), ("minus", minus)):
            live = ~np.all(part == 0.0, axis=1)
            if live.any():
                program = compiler.encode_matvec(
                    part[live],
                    b,
                    base_frequency=s.base_frequency,
                    group_tol=s.group_tol,
                    drain_ratio=s.drain_ratio,
                    total_rate=s.total_rate,
                    occupancy_floor=s.occupancy_floor,
                )
                parts[name] = {
                    "program": program_to_dict(program),
                    "rows": np.flatnonzero(live).tolist(),
                }
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "compiled_signed",
            "target_shape": list(a.shape),
            "parts": parts,
        }
    if kind == "raw_config":
        config = config_from_dict(doc)
        return {
            "schema_version": SCHEMA_VERSION,
            "type": "raw_config",
            "config": config_to_dict(config),
        }
    raise InputError(f"unknown problem kind: {kind!r}")


def _is_compiled(doc: dict) -> bool:
    return doc.get("type") in ("compiled_program", "compiled_signed", "raw_config")


def _ensure_compiled(doc: dict) -> dict:
    return doc if _is_compiled(doc) else compile_problem(doc)


def _flow_tables(config, flows):
    return {
        "per_channel": flows.per_channel.tolist(),
        "per_reservoir": flows.per_reservoir.tolist(),
    }


def run_compiled(doc: dict, with_oracle: bool, problem_doc: dict | None) -> dict:
    """Execute a compiled document and assemble the run report body."""
    report: dict = {"schema_version": SCHEMA_VERSION, "type": "run_report"}

    if doc["type"] == "raw_config":
        config = config_from_dict(doc["config"])
        flows = physics.stationary_flows(config)
        report.update(
            kind="raw_config",
            flows=_flow_tables(config, flows),
            entropy_rate=flows.entropy_rate,
            settling_time=dynamics.settling_time(
                config, np.zeros(config.n_modes), 1e-6
            ),
            config=config_to_dict(config),
            config_hash=config_hash(config),
        )
        return report

    if doc["type"] == "compiled_program":
        program = program_from_dict(doc)
        flows = physics.stationary_flows(program.config)
        if program.kind == "scalar":
            result = compiler.decode_scalar_product(program, flows)
        else:
            result = compiler.decode_matvec(program, flows)
        report.update(
            kind=program.kind,
            decoded=result.values.tolist(),
            error_bounds=result.error_bound.tolist(),
            flows=_flow_tables(program.config, flows),
            entropy_rate=flows.entropy_rate,
            settling_time=dynamics.settling_time(
                program.config, np.zeros(program.config.n_modes), 1e-6
            ),
            config=config_to_dict(program.config),
            config_hash=config_hash(program.config),
        )
        if with_oracle:
            _attach_oracle(report, problem_doc)
        return report

    if doc["type"] == "compiled_signed":
        m = doc["target_shape"][0]
        values = np.zeros(m)
        bounds = np.zeros(m)
        flow_tables = {}
        entropy = 0.0
        settle = 0.0
        hashes = {}
        for name, sign in (("plus", 1.0), ("minus", -1.0)):
            part = doc["parts"].get(name)
            if part is None:
                continue
            program = program_from_dict(part["program"])
            flows = physics.stationary_flows(program.config)
            result = compiler.decode_matvec(program, flows)
            rows = part["rows"]
            values[rows] += sign * result.values
            bounds[rows] += result.error_bound
            flow_tables[name] = _flow_tables(program.config, flows)
            entropy += flows.entropy_rate
            settle = max(
                settle,
                dynamics.settling_time(
                    program.config, np.zeros(program.config.n_modes), 1e-6
                ),
            )
            hashes[name] = config_hash(program.config)
        report.update(
            kind="signed_matvec",
            decoded=values.tolist(),
            error_bounds=bounds.tolist(),
            flows=flow_tables,
            entropy_rate=entropy,
            settling_time=settle,
            config_hash="+".join(f"{k}:{v}" for k, v in sorted(hashes.items())),
        )
        if with_oracle:
            _attach_oracle(report, problem_doc)
        return report

    raise InputError(f"not a runnable document: {doc.get('type')!r}")


def _attach_oracle(report: dict, problem_doc: dict | None):
    """Direct linear-algebra result computed internally for comparison."""
    if problem_doc is None or "kind" not in problem_doc:
        report["oracle"] = None
        return
    kind = problem_doc["kind"]
    if kind == "scalar":
        oracle = [
            float(
                np.dot(
                    np.array(problem_doc["a"], dtype=float),
                    np.array(problem_doc["b"], dtype=float),
                )
            )
        ]
    elif kind in ("matvec", "signed_matvec"):
        oracle = (
            np.array(problem_doc["matrix"], dtype=float)
            @ np.array(problem_doc["vector"], dtype=float)
        ).tolist()
    else:
        report["oracle"] = None
        return
    report["oracle"] = oracle
    decoded = np.array(report["decoded"])
    report["oracle_max_abs_error"] = float(np.max(np.abs(decoded - np.array(oracle))))


# --- output helpers -----------------------------------------------------------


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands --------------------------------------------------------------


def cmd_compile(args) -> int:
    doc = load_document(args.problem)
    compiled = compile_problem(doc)
    _emit(dump_json(compiled), args.output)
    if compiled["type"] == "compiled_program":
        cfg = compiled["config"]
        spread = max(g["spread"] for g in compiled["groups"])
        print(
            f"compiled: {len(cfg['modes'])} modes, {len(cfg['reservoirs'])} reservoirs,"
            f" drain_ratio={compiled['drain_ratio']}, group spread={spread}",
            file=sys.stderr,
        )
    return 0


def cmd_run(args) -> int:
    doc = load_document(args.problem)
    problem_doc = None if _is_compiled(doc) else doc
    started = time.monotonic()
    report = run_compiled(_ensure_compiled(doc), args.oracle, problem_doc)
    if not args.no_timing:
        report["timing"] = {"seconds": time.monotonic() - started}
    _emit(dump_json(report), args.output)
    return 0


def _compiled_config(doc: dict) -> DeviceConfig:
    doc = _ensure_compiled(doc)
    if doc["type"] == "compiled_program":
        return program_from_dict(doc).config
    if doc["type"] == "raw_config":
        return config_from_dict(doc["config"])
    raise InputError("signed problems have two configs; compile each part separately")


def _parse_sweep(spec: str):
    try:
        lo, hi = spec.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise InputError(f"bad sweep range {spec!r}; expected like 2..64") from exc
    counts = []
    n = lo
    while n <= hi:
        counts.append(n)
        n *= 2
    return counts


def cmd_transient(args) -> int:
    if args.sweep_n:
        lines = ["n,settling_time"]
        times = []
        for n in _parse_sweep(args.sweep_n):
            t = _sweep_settling_time(n, args.rel_tol)
            times.append(t)
            lines.append(f"{n},{t!r}")
        _emit("\n".join(lines) + "\n", args.output)
        spread = (max(times) - min(times)) / max(times)
        print(f"max relative spread: {spread:.3e}", file=sys.stderr)
        return 0

    if args.problem is None:
        raise InputError("transient needs a problem/compiled document or --sweep-n")
    config = _compiled_config(load_document(args.problem))
    if args.t_end is not None and args.t_end <= 0.0:
        raise InputError("t_end must be positive")
    t_end = args.t_end or dynamics.stationary_window(config)
    initial = np.zeros(config.n_modes)
    trace = dynamics.evolve(config, initial, t_end, args.samples, args.rel_tol)
    header = (
        ["time"]
        + [f"occ_mode{k}" for k in range(config.n_modes)]
        + [f"flow_res{j}" for j in range(config.n_reservoirs)]
    )
    rows = [",".join(header)]
    for i, t in enumerate(trace.times):
        cells = [repr(float(t))]
        cells += [repr(float(x)) for x in trace.occupancies[i]]
        cells += [repr(float(x)) for x in trace.flows[i]]
        rows.append(",".join(cells))
    _emit("\n".join(rows) + "\n", args.output)
    settle = dynamics.settling_time(config, initial, args.rel_tol)
    print(f"settling time: {settle!r}", file=sys.stderr)
    return 0


def _sweep_settling_time(n: int, rel_tol: float, drain_ratio: float = 1e-4) -> float:
    """Fixed total rate per mode, weights redistributed over n reservoirs."""
    t_hot = physics.inverse_temperature(1.0, 1.0)
    reservoirs = [Reservoir(temperature=physics.T_FLOOR, is_drain=True)]
    reservoirs += [Reservoir(temperature=t_hot)] * n
    row = np.empty(n + 1)
    row[1:] = (1.0 / (1.0 + drain_ratio)) / n
    row[0] = drain_ratio / (1.0 + drain_ratio)
    config = DeviceConfig(
        modes=(Mode(frequency=1.0),),
        reservoirs=tuple(reservoirs),
        couplings=row[None, :],
    )
    return float(dynamics.settling_time(config, np.zeros(1), rel_tol))


def _parse_policy(spec: str):
    if spec == "max" or spec == "grouped":
        return spec
    if spec.startswith("fixed:"):
        try:
            return ("fixed", float(spec.removeprefix("fixed:")))
        except ValueError as exc:
            raise InputError(f"bad fixed policy value in {spec!r}") from exc
    raise InputError(f"unknown policy {spec!r}; use max, grouped, or fixed:<value>")


def cmd_circuit(args) -> int:
    config = _compiled_config(load_document(args.problem))
    crossbar = build_crossbar(config, policy=_parse_policy(args.policy))
    _emit(export_netlist(crossbar, fmt=args.format), args.output)
    flows = physics.stationary_flows(config)
    recovered = crossbar_currents(crossbar) * config.frequencies[:, None]
    residual = float(np.max(np.abs(recovered - flows.per_channel)))
    print(f"max |I*w - J| residual: {residual:.3e}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    """Randomized self-checks: conservation, form equivalence, circuit analogy."""
    rng = np.random.default_rng(args.seed)
    worst_conservation = 0.0
    worst_form = 0.0
    worst_analogy = 0.0
    for _ in range(args.cases):
        config = _random_config(rng)
        flows = physics.stationary_flows(config)
        pairwise = physics.stationary_flows_pairwise(config)
        scale = np.abs(flows.per_reservoir).sum() or 1.0
        worst_conservation = max(
            worst_conservation, abs(flows.per_reservoir.sum()) / scale
        )
        fscale = np.abs(flows.per_channel).max() or 1.0
        worst_form = max(
            worst_form,
            float(np.max(np.abs(flows.per_channel - pairwise.per_channel))) / fscale,
        )
        crossbar = build_crossbar(config)
        recovered = crossbar_currents(crossbar) * config.frequencies[:, None]
        worst_analogy = max(
            worst_analogy,
            float(np.max(np.abs(recovered - flows.per_channel))) / fscale,
        )
        if flows.entropy_rate < -1e-12 * np.abs(
            flows.per_reservoir / config.temperatures
        ).sum():
            print("FAIL second law", file=sys.stderr)
            return EXIT_NUMERICAL
    print(f"conservation residual: {worst_conservation:.3e}")
    print(f"form equivalence residual: {worst_form:.3e}")
    print(f"circuit analogy residual: {worst_analogy:.3e}")
    ok = max(worst_conservation, worst_form, worst_analogy) < 1e-12
    print("validate: PASS" if ok else "validate: FAIL")
    return 0 if ok else EXIT_NUMERICAL


def _random_config(rng, max_modes: int = 4, max_res: int = 6) -> DeviceConfig:
    k = int(rng.integers(1, max_modes + 1))
    n = int(rng.integers(1, max_res + 1))
    modes = tuple(Mode(frequency=float(rng.uniform(0.5, 3.0))) for _ in range(k))
    reservoirs = [Reservoir(temperature=physics.T_FLOOR, is_drain=True)]
    reservoirs += [
        Reservoir(temperature=float(rng.uniform(0.1, 5.0))) for _ in range(n)
    ]
    couplings = rng.uniform(0.05, 2.0, size=(k, n + 1))
    return DeviceConfig(
        modes=modes, reservoirs=tuple(reservoirs), couplings=couplings
    )


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoflow",
        description="Thermodynamic linear-algebra coprocessor simulator",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="randomized-suite seed")
    common.add_argument(
        "--oracle", action="store_true", help="include direct linear-algebra oracle"
    )
    common.add_argument(
        "--no-timing", action="store_true", help="omit timing metadata from reports"
    )
    common.add_argument("--output", default=None, help="write output to this path")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="problem -> compiled config")
    p.add_argument("problem")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", parents=[common], help="full encode/flows/decode pipeline")
    p.add_argument("problem", help="problem or compiled document")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("transient", parents=[common], help="relaxation trace as CSV")
    p.add_argument("problem", nargs="?", help="problem or compiled document")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument(
        "--sweep-n", default=None, help="settling-time sweep over reservoir counts, e.g. 2..64"
    )
    p.set_defaults(func=cmd_transient)

    p = sub.add_parser("circuit", parents=[common], help="crossbar netlist export")
    p.add_argument("problem", help="problem or compiled document")
    p.add_argument("--policy", default="max", help="max | grouped | fixed:<value>")
    p.add_argument("--format", default="spice")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("validate", parents=[common], help="randomized self-checks")
    p.add_argument("--cases", type=int, default=200)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("THERMOFLOW_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolvabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVABILITY
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
