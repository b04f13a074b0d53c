"""Batch entry points: simulate-and-verify, graph checking, and the
diagnostic battery on return panels.

One flat configuration namespace drives everything.  Each knob has exactly
one config key and one CLI flag; values resolve as CLI flag over config file
over built-in default.  Paths inside a config file are relative to the file,
paths on the command line are relative to the working directory.  All
outputs are UTF-8 with fixed formatting, so identical config plus seed gives
byte-identical files regardless of worker count.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd

from . import analytics, data_io, diagnostics, serialize, synthetic
from .errors import CausalBetaError, DataError, ValidationError
from .graphs import AggregatorSpec, check_aggregator_contradiction, classify_dag, necessary_conditions_checklist
from .regression import SeKind
from .scm import (
    LinearSem,
    NodeRef,
    load_sem_json,
    population_ols_slope,
    sem_from_dict,
    simulate,
    validate_dag,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_TOLERANCE = 3

SIM_COMMANDS = ("simulate", "replicate-fig3")
ALL_COMMANDS = ("simulate", "check-dag", "diagnose", "replicate-fig3")


@dataclass(frozen=True)
class Knob:
    """One documented configuration key and its CLI flag."""

    key: str
    kind: str  # int | float | str | bool | path | json
    default: object
    help: str
    commands: tuple[str, ...]
    choices: tuple[str, ...] | None = None

    @property
    def flag(self) -> str:
        return "--" + self.key.replace("_", "-")


KNOBS: tuple[Knob, ...] = (
    Knob("out", "path", None, "output directory", ALL_COMMANDS),
    Knob("overwrite", "bool", False, "replace existing output files", ALL_COMMANDS),
    Knob("seed", "int", None, "RNG seed (required for stochastic commands)", SIM_COMMANDS),
    Knob("workers", "int", 1, "worker threads for simulation (never changes results)", SIM_COMMANDS),
    Knob("n_draws", "int", 100_000, "Monte Carlo draws per grid point", SIM_COMMANDS),
    Knob("preset", "str", None, "built-in structure to simulate", ("simulate",), ("fork", "chain")),
    Knob("sem", "path", None, "custom SEM definition JSON (instead of a preset)", ("simulate",)),
    Knob("sem_x", "str", "X", "regressor node for a custom SEM", ("simulate",)),
    Knob("sem_y", "str", "Y", "response node for a custom SEM", ("simulate",)),
    Knob("grid_start", "float", 0.0, "first observation-noise level on the sweep", SIM_COMMANDS),
    Knob("grid_stop", "float", 5.0, "last observation-noise level on the sweep", SIM_COMMANDS),
    Knob("grid_points", "int", 21, "number of grid points on the sweep", SIM_COMMANDS),
    Knob("tolerance", "float", 0.02, "max |estimate - closed form| for success", SIM_COMMANDS),
    Knob("emit_panel", "bool", False, "also write a synthetic diagnostic bundle", ("simulate",)),
    Knob("param_a", "float", 1.0, "driver-to-regressor coefficient", SIM_COMMANDS),
    Knob("param_b", "float", 1.0, "driver-to-response coefficient (fork)", SIM_COMMANDS),
    Knob("param_c", "float", 1.0, "regressor-to-response coefficient (chain)", SIM_COMMANDS),
    Knob("sigma_z", "float", 1.0, "driver shock scale", SIM_COMMANDS),
    Knob("sigma_y", "float", 1.0, "response shock scale", SIM_COMMANDS),
    Knob("dag", "path", None, "graph hypothesis JSON to check", ("check-dag",)),
    Knob("beta", "float", 1.0, "hypothesized same-period slope for the aggregator check", ("check-dag",)),
    Knob("mechanism_declared", "bool", True, "caller asserts an economic mechanism exists", ("check-dag",)),
    Knob("intervention_wellposed", "bool", True, "caller asserts the implied intervention is well-posed", ("check-dag",)),
    Knob("allow_same_period", "bool", False, "let same-period edges pass temporal priority (with warning)", ("check-dag",)),
    Knob("returns_csv", "path", None, "wide CSV of dated returns (or prices)", ("diagnose",)),
    Knob("market_id", "str", None, "column holding the market series", ("diagnose",)),
    Knob("input_mode", "str", "from_returns", "whether returns_csv holds returns or prices", ("diagnose",), ("from_returns", "from_prices")),
    Knob("macro_csv", "path", None, "wide CSV of macro driver levels", ("diagnose",)),
    Knob("sector_map_csv", "path", None, "asset,sector CSV", ("diagnose",)),
    Knob("sector_returns_csv", "path", None, "wide CSV of sector factor returns", ("diagnose",)),
    Knob("events_csv", "path", None, "CSV of shock dates", ("diagnose",)),
    Knob("weights_csv", "path", None, "asset,weight CSV for the index aggregate", ("diagnose",)),
    Knob("target_asset", "str", None, "asset whose beta is under study", ("diagnose",)),
    Knob(
        "scheme",
        "str",
        None,
        "environment labeling scheme",
        ("diagnose",),
        tuple(s.value for s in data_io.LabelScheme),
    ),
    Knob("episodes", "json", None, "episode definitions (config file only)", ("diagnose",)),
    Knob("lookback", "int", 60, "trailing rows for trend labeling", ("diagnose",)),
    Knob("base_label", "str", "Base", "label for dates outside any episode", ("diagnose",)),
    Knob("standardize", "bool", False, "standardize controls at load time", ("diagnose",)),
    Knob("window", "int", 250, "pre-event hedge estimation window (rows)", ("diagnose",)),
    Knob("gap_days", "int", 5, "rows between hedge window end and the event", ("diagnose",)),
    Knob("max_lag", "int", 5, "deepest lag in the lead-lag profiles", ("diagnose",)),
    Knob("min_event_dates", "int", 10, "fewest usable shock dates for attenuation", ("diagnose",)),
    Knob("min_env_rows", "int", 30, "fewest rows per non-base environment", ("diagnose",)),
    Knob("base_env", "str", None, "reference environment (default: most common)", ("diagnose",)),
    Knob(
        "se_kind",
        "str",
        SeKind.CLUSTER_BY_DATE.value,
        "standard error flavor for the battery",
        ("diagnose",),
        tuple(k.value for k in SeKind),
    ),
    Knob("renormalize_loo", "bool", False, "rescale leave-one-out weights to sum to one", ("diagnose",)),
    Knob("significance_multiple", "float", 4.0, "SE multiple treated as decisive", ("diagnose",)),
    Knob("fork_attenuation_ratio", "float", 0.5, "slope ratio below which attenuation counts", ("diagnose",)),
)


@dataclass(frozen=True)
class RunConfig:
    """Fully-resolved knobs for one command invocation."""

    command: str
    values: Mapping[str, object]

    def __getitem__(self, key: str):
        return self.values[key]

    def require(self, key: str):
        value = self.values.get(key)
        if value is None:
            raise ValidationError("missing_config", f"{self.command} requires {key!r} (flag --{key.replace('_', '-')})")
        return value


def _knobs_for(command: str) -> dict[str, Knob]:
    return {k.key: k for k in KNOBS if command in k.commands}


def _coerce(knob: Knob, value, origin: str):
    if value is None:
        return None
    kind = knob.kind
    if kind == "bool":
        if isinstance(value, bool):
            return value
    elif kind == "int":
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif kind == "float":
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif kind in ("str", "path"):
        if isinstance(value, str):
            if knob.choices and value not in knob.choices:
                raise ValidationError(
                    "bad_config_value", f"{origin}: {knob.key} must be one of {list(knob.choices)}"
                )
            return value
    elif kind == "json":
        if isinstance(value, (list, dict)):
            return value
    raise ValidationError("bad_config_value", f"{origin}: {knob.key} has the wrong type ({type(value).__name__})")


def resolve_config(command: str, cli_values: dict, config_path: str | None) -> RunConfig:
    """Merge defaults, config file, and explicit CLI flags, in that order."""
    knobs = _knobs_for(command)
    values: dict[str, object] = {k: knob.default for k, knob in knobs.items()}

    if config_path is not None:
        path = Path(config_path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError("missing_config", f"config file {path} does not exist")
        except json.JSONDecodeError as exc:
            raise DataError("parse_error", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
        if not isinstance(payload, dict):
            raise ValidationError("bad_config_value", f"{path}: top level must be a JSON object")
        unknown = sorted(set(payload) - set(knobs))
        if unknown:
            raise ValidationError("unknown_config_key", f"{path}: unknown keys for {command}: {unknown}")
        for key, raw in payload.items():
            value = _coerce(knobs[key], raw, str(path))
            if knobs[key].kind == "path" and value is not None:
                value = str((path.parent / value).resolve())
            values[key] = value

    for key, raw in cli_values.items():
        if key in knobs and raw is not None:
            values[key] = _coerce(knobs[key], raw, "command line")

    if command in SIM_COMMANDS and values.get("seed") is None:
        raise ValidationError("missing_seed", f"{command} is stochastic; pass --seed")
    return RunConfig(command=command, values=values)


# --- simulate -------------------------------------------------------------------


def _resolve_node(sem: LinearSem, text: str) -> NodeRef:
    if "@" in text:
        ref = NodeRef.parse(text)
        if ref not in sem.dag.nodes:
            raise ValidationError("unknown_node", f"{text!r} is not a node of the SEM")
        return ref
    matches = [n for n in sem.dag.sorted_nodes if n.name == text]
    if len(matches) == 1:
        return matches[0]
    kind = "ambiguous_node" if matches else "unknown_node"
    raise ValidationError(kind, f"{text!r} does not name a unique SEM node")


def _mc_slope(sem: LinearSem, x: NodeRef, y: NodeRef, n: int, seed: int, workers: int) -> float:
    panel = simulate(sem, n, seed, workers=workers)
    xs, ys = panel.column(x), panel.column(y)
    xc = xs - xs.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ValidationError("degenerate_regressor", f"{x} has zero sample variance")
    return float(xc @ (ys - ys.mean())) / denom


def _fork_sem(a: float, b: float, sigma_z: float, sigma_x: float, sigma_y: float) -> LinearSem:
    return sem_from_dict(
        {
            "nodes": [{"name": "Z", "offset": 0}, {"name": "X", "offset": 1}, {"name": "Y", "offset": 1}],
            "edges": [
                {"from": "Z@0", "to": "X@1", "coef": a},
                {"from": "Z@0", "to": "Y@1", "coef": b},
            ],
            "noise": {"Z": sigma_z, "X": sigma_x, "Y": sigma_y},
        }
    )


def _chain_sem(a: float, c: float, sigma_z: float, sigma_x: float, sigma_y: float) -> LinearSem:
    return sem_from_dict(
        {
            "nodes": [{"name": "Z", "offset": 0}, {"name": "X", "offset": 1}, {"name": "Y", "offset": 2}],
            "edges": [
                {"from": "Z@0", "to": "X@1", "coef": a},
                {"from": "X@1", "to": "Y@2", "coef": c},
            ],
            "noise": {"Z": sigma_z, "X": sigma_x, "Y": sigma_y},
        }
    )


def _run_preset_sweep(preset: str, cfg: RunConfig, outdir: Path) -> dict:
    """One closed-form curve, one MC curve, one comparison verdict."""
    n = cfg.require("n_draws")
    if n < 1:
        raise ValidationError("bad_sample_count", f"n_draws must be positive, got {n}")
    points = cfg.require("grid_points")
    start, stop = cfg.require("grid_start"), cfg.require("grid_stop")
    if points < 1 or not np.isfinite([start, stop]).all() or start < 0 or stop < start:
        raise ValidationError("bad_grid", "grid needs 0 <= start <= stop and at least one point")
    grid = tuple(float(v) for v in np.linspace(start, stop, points))
    seed, workers = cfg.require("seed"), cfg.require("workers")
    overwrite = bool(cfg["overwrite"])
    a, b, c = cfg.require("param_a"), cfg.require("param_b"), cfg.require("param_c")
    sigma_z, sigma_y = cfg.require("sigma_z"), cfg.require("sigma_y")

    if preset == "fork":
        curve = analytics.attenuation_curve(
            analytics.ForkParams(a=a, b=b, sigma_z=sigma_z, sigma_x=grid[0], sigma_y=sigma_y), grid
        )
        analytic = curve["beta"].to_numpy()
        sems = [_fork_sem(a, b, sigma_z, sx, sigma_y) for sx in grid]
        x, y = NodeRef("X", 1), NodeRef("Y", 1)
    else:
        analytic = np.full(len(grid), float(c))
        curve = pd.DataFrame({"sigma_x": grid, "beta": analytic})
        sems = [_chain_sem(a, c, sigma_z, sx, sigma_y) for sx in grid]
        x, y = NodeRef("X", 1), NodeRef("Y", 2)

    estimates = np.array([_mc_slope(sem, x, y, n, seed, workers) for sem in sems])
    errors = np.abs(estimates - analytic)
    frame = pd.DataFrame(
        {"sigma_x": grid, "beta_hat": estimates, "beta_analytic": analytic, "abs_error": errors}
    )
    tolerance = cfg.require("tolerance")
    report = {
        "preset": preset,
        "seed": seed,
        "n_draws": n,
        "grid_start": start,
        "grid_stop": stop,
        "grid_points": points,
        "tolerance": tolerance,
        "max_abs_error": float(errors.max()),
        "within_tolerance": bool(errors.max() <= tolerance),
    }
    serialize.write_csv(curve, outdir / "analytic_curve.csv", overwrite)
    serialize.write_csv(frame, outdir / "mc_estimates.csv", overwrite)
    serialize.write_json(report, outdir / "comparison.json", overwrite)
    return report


def _run_custom_sem(cfg: RunConfig, outdir: Path) -> dict:
    """Single-point check: sample OLS slope against the exact population slope."""
    n = cfg.require("n_draws")
    if n < 1:
        raise ValidationError("bad_sample_count", f"n_draws must be positive, got {n}")
    sem = load_sem_json(cfg.require("sem"))
    x = _resolve_node(sem, str(cfg.require("sem_x")))
    y = _resolve_node(sem, str(cfg.require("sem_y")))
    analytic = population_ols_slope(sem, x, y)
    estimate = _mc_slope(sem, x, y, n, cfg.require("seed"), cfg.require("workers"))
    tolerance = cfg.require("tolerance")
    report = {
        "sem": str(cfg.require("sem")),
        "x": str(x),
        "y": str(y),
        "seed": cfg.require("seed"),
        "n_draws": n,
        "tolerance": tolerance,
        "beta_hat": estimate,
        "beta_analytic": analytic,
        "max_abs_error": abs(estimate - analytic),
        "within_tolerance": bool(abs(estimate - analytic) <= tolerance),
    }
    frame = pd.DataFrame(
        {
            "x": [str(x)],
            "y": [str(y)],
            "beta_hat": [estimate],
            "beta_analytic": [analytic],
            "abs_error": [abs(estimate - analytic)],
        }
    )
    serialize.write_csv(frame, outdir / "mc_estimates.csv", bool(cfg["overwrite"]))
    serialize.write_json(report, outdir / "comparison.json", bool(cfg["overwrite"]))
    return report


def cmd_simulate(cfg: RunConfig) -> int:
    outdir = Path(cfg.require("out"))
    preset, sem_path = cfg["preset"], cfg["sem"]
    if preset is not None and sem_path is not None:
        raise ValidationError("ambiguous_input", "pass either --preset or --sem, not both")
    if preset is None and sem_path is None:
        raise ValidationError("missing_input", "simulate needs --preset fork|chain or --sem FILE")

    if preset is not None:
        report = _run_preset_sweep(preset, cfg, outdir)
        if cfg["emit_panel"]:
            seed = cfg.require("seed")
            bundle = (
                synthetic.make_fork_bundle(seed) if preset == "fork" else synthetic.make_chain_market_bundle(seed)
            )
            synthetic.write_bundle(bundle, outdir / "panel", overwrite=bool(cfg["overwrite"]))
    else:
        if cfg["emit_panel"]:
            raise ValidationError("bad_config_value", "--emit-panel needs a built-in preset")
        report = _run_custom_sem(cfg, outdir)
    print(serialize.dump_json(report), end="")
    return EXIT_OK if report["within_tolerance"] else EXIT_TOLERANCE


def cmd_replicate_fig3(cfg: RunConfig) -> int:
    """Both built-in presets with the documented defaults, side by side."""
    outdir = Path(cfg.require("out"))
    reports = {}
    for preset in ("fork", "chain"):
        sub = RunConfig(command="simulate", values={**cfg.values, "preset": preset, "sem": None})
        reports[preset] = _run_preset_sweep(preset, sub, outdir / preset)
    summary = {
        "fork": reports["fork"],
        "chain": reports["chain"],
        "within_tolerance": bool(all(r["within_tolerance"] for r in reports.values())),
    }
    serialize.write_json(summary, outdir / "replication_summary.json", bool(cfg["overwrite"]))
    print(serialize.dump_json(summary), end="")
    return EXIT_OK if summary["within_tolerance"] else EXIT_TOLERANCE


# --- check-dag --------------------------------------------------------------------


def _load_dag_payload(path: Path) -> tuple[LinearSem, dict]:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ValidationError("missing_input", f"graph file {path} does not exist")
    except json.JSONDecodeError as exc:
        raise DataError("parse_error", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(payload, dict):
        raise DataError("parse_error", f"{path}: top level must be a JSON object")
    extras = {k: payload.pop(k) for k in ("weights", "target", "latent_nodes") if k in payload}
    if "noise" not in payload and isinstance(payload.get("nodes"), list):
        payload["noise"] = {
            str(entry["name"]): 1.0
            for entry in payload["nodes"]
            if isinstance(entry, dict) and "name" in entry
        }
    return sem_from_dict(payload), extras


def cmd_check_dag(cfg: RunConfig) -> int:
    path = Path(cfg.require("dag"))
    sem, extras = _load_dag_payload(path)
    dag = sem.dag

    validation = validate_dag(dag)
    checklist = [
        {
            "edge": f"{s} -> {t}",
            "checklist": necessary_conditions_checklist(
                dag,
                (s, t),
                mechanism_declared=bool(cfg["mechanism_declared"]),
                intervention_wellposed=bool(cfg["intervention_wellposed"]),
                allow_same_period=bool(cfg["allow_same_period"]),
            ).to_dict(),
        }
        for s, t in sorted(dag.edges, key=lambda e: (str(e[0]), str(e[1])))
    ]
    latent = frozenset(str(n) for n in extras.get("latent_nodes", []))
    classification = classify_dag(dag, latent_names=latent)

    aggregator = None
    if "weights" in extras or "target" in extras:
        if not ("weights" in extras and "target" in extras):
            raise ValidationError("missing_field", "aggregator check needs both 'weights' and 'target'")
        weights = {str(k): float(v) for k, v in dict(extras["weights"]).items()}
        agg = AggregatorSpec(constituents=list(weights), weights=weights, target_asset=str(extras["target"]))
        verdict = check_aggregator_contradiction(agg, beta=float(cfg.require("beta")))
        aggregator = {"beta": float(cfg.require("beta")), **verdict.to_dict()}

    report = {
        "source": str(path),
        "validation": validation.to_dict(),
        "edges": checklist,
        "classification": classification.to_dict(),
        "aggregator": aggregator,
    }
    if cfg["out"] is not None:
        serialize.write_json(report, Path(cfg["out"]) / "dag_verdict.json", bool(cfg["overwrite"]))
    print(serialize.dump_json(report), end="")
    return EXIT_OK


# --- diagnose ----------------------------------------------------------------------


_SCHEME_LEVELS = {
    data_io.LabelScheme.VIX_TERCILES: "vix_level",
    data_io.LabelScheme.RATES_TREND: "dgs10_level",
    data_io.LabelScheme.USD_TREND: "dxy_level",
}


def _build_labeling(cfg: RunConfig, panel, macro: pd.DataFrame | None):
    scheme_text = cfg["scheme"]
    if scheme_text is None:
        return None
    scheme = data_io.LabelScheme(scheme_text)
    if scheme is data_io.LabelScheme.EPISODES:
        return data_io.label_environments(
            panel, scheme, episodes=cfg["episodes"], base_label=str(cfg["base_label"])
        )
    column = _SCHEME_LEVELS[scheme]
    if macro is None or column not in macro.columns:
        raise DataError("missing_levels", f"scheme {scheme.value} needs macro column {column!r}")
    return data_io.label_environments(
        panel, scheme, levels=macro[column], lookback=int(cfg["lookback"])
    )


def cmd_diagnose(cfg: RunConfig) -> int:
    outdir = Path(cfg.require("out"))
    overwrite = bool(cfg["overwrite"])
    extra_notes: list[str] = []

    table = data_io.load_prices_csv(cfg.require("returns_csv"), wide=True)
    sector_map = data_io.load_sector_map_csv(cfg["sector_map_csv"]) if cfg["sector_map_csv"] else None
    panel = data_io.build_panel(
        table, str(cfg.require("market_id")), sector_map=sector_map, mode=str(cfg["input_mode"])
    )

    macro = None
    controls = None
    if cfg["macro_csv"]:
        macro = data_io.load_prices_csv(cfg["macro_csv"], wide=True)
        sector_returns = (
            data_io.load_prices_csv(cfg["sector_returns_csv"], wide=True) if cfg["sector_returns_csv"] else None
        )
        controls = data_io.build_controls(
            panel, macro, sector_returns=sector_returns, standardize=bool(cfg["standardize"])
        )

    events = None
    if cfg["events_csv"]:
        events_path = Path(cfg["events_csv"])
        if events_path.exists():
            events = data_io.load_events_csv(events_path)
        else:
            extra_notes.append(f"events: skipped (missing_input: events file {events_path.name} not found)")

    weights_spec = None
    if cfg["weights_csv"]:
        weight_map = data_io.load_weights_csv(cfg["weights_csv"])
        target = cfg["target_asset"]
        if target is None:
            extra_notes.append("leave_one_out: skipped (missing_config: weights given without target_asset)")
        else:
            weights_spec = AggregatorSpec(
                constituents=list(weight_map), weights=weight_map, target_asset=str(target)
            )

    labeling = _build_labeling(cfg, panel, macro)
    battery = diagnostics.BatteryConfig(
        window=int(cfg["window"]),
        gap_days=int(cfg["gap_days"]),
        max_lag=int(cfg["max_lag"]),
        min_event_dates=int(cfg["min_event_dates"]),
        min_env_rows=int(cfg["min_env_rows"]),
        base_env=cfg["base_env"],
        se_kind=SeKind(str(cfg["se_kind"])),
        renormalize_loo=bool(cfg["renormalize_loo"]),
        significance_multiple=float(cfg["significance_multiple"]),
        fork_attenuation_ratio=float(cfg["fork_attenuation_ratio"]),
    )
    report = diagnostics.run_full_battery(
        panel, events=events, controls=controls, labeling=labeling, weights=weights_spec, config=battery
    )

    payload = report.to_dict()
    payload["section_notes"] = list(payload["section_notes"]) + extra_notes
    serialize.write_json(payload, outdir / "report.json", overwrite)
    written = {"report": "report.json"}
    for name, frame in report.csv_tables().items():
        serialize.write_csv(frame, outdir / f"{name}.csv", overwrite)
        written[name] = f"{name}.csv"
    summary = {
        "out": str(outdir),
        "files": written,
        "section_notes": payload["section_notes"],
        "verdict_notes": list(report.verdict_notes),
    }
    print(serialize.dump_json(summary), end="")
    return EXIT_OK


# --- wiring ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep the contract's codes
        raise ValidationError("usage", message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causalbeta", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for command in ALL_COMMANDS:
        p = sub.add_parser(command, help=f"{command} (see --help)", description=f"{command} options")
        p.add_argument("--config", help="JSON config file; flags override its keys")
        for knob in KNOBS:
            if command not in knob.commands or knob.kind == "json":
                continue
            if knob.kind == "bool":
                p.add_argument(knob.flag, dest=knob.key, action=argparse.BooleanOptionalAction, default=None, help=knob.help)
            else:
                caster = {"int": int, "float": float}.get(knob.kind, str)
                p.add_argument(
                    knob.flag,
                    dest=knob.key,
                    type=caster,
                    default=None,
                    choices=knob.choices,
                    help=knob.help + (f" (default: {knob.default})" if knob.default is not None else ""),
                )
    return parser


_DISPATCH = {
    "simulate": cmd_simulate,
    "check-dag": cmd_check_dag,
    "diagnose": cmd_diagnose,
    "replicate-fig3": cmd_replicate_fig3,
}


def _fail(kind: str, message: str, code: int) -> int:
    print(serialize.dump_json({"error": kind, "message": message}), end="")
    return code


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
        cli_values = {k: v for k, v in vars(namespace).items() if k not in ("command", "config")}
        cfg = resolve_config(namespace.command, cli_values, namespace.config)
        return _DISPATCH[namespace.command](cfg)
    except (ValidationError, DataError) as exc:
        return _fail(exc.kind, exc.args[0], EXIT_VALIDATION)
    except CausalBetaError as exc:
        return _fail(exc.kind, exc.args[0], EXIT_RUNTIME)
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        log.exception("unhandled failure")
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
