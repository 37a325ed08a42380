"""Scenario runner, sweep engine and worst-case search driver.

Config files are flat ``key=value`` lines with dotted section paths
(``grid.n_points=256``), diff-friendly for sweeps; unknown keys are
rejected.  Exit codes: 0 success, 1 config error, 2 physics-invariant
violation.  All emitted files are byte-deterministic (floats fixed at 12
significant digits).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .channels import (
    Channel,
    FlipChannel,
    ProbeSpec,
    SlitChannel,
    VonNeumannChannel,
    apply_slit,
    probe_grid_for,
)
from .grids import GridSpec, InvariantViolation, WaveFunction, make_grid
from .metrics import CSV_COLUMNS, EDRReport, compute_report
from .states import (
    BumpState,
    GaussianState,
    RandomState,
    StateSpec,
    SymmetricPairState,
    make_state,
)
from .supsearch import Eq2Report, SearchSpec, eq2_check, trace_to_csv


class ConfigError(ValueError):
    """Malformed or unknown configuration input."""


_SCHEMA: dict[str, type] = {
    "scenario": str,
    "grid.n_points": int,
    "grid.x_min": float,
    "grid.x_max": float,
    "grid.hbar": float,
    "state.variant": str,
    "state.x0": float,
    "state.p0": float,
    "state.sigma": float,
    "state.center": float,
    "state.halfwidth": float,
    "state.separation": float,
    "state.seed": int,
    "state.smoothness": int,
    "channel.variant": str,
    "channel.center": float,
    "channel.width": float,
    "channel.g": float,
    "probe.s": float,
    "probe.n_points": int,
    "probe.x_min": float,
    "probe.x_max": float,
    "search_err.x0_min": float,
    "search_err.x0_max": float,
    "search_err.p0_min": float,
    "search_err.p0_max": float,
    "search_err.sigma_min": float,
    "search_err.sigma_max": float,
    "search_err.n_x0": int,
    "search_err.n_p0": int,
    "search_err.n_sigma": int,
    "search_err.refine_tol": float,
    "search_err.max_refine_iters": int,
    "search_dist.x0_min": float,
    "search_dist.x0_max": float,
    "search_dist.p0_min": float,
    "search_dist.p0_max": float,
    "search_dist.sigma_min": float,
    "search_dist.sigma_max": float,
    "search_dist.n_x0": int,
    "search_dist.n_p0": int,
    "search_dist.n_sigma": int,
    "search_dist.refine_tol": float,
    "search_dist.max_refine_iters": int,
    "output.path": str,
    "output.format": str,
}

_BASE_DEFAULTS = {
    "grid.n_points": 256,
    "grid.x_min": -16.0,
    "grid.x_max": 16.0,
    "grid.hbar": 1.0,
}

_SCENARIO_DEFAULTS = {
    "flip": {
        "channel.variant": "flip",
        "state.variant": "gaussian",
        "state.x0": 0.0,
        "state.p0": 0.0,
        "state.sigma": 1.0,
    },
    "slit": {
        "channel.variant": "slit",
        "channel.center": 0.0,
        "channel.width": 4.0,
        "state.variant": "bump",
        "state.center": 0.0,
        "state.halfwidth": 1.0,
    },
    "vonneumann": {
        "channel.variant": "von_neumann",
        "channel.g": 1.0,
        "probe.s": 0.5,
        "probe.n_points": 256,
        "state.variant": "gaussian",
        "state.x0": 0.0,
        "state.p0": 0.0,
        "state.sigma": 1.0,
    },
}

_EQ2_DEFAULTS = {
    "search_err.x0_min": -1.0,
    "search_err.x0_max": 1.0,
    "search_err.p0_min": -1.0,
    "search_err.p0_max": 1.0,
    "search_err.sigma_min": 1.0,
    "search_err.sigma_max": 2.0,
    "search_err.n_x0": 3,
    "search_err.n_p0": 3,
    "search_err.n_sigma": 5,
    "search_err.refine_tol": 1e-4,
    "search_err.max_refine_iters": 3,
    "search_dist.x0_min": -1.0,
    "search_dist.x0_max": 1.0,
    "search_dist.p0_min": -1.0,
    "search_dist.p0_max": 1.0,
    "search_dist.sigma_min": 1.0,
    "search_dist.sigma_max": 4.0,
    "search_dist.n_x0": 3,
    "search_dist.n_p0": 3,
    "search_dist.n_sigma": 7,
    "search_dist.refine_tol": 1e-4,
    "search_dist.max_refine_iters": 3,
}

SCENARIO_NAMES = tuple(_SCENARIO_DEFAULTS)


def _coerce(key: str, raw: str):
    if key not in _SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    typ = _SCHEMA[key]
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return str(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    cfg: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        cfg[key.strip()] = _coerce(key.strip(), raw.strip())
    return cfg


def load_config(path: str | None, sets: list[str], scenario: str | None) -> dict:
    cfg = dict(_BASE_DEFAULTS)
    cfg.update(_EQ2_DEFAULTS)
    from_file: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                from_file = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    set_scenario = [v.partition("=")[2] for v in sets if v.startswith("scenario=")]
    name = scenario or (set_scenario[-1] if set_scenario else None) or from_file.get("scenario") or "vonneumann"
    if name not in _SCENARIO_DEFAULTS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {SCENARIO_NAMES}")
    cfg["scenario"] = name
    cfg.update(_SCENARIO_DEFAULTS[name])
    cfg.update(from_file)
    cfg["scenario"] = name
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        cfg[key.strip()] = _coerce(key.strip(), raw.strip())
    return cfg


def _state_spec_from(cfg: dict) -> StateSpec:
    variant = cfg.get("state.variant")
    try:
        if variant == "gaussian":
            return GaussianState(cfg["state.x0"], cfg["state.p0"], cfg["state.sigma"])
        if variant == "bump":
            return BumpState(cfg["state.center"], cfg["state.halfwidth"])
        if variant == "symmetric_pair":
            return SymmetricPairState(cfg["state.separation"], cfg["state.sigma"])
        if variant == "random":
            return RandomState(cfg["state.seed"], cfg.get("state.smoothness", 6))
    except KeyError as exc:
        raise ConfigError(f"state.variant={variant} missing field {exc}") from exc
    raise ConfigError(f"unknown state.variant {variant!r}")


@dataclass(frozen=True)
class BuiltScenario:
    name: str
    grid: GridSpec
    psi: WaveFunction
    channel: Channel


def _guard(fn, *args):
    # bad parameter values are config errors; InvariantViolation stays a
    # physics failure (different exit code)
    try:
        return fn(*args)
    except InvariantViolation:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def build_scenario(cfg: dict) -> BuiltScenario:
    grid = _guard(
        make_grid, cfg["grid.n_points"], cfg["grid.x_min"], cfg["grid.x_max"], cfg["grid.hbar"]
    )
    psi = _guard(make_state, grid, _state_spec_from(cfg))
    variant = cfg["channel.variant"]
    if variant == "flip":
        channel: Channel = FlipChannel()
    elif variant == "slit":
        channel = _guard(SlitChannel, cfg["channel.center"], cfg["channel.width"])
    elif variant == "von_neumann":
        s = cfg["probe.s"]
        n_probe = cfg["probe.n_points"]
        g = cfg["channel.g"]
        if "probe.x_min" in cfg and "probe.x_max" in cfg:
            probe_grid = _guard(make_grid, n_probe, cfg["probe.x_min"], cfg["probe.x_max"], grid.hbar)
        else:
            probe_grid = probe_grid_for(grid, psi, g, s, n_probe)
        channel = _guard(lambda: VonNeumannChannel(g, ProbeSpec(probe_grid, s)))
    else:
        raise ConfigError(f"unknown channel.variant {variant!r}")
    return BuiltScenario(cfg["scenario"], grid, psi, channel)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _flag(satisfied: bool, applicable: bool = True) -> str:
    if not applicable:
        return "N/A"
    return "SATISFIED" if satisfied else "VIOLATED"


def _describe_channel(channel: Channel) -> str:
    if isinstance(channel, SlitChannel):
        return f"slit(center={_fmt(channel.center)}, width={_fmt(channel.width)})"
    if isinstance(channel, VonNeumannChannel):
        pg = channel.probe.grid
        return (
            f"von_neumann(g={_fmt(channel.g)}, pointer s={_fmt(channel.probe.s)}, "
            f"probe n={pg.n_points} x=[{_fmt(pg.x_min)},{_fmt(pg.x_max)}])"
        )
    return "flip"


def render_table(built: BuiltScenario, report: EDRReport, extra: list[tuple[str, str]]) -> str:
    g = built.grid
    rows: list[tuple[str, str]] = [
        ("scenario", built.name),
        ("grid", f"n={g.n_points} x=[{_fmt(g.x_min)},{_fmt(g.x_max)}] hbar={_fmt(g.hbar)}"),
        ("channel", _describe_channel(built.channel)),
    ]
    rows.extend(extra)
    for col in (
        "epsilon_o",
        "eta_o_P",
        "eta_o_X",
        "delta_X",
        "delta_P",
        "w2_error_X",
        "w2_disturbance_P",
        "w2_disturbance_X",
    ):
        rows.append((col, _fmt(getattr(report, col))))
    rows.append(("epsilon convention", report.epsilon_convention))
    rows.append(("hbar/2", _fmt(report.hbar_over_2)))
    rows.append(
        (
            "robertson DX*DP",
            f"{_fmt(report.robertson_product)}  {_flag(report.robertson_satisfied)}",
        )
    )
    rows.append(
        (
            "eq2-form eps*eta",
            f"{_fmt(report.product_eq2_form)}  "
            f"{_flag(report.eq2_form_satisfied, report.eq5_applicable)}",
        )
    )
    rows.append(
        (
            "eq5 lhs",
            f"{_fmt(report.lhs_eq5)}  {_flag(report.eq5_satisfied, report.eq5_applicable)}",
        )
    )
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _report_csv_lines(rows: list[dict], lead: list[str]) -> str:
    header = lead + CSV_COLUMNS
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in header))
    return "\n".join(lines) + "\n"


def _json_value(v):
    if isinstance(v, float):
        return float(f"{v:.12g}") if (v == v and abs(v) != float("inf")) else None
    return v


def report_to_json(report: EDRReport) -> str:
    payload = {k: _json_value(v) for k, v in report.as_dict().items()}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def run_scenario(name: str, cfg: dict) -> tuple[BuiltScenario, EDRReport, str]:
    cfg = dict(cfg)
    cfg["scenario"] = name
    built = build_scenario(cfg)
    report = compute_report(built.channel, built.psi)
    extra: list[tuple[str, str]] = []
    if isinstance(built.channel, SlitChannel):
        outcome = apply_slit(built.psi, built.channel.center, built.channel.width)
        extra.append(("slit pass probability", _fmt(outcome.pass_probability)))
        extra.append(("slit fail probability", _fmt(outcome.fail_probability)))
    table = render_table(built, report, extra)
    return built, report, table


def run_sweep(axis: str, values: list[float], base_cfg: dict) -> str:
    """One report row per swept value, sorted by the value; all rows are
    computed before anything is written, so a failing row leaves no file."""
    if axis not in _SCHEMA or _SCHEMA[axis] not in (int, float):
        raise ConfigError(f"sweep axis {axis!r} is not a numeric config key")
    if not values:
        raise ConfigError("sweep needs at least one value")
    rows = []
    for v in sorted(values):
        cfg = dict(base_cfg)
        cfg[axis] = int(v) if _SCHEMA[axis] is int else float(v)
        built = build_scenario(cfg)
        report = compute_report(built.channel, built.psi)
        row = {axis: cfg[axis]}
        row.update(report.as_dict())
        rows.append(row)
    return _report_csv_lines(rows, [axis])


def run_eq2(cfg: dict) -> tuple[Eq2Report, BuiltScenario]:
    cfg = dict(cfg)
    cfg["scenario"] = "vonneumann"
    cfg.update({k: v for k, v in _SCENARIO_DEFAULTS["vonneumann"].items() if k not in cfg})
    if "probe.x_min" not in cfg or "probe.x_max" not in cfg:
        # size the probe for the whole search family, not just the base state
        reach = max(
            abs(cfg["search_err.x0_min"]),
            abs(cfg["search_err.x0_max"]),
            abs(cfg["search_dist.x0_min"]),
            abs(cfg["search_dist.x0_max"]),
        ) + 8.0 * max(cfg["search_err.sigma_max"], cfg["search_dist.sigma_max"])
        half = abs(cfg["channel.g"]) * reach + 12.0 * cfg["probe.s"]
        cfg["probe.x_min"] = -half
        cfg["probe.x_max"] = half
    built = build_scenario(cfg)
    if not isinstance(built.channel, VonNeumannChannel):
        raise ConfigError("eq2 requires a von_neumann channel")

    def search_spec(prefix: str) -> SearchSpec:
        return SearchSpec(
            x0_bounds=(cfg[f"{prefix}.x0_min"], cfg[f"{prefix}.x0_max"]),
            p0_bounds=(cfg[f"{prefix}.p0_min"], cfg[f"{prefix}.p0_max"]),
            sigma_bounds=(cfg[f"{prefix}.sigma_min"], cfg[f"{prefix}.sigma_max"]),
            coarse_counts=(cfg[f"{prefix}.n_x0"], cfg[f"{prefix}.n_p0"], cfg[f"{prefix}.n_sigma"]),
            refine_tol=cfg[f"{prefix}.refine_tol"],
            max_refine_iters=cfg[f"{prefix}.max_refine_iters"],
        )

    try:
        spec_err = search_spec("search_err")
        spec_dist = search_spec("search_dist")
    except KeyError as exc:
        raise ConfigError(f"missing search key {exc}") from exc
    result = eq2_check(built.channel, built.grid, spec_err, spec_dist)
    return result, built


def _gauss_params(s: GaussianState) -> dict:
    return {"x0": _json_value(s.x0), "p0": _json_value(s.p0), "sigma": _json_value(s.sigma)}


def eq2_summary_json(result: Eq2Report) -> str:
    payload = {
        "epsilon_b": _json_value(result.epsilon_b),
        "eta_b": _json_value(result.eta_b),
        "product": _json_value(result.product),
        "hbar_over_2": _json_value(result.rhs),
        "slack": _json_value(result.slack),
        "argmax_error": _gauss_params(result.argmax_error),
        "argmax_disturbance": _gauss_params(result.argmax_disturbance),
        "argmax_distinct": result.argmax_distinct,
        "product_at_argmax_disturbance_state": _json_value(
            result.crosscheck_product_at_argmax_dist
        ),
        "evaluations_error": len(result.error_search.trace),
        "evaluations_disturbance": len(result.disturbance_search.trace),
        "excluded_error": result.error_search.n_excluded,
        "excluded_disturbance": result.disturbance_search.n_excluded,
        "lower_bound_disclaimer": True,
    }
    return json.dumps(payload, indent=2) + "\n"


def _fmt_gauss(s: GaussianState) -> str:
    return f"gaussian(x0={_fmt(s.x0)}, p0={_fmt(s.p0)}, sigma={_fmt(s.sigma)})"


def eq2_summary_text(result: Eq2Report) -> str:
    lines = [
        f"eps_B (maximized readout error)      {_fmt(result.epsilon_b)}  "
        f"at {_fmt_gauss(result.argmax_error)}",
        f"eta_B (maximized momentum disturb.)  {_fmt(result.eta_b)}  "
        f"at {_fmt_gauss(result.argmax_disturbance)}",
        f"product eps_B*eta_B                  {_fmt(result.product)}  vs hbar/2 = {_fmt(result.rhs)}",
        f"per-state product at disturbance argmax  "
        f"{_fmt(result.crosscheck_product_at_argmax_dist)}",
        "family suprema are lower bounds on the true worst case",
    ]
    if result.argmax_distinct:
        lines.append("argmax states differ: error and disturbance are maximized by different states")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="edlab", description="error/disturbance scenario runner"
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_scn = sub.add_parser("scenario", help="run one named scenario")
    p_scn.add_argument("name", choices=SCENARIO_NAMES)
    p_scn.add_argument("--config")
    p_scn.add_argument("--set", action="append", default=[], dest="sets", metavar="KEY=VALUE")
    p_scn.add_argument("--out")
    p_scn.add_argument("--format", choices=("csv", "json"), default=None)

    p_swp = sub.add_parser("sweep", help="sweep one config key over values")
    p_swp.add_argument("--axis", required=True)
    p_swp.add_argument("--values", required=True, help="comma-separated numbers")
    p_swp.add_argument("--config")
    p_swp.add_argument("--set", action="append", default=[], dest="sets", metavar="KEY=VALUE")
    p_swp.add_argument("--out", required=True)

    p_eq2 = sub.add_parser("eq2", help="maximized error/disturbance product check")
    p_eq2.add_argument("--config")
    p_eq2.add_argument("--set", action="append", default=[], dest="sets", metavar="KEY=VALUE")
    p_eq2.add_argument("--out-dir", required=True)

    args = parser.parse_args(argv)
    try:
        if args.verb == "scenario":
            cfg = load_config(args.config, args.sets, args.name)
            fmt = args.format or cfg.get("output.format", "csv")
            if fmt not in ("csv", "json"):
                raise ConfigError(f"unknown output format {fmt!r}")
            built, report, table = run_scenario(args.name, cfg)
            print(table)
            out = args.out or cfg.get("output.path")
            if out:
                if fmt == "csv":
                    text = _report_csv_lines([report.as_dict()], [])
                else:
                    text = report_to_json(report)
                with open(out, "w", newline="") as fh:
                    fh.write(text)
        elif args.verb == "sweep":
            cfg = load_config(args.config, args.sets, None)
            try:
                values = [float(v) for v in args.values.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad sweep values {args.values!r}") from exc
            text = run_sweep(args.axis, values, cfg)
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
            print(f"wrote {len(text.splitlines()) - 1} rows to {args.out}")
        else:
            import os

            cfg = load_config(args.config, args.sets, None)
            result, built = run_eq2(cfg)
            os.makedirs(args.out_dir, exist_ok=True)
            trace_to_csv(result.error_search, os.path.join(args.out_dir, "error_landscape.csv"))
            trace_to_csv(
                result.disturbance_search,
                os.path.join(args.out_dir, "disturbance_landscape.csv"),
            )
            with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
                fh.write(eq2_summary_json(result))
            print(eq2_summary_text(result))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"physics invariant violation: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
