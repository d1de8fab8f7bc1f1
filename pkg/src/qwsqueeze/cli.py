"""Command-line interface: single-point evaluation and parameter sweeps.

Exit codes: 0 on success, 1 for configuration or I/O problems, 2 when the
requested point has no steady state (physics refusal, not a crash).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .dynamics import STABILITY_EPS, build_diffusion, build_drift, check_stability
from .errors import ConfigError, SimulationError
from .model import POLE_THRESHOLD, DriveTone, ExcitonParams, SystemParams, steady_amplitudes
from .squeezing import mechanical_block, minimize_variance
from .steadystate import RESIDUAL_RTOL, solve_lyapunov
from .sweep import (
    FIGURE_IDS,
    SweepAxis,
    SweepResult,
    SweepSpec,
    figure_sweep_spec,
    run_sweep,
)

_TOLERANCES = {
    "stability_margin": STABILITY_EPS,
    "lyapunov_residual_rtol": RESIDUAL_RTOL,
    "pole_threshold": POLE_THRESHOLD,
}

_DIRECT_DRIVE_KEYS = {"G_minus", "G_plus", "ratio"}
_AMPLITUDE_DRIVE_KEYS = {
    "epsilon_plus",
    "epsilon_minus",
    "delta_plus",
    "delta_minus",
    "offset_plus",
    "offset_minus",
}


@dataclass
class RunConfig:
    params: SystemParams
    G_plus: float
    G_minus: float
    ratio: float | None
    axis1: SweepAxis | None
    axis2: SweepAxis | None
    directory: str
    fmt: str
    precision: int
    plot_data: bool
    plot_style: str
    stem: str
    raw: dict


def _fmt(value: float, precision: int) -> str:
    return f"{value:.{precision}g}"


def _rounded(value: float, precision: int) -> float:
    return float(_fmt(value, precision))


def _check_keys(obj, context: str, required=(), optional=()) -> dict:
    label = context or "top level"
    if not isinstance(obj, dict):
        raise ConfigError(f"{label} must be a JSON object")
    prefix = f"{context}." if context else ""
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing required field '{prefix}{key}'")
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown field '{prefix}{key}'")
    return obj


def _num(obj: dict, context: str, key: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{context}.{key}' must be a number")
    return float(value)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if isinstance(obj, dict) and "config" in obj:
        # metadata sidecar written by a previous sweep run; re-runnable as-is
        _check_keys(
            obj,
            "",
            required=("config",),
            optional=("figure", "tolerances", "timestamp", "version", "sweep_summary"),
        )
        obj = obj["config"]
    return obj


def _parse_system(obj: dict) -> SystemParams:
    _check_keys(
        obj,
        "system",
        required=("kappa", "gamma_m", "excitons"),
        optional=("n_th", "g0", "omega_m", "gamma"),
    )
    shared_gamma = _num(obj, "system", "gamma") if "gamma" in obj else None
    wells_obj = obj["excitons"]
    if not isinstance(wells_obj, list) or len(wells_obj) != 2:
        raise ConfigError("field 'system.excitons' must be a list of exactly 2 objects")
    wells = []
    for i, well in enumerate(wells_obj):
        ctx = f"system.excitons[{i}]"
        if shared_gamma is None:
            _check_keys(well, ctx, required=("g", "gamma", "delta_ex"))
            gamma = _num(well, ctx, "gamma")
        else:
            _check_keys(well, ctx, required=("g", "delta_ex"), optional=("gamma",))
            gamma = _num(well, ctx, "gamma") if "gamma" in well else shared_gamma
        wells.append(
            ExcitonParams(g=_num(well, ctx, "g"), gamma=gamma, delta_ex=_num(well, ctx, "delta_ex"))
        )
    kwargs = {}
    for key in ("n_th", "g0", "omega_m"):
        if key in obj:
            kwargs[key] = _num(obj, "system", key)
    return SystemParams(
        kappa=_num(obj, "system", "kappa"),
        gamma_m=_num(obj, "system", "gamma_m"),
        excitons=tuple(wells),
        **kwargs,
    )


def _parse_detunings(obj: dict, context: str, key: str) -> tuple[float, float]:
    value = obj[key]
    if (
        not isinstance(value, list)
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"field '{context}.{key}' must be a list of 2 numbers")
    return (float(value[0]), float(value[1]))


def _parse_drive(obj: dict, params: SystemParams) -> tuple[float, float, float | None]:
    """Resolve the drive section to (G_plus, G_minus, ratio)."""
    if not isinstance(obj, dict):
        raise ConfigError("drive must be a JSON object")
    direct = _DIRECT_DRIVE_KEYS & set(obj)
    amplitude = _AMPLITUDE_DRIVE_KEYS & set(obj)
    if direct and amplitude:
        raise ConfigError(
            "drive must use exactly one path: dressed couplings "
            f"({sorted(_DIRECT_DRIVE_KEYS)}) or tone amplitudes "
            f"({sorted(_AMPLITUDE_DRIVE_KEYS)})"
        )
    if direct:
        _check_keys(obj, "drive", required=("G_minus",), optional=("ratio", "G_plus"))
        if ("ratio" in obj) == ("G_plus" in obj):
            raise ConfigError("drive needs exactly one of 'drive.ratio' or 'drive.G_plus'")
        g_minus = _num(obj, "drive", "G_minus")
        if g_minus < 0:
            raise ConfigError("field 'drive.G_minus' must be non-negative")
        if "ratio" in obj:
            ratio = _num(obj, "drive", "ratio")
            if ratio < 0:
                raise ConfigError("field 'drive.ratio' must be non-negative")
            return ratio * g_minus, g_minus, ratio
        g_plus = _num(obj, "drive", "G_plus")
        if g_plus < 0:
            raise ConfigError("field 'drive.G_plus' must be non-negative")
        ratio = g_plus / g_minus if g_minus > 0 else (0.0 if g_plus == 0 else None)
        return g_plus, g_minus, ratio

    _check_keys(
        obj,
        "drive",
        required=("epsilon_plus", "epsilon_minus", "delta_plus", "delta_minus"),
        optional=("offset_plus", "offset_minus"),
    )
    eps_p = _num(obj, "drive", "epsilon_plus")
    eps_m = _num(obj, "drive", "epsilon_minus")
    if eps_p < 0 or eps_m < 0:
        raise ConfigError("drive amplitudes must be non-negative")
    tone_p = DriveTone(
        amplitude=eps_p,
        detuning_sign="plus",
        cavity_offset=_num(obj, "drive", "offset_plus") if "offset_plus" in obj else None,
    )
    tone_m = DriveTone(
        amplitude=eps_m,
        detuning_sign="minus",
        cavity_offset=_num(obj, "drive", "offset_minus") if "offset_minus" in obj else None,
    )
    amps = steady_amplitudes(
        params,
        tone_p,
        tone_m,
        _parse_detunings(obj, "drive", "delta_plus"),
        _parse_detunings(obj, "drive", "delta_minus"),
    )
    if amps.G_minus > 0:
        ratio = amps.G_plus / amps.G_minus
    else:
        ratio = 0.0 if amps.G_plus == 0 else None
    return amps.G_plus, amps.G_minus, ratio


def _parse_axis(obj: dict, context: str) -> SweepAxis:
    _check_keys(
        obj, context, required=("parameter",), optional=("values", "start", "stop", "points")
    )
    parameter = obj["parameter"]
    if not isinstance(parameter, str):
        raise ConfigError(f"field '{context}.parameter' must be a string")
    has_values = "values" in obj
    has_range = {"start", "stop", "points"} <= set(obj)
    if has_values == has_range or ({"start", "stop", "points"} & set(obj) and not has_range):
        raise ConfigError(
            f"{context} needs either 'values' or all of 'start'/'stop'/'points'"
        )
    if has_values:
        values = obj["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"field '{context}.values' must be a non-empty list of numbers")
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"field '{context}.values' must be a non-empty list of numbers")
        grid = tuple(float(v) for v in values)
    else:
        points = obj["points"]
        if isinstance(points, bool) or not isinstance(points, int) or points < 1:
            raise ConfigError(f"field '{context}.points' must be a positive integer")
        grid = tuple(
            np.linspace(_num(obj, context, "start"), _num(obj, context, "stop"), points)
        )
    return SweepAxis(parameter=parameter, grid=grid)


def parse_config(obj: dict) -> RunConfig:
    """Validate a parsed JSON config and resolve it to run inputs."""
    _check_keys(obj, "", required=("system", "drive"), optional=("sweep", "output"))
    params = _parse_system(obj["system"])
    g_plus, g_minus, ratio = _parse_drive(obj["drive"], params)

    axis1 = axis2 = None
    if "sweep" in obj:
        sweep_obj = _check_keys(obj["sweep"], "sweep", required=("axis1",), optional=("axis2",))
        axis1 = _parse_axis(sweep_obj["axis1"], "sweep.axis1")
        if "axis2" in sweep_obj:
            axis2 = _parse_axis(sweep_obj["axis2"], "sweep.axis2")

    directory = "."
    fmt = "csv"
    precision = 12
    plot_data = True
    plot_style = "auto"
    stem = "sweep"
    if "output" in obj:
        out_obj = _check_keys(
            obj["output"],
            "output",
            optional=("directory", "format", "precision", "plot_data", "plot_style", "stem"),
        )
        if "directory" in out_obj:
            if not isinstance(out_obj["directory"], str) or not out_obj["directory"]:
                raise ConfigError("field 'output.directory' must be a non-empty string")
            directory = out_obj["directory"]
        if "format" in out_obj:
            fmt = out_obj["format"]
            if fmt not in ("csv", "json", "both"):
                raise ConfigError("field 'output.format' must be one of csv, json, both")
        if "precision" in out_obj:
            precision = out_obj["precision"]
            if isinstance(precision, bool) or not isinstance(precision, int):
                raise ConfigError("field 'output.precision' must be an integer")
            if not 6 <= precision <= 17:
                raise ConfigError("field 'output.precision' must lie in [6, 17]")
        if "plot_data" in out_obj:
            plot_data = out_obj["plot_data"]
            if not isinstance(plot_data, bool):
                raise ConfigError("field 'output.plot_data' must be a boolean")
        if "plot_style" in out_obj:
            plot_style = out_obj["plot_style"]
            if plot_style not in ("auto", "curves", "heatmap"):
                raise ConfigError(
                    "field 'output.plot_style' must be one of auto, curves, heatmap"
                )
        if "stem" in out_obj:
            stem = out_obj["stem"]
            if not isinstance(stem, str) or not stem or os.sep in stem or "/" in stem:
                raise ConfigError("field 'output.stem' must be a plain file name stem")

    return RunConfig(
        params=params,
        G_plus=g_plus,
        G_minus=g_minus,
        ratio=ratio,
        axis1=axis1,
        axis2=axis2,
        directory=directory,
        fmt=fmt,
        precision=precision,
        plot_data=plot_data,
        plot_style=plot_style,
        stem=stem,
        raw=obj,
    )


def _figure_config(figure_id: str, cfg: RunConfig | None) -> dict:
    """Fully resolved, re-runnable config equivalent to a figure preset.

    Output options are inherited from an explicit config when one was
    given alongside --figure; grids are spelled out value by value so the
    metadata sidecar reproduces the run exactly.
    """
    spec = figure_sweep_spec(figure_id)
    wells = [
        {"g": w.g, "gamma": w.gamma, "delta_ex": w.delta_ex} for w in spec.params.excitons
    ]
    return {
        "system": {
            "kappa": spec.params.kappa,
            "gamma_m": spec.params.gamma_m,
            "n_th": spec.params.n_th,
            "g0": spec.params.g0,
            "omega_m": spec.params.omega_m,
            "excitons": wells,
        },
        "drive": {"G_minus": spec.G_minus, "ratio": spec.ratio},
        "sweep": {
            "axis1": {"parameter": spec.axis1.parameter, "values": list(spec.axis1.grid)},
            "axis2": {"parameter": spec.axis2.parameter, "values": list(spec.axis2.grid)},
        },
        "output": {
            "directory": cfg.directory if cfg else ".",
            "format": cfg.fmt if cfg else "csv",
            "precision": cfg.precision if cfg else 12,
            "plot_data": cfg.plot_data if cfg else True,
            "plot_style": "curves" if figure_id.startswith("fig2") else "heatmap",
            "stem": figure_id,
        },
    }


def _cmd_point(cfg: RunConfig) -> int:
    if cfg.axis1 is not None:
        raise ConfigError("the point command takes a config without a sweep section")
    drift = build_drift(cfg.params, cfg.G_plus, cfg.G_minus)
    verdict = check_stability(drift)
    p = cfg.precision
    payload: dict = {
        "stable": verdict.classification,
        "eigen_real_parts": [_rounded(v, p) for v in verdict.eigen_real_parts],
    }
    if verdict.classification != "stable":
        print(json.dumps(payload, indent=2))
        return 2
    cov = solve_lyapunov(drift, build_diffusion(cfg.params))
    sq = minimize_variance(mechanical_block(cov))
    payload.update(
        S_min=_rounded(sq.S_min, p),
        dB=_rounded(sq.dB, p),
        V_q=_rounded(sq.V_q, p),
        V_p=_rounded(sq.V_p, p),
        V_qp=_rounded(sq.V_qp, p),
        theta_opt=_rounded(sq.theta_opt, p),
    )
    print(json.dumps(payload, indent=2))
    return 0


def _opt_fmt(value: float | None, precision: int) -> str:
    return "" if value is None else _fmt(value, precision)


def _write_csv(path: str, result: SweepResult, precision: int) -> None:
    import csv

    two_d = result.axis2 is not None
    header = ["axis1"] + (["axis2"] if two_d else [])
    header += ["stable", "S_min", "dB", "V_q", "V_p", "V_qp", "theta_opt"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for x1, x2, pt in result.iter_records():
            row = [_fmt(x1, precision)]
            if two_d:
                row.append(_fmt(x2, precision))
            row.append(pt.stability)
            row += [
                _opt_fmt(v, precision)
                for v in (pt.S_min, pt.dB, pt.V_q, pt.V_p, pt.V_qp, pt.theta_opt)
            ]
            writer.writerow(row)


def _write_records_json(path: str, result: SweepResult, precision: int) -> None:
    records = []
    for x1, x2, pt in result.iter_records():
        rec = {"axis1": _rounded(x1, precision)}
        if result.axis2 is not None:
            rec["axis2"] = _rounded(x2, precision)
        rec["stable"] = pt.stability
        for name in ("S_min", "dB", "V_q", "V_p", "V_qp", "theta_opt"):
            value = getattr(pt, name)
            rec[name] = None if value is None else _rounded(value, precision)
        if pt.error is not None:
            rec["error"] = pt.error
        records.append(rec)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")


def _write_meta(path: str, config: dict, result: SweepResult, figure: str | None) -> None:
    stable = sum(1 for pt in result.points if pt.stability == "stable")
    meta = {
        "config": config,
        "figure": figure,
        "tolerances": dict(_TOLERANCES),
        "sweep_summary": {
            "points": len(result.points),
            "stable": stable,
            "warning": result.metadata.get("warning"),
        },
        "timestamp": result.metadata["timestamp"],
        "version": __version__,
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def _write_curves(directory: str, stem: str, result: SweepResult, precision: int) -> list[str]:
    db = result.db_matrix()
    xs = result.axis1.grid
    paths = []
    if result.axis2 is None:
        path = os.path.join(directory, f"{stem}_curve.dat")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for x, y in zip(xs, db[0]):
                fh.write(f"{_fmt(x, precision)}\t{_fmt(y, precision)}\n")
        return [path]
    for k, value in enumerate(result.axis2.grid):
        tag = _fmt(value, 6)
        path = os.path.join(directory, f"{stem}_curve_{result.axis2.parameter}_{tag}.dat")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for x, y in zip(xs, db[k]):
                fh.write(f"{_fmt(x, precision)}\t{_fmt(y, precision)}\n")
        paths.append(path)
    return paths


def _write_heatmap(directory: str, stem: str, result: SweepResult, precision: int) -> list[str]:
    if result.axis2 is None:
        raise ConfigError("heatmap plot data needs a two-axis sweep")
    db = result.db_matrix()
    path = os.path.join(directory, f"{stem}_heatmap.dat")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# x: " + "\t".join(_fmt(v, precision) for v in result.axis1.grid) + "\n")
        fh.write("# y: " + "\t".join(_fmt(v, precision) for v in result.axis2.grid) + "\n")
        for row in db:
            fh.write("\t".join(_fmt(v, precision) for v in row) + "\n")
    return [path]


def _cmd_sweep(cfg: RunConfig, figure: str | None, threads: int) -> int:
    if figure is None:
        if cfg.axis1 is None:
            raise ConfigError("the sweep command needs a sweep section in the config")
        if cfg.ratio is None:
            raise ConfigError(
                "this drive cannot be swept: G_plus > 0 with G_minus = 0 has no "
                "finite coupling ratio"
            )
        spec = SweepSpec(
            params=cfg.params,
            G_minus=cfg.G_minus,
            axis1=cfg.axis1,
            axis2=cfg.axis2,
            ratio=cfg.ratio,
        )
        sidecar_config = cfg.raw
    else:
        spec = figure_sweep_spec(figure)
        sidecar_config = _figure_config(figure, cfg)
        cfg = parse_config(sidecar_config)

    result = run_sweep(spec, threads=threads)
    if figure is not None:
        result.metadata["figure"] = figure

    os.makedirs(cfg.directory, exist_ok=True)
    written = []
    if cfg.fmt in ("csv", "both"):
        path = os.path.join(cfg.directory, f"{cfg.stem}.csv")
        _write_csv(path, result, cfg.precision)
        written.append(path)
    if cfg.fmt in ("json", "both"):
        path = os.path.join(cfg.directory, f"{cfg.stem}.json")
        _write_records_json(path, result, cfg.precision)
        written.append(path)
    meta_path = os.path.join(cfg.directory, f"{cfg.stem}_meta.json")
    _write_meta(meta_path, sidecar_config, result, figure)
    written.append(meta_path)

    if cfg.plot_data:
        style = cfg.plot_style
        if style == "auto":
            style = "heatmap" if cfg.axis2 is not None else "curves"
        if style == "curves":
            written += _write_curves(cfg.directory, cfg.stem, result, cfg.precision)
        else:
            written += _write_heatmap(cfg.directory, cfg.stem, result, cfg.precision)

    stable = sum(1 for pt in result.points if pt.stability == "stable")
    print(
        f"sweep complete: {len(result.points)} points ({stable} stable), "
        f"{len(written)} files in {cfg.directory}"
    )
    if "warning" in result.metadata:
        print(f"warning: {result.metadata['warning']}", file=sys.stderr)
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as ConfigError.

    The default parser exits with status 2, which this CLI reserves for
    physics refusals; configuration mistakes must exit with status 1.
    """

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qwsqueeze", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    point = sub.add_parser("point", help="evaluate a single parameter point")
    point.add_argument("--config", required=True, help="JSON config file")

    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("--config", help="JSON config file (or metadata sidecar)")
    sweep.add_argument(
        "--figure",
        choices=FIGURE_IDS,
        help="run a bundled figure preset instead of the config's sweep section",
    )
    sweep.add_argument("--out", help="output directory (overrides the config)")
    sweep.add_argument(
        "--threads", type=int, default=0, help="worker threads, 0 = one per CPU (default)"
    )
    sweep.add_argument(
        "--format",
        choices=("csv", "json", "both"),
        help="results table format (overrides the config)",
    )
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "point":
            cfg = parse_config(_load_config_file(args.config))
            return _cmd_point(cfg)

        if args.config is None and args.figure is None:
            raise ConfigError("the sweep command needs --config, --figure, or both")
        if args.threads < 0:
            raise ConfigError(f"--threads must be non-negative, got {args.threads}")
        cfg = None
        if args.config is not None:
            cfg = parse_config(_load_config_file(args.config))
        else:
            cfg = parse_config(_figure_config(args.figure, None))
        if args.out is not None:
            cfg.directory = args.out
        if args.format is not None:
            cfg.fmt = args.format
        return _cmd_sweep(cfg, args.figure, args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

