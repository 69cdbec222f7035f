"""Command-line front end: design, simulate, analyze, and sweep scenarios.

Exit codes: 0 success, 2 configuration or file-format error, 3 infeasible
formation, 4 no spanning tree, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

import numpy as np

from . import center, design, presets
from .config import ScenarioConfig, load_config, parse_config
from .errors import (
    ConfigError,
    FormatError,
    Infeasible,
    InvalidLambda2,
    NoSpanningTree,
    NonFiniteState,
    NotHurwitz,
    NotPositiveDefinite,
)
from .eso import residual_gain
from .simulator import SimulationTrace, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NO_SPANNING_TREE = 4
EXIT_NUMERICAL = 5

PLOT_SCRIPT = """\
#!/usr/bin/env python
\"\"\"Offline plots for a simulation run: formation snapshots, center curves,
and the worst-deviation history. Expects trace.csv and center.csv next to it.
\"\"\"
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).resolve().parent


def read_table(path):
    with open(path) as fh:
        meta = dict(part.split("=") for part in fh.readline().split()[2:])
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {k: int(v) for k, v in meta.items()}, header, data


meta, header, data = read_table(here / "trace.csv")
n, nx = meta["agents"], meta["axes"]
col = {name: k for k, name in enumerate(header)}
t = data[:, col["t"]]

if nx >= 3:
    for kind in ("p", "v"):
        fig = plt.figure(figsize=(10, 8))
        for frame, t_snap in enumerate((0.0, t[-1] / 2, 3 * t[-1] / 4, t[-1])):
            ax = fig.add_subplot(2, 2, frame + 1, projection="3d")
            row = int(np.argmin(np.abs(t - t_snap)))
            for i in range(n):
                ax.scatter(*(data[row, col[f"{kind}{i}_{a}"]] for a in range(3)))
            ax.set_title(f"{kind} at t={t[row]:.1f}s")
        fig.savefig(here / f"snapshots_{kind}.png", dpi=120)

fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
for k in range(nx):
    axes[0].plot(t, data[:, col[f"kappa_{k}"]], label=f"axis {k}")
    axes[1].plot(t, data[:, col[f"kappa_{nx + k}"]], label=f"axis {k}")
axes[0].set_ylabel("center position")
axes[1].set_ylabel("center velocity")
axes[1].set_xlabel("t / s")
axes[0].legend()
fig.savefig(here / "center.png", dpi=120)

fig, ax = plt.subplots(figsize=(8, 4))
ax.semilogy(t, np.maximum(data[:, col["e"]], 1e-16))
ax.set_xlabel("t / s")
ax.set_ylabel("max deviation norm")
fig.savefig(here / "error.png", dpi=120)
print("wrote plots to", here)
"""


def _load_scenario_config(args) -> ScenarioConfig:
    if getattr(args, "preset", None):
        if getattr(args, "config", None):
            raise ConfigError("give either --config or --preset, not both")
        data = presets.build(args.preset)
        cfg = parse_config(data)
    elif getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        raise ConfigError("a scenario is required: pass --config FILE or --preset NAME")
    if getattr(args, "dt", None) is not None:
        cfg.dt = args.dt
    if getattr(args, "horizon", None) is not None:
        cfg.horizon = args.horizon
    if getattr(args, "lambda2_override", None) is not None:
        cfg.lambda2_override = args.lambda2_override
    if getattr(args, "eps_f", None) is not None:
        cfg.eps_f = args.eps_f
    if cfg.dt <= 0 or cfg.horizon <= 0:
        raise ConfigError("dt and horizon must be positive")
    return cfg


def _run_design(cfg: ScenarioConfig) -> design.DesignReport:
    return design.design(
        cfg.digraph,
        cfg.plant,
        cfg.formation,
        cfg.eps_f,
        cfg.sigmas,
        disturbance=cfg.disturbance,
        t_grid=cfg.feasibility_grid(),
        lambda2_override=cfg.lambda2_override,
    )


def cmd_design(args) -> int:
    cfg = _load_scenario_config(args)
    report = _run_design(cfg)
    sys.stdout.write(report.pretty())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "design.json").write_text(report.to_json())
        print(f"wrote {out / 'design.json'}")
    return EXIT_OK


def _summary(cfg: ScenarioConfig, report, trace) -> dict:
    t = trace.t
    tail = t >= 0.75 * t[-1]
    return {
        "label": cfg.label,
        "final_error": float(trace.error[-1]),
        "max_error_last_quarter": float(trace.error[tail].max()),
        "gain_row": [float(k) for k in report.gain_row],
        "lambda2_used": report.lambda2_used,
        "lambda2_actual": report.lambda2_re,
        "sigmas": [float(s) for s in report.sigmas],
        "dt": cfg.dt,
        "horizon": cfg.horizon,
        "decimation": cfg.decimation,
        "eso_enabled": cfg.eso_enabled,
    }


def cmd_simulate(args) -> int:
    cfg = _load_scenario_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        report = _run_design(cfg)
        trace = simulate(cfg.scenario(), report)
        decomposition = center.decompose(
            trace, report.left_null_vector, cfg.plant, cfg.formation
        )

        path = out / "design.json"
        path.write_text(report.to_json())
        written.append(path)
        path = out / "trace.csv"
        trace.to_csv(path)
        written.append(path)
        path = out / "center.csv"
        decomposition.to_csv(path)
        written.append(path)
        summary = _summary(cfg, report, trace)
        summary["max_center_residual"] = float(decomposition.residual.max())
        path = out / "summary.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        written.append(path)
        if args.plot_script:
            path = out / "plot_trace.py"
            path.write_text(PLOT_SCRIPT)
            written.append(path)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    print(
        f"simulated {cfg.label or 'scenario'}: final e = {summary['final_error']:.6g}, "
        f"max e on last quarter = {summary['max_error_last_quarter']:.6g}"
    )
    print(f"wrote {', '.join(str(p) for p in written)}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _load_scenario_config(args)
    trace = SimulationTrace.from_csv(args.trace)
    if trace.n_agents != cfg.digraph.n_agents or trace.n_axes != cfg.plant.n_axes:
        raise ConfigError(
            f"trace is for {trace.n_agents} agents x {trace.n_axes} axes but the "
            f"config declares {cfg.digraph.n_agents} x {cfg.plant.n_axes}"
        )
    report = _run_design(cfg)
    decomposition = center.decompose(
        trace, report.left_null_vector, cfg.plant, cfg.formation
    )
    verification = center.verify_decomposition(trace, decomposition, args.eps)

    table = []
    for entry in report.predicted_residuals:
        table.append(
            {
                "frequency": entry["frequency"],
                "magnitudes": entry["magnitudes"],
            }
        )
    analysis = {
        "eps": verification.eps,
        "max_center_residual": verification.max_residual,
        "t_eps": verification.t_eps,
        "residual_gain_table": table,
    }
    print(
        f"center reconstruction: max residual {verification.max_residual:.6g}, "
        f"eps {args.eps:g}, achieved from t = {verification.t_eps}"
    )
    for entry in table:
        mags = ", ".join(f"{m:.4f}" for m in entry["magnitudes"])
        print(f"predicted residual gain at {entry['frequency']:.4g} rad/s: {mags}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        decomposition.to_csv(outdir / "center.csv")
        (outdir / "analysis.json").write_text(
            json.dumps(analysis, indent=2, sort_keys=True) + "\n"
        )
        print(f"wrote {outdir / 'center.csv'}, {outdir / 'analysis.json'}")
    return EXIT_OK


def _set_by_path(data: dict, dotted: str, value: float) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"sweep parameter path {dotted!r} not found in config")
        node = node[key]
    if keys[-1] not in node and keys[-1] not in ("lambda2_override",):
        raise ConfigError(f"sweep parameter path {dotted!r} not found in config")
    node[keys[-1]] = value


def _run_variant(data: dict, out_dir: str) -> dict:
    """One sweep variant: design + simulate + files; returns a status record."""
    try:
        cfg = parse_config(data)
        report = _run_design(cfg)
        trace = simulate(cfg.scenario(), report)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "design.json").write_text(report.to_json())
        trace.to_csv(out / "trace.csv")
        summary = _summary(cfg, report, trace)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        return {"out": out_dir, "status": "ok", "final_error": summary["final_error"]}
    except Exception as exc:  # collected, not raised: other variants continue
        return {
            "out": out_dir,
            "status": "error",
            "error_class": type(exc).__name__,
            "message": str(exc),
            "exit_code": _exit_code_for(exc),
        }


def cmd_sweep(args) -> int:
    if args.preset:
        base = presets.build(args.preset)
    elif args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    else:
        raise ConfigError("a scenario is required: pass --config FILE or --preset NAME")

    values = [float(v) for v in args.values.split(",")]
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)

    jobs = []
    for value in values:
        data = json.loads(json.dumps(base))
        _set_by_path(data, args.param, value)
        label = f"{args.param.replace('.', '_')}_{value:g}"
        data["label"] = f"{data.get('label', 'sweep')}_{label}"
        jobs.append((data, str(out_root / label)))

    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_variant, *zip(*jobs)))
    else:
        results = [_run_variant(data, out_dir) for data, out_dir in jobs]

    (out_root / "sweep_summary.json").write_text(
        json.dumps(results, indent=2, sort_keys=True) + "\n"
    )
    failures = [r for r in results if r["status"] != "ok"]
    for r in results:
        status = r["status"] if r["status"] == "ok" else f"error ({r['error_class']})"
        print(f"{r['out']}: {status}")
    if failures:
        return failures[0].get("exit_code", EXIT_NUMERICAL)
    return EXIT_OK


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (ConfigError, FormatError)):
        return EXIT_CONFIG
    if isinstance(exc, Infeasible):
        return EXIT_INFEASIBLE
    if isinstance(exc, NoSpanningTree):
        return EXIT_NO_SPANNING_TREE
    if isinstance(exc, (NonFiniteState, NotPositiveDefinite, InvalidLambda2, NotHurwitz)):
        return EXIT_NUMERICAL
    return 1


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a scenario JSON file")
    parser.add_argument("--preset", help="bundled scenario name "
                        f"({', '.join(sorted(presets.PRESETS))})")
    parser.add_argument("--dt", type=float, help="override integrator step")
    parser.add_argument("--horizon", type=float, help="override simulation horizon")
    parser.add_argument("--lambda2-override", dest="lambda2_override", type=float,
                        help="inject this eigenvalue real part into the gain synthesis")
    parser.add_argument("--eps-f", dest="eps_f", type=float,
                        help="override the feasibility tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="formctl",
        description="Design and simulate robust time-varying formations "
        "for disturbed second-order multi-agent systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="run the design pipeline and print the report")
    _add_scenario_flags(p)
    p.add_argument("--out", help="directory for design.json")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="design, integrate, and export trace files")
    _add_scenario_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot-script", action="store_true",
                   help="also write a companion matplotlib script")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="verify the center decomposition of a trace")
    p.add_argument("trace", help="path to a trace.csv produced by simulate")
    _add_scenario_flags(p)
    p.add_argument("--out", help="directory for center.csv and analysis.json")
    p.add_argument("--eps", type=float, default=1e-2,
                   help="requested reconstruction bound (default 1e-2)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="run independent variants of one scenario")
    _add_scenario_flags(p)
    p.add_argument("--out", required=True, help="root output directory")
    p.add_argument("--param", required=True,
                   help="dotted config path to vary, e.g. eso.sigma or integrator.dt")
    p.add_argument("--values", required=True, help="comma-separated numeric values")
    p.add_argument("--workers", type=int, default=1,
                   help="number of parallel worker processes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        code = _exit_code_for(exc)
        if code == 1:
            raise
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, NonFiniteState) and exc.time is not None:
            payload["time"] = exc.time
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
