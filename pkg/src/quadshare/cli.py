"""Command-line entry points.

Exit codes: 0 success, 1 invalid config or arguments, 2 simulation diverged.
Heavy modules are imported inside the subcommands that need them so that
light subcommands (dump-tables, validate-config) stay fast.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise SystemExit(f"{flag}: expected comma-separated numbers, got {text!r}")
    if not values:
        raise SystemExit(f"{flag}: expected at least one value")
    return values


def _load(config_path: str | None):
    from .config import default_config, load_config

    if config_path is None:
        return default_config()
    return load_config(config_path)


def cmd_run(args: argparse.Namespace) -> int:
    from .config import ConfigInvalid
    from .errors import SimulationDiverged

    try:
        config = _load(args.config)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    mode = args.mode if args.mode is not None else config.mode
    seed = args.seed if args.seed is not None else config.seed

    from .experiment import run_experiment, write_telemetry

    try:
        result = run_experiment(config, mode, seed)
    except SimulationDiverged as exc:
        print(f"simulation diverged: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"run_{mode}_seed{seed}"
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    write_telemetry(result.rows, csv_path)
    summary = {
        "mode": mode,
        "seed": seed,
        "rows": len(result.rows),
        "telemetry": str(csv_path),
        "metrics": result.metrics.to_dict(),
    }
    json_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    import dataclasses
    import statistics

    from .config import ConfigInvalid
    from .errors import SimulationDiverged

    try:
        config = _load(args.config)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    accuracies = _parse_floats(args.accuracies, "--accuracies")
    t_recs = _parse_floats(args.t_recs, "--t-recs")
    latencies = _parse_floats(args.latencies, "--latencies")

    from .experiment import run_experiment

    cells = []
    for accuracy in accuracies:
        for t_rec in t_recs:
            for latency in latencies:
                cell_cfg = dataclasses.replace(
                    config,
                    channel=dataclasses.replace(
                        config.channel,
                        accuracy=accuracy,
                        t_rec=t_rec,
                        latency=latency,
                    ),
                )
                rms, completion, switches = [], [], []
                for seed in range(args.seeds):
                    try:
                        m = run_experiment(cell_cfg, args.mode, seed).metrics
                    except SimulationDiverged as exc:
                        print(f"simulation diverged: {exc}", file=sys.stderr)
                        return 2
                    rms.append(m.rms_xt)
                    completion.append(m.completion)
                    switches.append(m.switch_count)
                cell = {
                    "accuracy": accuracy,
                    "t_rec": t_rec,
                    "latency": latency,
                    "seeds": args.seeds,
                    "median_rms_xt": statistics.median(rms),
                    "median_completion": statistics.median(completion),
                    "mean_switch_count": statistics.fmean(switches),
                }
                cells.append(cell)
                print(
                    f"p={accuracy} t_rec={t_rec} latency={latency}: "
                    f"median rms_xt={cell['median_rms_xt']:.4f} "
                    f"median completion={cell['median_completion']:.4f}"
                )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep_path = out_dir / f"sweep_{args.mode}.json"
    sweep_path.write_text(json.dumps(cells, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {sweep_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .config import ConfigInvalid

    try:
        config = _load(args.config)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1

    from .errors import PortInUse
    from .service import serve

    try:
        serve(config, port=args.port, time_scale=args.time_scale)
    except PortInUse as exc:
        print(f"cannot serve: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_dump_tables(args: argparse.Namespace) -> int:
    from .tables import dump_all_tables

    print(dump_all_tables(), end="")
    return 0


def cmd_validate_config(args: argparse.Namespace) -> int:
    from .config import ConfigInvalid

    try:
        _load(args.config)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    print("config OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadshare",
        description="Shared-control quadrotor simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one batch experiment to CSV + JSON")
    run_p.add_argument("--config", default=None, help="JSON config path (defaults built in)")
    run_p.add_argument("--seed", type=int, default=None, help="override config seed")
    run_p.add_argument("--mode", choices=("brain", "auto", "shared"), default=None)
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.set_defaults(func=cmd_run)

    sweep_p = sub.add_parser("sweep", help="grid sweep over channel parameters")
    sweep_p.add_argument("--config", default=None)
    sweep_p.add_argument("--mode", choices=("brain", "auto", "shared"), default="shared")
    sweep_p.add_argument("--seeds", type=int, default=5, help="seeds per grid cell")
    sweep_p.add_argument("--accuracies", default="0.5,0.7,0.9")
    sweep_p.add_argument("--t-recs", dest="t_recs", default="1.0")
    sweep_p.add_argument("--latencies", default="0.3")
    sweep_p.add_argument("--out", default=".")
    sweep_p.set_defaults(func=cmd_sweep)

    serve_p = sub.add_parser("serve", help="live WebSocket session")
    serve_p.add_argument("--config", default=None)
    serve_p.add_argument("--port", type=int, default=None, help="override config port")
    serve_p.add_argument("--time-scale", dest="time_scale", type=float, default=None)
    serve_p.set_defaults(func=cmd_serve)

    dump_p = sub.add_parser("dump-tables", help="print the three 7x7 rule tables")
    dump_p.set_defaults(func=cmd_dump_tables)

    val_p = sub.add_parser("validate-config", help="check a config file and exit")
    val_p.add_argument("--config", default=None)
    val_p.set_defaults(func=cmd_validate_config)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
