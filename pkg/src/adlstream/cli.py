"""Command-line front end: run, generate, compare, inspect.

Exit codes: 0 success, 1 configuration error, 2 I/O error. Flags
override an optional JSON config file (--config), which overrides the
built-in defaults; config keys are the flag names with dashes as
underscores (e.g. {"alpha_d": 0.001}).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .depth import DriftConfig
from .harness import ExperimentConfig, emit_reports, run_experiment
from .model import count_params, network_from_dict
from .pipeline import PipelineConfig
from .streams import CsvSchema, StreamSpec, dump_stream_csv, make_stream

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2

DEFAULTS = {
    "stream": "sea",
    "total": 50000,
    "batch_size": 500,
    "alpha_d": 0.0001,
    "alpha_w": 0.0005,
    "delta": 0.05,
    "zeta": 0.001,
    "lr": 0.05,
    "seed": 0,
    "reps": 1,
    "model": "adl",
    "noise": 0.1,
    "dim": 4,
    "separation": 6.0,
    "drift_at": None,  # None -> three drifts at 25.5%, 50.5%, 75.5% of the stream
    "label_col": "-1",
    "has_header": False,
    "out": None,
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


def _add_stream_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stream", help="sea | hyperplane | gaussians | csv:PATH")
    p.add_argument("--total", type=int, help="number of samples to generate")
    p.add_argument("--batch-size", type=int, help="samples per batch (>= 4)")
    p.add_argument("--drift-at", help="comma-separated sample indices of concept changes")
    p.add_argument("--noise", type=float, help="label noise rate (sea)")
    p.add_argument("--dim", type=int, help="feature dimension (hyperplane/gaussians)")
    p.add_argument("--separation", type=float, help="class mean separation (gaussians)")
    p.add_argument("--label-col", help="CSV label column, index or header name")
    p.add_argument("--has-header", action="store_true", default=None,
                   help="CSV file starts with a header row")
    p.add_argument("--seed", type=int, help="base seed")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-d", type=float, help="drift significance level")
    p.add_argument("--alpha-w", type=float, help="warning significance level")
    p.add_argument("--delta", type=float, help="layer redundancy threshold")
    p.add_argument("--zeta", type=float, help="voting factor step size")
    p.add_argument("--lr", type=float, help="SGD learning rate")
    p.add_argument("--reps", type=int, help="repetitions (seeds base, base+1, ...)")
    p.add_argument("--model", help="adl | fixed:SIZES (e.g. fixed:16,8)")
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--config", help="JSON config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adlstream", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")
    run_p = sub.add_parser("run", help="run a prequential experiment")
    _add_stream_flags(run_p)
    _add_run_flags(run_p)
    gen_p = sub.add_parser("generate", help="dump a stream to CSV")
    _add_stream_flags(gen_p)
    gen_p.add_argument("--dump", required=True, help="target CSV path")
    gen_p.add_argument("--config", help="JSON config file; flags override it")
    cmp_p = sub.add_parser("compare", help="paired adl vs fixed baseline run")
    _add_stream_flags(cmp_p)
    _add_run_flags(cmp_p)
    cmp_p.add_argument("--fixed-sizes", help="hidden sizes for the baseline, e.g. 16,8")
    ins_p = sub.add_parser("inspect", help="summarize a model snapshot or report log")
    ins_p.add_argument("path", help="model .json or reports .jsonl file")
    return parser


def _settings(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"config file is not valid JSON: {exc}")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _parse_drift_schedule(text, total: int) -> list[tuple[int, int]]:
    if text is None:
        # off-center defaults so changes land mid-batch, where the
        # detector can see the transition inside one window
        return [(int(total * f), i + 1) for i, f in enumerate((0.255, 0.505, 0.755)) if int(total * f) > 0]
    text = str(text)
    if not text.strip():
        return []
    schedule = []
    for i, token in enumerate(text.split(",")):
        try:
            schedule.append((int(token.strip()), i + 1))
        except ValueError:
            raise CliError(f"--drift-at: cannot parse index {token.strip()!r}")
    return schedule


def _stream_spec(settings: dict) -> StreamSpec:
    kind = settings["stream"]
    params: dict = {}
    if kind.startswith("csv:"):
        path = kind.split(":", 1)[1]
        label_col = settings["label_col"]
        try:
            label_col = int(label_col)
        except (TypeError, ValueError):
            pass
        params = {
            "path": path,
            "schema": CsvSchema(
                label_column=label_col, has_header=bool(settings["has_header"])
            ),
        }
        kind = "csv"
    elif kind == "sea":
        params = {"noise": settings["noise"]}
    elif kind == "hyperplane":
        params = {"dim": settings["dim"]}
    elif kind == "gaussians":
        params = {"dim": settings["dim"], "separation": settings["separation"]}
    else:
        raise CliError(f"--stream: unknown stream {settings['stream']!r}")
    if kind == "csv":
        schedule = []
    else:
        schedule = _parse_drift_schedule(settings["drift_at"], settings["total"])
    try:
        return StreamSpec(
            kind=kind,
            total=settings["total"],
            batch_size=settings["batch_size"],
            drift_schedule=schedule,
            seed=settings["seed"],
            params=params,
        )
    except ValueError as exc:
        raise CliError(str(exc))


def _experiment_config(settings: dict) -> ExperimentConfig:
    try:
        drift = DriftConfig(
            alpha_drift=settings["alpha_d"],
            alpha_warning=settings["alpha_w"],
            delta_mici=settings["delta"],
        )
        pipeline = PipelineConfig(
            drift=drift,
            zeta=settings["zeta"],
            learning_rate=settings["lr"],
            seed=settings["seed"],
        )
    except ValueError as exc:
        raise CliError(f"invalid configuration: {exc}")
    model = settings["model"]
    fixed_layers = [10]
    if model.startswith("fixed:"):
        try:
            fixed_layers = [int(s) for s in model.split(":", 1)[1].split(",")]
        except ValueError:
            raise CliError(f"--model: cannot parse sizes in {model!r}")
        model = "fixed_dnn"
    elif model == "fixed_dnn":
        pass
    elif model != "adl":
        raise CliError(f"--model: expected adl or fixed:SIZES, got {model!r}")
    try:
        return ExperimentConfig(
            stream=_stream_spec(settings),
            pipeline=pipeline,
            model=model,
            fixed_layers=fixed_layers,
            repetitions=settings["reps"],
            out_dir=settings["out"],
        )
    except ValueError as exc:
        raise CliError(str(exc))


def cmd_run(args: argparse.Namespace) -> int:
    config = _experiment_config(_settings(args))
    summary, _, _ = run_experiment(config)
    print(
        f"{summary.model} on {summary.stream_kind}: rate {summary.rate_mean:.4f} "
        f"+/- {summary.rate_std:.4f} | HL {summary.hl_mean:.2f} HN {summary.hn_mean:.2f} "
        f"NoP {summary.nop_mean:.0f} | ET {summary.wall_time_ms:.0f} ms"
    )
    if config.out_dir:
        print(f"reports written to {config.out_dir}")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    settings = _settings(args)
    spec = _stream_spec(settings)
    if spec.kind == "csv":
        raise CliError("generate needs a synthetic stream kind, not csv")
    rows = dump_stream_csv(make_stream(spec), args.dump)
    print(f"wrote {rows} rows to {args.dump}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    settings = _settings(args)
    if getattr(args, "fixed_sizes", None):
        settings["model"] = "fixed:" + args.fixed_sizes
    else:
        settings["model"] = "fixed:10"
    fixed_config = _experiment_config(settings)
    settings["model"] = "adl"
    adl_config = _experiment_config(settings)
    adl_config.out_dir = None
    fixed_config.out_dir = None

    adl_summary, adl_reports, _ = run_experiment(adl_config)
    fixed_summary, fixed_reports, _ = run_experiment(fixed_config)
    if adl_summary.stream_digest != fixed_summary.stream_digest:
        raise RuntimeError("paired runs consumed different streams")

    out = settings["out"]
    for summary in (adl_summary, fixed_summary):
        print(
            f"{summary.model}: rate {summary.rate_mean:.4f} +/- {summary.rate_std:.4f} "
            f"| HL {summary.hl_mean:.2f} HN {summary.hn_mean:.2f}"
        )
    if out:
        out_path = Path(out)
        emit_reports([adl_summary, fixed_summary], adl_reports, out_path)
        delta_path = out_path / "delta.csv"
        with open(delta_path, "w", newline="") as fh:
            fh.write("rep,batch,adl_rate,fixed_rate,delta\n")
            for rep, (a_rep, f_rep) in enumerate(zip(adl_reports, fixed_reports)):
                for a, f in zip(a_rep, f_rep):
                    fh.write(
                        f"{rep},{a.batch},{a.rate:.6f},{f.rate:.6f},{a.rate - f.rate:.6f}\n"
                    )
        print(f"comparison written to {out}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.path)
    if not path.exists():
        raise OSError(f"no such file: {path}")
    if path.suffix == ".jsonl":
        rates, statuses = [], []
        with open(path) as fh:
            for line in fh:
                doc = json.loads(line)
                rates.append(doc["rate"])
                statuses.append(doc["drift_status"])
        n = len(rates)
        drifts = sum(1 for s in statuses if s == "drift")
        warnings = sum(1 for s in statuses if s == "warning")
        print(f"{n} batch reports | mean rate {sum(rates) / max(n, 1):.4f} "
              f"| drifts {drifts} | warnings {warnings}")
        return EXIT_OK
    with open(path) as fh:
        net = network_from_dict(json.load(fh))
    hl, hn, nop = count_params(net)
    sizes = [layer.nodes for layer in net.layers]
    print(f"network: n={net.n} m={net.m} layers={sizes} active={net.output_active.tolist()}")
    print(f"HL={hl} HN={hn} NoP={nop}")
    print(f"beta={[round(float(b), 6) for b in net.beta]}")
    print(f"p={[round(float(v), 6) for v in net.p]}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_CONFIG
        handler = {
            "run": cmd_run,
            "generate": cmd_generate,
            "compare": cmd_compare,
            "inspect": cmd_inspect,
        }[args.command]
        return handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
