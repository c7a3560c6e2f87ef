"""Command line entry point: ``skewrot list`` and ``skewrot run``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .experiments import ExperimentConfig, _fmt, list_experiments, run

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skewrot", description="Skew-rotation and squares experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    r = sub.add_parser("run", help="run one experiment")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON config file")
    src.add_argument("--experiment", help="registered experiment name")
    r.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter (repeatable)")
    r.add_argument("--n-steps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--output-prefix")
    return ap


def _load_config(args) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {args.config}: {exc}") from None
    else:
        data = {"experiment": args.experiment, "parameters": {}}
    cfg = ExperimentConfig.from_dict(data)
    params = dict(cfg.parameters)
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        params[key.strip()] = value
    return ExperimentConfig(
        cfg.experiment, params,
        args.n_steps if args.n_steps is not None else cfg.n_steps,
        args.seed if args.seed is not None else cfg.seed,
        args.output_prefix or cfg.output_prefix,
    )


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name, desc, params in list_experiments():
            print(f"{name}\t{desc}\t{','.join(params)}")
        return EXIT_OK
    try:
        bundle = run(_load_config(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # module failures map to the runtime exit code
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for key in sorted(bundle.summary):
        print(f"{key}={_fmt(bundle.summary[key])}")
    for path in bundle.csv_paths:
        print(f"csv={path}")
    for path in bundle.svg_paths:
        print(f"svg={path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
