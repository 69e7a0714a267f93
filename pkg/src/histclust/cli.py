"""Command-line entry point.

Exit codes: 0 on success, 1 on a configuration error, 2 when ``selftest``
finds a failing check.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError
from .experiments import (
    ExperimentConfig,
    parse_n_grid,
    rows_to_csv,
    run_adaptive,
    run_rates,
    run_single,
    selftest,
    to_json,
)

# CLI flag -> config key, for flags whose names differ
_RENAMES = {"rho_star": "rho_star", "n_grid": "n_grid", "mode": "rate_mode"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _float(text: str) -> float:
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("distribution")
    g.add_argument("--theta", type=_float, help="valley exponent (inf allowed)")
    g.add_argument("--beta", type=_float, help="shoulder exponent (inf allowed)")
    g.add_argument("--rho-star", dest="rho_star", type=float, help="valley level in [0, 1/6)")
    g.add_argument("--dim", type=int, choices=(1, 2))
    r = common.add_argument_group("run")
    r.add_argument("--n", type=int, help="sample size")
    r.add_argument("--reps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--C", dest="C", type=float)
    r.add_argument("--gamma", type=float)
    r.add_argument("--varsigma", type=float)
    r.add_argument("--workers", type=int)
    o = common.add_argument_group("output")
    o.add_argument("--out", help="write here instead of stdout")
    o.add_argument("--format", choices=("json", "csv"))
    o.add_argument("--config", help="JSON file with the same keys; flags win")

    parser = _Parser(prog="histclust", description="Histogram level-set clustering experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    single = sub.add_parser("single", parents=[common], help="one run with theory or manual parameters")
    single.add_argument("--delta", type=float, help="cell width in unit-box coordinates")
    single.add_argument("--eps", type=float)
    single.add_argument("--tau", type=float)
    sub.add_parser("adaptive", parents=[common], help="data-driven width selection")
    rates = sub.add_parser("rates", parents=[common], help="Monte-Carlo rate study")
    rates.add_argument("--n-grid", dest="n_grid", help="a:b:steps, geometric")
    rates.add_argument("--mode", choices=("oracle", "adaptive"))
    sub.add_parser("selftest", parents=[common], help="built-in property checks")
    return parser


def config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data = dict(data)
    if data.get("mode") in ("oracle", "adaptive"):
        data["rate_mode"] = data.pop("mode")
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        if key == "n_grid":
            value = parse_n_grid(value)
        data[_RENAMES.get(key, key)] = value
    data["mode"] = args.command
    if args.command == "selftest":
        data.setdefault("n", 1)
    return ExperimentConfig.from_dict(data)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = config_from_args(args)
        fmt = config.format or ("csv" if config.mode == "rates" else "json")
        if fmt == "csv" and config.mode != "rates":
            raise ConfigError("csv output is only available for rates")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    if config.mode == "selftest":
        results = selftest(config.seed)
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        return 0 if all(ok for _, ok, _ in results) else 2
    if config.mode == "single":
        _emit(to_json(run_single(config)), config.out)
    elif config.mode == "adaptive":
        _emit(to_json(run_adaptive(config)), config.out)
    else:
        report = run_rates(config, strict=False)
        for name, fit in report.fitted.items():
            shown = "underdetermined" if fit is None else f"slope {fit['slope']:.4f} (se {fit['stderr']:.4f})"
            print(f"{name}: {shown}", file=sys.stderr)
        _emit(rows_to_csv(report.rows) if fmt == "csv" else to_json(report.to_dict()), config.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
