"""Command line front end: scg-lab <subcommand> [--config FILE] [flags].

Each subcommand builds an ExperimentSpec, runs it, and prints a JSON summary
to stdout. Precedence: per-command preset defaults, then the config file,
then flags. The nnc and delay commands default to the reference figure
parameters, so reproducing those sweeps is a single command.
"""

from __future__ import annotations

import argparse
import json
import sys

from scglab import analytics, harness
from scglab.model import ModelParams, SimConfig, Window, build_from_mapping, \
    parse_config_file


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value parameter file")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--trials", type=int)
    sub.add_argument("--slot-cap", type=int, dest="slot_cap")
    sub.add_argument("--ed-mode", dest="ed_mode", choices=["static", "per_slot_iid"])
    sub.add_argument("--out", default="out", help="output directory")
    sub.add_argument("--workers", type=int, default=1)
    for name in ("lambda-l", "lambda-e", "p", "eta", "beta-l", "beta-e"):
        sub.add_argument(f"--{name}", type=float, dest=name.replace("-", "_"))
    for name in ("x-min", "y-min", "x-max", "y-max", "guard-margin"):
        sub.add_argument(f"--{name}", type=float, dest=name.replace("-", "_"))


def _load(args, command: str) -> tuple[ModelParams, Window, SimConfig]:
    values = dict(harness.PRESET_DEFAULTS.get(command, {}))
    if args.config:
        values.update(parse_config_file(args.config))
    overrides = {key: getattr(args, key, None)
                 for key in ("lambda_l", "lambda_e", "p", "eta", "beta_l",
                             "beta_e", "x_min", "y_min", "x_max", "y_max",
                             "guard_margin", "seed", "trials", "slot_cap",
                             "ed_mode")}
    return build_from_mapping(values, overrides)


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scg-lab",
        description="Monte Carlo and closed-form analysis of secure "
                    "connectivity in slotted-ALOHA networks with eavesdroppers")
    subs = parser.add_subparsers(dest="command", required=True)

    deg = subs.add_parser("degree", help="Palm degree Monte Carlo vs formula")
    _common_flags(deg)
    deg.add_argument("--directions", default="out,in")

    nnc = subs.add_parser("nnc", help="nearest-neighbor connectivity time sweep")
    _common_flags(nnc)
    nnc.add_argument("--p-values", default="0.25,0.5,0.75")
    nnc.add_argument("--ratios", default="0.3,0.5,0.8,1.2,1.6,2.2,3.2,4.5",
                     help="lambda_l/lambda_e sweep values")
    nnc.add_argument("--per-trial-csv", action="store_true",
                     help="also dump one row per trial")

    dly = subs.add_parser("delay", help="routed delay vs distance")
    _common_flags(dly)
    dly.add_argument("--distances", default="2,4,6,8,10")
    dly.add_argument("--pairs", default="0.3:1,0.5:1,0.3:2",
                     help="comma list of p:eta variants")

    spl = subs.add_parser("split-compare", help="splitting vs direct routing")
    _common_flags(spl)
    spl.add_argument("--span", type=float, default=6.0,
                     help="anchor separation")

    perc = subs.add_parser("percolation", help="crossing probability sweep")
    _common_flags(perc)
    perc.add_argument("--ratios", default="0.5,1,2,4,8,16")

    form = subs.add_parser("formulas", help="print closed-form values as JSON")
    _common_flags(form)
    form.add_argument("--d", type=float, help="witness distance for bounds")
    form.add_argument("--eps", type=float)
    form.add_argument("--delta", type=float)
    form.add_argument("--delta-cross", type=float, dest="delta_cross", default=0.98)
    form.add_argument("--d-cross", type=float, dest="d_cross", default=1.0)
    return parser


def _options(args) -> dict:
    options: dict = {}
    if args.command == "degree":
        options["directions"] = [d.strip() for d in args.directions.split(",")]
    elif args.command == "nnc":
        options["p_values"] = _floats(args.p_values)
        options["ratios"] = _floats(args.ratios)
        options["per_trial_csv"] = args.per_trial_csv
    elif args.command == "delay":
        options["distances"] = _floats(args.distances)
        options["pairs"] = [tuple(float(x) for x in tok.split(":"))
                            for tok in args.pairs.split(",")]
    elif args.command == "split-compare":
        options["span"] = args.span
    elif args.command == "percolation":
        options["ratios"] = _floats(args.ratios)
    elif args.command == "formulas" and args.d is not None:
        if args.eps is None or args.delta is None:
            raise SystemExit("formulas: --d requires --eps and --delta")
        options["bound_inputs"] = analytics.BoundInputs(
            d=args.d, eps=args.eps, delta=args.delta,
            delta_cross=args.delta_cross, d_cross=args.d_cross)
    return options


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    params, window, config = _load(args, args.command)
    spec = harness.ExperimentSpec(
        kind=args.command.replace("-", "_"), params=params, window=window,
        config=config, output_dir=args.out, options=_options(args),
        workers=args.workers)
    summary = harness.run(spec)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
