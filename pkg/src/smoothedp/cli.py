"""Command line entry point: ``smoothedp <subcommand> [options]``.

Exit status: 0 when every asserted bound holds, 1 on a violation, 2 on a
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .codec import codec_report
from .dist import family_from_json
from .harness import ConfigError, ExperimentConfig, run_campaign


def _grid(text: str) -> list[int]:
    lo, hi, step = (int(x) for x in text.split(":"))
    return list(range(lo, hi + 1, step))


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--out", default=None, help="CSV output path (stdout when omitted)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON config; its fields override flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothedp")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="adaptive bit-revealing solver campaign")
    _common(p)
    p.add_argument("--structure", default="subsets")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--W", type=int, default=None)
    p.add_argument("--rho", type=int, default=1)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--b0", type=int, default=None)

    p = sub.add_parser("gapsim", help="Monte Carlo winner/loser gap probabilities")
    _common(p)
    p.add_argument("--structure", default="subsets")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--W", type=int, default=None)
    p.add_argument("--rho", type=int, default=1)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--delta-grid", type=_grid, default=None, help="lo:hi:step")
    p.add_argument("--ranking", choices=["lex", "scrambled"], default="lex")

    p = sub.add_parser("colorsim", help="k-coloring on perturbed graphs")
    _common(p)
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--phi-exp", type=int, default=None, help="phi = 2^-e")
    p.add_argument("--eps", dest="eps_flip", default=None, help="flip probability, overrides --phi-exp")
    p.add_argument("--additive", action="store_true")

    p = sub.add_parser("codec-check", help="exhaustive compression checks for a family file")
    p.add_argument("--family", required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("scheme-sim", help="bottom rates of the budgeted heuristic scheme")
    _common(p)
    p.add_argument("--inner", choices=["solve", "color"], default="solve")
    p.add_argument("--delta-grid", dest="deltas", type=lambda s: s.split(","), default=None,
                   help="comma-separated fractions, e.g. 1/2,1/4,1/8")
    p.add_argument("--eps", default="1/3")
    p.add_argument("--structure", default="subsets")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--W", type=int, default=None)
    p.add_argument("--rho", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--phi-exp", type=int, default=None)

    p = sub.add_parser("tailcheck", help="running-time tail curve and moment estimate")
    _common(p)
    p.add_argument("--structure", default="subsets")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--W", type=int, default=None)
    p.add_argument("--rho", type=int, default=1)
    p.add_argument("--eps", default="1/2")
    p.add_argument("--c", type=int, default=3)
    return parser


def _config(args: argparse.Namespace) -> ExperimentConfig:
    fields = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    fields["target"] = args.command
    if args.config:
        with open(args.config) as fh:
            fields.update(json.load(fh))
        fields["target"] = args.command
    return ExperimentConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "codec-check":
        try:
            with open(args.family) as fh:
                family = family_from_json(json.load(fh))
            report = codec_report(family)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        text = json.dumps(report, sort_keys=True)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        ok = report["injective"] and report["lengths_ok"] and report["disjoint"] and not report["roundtrip_failures"]
        return 0 if ok else 1
    try:
        cfg = _config(args)
        result = run_campaign(cfg)
    except (ConfigError, TypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        result.write(cfg.out)
    else:
        sys.stdout.write(result.to_csv())
    print(json.dumps(result.summary, sort_keys=True, default=str), file=sys.stderr)
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
