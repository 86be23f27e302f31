"""Command-line entry point: ``kgcausal <subcommand> [flags]``.

Subcommands mirror the pipeline stages (generate, discover, evaluate,
counterfactual) plus ``pipeline`` which chains them. Flags can also come
from a ``key = value`` config file given with ``--config``; flags on the
command line win.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 a solver
flagged non-convergence (results are still written).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import CatalogMismatch, ConfigError, DegenerateColumn, KgCausalError, ProviderError
from .pipeline import (ALGORITHMS, BUNDLED, MODES, PipelineConfig, cmd_counterfactual, cmd_discover,
                       cmd_evaluate, cmd_generate, cmd_pipeline, config_from_mapping, parse_config_file)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_CONVERGENCE = 0, 2, 3, 4

RETURN_VARS = ("Monthly_Return",)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; command-line flags override it")
    p.add_argument("--out", help="output directory (default runs/default)")
    p.add_argument("--seeds", help="comma-separated generator seeds (default 42)")
    p.add_argument("--n-firms", dest="n_firms", type=int)
    p.add_argument("--n-periods", dest="n_periods", type=int)
    p.add_argument("--data", help="cross-section CSV instead of the seed's generated file")
    p.add_argument("--truth", help="ground-truth JSON (default: the bundled coefficient table)")
    p.add_argument("-v", "--verbose", action="store_true")


def _discovery(p: argparse.ArgumentParser, fixture_default=None) -> None:
    p.add_argument("--mode", choices=[*MODES, "all"])
    p.add_argument("--algorithm", choices=[*ALGORITHMS, "all"])
    p.add_argument("--kg", help=f"KG evidence JSON ('{BUNDLED}' for the shipped file)")
    p.add_argument("--provider", choices=["replay", "live"])
    p.add_argument("--fixture", default=fixture_default,
                   help=f"replay fixture JSONL ('{BUNDLED}' for the shipped file)")
    p.add_argument("--record", help="append live responses to this JSONL file")
    p.add_argument("--runs", type=int, help="LLM runs per mode (default 5)")
    p.add_argument("--workers", type=int, help="parallel discovery jobs (default 1)")


def _counterfactual(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="graph JSON (default: the seed's notears/kg+llm run 0)")
    p.add_argument("--scenarios", help="scenario JSON (default: the seed's generated file)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgcausal", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("generate", help="write the synthetic panel, cross-section, truth and scenarios")
    _common(p)
    p = sub.add_parser("discover", help="run algorithm x constraint-mode discovery")
    _common(p)
    _discovery(p)
    p = sub.add_parser("evaluate", help="score discovered graphs against the ground truth")
    _common(p)
    p = sub.add_parser("counterfactual", help="fit an SCM on a graph and score the scenarios")
    _common(p)
    _counterfactual(p)
    p = sub.add_parser("pipeline", help="generate, discover, evaluate and counterfactual in one go")
    _common(p)
    _discovery(p, fixture_default=BUNDLED)
    _counterfactual(p)
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file values overlaid with explicit flags, then validated."""
    values = parse_config_file(args.config) if args.config else {}
    skip = {"command", "config", "verbose"}
    values.update({k: v for k, v in vars(args).items() if k not in skip and v is not None})
    cfg = config_from_mapping(values)
    cfg.validate(discovery=args.command in ("discover", "pipeline"))
    return cfg


def _print_counterfactual(summaries) -> None:
    for seed, sm in summaries:
        print(f"seed {seed}: MAE {sm.mae:.6f}, directional accuracy {sm.directional_accuracy:.3f}")
        for r in sm.results:
            sc = r.scenario
            line = f"  {sc.label:<28} predicted {r.predicted_effect:+.6f}  true {r.true_effect:+.6f}"
            if sc.target_var in RETURN_VARS:
                line += f"  ({r.predicted_effect * 1e4:+.1f} bp vs {r.true_effect * 1e4:+.1f} bp)"
            print(line)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "generate":
            for path in cmd_generate(cfg):
                print(path)
            return EXIT_OK
        if args.command == "discover":
            return EXIT_OK if cmd_discover(cfg) else EXIT_CONVERGENCE
        if args.command == "evaluate":
            for path in cmd_evaluate(cfg):
                if path.name == "comparison.txt":
                    print(path.read_text(), end="")
            return EXIT_OK
        if args.command == "counterfactual":
            _print_counterfactual(cmd_counterfactual(cfg))
            return EXIT_OK
        ok, cf = cmd_pipeline(cfg)
        _print_counterfactual(cf)
        print(json.dumps({"out": cfg.out, "converged": ok}))
        return EXIT_OK if ok else EXIT_CONVERGENCE
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, CatalogMismatch, DegenerateColumn, ValueError, KeyError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ProviderError, KgCausalError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
