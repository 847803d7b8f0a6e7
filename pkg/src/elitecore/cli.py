"""Command-line entry point: ``elitecore <subcommand> [--config PATH] [--workers N] [--out DIR] [--seed S]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .pipeline import ConfigError, Pipeline, PipelineConfig, PipelineError, load_inputs, materialize_inputs, \
    sensitivity_sweep

STAGE_OF = {
    "brokerage": "network",
    "kcore": "network",
    "rank": "rank",
    "panel": "panel",
    "fit": "fit",
    "report": "report",
    "pipeline": "report",
}


def _globals() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="pipeline config JSON")
    p.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="month-level worker processes")
    p.add_argument("--out", default=argparse.SUPPRESS, help="artifact directory")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for synthetic inputs")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _globals()
    parser = argparse.ArgumentParser(prog="elitecore", parents=[common],
                                     description="Network-elite detection from board registries.")
    parser.add_argument("--print-config", action="store_true", help="print the default config and exit")
    sub = parser.add_subparsers(dest="command")

    s = sub.add_parser("synth", parents=[common], help="write a synthetic registry")
    s.add_argument("--preset", choices=("desk", "population"), default="desk")

    s = sub.add_parser("snapshot", parents=[common], help="write monthly co-board edge lists")
    s.add_argument("--month", action="append", help="YYYY-MM (repeatable; default: every study month)")

    for name, text in (("brokerage", "prune brokers per month"), ("kcore", "weighted k-core per month"),
                       ("rank", "PCA company and corporation ranks"), ("panel", "director-month panel"),
                       ("fit", "estimate configured models"), ("report", "figure data"),
                       ("pipeline", "run every stage")):
        sub.add_parser(name, parents=[common], help=text)

    s = sub.add_parser("sweep", parents=[common], help="sensitivity sweep over one config key")
    s.add_argument("--key", required=True)
    s.add_argument("--values", required=True, help="comma-separated values, or a JSON list")
    return parser


def _parse_values(text: str) -> list:
    text = text.strip()
    if text.startswith("["):
        return json.loads(text)
    if not text:
        return []
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(json.loads(tok))
        except json.JSONDecodeError:
            out.append(tok)
    return out


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.print_config:
        print(json.dumps(PipelineConfig().to_dict(), indent=2, sort_keys=True))
        return 0
    if not args.command:
        parser.print_help()
        return 2
    out = Path(getattr(args, "out", None) or "artifacts")
    try:
        cfg = _load_config(args)
        if args.command == "synth":
            from .synth import SynthConfig, generate_registry, write_registry

            doc = dict(cfg.synth)
            if cfg.seed is not None:
                doc["seed"] = cfg.seed
            if args.preset == "population":
                scfg = SynthConfig.population_scale(**doc)
            else:
                scfg = SynthConfig.from_dict(doc)
            write_registry(generate_registry(scfg), out)
            print(f"synth: wrote {out}")
            return 0
        if args.command == "snapshot":
            return _snapshot(cfg, out, args.month)
        if args.command == "sweep":
            cfg.validate()
            frame = sensitivity_sweep(cfg, args.key, _parse_values(args.values), out, print)
            print(frame.to_csv(index=False), end="")
            return 0
        Pipeline(cfg, out).run(STAGE_OF[args.command])
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _snapshot(cfg: PipelineConfig, out: Path, months: list[str] | None) -> int:
    from .graph import project_coboard, write_edgelist
    from .registry import MonthIndex

    cfg.validate()
    out.mkdir(parents=True, exist_ok=True)
    inputs = load_inputs(materialize_inputs(cfg, out))
    wanted = [MonthIndex.parse(m) for m in months] if months else inputs.months
    for m in wanted:
        g = project_coboard(inputs.index.snapshot(m))
        path = out / "months" / str(m) / "coboard.tsv"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_edgelist(g, path)
        print(f"snapshot {m}: {g.n} directors, {g.num_edges()} ties")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
