"""Command line entry point: ``run``, ``demo`` and ``selftest``."""

import argparse
import logging
import os
import sys
from dataclasses import replace
from importlib import resources

from .config import ConfigError, load_config
from .grid import run_grid
from .io import emit_tradeoff_data, format_summary, write_csv

logger = logging.getLogger("unicode_lab")


def scenario_names():
    files = resources.files("unicode_lab.harness").joinpath("scenarios").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".toml"))


def scenario_path(name):
    ref = resources.files("unicode_lab.harness").joinpath("scenarios", f"{name}.toml")
    if not ref.is_file():
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(scenario_names())}")
    return ref


def execute(cfg, out_dir, *, quiet=False):
    """Run a loaded config and write ``results.csv``, ``summary.txt`` and tradeoff series."""
    table = run_grid(cfg)
    os.makedirs(out_dir, exist_ok=True)
    if len(table) == 0:
        raise RuntimeError(f"every run failed ({len(table.failures)} failures); nothing to write")
    csv_path = write_csv(table, os.path.join(out_dir, "results.csv"))
    summary = format_summary(table)
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary + "\n")
    for spec in cfg.tradeoff:
        group_by = tuple(spec.get("group_by", ()))
        name = spec.get("name") or f"{spec['y']}_vs_{spec['x']}" + ("_by_" + "_".join(group_by) if group_by else "")
        emit_tradeoff_data(table, spec["x"], spec["y"], os.path.join(out_dir, "tradeoff", name), group_by)
    if table.failures:
        with open(os.path.join(out_dir, "failures.txt"), "w", encoding="utf-8") as fh:
            for f in table.failures:
                fh.write(f"{f['cell']}\tseed={f['seed']}\treplicate={f['replicate']}\t{f['error']}\n")
    if not quiet:
        print(summary)
        print(f"\nwrote {csv_path} ({len(table)} rows, {len(table.failures)} failures)")
    return table


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = replace(cfg, seeds=[args.seed])
    return cfg


def cmd_run(args):
    cfg = _apply_overrides(load_config(args.config), args)
    execute(cfg, args.out or cfg.output, quiet=args.quiet)
    return 0


def cmd_demo(args):
    if args.list or not args.scenario:
        for name in scenario_names():
            print(name)
        return 0
    with resources.as_file(scenario_path(args.scenario)) as path:
        cfg = _apply_overrides(load_config(path), args)
    execute(cfg, args.out or os.path.join("demo_out", args.scenario), quiet=args.quiet)
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest

    return 0 if run_selftest(verbose=not args.quiet) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="unicode-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per cell")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="replace the config's seed list with one seed")
    run.add_argument("--out", help="output directory (default: the config's 'output')")
    run.add_argument("-q", "--quiet", action="store_true")
    run.set_defaults(func=cmd_run)

    demo = sub.add_parser("demo", help="run a packaged scenario")
    demo.add_argument("scenario", nargs="?")
    demo.add_argument("--list", action="store_true", help="list scenarios")
    demo.add_argument("--seed", type=int)
    demo.add_argument("--out")
    demo.add_argument("-q", "--quiet", action="store_true")
    demo.set_defaults(func=cmd_demo)

    st = sub.add_parser("selftest", help="run the built-in oracle checks")
    st.add_argument("-q", "--quiet", action="store_true")
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
