"""Command line entry point.

Exit status: 0 success, 2 invalid config, 3 budget exceeded or bound
hypothesis violated, 1 any other failure.
"""

import argparse
import json
import sys

from ..bounds import CAI_THRESHOLD
from ..errors import BudgetError, InapplicableError
from ..signals import sparsity_count
from .config import ConfigError, load_config
from .experiments import expected_rows, run_experiment
from .output import write_outputs
from .presets import PRESETS, preset


def derived(cfg):
    """Quantities implied by the config, without running anything."""
    info = {"rows": expected_rows(cfg)}
    if cfg.is_cacti:
        n = cfg.dims["n1"] * cfg.dims["n2"]
        info["dictionary"] = f"{n} x {n * cfg.T}"
        info["k"] = {str(s): sparsity_count(s, n * cfg.T) for s in cfg.sparsities}
    else:
        info["matrix"] = f"{cfg.dims['m']} x {cfg.dims['n']}"
        if cfg.sparsities:
            info["k"] = {str(s): sparsity_count(s, cfg.dims["n"]) for s in cfg.sparsities}
    if cfg.experiment.startswith("trace"):
        info["n_x"] = "run-time: greatest integer strictly below (1 + 1/mu)/2"
    if cfg.experiment == "ric-looseness":
        info["hypothesis"] = f"run-time: delta_k < {CAI_THRESHOLD}"
    return info


def cmd_validate(args):
    cfg = load_config(args.config)
    print(f"{args.config}: ok")
    print(json.dumps({"config": cfg.to_dict(), "derived": derived(cfg)}, indent=2, default=str))
    return 0


def cmd_run(args):
    cfg = load_config(args.config)
    out = args.output_dir or cfg.output_dir
    table = run_experiment(cfg)
    for p in write_outputs(table, cfg, out, plots=not args.no_plots):
        print(p)
    return 0


def cmd_presets(args):
    if args.action == "list":
        width = max(map(len, PRESETS))
        for name, (desc, _) in PRESETS.items():
            print(f"{name:<{width}}  {desc}")
    else:
        if not args.name:
            print("presets show needs a preset name", file=sys.stderr)
            return 2
        try:
            print(json.dumps(preset(args.name), indent=2))
        except KeyError as exc:
            print(exc.args[0], file=sys.stderr)
            return 2
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="boundlab", description="Sensing-matrix bound looseness experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("-o", "--output-dir", help="override the config's output_dir")
    r.add_argument("--no-plots", action="store_true", help="skip the SVG figures")
    r.set_defaults(fn=cmd_run)
    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("config")
    v.set_defaults(fn=cmd_validate)
    s = sub.add_parser("presets", help="list or print the bundled configs")
    s.add_argument("action", choices=("list", "show"))
    s.add_argument("name", nargs="?")
    s.set_defaults(fn=cmd_presets)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BudgetError, InapplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
