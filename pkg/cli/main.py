"""
Argument parsing and dispatch. Exit codes: 0 success, 2 usage or config
error, 3 data error, 4 numeric failure.
"""
import argparse
import logging
from pathlib import Path

from cli.handlers.compare import cmd_compare
from cli.handlers.data import cmd_gen_data
from cli.handlers.evaluate import cmd_cross_analysis, cmd_eval
from cli.handlers.train import cmd_train
from config import VERSION
from errors import CassError, exit_code_for

logger = logging.getLogger(__name__)


def _common(config_required: bool = True) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, required=config_required, help="experiment config file")
    parent.add_argument("--seed", type=int, default=None, help="override train.seed")
    parent.add_argument("--out", type=Path, default=None, help="output root (overrides output_dir)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cass", description="Component-wise adversarial source separation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[_common()], help="generate or ingest the dataset")
    p.add_argument("--force", action="store_true", help="regenerate even if the dataset exists")
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", parents=[_common()], help="train a model in the configured mode")
    p.add_argument("--resume", action="store_true", help="continue from the run's checkpoint")
    p.add_argument("--force", action="store_true", help="overwrite an existing run directory")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", parents=[_common()], help="relative p-norm error tables")
    p.add_argument("--checkpoint", type=Path, default=None, help="checkpoint directory (default: the run's)")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("cross-analysis", parents=[_common()], help="discriminators judged on other components")
    p.add_argument("--checkpoint", type=Path, default=None, help="checkpoint directory (default: the run's)")
    p.set_defaults(handler=cmd_cross_analysis)

    p = sub.add_parser("compare", parents=[_common(config_required=False)], help="overlay runs")
    p.add_argument("runs", nargs="+", help="run directories or config files")
    p.set_defaults(handler=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "compare" and args.config is not None:
        args.runs = [str(args.config), *args.runs]
    try:
        return args.handler(args)
    except CassError as e:
        logger.error(f"{args.command} failed: {e}")
        return exit_code_for(e)
