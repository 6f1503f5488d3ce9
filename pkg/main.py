"""
spanray: sample, certify and test group-invariant spanning double rays.

    python main.py sample-tiling --radius 20 --seed 7 --verify
    python main.py sweep-cube --max-vertices 7 --exhaustive-orders 5
    python main.py invariance --construction tiling --N 10000 --alpha 0.01
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from core.exceptions import ConfigurationError
from core.plugin_loader import ConstructionLoader
from models import Command
from services.runner import ExperimentRunner, resolve_config
from settings import get_settings

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_USAGE = 2
EXIT_UNEXPECTED = 3


def _add_common(p: argparse.ArgumentParser):
    # defaults stay None so that only explicit flags override the config file
    p.add_argument("--config", default=None, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", dest="output_dir", default=None, help="Output directory (env SPANRAY_OUTPUT_DIR)")
    p.add_argument("--workers", type=int, default=None)


def _add_window(p: argparse.ArgumentParser):
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--margin", type=int, default=None)


def _add_sampling(p: argparse.ArgumentParser):
    _add_window(p)
    p.add_argument("--N", "--samples", dest="samples", type=int, default=None)
    p.add_argument("--verify", action="store_true", default=None)
    p.add_argument("--no-render", dest="render", action="store_false", default=None)
    p.add_argument("--subtrees", type=int, default=None)
    p.add_argument("--max-subtree-tiles", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spanray", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(Command.SAMPLE_TILING.value, help="Pair of spanning double rays of Z^2")
    _add_common(p)
    _add_sampling(p)

    p = sub.add_parser(Command.SAMPLE_CUBE.value, help="Spanning double ray of the cube of a graph")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--ends", type=int, choices=(1, 2), default=None)
    p.add_argument("--axis", type=int, default=None)
    p.add_argument("--graph", default=None, help="Graph JSON; a plane box window if absent")
    p.add_argument("--enumeration", choices=("ascending", "descending"), default=None)

    p = sub.add_parser(Command.SAMPLE_PRODUCT.value, help="Spanning double ray of Z^d")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--d", "--dimension", dest="dimension", type=int, default=None)

    p = sub.add_parser(Command.SAMPLE_ABELIAN.value, help="Spanning double ray of Z^n x Z_m1 x ...")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--moduli", type=int, nargs="*", default=None)

    p = sub.add_parser(Command.SWEEP_CUBE.value, help="Finite Hamilton cycles of G^3 over all small graphs")
    _add_common(p)
    p.add_argument("--max-vertices", type=int, default=None)
    p.add_argument("--exhaustive-orders", type=int, default=None)
    p.add_argument("--random-orders", type=int, default=None)
    p.add_argument("--enumeration", choices=("ascending", "descending"), default=None)

    p = sub.add_parser(Command.INVARIANCE.value, help="Translation invariance campaign")
    _add_common(p)
    _add_window(p)
    p.add_argument("--construction", default=None, help="tiling, tiling-unaveraged or percolation")
    p.add_argument("--N", "--samples", dest="samples", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--events", default=None, help='JSON list of single-edge events, e.g. [[[0,0],[1,0]]]')

    p = sub.add_parser(Command.VERIFY.value, help="Re-run a suite on a stored sample")
    _add_common(p)
    p.add_argument("--in", dest="input", default=None, help="Sample JSON artifact")
    p.add_argument("--suite", default=None, choices=("tiling", "cube", "product", "abelian"))
    p.add_argument("--subtrees", type=int, default=None)
    p.add_argument("--max-subtree-tiles", type=int, default=None)
    return parser


def _read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    try:
        with open(path, "r") as f:
            values = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    if not isinstance(values, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    values.pop("command", None)
    return values


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if isinstance(flags.get("events"), str):
        try:
            flags["events"] = json.loads(flags["events"])
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"--events is not valid JSON: {e}") from e
    if flags.get("verify") is None:
        flags.pop("verify", None)
    if args.command == Command.VERIFY.value:
        flags["verify"] = True
    return flags


def _error_payload(e: Exception, detail: str) -> str:
    return json.dumps({"detail": detail, "error": str(e), "type": type(e).__name__}, sort_keys=True)


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    logging.basicConfig(level=getattr(logging, settings.log_level.upper(), logging.INFO))

    args = build_parser().parse_args(argv)
    try:
        loader = ConstructionLoader(settings.constructions_dir)
        loader.load()
        config = resolve_config(Command(args.command), _read_config_file(args.config), _flags(args), loader)
        outcome = ExperimentRunner(settings, loader).run(config)
    except (ConfigurationError, ValidationError) as e:
        logger.error(f"Invalid configuration: {e}")
        print(_error_payload(e, "invalid configuration"), file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(_error_payload(e, "unexpected error"), file=sys.stderr)
        return EXIT_UNEXPECTED

    if not outcome.passed:
        logger.error(f"{args.command} failed; report at {outcome.report_path}")
        return EXIT_SUITE_FAILED
    logger.info(f"{args.command} passed; {len(outcome.artifacts)} artifacts in {outcome.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
