"""
Command-line entry point for horizonlab.

    horizonlab <subcommand> --config <path> [--out <dir>]

The JSON summary of a run goes to stdout; status lines and logs go to stderr.
Failures print an error payload on stdout, write it to <out>/error.json and
exit with the error's exit code.
"""

import argparse
import json
import logging
import os
import sys
from functools import wraps
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from horizonlab import __version__
from horizonlab.config import DEFAULT_OUT_DIR, load_config
from horizonlab.errors import HorizonlabError
from horizonlab.pipelines import PIPELINES
from horizonlab.pipelines.acceptance import acceptance_config
from horizonlab.reporting import ArtifactWriter, normalize, status

load_dotenv()

logger = logging.getLogger("horizonlab")


# ============================================================
# Error Handler Decorator
# ============================================================
def handle_errors(f):
    @wraps(f)
    def decorated_function(args: argparse.Namespace) -> int:
        try:
            return f(args)
        except HorizonlabError as e:
            payload = e.to_payload()
        except Exception as e:
            logger.exception("unexpected failure in %s", args.command)
            payload = {
                "success": False,
                "error": str(e),
                "error_type": type(e).__name__,
                "exit_code": 1,
                "context": {},
            }
        out_dir = Path(args.out or os.environ.get("HORIZONLAB_OUT_DIR", DEFAULT_OUT_DIR))
        try:
            ArtifactWriter(out_dir, config_hash="").write_error(payload)
        except OSError as e:
            logger.warning("could not write error.json to %s: %s", out_dir, e)
        print(json.dumps(normalize(payload), indent=2, sort_keys=True))
        status(f"❌ {args.command}: {payload['error_type']}: {payload['error']}")
        return payload["exit_code"]

    return decorated_function


@handle_errors
def dispatch(args: argparse.Namespace) -> int:
    if args.config is None:
        # only run-acceptance may omit --config
        config = acceptance_config("schwarzschild")
    else:
        config = load_config(args.config)
    pipeline = PIPELINES[args.command](config, out_dir=args.out)
    summary = pipeline.process()
    print(json.dumps(normalize({"success": True, **summary}), indent=2, sort_keys=True))
    if args.command == "run-acceptance" and not summary["all_passed"]:
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horizonlab",
        description="Apparent horizons of conformally flat metrics with submanifold sources.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, pipeline in PIPELINES.items():
        sub = subparsers.add_parser(command, help=(pipeline.__doc__ or "").strip())
        sub.add_argument(
            "--config",
            required=command != "run-acceptance",
            help="Path to the JSON run config",
        )
        sub.add_argument("--out", default=None, help="Output directory")
    return parser


# ============================================================
# Main Entry Point
# ============================================================
def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.environ.get("HORIZONLAB_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
