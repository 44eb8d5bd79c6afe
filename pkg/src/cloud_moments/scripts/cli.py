"""Command-line entry point: ``cloud_moments <subcommand> [flags]``.

JSON and CSV payloads go to ``--out`` or stdout; logs and errors go to stderr.
Exit codes: 0 success, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Sequence

from pydantic import BaseModel

from cloud_moments.errors import CloudMomentsError
from cloud_moments.lib.utils import write_output
from cloud_moments.models import RunConfig
from cloud_moments.workspace import GridRow, Workspace, run_config

logger = logging.getLogger("cloud_moments")

SUBCOMMANDS = {
    "gen-moments": "Write the moment table of a measure.",
    "validate": "Check Hermitian symmetry and positivity of a moment table.",
    "orthopoly": "Orthonormal polynomial coefficients and leading coefficients.",
    "hessenberg": "Hessenberg matrix, s_j, area estimates and Hankel singular values.",
    "cloud-moments": "Estimate the area moments of the cloud with error bounds.",
    "error-bound": "A-priori error bounds of the cloud-moment estimator.",
    "reconstruct": "Reconstruct a quadrature domain from cloud moments.",
    "kernel-grid": "CSV of K_n(z, z) on a grid.",
    "boundary-grid": "CSV of the reconstructed boundary residual on a grid.",
}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--measure", help="MeasureSpec JSON file")
    common.add_argument("--moments", help="moment table JSON file (instead of --measure)")
    common.add_argument("--cloud-moments", dest="cloud_moments", help="cloud-moment JSON written by cloud-moments")
    common.add_argument("--degree", type=int, help="moment table degree (derived from the other degrees if omitted)")
    common.add_argument("--dmax", type=int)
    common.add_argument("--n", dest="n", type=int)
    common.add_argument("--N", dest="N", type=int)
    common.add_argument("--nmax", type=int)
    common.add_argument("--kcut", type=int)
    common.add_argument("--d", dest="d", type=int, help="quadrature domain order")
    common.add_argument("--prec", type=int, help="significand bits (default: $CLOUDMOMENTS_PREC or 256)")
    common.add_argument("--tol", type=float)
    common.add_argument("--samples", type=int, help="support samples for error bounds")
    common.add_argument("--xmin", type=float)
    common.add_argument("--xmax", type=float)
    common.add_argument("--ymin", type=float)
    common.add_argument("--ymax", type=float)
    common.add_argument("--resolution", type=int, help="grid points per axis")
    common.add_argument("--out", help="output file, '-' for stdout")
    common.add_argument("--hex-floats", dest="hex_floats", action="store_true", default=None)
    common.add_argument("-v", "--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloud_moments",
        description="Area moments of the cloud of a planar measure, and quadrature-domain reconstruction.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for name, help_text in SUBCOMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _json(model: BaseModel) -> str:
    return model.model_dump_json(exclude={"error"}) + "\n"


def _csv(rows: list[GridRow], value_name: str) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x", "y", value_name])
    writer.writerows(rows)
    return buffer.getvalue()


def _dispatch(workspace: Workspace, config: RunConfig) -> bytes | str:
    match config.command:
        case "gen-moments":
            return workspace.moment_file(config)
        case "validate":
            return _json(workspace.validate(config).report)
        case "orthopoly":
            return _json(workspace.orthopoly(config))
        case "hessenberg":
            return _json(workspace.hessenberg(config))
        case "cloud-moments":
            return _json(workspace.cloud_moments(config))
        case "error-bound":
            return _json(workspace.error_bound(config))
        case "reconstruct":
            return _json(workspace.reconstruct(config))
        case "kernel-grid":
            return _csv(workspace.kernel_grid(config), "K")
        case "boundary-grid":
            return _csv(workspace.boundary_grid(config), "residual")
    raise AssertionError(config.command)


def _report(error: CloudMomentsError) -> None:
    payload = {"error": type(error).__name__, "message": str(error), "exit_code": error.exit_code}
    sys.stderr.write(json.dumps(payload) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    fields = vars(args)
    _configure_logging(fields.pop("verbose"))
    try:
        config = run_config(**fields)
        payload = _dispatch(Workspace(".", confined=False), config)
        write_output(payload, config.out)
    except CloudMomentsError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        _report(e)
        return e.exit_code
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
