"""Command-line front end: render sweep CSVs to figures.

Exit codes: 0 success, 2 usage, schema, or file errors. Passing
--rate-value or --coherence-value turns the matching overlay on.
"""

from __future__ import annotations

import argparse
import sys

from ._version import __version__
from .csvio import SchemaError
from .render import FORMATS, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("render", help="draw success-rate curves from sweep CSVs")
    p.add_argument(
        "--in", dest="inputs", action="append", required=True, metavar="CSV",
        help="input sweep CSV; repeat for multiple labeled curves",
    )
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--format", choices=FORMATS, help="image format (default: from --out suffix)")
    p.add_argument(
        "--overlay-rate", action="store_true",
        help="vertical line at the recorded theoretical rate",
    )
    p.add_argument("--rate-value", type=float, help="overlay the rate line at this value instead")
    p.add_argument(
        "--overlay-coupon", action="store_true",
        help="dotted curve through the recorded exact reference values",
    )
    p.add_argument(
        "--overlay-coherence", action="store_true",
        help="vertical line at the recorded coherence lower bound",
    )
    p.add_argument("--coherence-value", type=float, help="overlay the coherence line at this value")
    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = PlotSpec(
            inputs=tuple(args.inputs),
            out=args.out,
            image_format=args.format,
            overlay_rate=args.overlay_rate or args.rate_value is not None,
            rate_value=args.rate_value,
            overlay_coupon=args.overlay_coupon,
            overlay_coherence=args.overlay_coherence or args.coherence_value is not None,
            coherence_value=args.coherence_value,
        )
        render(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"plotkit: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(dispatch(sys.argv[1:]))
