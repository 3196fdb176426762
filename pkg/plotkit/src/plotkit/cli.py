"""Command-line entry point for the heatmap renderer."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import DEFAULT_COLORMAP, DEFAULT_DPI, PlotConfig, RenderError, render_heatmap


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render a phase-diagram sweep CSV as a heatmap PNG.",
    )
    parser.add_argument("--input", required=True, help="sweep CSV path")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--cmap", default=DEFAULT_COLORMAP,
                        help="matplotlib colormap name")
    parser.add_argument(
        "--threshold", default="auto",
        help="white-below threshold: 'auto' (initial overlap from the CSV's "
             "JSON sidecar) or a value in [0, 1]",
    )
    parser.add_argument("--x-label", default="p")
    parser.add_argument("--y-label", default="$\\Delta$")
    parser.add_argument("--title", default=None)
    parser.add_argument("--dpi", type=int, default=DEFAULT_DPI)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0

    if args.threshold == "auto":
        threshold = None
    else:
        try:
            threshold = float(args.threshold)
        except ValueError:
            print(f"usage error: --threshold must be 'auto' or a number, "
                  f"got {args.threshold!r}", file=sys.stderr)
            return 1

    try:
        config = PlotConfig(
            input_path=Path(args.input),
            output_path=Path(args.out),
            colormap=args.cmap,
            threshold=threshold,
            x_label=args.x_label,
            y_label=args.y_label,
            title=args.title,
            dpi=args.dpi,
        )
        out = render_heatmap(config)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
