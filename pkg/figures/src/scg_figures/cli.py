"""scg-fig: render one experiment CSV into one PNG."""

from __future__ import annotations

import argparse
import sys

from scg_figures.render import FIGURE_KINDS, FigureSpec, SchemaMismatch, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scg-fig", description="Render scg-lab CSV output as a figure")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--out", dest="output_image", required=True)
    parser.add_argument("--title")
    parser.add_argument("--log-x", action="store_true")
    parser.add_argument("--dpi", type=int, default=130)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv, figure_kind=args.kind,
                      output_image=args.output_image, title=args.title,
                      log_x=args.log_x, dpi=args.dpi)
    try:
        path = render(spec)
    except (SchemaMismatch, OSError) as err:
        print(f"scg-fig: {err}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
