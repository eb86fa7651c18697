"""Command line entry point: render one figure from an experiment CSV."""

import argparse
import sys

from .render import (EmptyInputError, FIGURE_KINDS, FigureSpec, FitMismatchError,
                     SchemaError, render)


def build_parser():
    p = argparse.ArgumentParser(prog="render",
                                description="Render a figure from a tlasso CSV")
    p.add_argument("kind", choices=FIGURE_KINDS)
    p.add_argument("csv", help="input CSV written by the tlasso CLI")
    p.add_argument("-o", "--out", required=True, help="output image path")
    p.add_argument("--title", default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        info = render(FigureSpec(csv_path=args.csv, kind=args.kind,
                                 out_path=args.out, title=args.title))
    except (SchemaError, EmptyInputError, FitMismatchError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    extras = " ".join(f"{k}={v}" for k, v in info.items() if v is not None)
    print(f"wrote {args.out}" + (f" ({extras})" if extras else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
