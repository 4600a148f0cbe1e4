"""Command line: render one spec file or every recognized sweep in a directory."""

from __future__ import annotations

import argparse
import sys

from .render import default_figures, load_figure_spec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figures")
    parser.add_argument("--spec", help="JSON figure spec")
    parser.add_argument("--all", action="store_true",
                        help="render every recognized sweep CSV in --in-dir")
    parser.add_argument("--in-dir", help="directory of sweep CSVs (with --all)")
    parser.add_argument("--out-dir", help="output directory (with --all)")
    parser.add_argument("--force", action="store_true", help="overwrite outputs")
    args = parser.parse_args(argv)

    if args.all:
        if not (args.in_dir and args.out_dir):
            parser.error("--all needs --in-dir and --out-dir")
        specs = default_figures(args.in_dir, args.out_dir)
        if not specs:
            parser.error(f"no recognized sweep CSVs in {args.in_dir}")
    elif args.spec:
        specs = [load_figure_spec(args.spec)]
    else:
        parser.error("pass --spec or --all")

    for spec in specs:
        result = render(spec, force=args.force)
        print(f"wrote {result.path}")
        for entry in result.extras.get("regimes", []):
            print(f"  c={entry['c']:g}: boundary={entry['boundary']} "
                  f"threshold={entry['theta_star']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
