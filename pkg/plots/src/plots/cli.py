"""Command-line driver: render figures for one run directory."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, plot_run
from .loader import RunDataError


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from an nhcurrent run directory")
    parser.add_argument("run_dir", help="directory written by 'nhcurrent run'")
    parser.add_argument("--which", nargs="+", choices=KINDS, default=None,
                        help="figure kinds to render (default: all the run "
                             "supports)")
    parser.add_argument("--out", default=None,
                        help="output directory (default: <run_dir>/figures)")
    args = parser.parse_args(argv)
    try:
        written = plot_run(args.run_dir, which=args.which, out_dir=args.out)
    except RunDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(written)} files: "
          + ", ".join(p.name for p in written))
    return 0


if __name__ == "__main__":
    sys.exit(main())
