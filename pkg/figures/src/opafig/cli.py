"""Standalone entry point: render one panel-spec file."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .panels import SchemaError, load_panel_spec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="opafig",
        description="Render multi-panel figures from simulator CSV artifacts.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("spec", help="panel spec file (YAML or JSON)")
    parser.add_argument("--output", help="override the output image path")
    args = parser.parse_args(argv)
    try:
        spec = load_panel_spec(args.spec)
        if args.output:
            from dataclasses import replace
            spec = replace(spec, output=args.output)
        result = render(spec)
    except (OSError, ValueError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.image_path}")
    print(f"plotted-array checksum {result.checksum}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
