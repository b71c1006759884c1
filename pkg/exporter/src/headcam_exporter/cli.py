"""Command line for the bundle exporter."""

from __future__ import annotations

import argparse
import sys

from .export import DEFAULT_HEAD_DIMS, ExportError, ExportSpec, export_features


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ExportError(f"--head-dims must be comma-separated integers: {exc}") from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="headcam-exporter", description=__doc__)
    parser.add_argument("--image", action="append", required=True,
                        help="input image (repeat for multiple samples)")
    parser.add_argument("--out", required=True, help="output bundle directory")
    parser.add_argument("--head-dims", default=",".join(map(str, DEFAULT_HEAD_DIMS)),
                        dest="head_dims", help="dense layer widths, e.g. 40,30,20")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--force", action="store_true")
    args = parser.parse_args(argv)

    try:
        spec = ExportSpec(
            images=tuple(args.image),
            head_dims=_parse_dims(args.head_dims),
            out=args.out,
            seed=args.seed,
            force=args.force,
        )
        export_features(spec)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
