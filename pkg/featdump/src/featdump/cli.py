"""featdump command line: feature export plus optional LPIPS export."""

from __future__ import annotations

import argparse
import sys

from .jobs import DumpJob, dump_features, dump_lpips, load_pairs_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featdump",
        description="export pooled deep features (FVEC) and perceptual distances (CSV)",
    )
    parser.add_argument("--in", required=True, help="image directory or scene manifest")
    parser.add_argument("--out", required=True, help="FVEC output path")
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--lpips", help="JSON list of {real, rendered, image_id} pairs")
    parser.add_argument("--lpips-out", help="CSV output for the pair distances")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if bool(args.lpips) != bool(args.lpips_out):
        print("error: --lpips and --lpips-out must be given together", file=sys.stderr)
        return 2
    try:
        job = DumpJob(
            source=getattr(args, "in"),
            output=args.out,
            batch_size=args.batch_size,
            device=args.device,
        )
        ids, errors = dump_features(job)
        print(f"wrote {len(ids)} feature rows -> {args.out}"
              + (f" ({len(errors)} images skipped)" if errors else ""))
        if args.lpips:
            rows, lpips_errors = dump_lpips(load_pairs_spec(args.lpips), args.lpips_out,
                                            device=args.device)
            print(f"wrote {len(rows)} pair distances -> {args.lpips_out}"
                  + (f" ({len(lpips_errors)} pairs skipped)" if lpips_errors else ""))
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
