"""Command line for the feature extractor. Long-form flags only."""

from __future__ import annotations

import argparse
import sys

from .extract import extract, load_manifest

MAX_SKIP_FRACTION = 0.10


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="waclex-extract",
        description="Encode manifest images into canonical feature files "
                    "(per-word positives plus a shared negatives pool).",
    )
    parser.add_argument("--manifest", required=True, help="manifest JSON path")
    parser.add_argument("--output-dir", default=None, help="override the manifest's output_dir")
    parser.add_argument("--encoder", default=None, help="override the manifest's encoder id")
    args = parser.parse_args(argv)

    try:
        manifest = load_manifest(args.manifest)
        if args.output_dir or args.encoder:
            from dataclasses import replace

            manifest = replace(
                manifest,
                output_dir=args.output_dir or manifest.output_dir,
                encoder=args.encoder or manifest.encoder,
            )
        result = extract(manifest)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for word, path in result.written.items():
        print(f"{word}\t{path}")
    print(
        f"encoded {result.encoded_count} image(s) with {result.encoder} "
        f"(dim {result.dim}); skipped {len(result.skipped)}",
        file=sys.stderr,
    )
    if result.skip_fraction > MAX_SKIP_FRACTION:
        print(
            f"error: skipped {result.skip_fraction:.0%} of images "
            f"(limit {MAX_SKIP_FRACTION:.0%})",
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
