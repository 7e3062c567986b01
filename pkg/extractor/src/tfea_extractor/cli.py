"""Command line: image folder in, TFEA feature file out.

Exit codes: 0 success, 2 argument errors, 3 I/O or empty-input errors.
"""

from __future__ import annotations

import argparse
import sys

from .extract import NoImagesError, extract_to_file
from .model import EmbeddingModel


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfea-extract",
        description="Embed an image folder into a TFEA feature file using the "
                    "final-pooling activations of Inception-v3.",
    )
    parser.add_argument("image_dir", help="directory of images (sorted filename order)")
    parser.add_argument("--out", required=True, help="output .tfea path")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    parser.add_argument(
        "--weights", default="pretrained",
        help="'pretrained' (torchvision IMAGENET1K_V1 checkpoint, downloads on "
             "first use), 'random' (seeded initialization, offline testing only), "
             "or a path to a state-dict file",
    )
    parser.add_argument("--seed", type=int, default=0,
                        help="initialization seed for --weights random")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = EmbeddingModel(weights=args.weights, seed=args.seed, device=args.device)
    except Exception as exc:  # weight download/load failures are environment problems
        print(f"tfea-extract: cannot load weights {args.weights!r}: {exc}", file=sys.stderr)
        return 3
    try:
        count = extract_to_file(args.image_dir, args.out, model, args.batch_size)
    except (NoImagesError, NotADirectoryError, OSError) as exc:
        print(f"tfea-extract: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"tfea-extract: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} x 2048 features to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
