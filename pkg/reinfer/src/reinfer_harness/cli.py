"""Command line entry points: reinfer-train and reinfer-infer.

Both print a one-line summary on success and exit 0; any failure prints
``error: <detail>`` on stderr and exits 1.
"""

import argparse
import sys

from .infer import reinfer
from .train import train


def train_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reinfer-train",
        description="Fit the compact foreground net on an image/mask manifest.",
    )
    parser.add_argument("--manifest", required=True, help="CSV of image,mask[,split]")
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", required=True, help="checkpoint path")
    parser.add_argument("--lr", type=float, default=3e-3)
    parser.add_argument("--batch-size", type=int, default=5)
    args = parser.parse_args(argv)
    try:
        _, losses = train(
            args.manifest,
            epochs=args.epochs,
            seed=args.seed,
            out_path=args.out,
            lr=args.lr,
            batch_size=args.batch_size,
        )
    except Exception as exc:  # noqa: BLE001 - single reporting point
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"trained {len(losses)} epochs, loss {losses[0]:.6f} -> {losses[-1]:.6f}")
    return 0


def infer_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="reinfer-infer",
        description="Write one SFT confidence map per image using a checkpoint.",
    )
    parser.add_argument("--ckpt", required=True)
    parser.add_argument("--images", required=True, help="directory of images")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--batch-size", type=int, default=8)
    args = parser.parse_args(argv)
    try:
        count = reinfer(args.ckpt, args.images, args.out, args.batch_size)
    except Exception as exc:  # noqa: BLE001 - single reporting point
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {count} confidence maps")
    return 0


if __name__ == "__main__":
    sys.exit(train_main())
