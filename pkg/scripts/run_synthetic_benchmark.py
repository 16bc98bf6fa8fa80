#!/usr/bin/env python3
"""Benchmark the fused segmentation against its single-cue inputs.

Generates a few synthetic datasets, scores four variants on each
(semantic-only, saliency-only, fused without balancing, fused with
balancing) and prints a max-F table plus dataset means. Expect a couple
of seconds per image at the default 96x96 / 256 superpixels.

    python3 scripts/run_synthetic_benchmark.py --datasets 5 --images 10
"""

import argparse
import sys
import time

import numpy as np

from saff import evaluation, pipeline, synth
from saff.pipeline import RunConfig

VARIANTS = ("semantic", "saliency", "fused", "fused+balance")


def score_dataset(ds_index, args):
    curves = {name: [] for name in VARIANTS}
    for i in range(args.images):
        seed = args.seed_base + 10000 * ds_index + i
        scene = synth.generate(
            seed, size=args.size, noise=args.noise, d_channels=args.channels
        )
        maps = {
            "semantic": synth.baseline_scores(scene, "semantic"),
            "saliency": synth.baseline_scores(scene, "saliency"),
        }
        for name, balance in (("fused", False), ("fused+balance", True)):
            res = pipeline.segment_image(
                scene.image,
                scene.semantic,
                scene.saliency,
                scene.edge,
                RunConfig(k_target=args.superpixels, balance=balance),
            )
            maps[name] = res.confidence
        for name, conf in maps.items():
            q = evaluation.quantize(np.clip(conf, 0.0, 1.0))
            curves[name].append(evaluation.pr_at_thresholds(q, scene.gt))
    return {name: evaluation.aggregate(pairs).max_f for name, pairs in curves.items()}


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--datasets", type=int, default=5)
    parser.add_argument("--images", type=int, default=10, help="images per dataset")
    parser.add_argument("--noise", type=float, default=0.25)
    parser.add_argument("--channels", type=int, default=8)
    parser.add_argument("--superpixels", type=int, default=256)
    parser.add_argument("--seed-base", type=int, default=0)
    parser.add_argument(
        "--size",
        type=lambda s: tuple(int(v) for v in s.lower().split("x")),
        default=(96, 96),
        metavar="HxW",
    )
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    t0 = time.time()
    rows = []
    for ds in range(args.datasets):
        rows.append(score_dataset(ds, args))
        print(f"dataset {ds} done ({time.time() - t0:.1f}s)", file=sys.stderr)

    width = max(len(v) for v in VARIANTS)
    header = "dataset  " + "  ".join(f"{v:>{width}}" for v in VARIANTS)
    print(header)
    print("-" * len(header))
    for ds, row in enumerate(rows):
        cells = "  ".join(f"{row[v]:>{width}.4f}" for v in VARIANTS)
        print(f"{ds:>7}  {cells}")
    means = {v: float(np.mean([r[v] for r in rows])) for v in VARIANTS}
    cells = "  ".join(f"{means[v]:>{width}.4f}" for v in VARIANTS)
    print("-" * len(header))
    print(f"{'mean':>7}  {cells}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
