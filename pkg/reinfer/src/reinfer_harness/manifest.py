"""Training manifest: CSV rows of image/mask paths plus a split tag."""

import csv
from dataclasses import dataclass

import numpy as np

from . import imageio

VALID_SPLITS = ("train", "val")


@dataclass
class PairRow:
    image: str
    mask: str
    split: str = "train"


def read_manifest(path):
    """Parse ``image,mask[,split]`` rows; split defaults to train."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty manifest")
    header = rows[0]
    if header[:2] != ["image", "mask"] or header[2:] not in ([], ["split"]):
        raise ValueError(f"{path}: header must be image,mask or image,mask,split")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} cells")
        split = row[2] if len(row) == 3 else "train"
        if split not in VALID_SPLITS:
            raise ValueError(f"{path}:{lineno}: split must be one of {VALID_SPLITS}")
        out.append(PairRow(image=row[0], mask=row[1], split=split))
    if not out:
        raise ValueError(f"{path}: no data rows")
    return out


def load_pairs(rows, split="train"):
    """Stack one split into arrays: images N,3,H,W in [0,1] and targets
    N,1,H,W in {0,1}. Masks must be 0/255 and match their image size;
    every image in the split must share one resolution."""
    picked = [r for r in rows if r.split == split]
    if not picked:
        raise ValueError(f"manifest has no rows with split {split!r}")
    images, targets = [], []
    for row in picked:
        img = imageio.read_image(row.image)
        mask = imageio.read_mask(row.mask)
        if mask.shape != img.shape[:2]:
            raise ValueError(f"{row.mask}: size {mask.shape} != image {img.shape[:2]}")
        levels = np.unique(mask)
        if not set(levels.tolist()) <= {0, 255}:
            raise ValueError(f"{row.mask}: mask levels {levels.tolist()} are not 0/255")
        if images and img.shape != images[0].shape:
            raise ValueError(
                f"{row.image}: size {img.shape[:2]} differs from the first image"
            )
        images.append(img)
        targets.append(mask == 255)
    x = np.stack(images).astype(np.float32).transpose(0, 3, 1, 2) / 255.0
    y = np.stack(targets).astype(np.float32)[:, None]
    return x, y
