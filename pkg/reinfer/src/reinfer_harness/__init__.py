"""Pseudo-label re-inference harness.

Trains a small encoder-decoder on binarized foreground masks produced
elsewhere, then predicts fresh per-pixel confidence maps. Talks to the
segmentation side purely through files: PNM images and masks in, SFT
confidence tensors out.
"""

from .infer import load_checkpoint, reinfer
from .manifest import PairRow, load_pairs, read_manifest
from .model import FgNet, parameter_count
from .train import train

__version__ = "0.1.0"

__all__ = [
    "FgNet",
    "PairRow",
    "load_checkpoint",
    "load_pairs",
    "parameter_count",
    "read_manifest",
    "reinfer",
    "train",
]
