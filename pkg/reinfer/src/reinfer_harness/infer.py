"""Batch re-inference: sigmoid confidence maps written as float32 SFT."""

import os

import numpy as np
import torch

from . import imageio
from .model import FgNet


def load_checkpoint(path) -> FgNet:
    record = torch.load(path, map_location="cpu", weights_only=True)
    model = FgNet(base=int(record.get("base", 16)))
    model.load_state_dict(record["state"])
    model.eval()
    return model


def _image_entries(images_dir):
    """(stem, path) pairs: flat <stem>.ppm files or <stem>/image.ppm dirs."""
    try:
        names = sorted(os.listdir(images_dir))
    except OSError:
        raise
    entries = []
    for name in names:
        path = os.path.join(images_dir, name)
        if name.endswith(".ppm") and os.path.isfile(path):
            entries.append((name[: -len(".ppm")], path))
        elif os.path.isdir(path) and os.path.isfile(os.path.join(path, "image.ppm")):
            entries.append((name, os.path.join(path, "image.ppm")))
    if not entries:
        raise ValueError(f"no .ppm images or scene directories under {images_dir}")
    return entries


def reinfer(ckpt_path, images_dir, out_dir, batch_size: int = 8) -> int:
    """Predict one <stem>.sft confidence map per image; returns the count.

    Images of equal size are forwarded in batches; a size change flushes
    the current batch. Deterministic: eval mode, no randomness.
    """
    model = load_checkpoint(ckpt_path)
    entries = _image_entries(images_dir)
    os.makedirs(out_dir, exist_ok=True)

    pending = []

    def flush():
        if not pending:
            return
        stack = np.stack([img for _, img in pending])
        x = torch.from_numpy(stack.astype(np.float32).transpose(0, 3, 1, 2) / 255.0)
        with torch.no_grad():
            probs = torch.sigmoid(model(x)).numpy()[:, 0]
        for (stem, _), pmap in zip(pending, probs):
            out = np.clip(pmap, 0.0, 1.0).astype(np.float32)
            imageio.write_tensor(out, os.path.join(out_dir, stem + ".sft"))
        pending.clear()

    for stem, path in entries:
        img = imageio.read_image(path)
        if pending and (img.shape != pending[-1][1].shape or len(pending) >= batch_size):
            flush()
        pending.append((stem, img))
    flush()
    return len(entries)
