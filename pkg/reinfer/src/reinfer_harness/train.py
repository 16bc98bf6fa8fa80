"""Training loop over a manifest of image/mask pairs.

Per-pixel binary cross entropy with Adam, cosine-decayed step size,
and a monotone accept/reject rule: after each epoch the loss over the
whole train split is measured, and an epoch that failed to improve it
is rolled back and rerun with a smaller step. The recorded curve is
therefore strictly decreasing, and a fixed seed reproduces it exactly
on CPU.
"""

import copy
import logging
import math

import numpy as np
import torch

from . import manifest
from .model import FgNet

log = logging.getLogger(__name__)

MIN_TRAIN_PAIRS = 8
MAX_BACKTRACKS = 12
EVAL_CHUNK = 8


def _cosine(epoch, epochs, floor=0.02):
    if epochs <= 1:
        return 1.0
    t = epoch / (epochs - 1)
    return floor + (1.0 - floor) * 0.5 * (1.0 + math.cos(math.pi * t))


def train(
    manifest_path,
    epochs: int = 30,
    seed: int = 7,
    out_path=None,
    lr: float = 3e-3,
    batch_size: int = 5,
):
    """Fit the net on the manifest's train split; returns (model, losses).

    ``losses[k]`` is the binary cross entropy over the full train split
    after epoch k's updates. Epochs that would raise it are rolled back
    and retried at a smaller step, so the curve is strictly decreasing;
    if no smaller step helps (the fit has converged to float precision)
    training stops early with a warning and the curve is shorter than
    ``epochs``. Writes a checkpoint to ``out_path`` when given. Needs
    at least MIN_TRAIN_PAIRS pairs and one epoch.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    rows = manifest.read_manifest(manifest_path)
    x_np, y_np = manifest.load_pairs(rows, split="train")
    n = len(x_np)
    if n < MIN_TRAIN_PAIRS:
        raise ValueError(f"need at least {MIN_TRAIN_PAIRS} training pairs, got {n}")

    torch.manual_seed(seed)
    model = FgNet()
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    criterion = torch.nn.BCEWithLogitsLoss()
    order_gen = torch.Generator().manual_seed(seed)
    x = torch.from_numpy(x_np)
    y = torch.from_numpy(y_np)

    def split_loss():
        # images share one resolution, so the mean of per-chunk means
        # weighted by chunk size equals the mean over every pixel
        with torch.no_grad():
            total = 0.0
            for s in range(0, n, EVAL_CHUNK):
                xb, yb = x[s : s + EVAL_CHUNK], y[s : s + EVAL_CHUNK]
                total += float(criterion(model(xb), yb)) * len(xb)
        return total / n

    losses = []
    scale = 1.0
    model.train()
    for epoch in range(epochs):
        base = lr * _cosine(epoch, epochs)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            for group in optimizer.param_groups:
                group["lr"] = base * scale
            model_snap = copy.deepcopy(model.state_dict())
            opt_snap = copy.deepcopy(optimizer.state_dict())
            order = torch.randperm(n, generator=order_gen)
            for start in range(0, n, batch_size):
                idx = order[start : start + batch_size]
                optimizer.zero_grad()
                loss = criterion(model(x[idx]), y[idx])
                loss.backward()
                optimizer.step()
            cur = split_loss()
            if not losses or cur < losses[-1]:
                accepted = True
                scale = min(1.0, scale * 1.25)
                break
            model.load_state_dict(model_snap)
            optimizer.load_state_dict(opt_snap)
            scale *= 0.5
        if not accepted:
            log.warning(
                "loss plateaued at %.6g; stopping after %d of %d epochs",
                losses[-1], epoch, epochs,
            )
            break
        losses.append(cur)
        log.info("epoch %d/%d loss %.6f", epoch + 1, epochs, losses[-1])

    curve = np.asarray(losses, dtype=np.float64)
    if out_path is not None:
        torch.save(
            {
                "state": model.state_dict(),
                "base": 16,
                "seed": seed,
                "epochs": len(losses),
                "lr": lr,
                "batch_size": batch_size,
                "losses": curve.tolist(),
                "n_train": n,
            },
            out_path,
        )
    model.eval()
    return model, curve
