"""Precision/recall evaluation over 256 confidence thresholds.

Confidence maps quantize to 0..255 (round half up). At threshold t the
predicted foreground is every pixel >= t; precision defaults to 1 when
nothing is predicted, and images with empty ground truth are excluded
from aggregation. Dataset curves average P and R per threshold across
images, compute F on the means with beta^2 = 0.3, and report the maximum
F over all thresholds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

BETA_SQ = 0.3
N_THRESHOLDS = 256


class EmptyGroundTruthError(ValueError):
    """Ground-truth mask has no foreground pixels."""


@dataclass
class PRCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f_measure: np.ndarray
    max_f: float


def quantize(conf_map: np.ndarray) -> np.ndarray:
    """Map [0, 1] confidences to uint8 levels: ``floor(v * 255 + 0.5)``."""
    conf = np.asarray(conf_map, dtype=np.float64)
    if conf.size and not ((conf >= 0.0) & (conf <= 1.0)).all():
        raise ValueError("confidence values must lie in [0, 1]")
    return np.floor(conf * 255.0 + 0.5).astype(np.uint8)


def pr_at_thresholds(pred: np.ndarray, gt: np.ndarray):
    """Precision and recall of ``pred >= t`` for every t in 0..255.

    ``pred`` is a uint8 map, ``gt`` a boolean mask of the same shape with
    at least one foreground pixel. Counting goes through value histograms,
    so each threshold matches a brute-force confusion count exactly.
    """
    p = np.asarray(pred)
    g = np.asarray(gt, dtype=bool)
    if p.dtype != np.uint8:
        raise ValueError("pred must be a uint8 map (see quantize)")
    if p.shape != g.shape:
        raise ValueError(f"pred shape {p.shape} != gt shape {g.shape}")
    n_gt = int(g.sum())
    if n_gt == 0:
        raise EmptyGroundTruthError("ground truth has no foreground pixels")

    # pixels predicted fg at threshold t = count of values >= t
    hist_all = np.bincount(p.ravel(), minlength=N_THRESHOLDS)
    hist_tp = np.bincount(p[g].ravel(), minlength=N_THRESHOLDS)
    n_pred = np.cumsum(hist_all[::-1])[::-1]
    n_tp = np.cumsum(hist_tp[::-1])[::-1]

    precision = np.ones(N_THRESHOLDS)
    nonzero = n_pred > 0
    precision[nonzero] = n_tp[nonzero] / n_pred[nonzero]
    recall = n_tp / n_gt
    return precision, recall


def f_measure(precision, recall, beta_sq: float = BETA_SQ):
    """``(1 + b) P R / (b P + R)``; defined as 0 when the denominator is 0."""
    p = np.asarray(precision, dtype=np.float64)
    r = np.asarray(recall, dtype=np.float64)
    denom = beta_sq * p + r
    out = np.zeros(np.broadcast(p, r).shape)
    ok = denom > 0
    num = (1.0 + beta_sq) * p * r
    if out.ndim == 0:
        return float(num / denom) if ok else 0.0
    out[ok] = num[ok] / denom[ok]
    return out


def aggregate(per_image) -> PRCurve:
    """Fold per-image (precision, recall) pairs into one dataset curve.

    P and R are arithmetic means across images at each threshold; F is
    computed on the means and max_f is its maximum over thresholds.
    """
    pairs = list(per_image)
    if not pairs:
        raise ValueError("no images to aggregate")
    precisions = np.stack([np.asarray(p, dtype=np.float64) for p, _ in pairs])
    recalls = np.stack([np.asarray(r, dtype=np.float64) for _, r in pairs])
    if precisions.shape[1] != N_THRESHOLDS:
        raise ValueError(f"curves must have {N_THRESHOLDS} entries")
    mean_p = precisions.mean(axis=0)
    mean_r = recalls.mean(axis=0)
    f = f_measure(mean_p, mean_r)
    return PRCurve(
        thresholds=np.arange(N_THRESHOLDS),
        precision=mean_p,
        recall=mean_r,
        f_measure=f,
        max_f=float(f.max()),
    )


def evaluate_maps(preds, gts, names=None):
    """Evaluate quantized predictions against boolean masks.

    Empty-ground-truth images are logged and skipped. Returns the dataset
    :class:`PRCurve` plus the number of images used and skipped.
    """
    names = names or [str(i) for i in range(len(preds))]
    curves = []
    skipped = 0
    for pred, gt, name in zip(preds, gts, names):
        try:
            curves.append(pr_at_thresholds(pred, gt))
        except EmptyGroundTruthError:
            log.warning("skipping %s: empty ground truth", name)
            skipped += 1
    if not curves:
        raise ValueError("every image had empty ground truth")
    return aggregate(curves), len(curves), skipped


def write_pr_csv(curve: PRCurve, path) -> None:
    """256 CSV rows of threshold/precision/recall/F, then a max_f summary."""
    lines = ["threshold,precision,recall,f_measure"]
    for t in range(N_THRESHOLDS):
        lines.append(
            f"{t},{curve.precision[t]:.10g},{curve.recall[t]:.10g},"
            f"{curve.f_measure[t]:.10g}"
        )
    lines.append(f"max_f,{curve.max_f:.10g}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
