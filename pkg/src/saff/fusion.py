"""Per-image adaptive weighting of the four encoded features.

Pseudo labels come from the geometric mean of the two unary features:
superpixels below th_bg get target 0, above th_fg target 1 (strict
inequalities, boundary values stay unlabeled). A weighted least-squares
fit of ``score = features . w + bias`` on those samples yields the
per-image model; balancing equalizes the total sample weight of the two
classes instead of literally resampling the minority. Scores are clamped
to [0, 1] and broadcast back to pixels.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_TH_BG = 0.2
DEFAULT_TH_FG = 0.6
DEFAULT_BINARIZE = 0.5

# uniform feature average; used when pseudo labels cannot support a fit
FALLBACK_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
MIN_LABELED = 5


@dataclass
class FusionModel:
    """Learned weights for [S_s, S_sctx, S_a, S_actx] plus bias."""

    w: np.ndarray
    bias: float
    fallback_used: bool = False

    def to_dict(self) -> dict:
        return {
            "w": [float(v) for v in self.w],
            "bias": float(self.bias),
            "fallback_used": bool(self.fallback_used),
        }


@dataclass
class PseudoLabels:
    """Index sets of confident foreground/background superpixels."""

    fg: np.ndarray
    bg: np.ndarray
    fg_weights: np.ndarray = field(default=None)
    bg_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.fg = np.asarray(self.fg, dtype=np.intp)
        self.bg = np.asarray(self.bg, dtype=np.intp)
        if self.fg_weights is None:
            self.fg_weights = np.ones(len(self.fg))
        if self.bg_weights is None:
            self.bg_weights = np.ones(len(self.bg))

    @property
    def total(self) -> int:
        return len(self.fg) + len(self.bg)


def fallback_model() -> FusionModel:
    return FusionModel(np.array(FALLBACK_WEIGHTS), 0.0, fallback_used=True)


def geometric_prior(s_s: np.ndarray, s_a: np.ndarray) -> np.ndarray:
    """Geometric mean of the two unary features, the pseudo-label prior."""
    s_s = np.asarray(s_s, dtype=np.float64)
    s_a = np.asarray(s_a, dtype=np.float64)
    if s_s.shape != s_a.shape:
        raise ValueError("feature vectors must share a shape")
    return np.sqrt(s_s * s_a)


def select_pseudo_labels(
    g: np.ndarray, th_bg: float = DEFAULT_TH_BG, th_fg: float = DEFAULT_TH_FG
) -> PseudoLabels:
    """Pick confident samples: g < th_bg -> background, g > th_fg -> foreground."""
    if not 0.0 <= th_bg < th_fg <= 1.0:
        raise ValueError(f"need 0 <= th_bg < th_fg <= 1, got ({th_bg}, {th_fg})")
    g = np.asarray(g, dtype=np.float64)
    return PseudoLabels(fg=np.nonzero(g > th_fg)[0], bg=np.nonzero(g < th_bg)[0])


def balance_samples(labels: PseudoLabels) -> PseudoLabels:
    """Reweight the minority class so both classes carry equal total weight.

    Each class's total becomes max(n_fg, n_bg); majority samples keep
    weight 1. Equivalent to duplicating minority samples when the class
    ratio is integral, but deterministic and exact for any ratio.
    """
    n_fg, n_bg = len(labels.fg), len(labels.bg)
    if n_fg == 0 or n_bg == 0:
        raise ValueError("both classes must be nonempty to balance")
    target = float(max(n_fg, n_bg))
    return PseudoLabels(
        fg=labels.fg,
        bg=labels.bg,
        fg_weights=np.full(n_fg, target / n_fg),
        bg_weights=np.full(n_bg, target / n_bg),
    )


def weighted_least_squares(a: np.ndarray, y: np.ndarray, weights=None) -> np.ndarray:
    """Minimize ``sum_i weights_i * (a_i . x - y_i)^2``.

    Solved through row scaling by sqrt(weights) and an SVD-backed lstsq,
    so rank-deficient systems return the minimum-norm solution.
    """
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if (w <= 0).any() or not np.isfinite(w).all():
            raise ValueError("sample weights must be positive and finite")
        s = np.sqrt(w)
        a = a * s[:, None]
        y = y * s
    x, _, _, _ = np.linalg.lstsq(a, y, rcond=None)
    return x


def fit_adaptive_weights(features: np.ndarray, labels: PseudoLabels) -> FusionModel:
    """Fit (w, bias) on the pseudo-labeled rows of the K x 4 feature table.

    Degenerate label sets (one class empty, or fewer than MIN_LABELED
    samples) return the uniform-average fallback model instead of failing.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != 4:
        raise ValueError("feature table must be K x 4")
    if len(labels.fg) == 0 or len(labels.bg) == 0 or labels.total < MIN_LABELED:
        log.debug(
            "fallback model: %d fg / %d bg pseudo labels", len(labels.fg), len(labels.bg)
        )
        return fallback_model()
    idx = np.concatenate([labels.fg, labels.bg])
    y = np.concatenate([np.ones(len(labels.fg)), np.zeros(len(labels.bg))])
    wts = np.concatenate([labels.fg_weights, labels.bg_weights])
    design = np.hstack([feats[idx], np.ones((len(idx), 1))])
    x = weighted_least_squares(design, y, wts)
    return FusionModel(w=x[:4], bias=float(x[4]), fallback_used=False)


def infer_scores(model: FusionModel, features: np.ndarray) -> np.ndarray:
    """Per-superpixel foreground confidence, clamped to [0, 1]."""
    feats = np.asarray(features, dtype=np.float64)
    raw = feats @ np.asarray(model.w, dtype=np.float64) + model.bias
    if not np.isfinite(raw).all():
        raise ValueError("non-finite scores; model or features corrupt")
    return np.clip(raw, 0.0, 1.0)


def scores_to_map(labels: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Broadcast per-superpixel scores back onto the pixel grid."""
    lbl = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or len(scores) != int(lbl.max()) + 1:
        raise ValueError(
            f"scores length {scores.shape} does not match {int(lbl.max()) + 1} segments"
        )
    return scores[lbl]


def binarize(conf_map: np.ndarray, threshold: float = DEFAULT_BINARIZE) -> np.ndarray:
    """Threshold a confidence map into a 0/255 uint8 mask (>= is foreground)."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    conf = np.asarray(conf_map, dtype=np.float64)
    return np.where(conf >= threshold, np.uint8(255), np.uint8(0))
