"""End-to-end segmentation of one image from its three feature maps.

The steps, in order: resample the semantic/saliency/edge maps to image
resolution, min-max normalize the semantic channels, partition the image
into superpixels, average the maps per superpixel, build the four-column
feature table (unary + cross context), pick pseudo labels from the
geometric prior, fit per-image least-squares weights, and project the
fused scores back to pixels.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import encoding, fusion, superpixel
from .tensor_io import resample_bilinear

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Tunable knobs for one segmentation run.

    Defaults follow the reference operating point: 256 superpixels,
    edge scale 3.5, pseudo-label cuts at 0.2/0.6, binarization at 0.5,
    class balancing on.
    """

    k_target: int = 256
    compactness: float = 10.0
    w_e: float = encoding.DEFAULT_EDGE_SCALE
    th_bg: float = fusion.DEFAULT_TH_BG
    th_fg: float = fusion.DEFAULT_TH_FG
    binarize_threshold: float = fusion.DEFAULT_BINARIZE
    balance: bool = True
    dump_intermediates: bool = False
    seed: int = 0  # recorded for provenance; the pipeline itself is deterministic

    def validate(self):
        if self.k_target < 2:
            raise ValueError("k_target must be at least 2")
        if self.compactness <= 0:
            raise ValueError("compactness must be positive")
        if self.w_e <= 0:
            raise ValueError("w_e must be positive")
        if not 0.0 <= self.th_bg < self.th_fg <= 1.0:
            raise ValueError(
                f"need 0 <= th_bg < th_fg <= 1, got {self.th_bg}, {self.th_fg}"
            )
        if not 0.0 < self.binarize_threshold < 1.0:
            raise ValueError("binarize_threshold must lie in (0, 1)")
        return self


@dataclass
class SegmentationResult:
    labels: np.ndarray  # H x W uint32 superpixel ids
    features: np.ndarray  # K x 4 table [S_s, S_sctx, S_a, S_actx]
    affinities: encoding.AffinitySet
    prior: np.ndarray  # K geometric prior
    pseudo: fusion.PseudoLabels
    model: fusion.FusionModel
    scores: np.ndarray  # K fused scores in [0, 1]
    confidence: np.ndarray  # H x W float64 in [0, 1]
    mask: np.ndarray  # H x W uint8, 0 or 255


def _prepare_map(name, arr, target_hw, unit_range):
    arr = np.asarray(arr)
    if not np.issubdtype(arr.dtype, np.floating):
        raise ValueError(f"{name} map must be floating point, got {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} map contains non-finite values")
    if unit_range and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} map must lie in [0, 1]")
    if arr.shape[:2] != target_hw:
        arr = resample_bilinear(arr, target_hw)
    return arr.astype(np.float64)


def segment_image(image, semantic, saliency, edge, config: RunConfig = None) -> SegmentationResult:
    """Run the full pipeline on one image. Deterministic for fixed inputs."""
    if config is None:
        config = RunConfig()
    config.validate()

    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError("image must be H x W x 3 uint8")
    h, w = image.shape[:2]

    semantic = np.asarray(semantic)
    if semantic.ndim != 3:
        raise ValueError("semantic map must be H x W x D")
    semantic = _prepare_map("semantic", semantic, (h, w), unit_range=False)
    saliency = _prepare_map("saliency", np.asarray(saliency), (h, w), unit_range=True)
    edge = _prepare_map("edge", np.asarray(edge), (h, w), unit_range=True)
    if saliency.ndim != 2 or edge.ndim != 2:
        raise ValueError("saliency and edge maps must be 2-D")

    semantic = encoding.normalize_semantic(semantic)
    saliency = np.clip(saliency, 0.0, 1.0)

    labels = superpixel.slic_segment(image, config.k_target, config.compactness)
    k = superpixel.segment_count(labels)
    log.debug("segmented %dx%d image into %d superpixels", h, w, k)

    mean_semantic = superpixel.aggregate_mean(labels, semantic)
    mean_saliency = superpixel.aggregate_mean(labels, saliency)
    adjacency = superpixel.boundary_edge_strengths(labels, edge)

    features, affinities = encoding.encode_features(
        mean_semantic, mean_saliency, adjacency, config.w_e
    )

    prior = fusion.geometric_prior(features[:, 0], features[:, 2])
    pseudo = fusion.select_pseudo_labels(prior, config.th_bg, config.th_fg)
    if config.balance and pseudo.fg.size and pseudo.bg.size:
        pseudo = fusion.balance_samples(pseudo)
    model = fusion.fit_adaptive_weights(features, pseudo)
    if model.fallback_used:
        log.info("least-squares fit fell back to fixed weights")

    scores = fusion.infer_scores(model, features)
    confidence = fusion.scores_to_map(labels, scores)
    mask = fusion.binarize(confidence, config.binarize_threshold)

    return SegmentationResult(
        labels=labels,
        features=features,
        affinities=affinities,
        prior=prior,
        pseudo=pseudo,
        model=model,
        scores=scores,
        confidence=confidence,
        mask=mask,
    )
