"""Deterministic synthetic scenes with ground truth known by construction.

Each scene holds an RGB image of 1-3 elliptic/rectangular foreground
blobs on a contrasting background, plus the three feature maps the
pipeline consumes:

    semantic  H x W x D; a random subset (at least half) of channels
              responds inside the foreground with amplitude 1 - noise*u
              and a smooth blur falloff, with additive uniform noise
              outside; the remaining channels carry sparse salt noise
    saliency  the box-blurred ground truth plus a lumpy noise field,
              so the background shows contiguous false-positive regions
    edge      the 1-px-dilated foreground boundary at strength
              1 - noise*u, plus sparse salt

All randomness comes from one seeded PCG64 generator drawn in a fixed
order, so a seed fully determines the scene bytes. Constants below fix
the difficulty level; they are part of the oracle's definition.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import tensor_io
from .encoding import normalize_semantic

BASELINE_MODES = ("semantic", "saliency")

_IMAGE_NOISE_SPAN = 120.0  # uint8 jitter amplitude at noise = 1
_COLOR_MIN_DIST = 100.0  # min RGB distance between fg and bg colors
_FALLOFF_RADIUS, _FALLOFF_PASSES = 2, 3  # semantic response falloff
_SAL_BLUR_RADIUS, _SAL_BLUR_PASSES = 3, 2  # saliency halo
_LUMP_RADIUS, _LUMP_PASSES = 5, 2  # smooth noise fields (dips/lumps/weak spots)
_SAL_FG_DIP = 1.6  # foreground saliency attenuation, x noise
_SAL_LUMP_GAIN = 2.2  # background saliency lump amplitude, x noise
_SEM_FG_DIP = 1.3  # foreground semantic weak-spot depth, x noise
_SALT_CHANNEL_DENSITY = 0.03  # salt fraction per silent channel, x noise
_RESP_SALT_DENSITY = 0.02  # background salt on responding channels, x noise
_EDGE_SALT_DENSITY = 0.02  # salt fraction on the edge map, x noise
_MAX_DRAWS = 200

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class SynthScene:
    image: np.ndarray  # H x W x 3 uint8
    gt: np.ndarray  # H x W bool
    semantic: np.ndarray  # H x W x D float32 in [0, 1]
    saliency: np.ndarray  # H x W float32 in [0, 1]
    edge: np.ndarray  # H x W float32 in [0, 1]
    seed: int


def _box_blur(a: np.ndarray, radius: int, passes: int) -> np.ndarray:
    out = a.astype(np.float64)
    for _ in range(passes):
        out = ndimage.uniform_filter(out, size=2 * radius + 1, mode="constant")
    return out


def _as_f32(a: np.ndarray) -> np.ndarray:
    return np.clip(a, 0.0, 1.0).astype(np.float32)


def _draw_blobs(rng, h, w, area_bounds):
    yy = np.arange(h, dtype=np.float64)[:, None]
    xx = np.arange(w, dtype=np.float64)[None, :]
    for _ in range(_MAX_DRAWS):
        gt = np.zeros((h, w), dtype=bool)
        for _ in range(int(rng.integers(1, 4))):
            elliptic = rng.random() < 0.5
            cy = rng.uniform(0.2, 0.8) * h
            cx = rng.uniform(0.2, 0.8) * w
            ry = rng.uniform(0.08, 0.30) * h
            rx = rng.uniform(0.08, 0.30) * w
            if elliptic:
                gt |= ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
            else:
                gt |= (np.abs(yy - cy) <= ry) & (np.abs(xx - cx) <= rx)
        if area_bounds[0] <= gt.mean() <= area_bounds[1]:
            return gt
    raise RuntimeError("could not draw a foreground within the area bounds")


def generate(
    seed: int,
    size=(96, 96),
    d_channels: int = 8,
    noise: float = 0.25,
    area_bounds=(0.05, 0.6),
) -> SynthScene:
    """Build one scene. Identical arguments always yield identical bytes."""
    h, w = int(size[0]), int(size[1])
    if h < 32 or w < 32:
        raise ValueError(f"scene size {h}x{w} below the 32x32 minimum")
    if d_channels < 2:
        raise ValueError("need at least 2 semantic channels")
    if not 0.0 <= noise < 1.0:
        raise ValueError("noise must lie in [0, 1)")
    if not 0.0 < area_bounds[0] <= area_bounds[1] < 1.0:
        raise ValueError("area bounds must satisfy 0 < lo <= hi < 1")

    rng = np.random.Generator(np.random.PCG64(seed))
    gt = _draw_blobs(rng, h, w, area_bounds)
    gt_f = gt.astype(np.float64)
    bg_f = 1.0 - gt_f

    # image: two flat colors with per-pixel jitter
    color_bg = rng.integers(0, 256, 3).astype(np.float64)
    while True:
        color_fg = rng.integers(0, 256, 3).astype(np.float64)
        if np.linalg.norm(color_fg - color_bg) >= _COLOR_MIN_DIST:
            break
    base = np.where(gt[:, :, None], color_fg, color_bg)
    jitter = (rng.random((h, w, 3)) - 0.5) * noise * _IMAGE_NOISE_SPAN
    image = np.clip(np.rint(base + jitter), 0, 255).astype(np.uint8)

    # semantic channels; one weak-spot field shared by every responding
    # channel, so parts of the object stay under-activated after the max
    falloff = _box_blur(gt_f, _FALLOFF_RADIUS, _FALLOFF_PASSES)
    falloff /= falloff.max()
    weak = normalize_semantic(_box_blur(rng.random((h, w)), _LUMP_RADIUS, _LUMP_PASSES))
    falloff = falloff * (1.0 - _SEM_FG_DIP * noise * weak)
    n_resp = int(rng.integers((d_channels + 1) // 2, d_channels + 1))
    responding = np.zeros(d_channels, dtype=bool)
    responding[rng.permutation(d_channels)[:n_resp]] = True
    semantic = np.empty((h, w, d_channels), dtype=np.float64)
    for d in range(d_channels):
        if responding[d]:
            amp = 1.0 - noise * rng.random()
            chan = amp * falloff + noise * rng.random((h, w)) * bg_f
            salt = (rng.random((h, w)) < _RESP_SALT_DENSITY * noise) & ~gt
            semantic[:, :, d] = np.where(salt, np.maximum(chan, rng.random((h, w))), chan)
        else:
            salt = rng.random((h, w)) < _SALT_CHANNEL_DENSITY * noise
            semantic[:, :, d] = np.where(salt, rng.random((h, w)), 0.0)

    # saliency: blurred gt with smooth foreground dips and background lumps
    halo = _box_blur(gt_f, _SAL_BLUR_RADIUS, _SAL_BLUR_PASSES)
    dip = normalize_semantic(_box_blur(rng.random((h, w)), _LUMP_RADIUS, _LUMP_PASSES))
    lumps = normalize_semantic(_box_blur(rng.random((h, w)), _LUMP_RADIUS, _LUMP_PASSES))
    saliency = halo * (1.0 - _SAL_FG_DIP * noise * dip)
    saliency += _SAL_LUMP_GAIN * noise * lumps * bg_f

    # edge: dilated boundary band, attenuated, plus salt
    interior = ndimage.binary_erosion(gt, structure=_CROSS, border_value=1)
    band = ndimage.binary_dilation(gt & ~interior, structure=_CROSS)
    edge = band * (1.0 - noise * rng.random((h, w)))
    salt = rng.random((h, w)) < _EDGE_SALT_DENSITY * noise
    edge = np.maximum(edge, np.where(salt, rng.random((h, w)), 0.0))

    return SynthScene(
        image=image,
        gt=gt,
        semantic=_as_f32(semantic),
        saliency=_as_f32(saliency),
        edge=_as_f32(edge),
        seed=int(seed),
    )


def write_scene(scene: SynthScene, directory) -> None:
    """Emit the on-disk scene layout consumed by the segment command.

    Writes image.ppm, gt.pgm (0/255), and semantic/saliency/edge .sft
    files into ``directory``, creating it if needed.
    """
    os.makedirs(directory, exist_ok=True)
    tensor_io.write_image(scene.image, os.path.join(directory, "image.ppm"))
    gt8 = np.where(scene.gt, 255, 0).astype(np.uint8)
    tensor_io.write_gray(gt8, os.path.join(directory, "gt.pgm"))
    tensor_io.write_tensor(scene.semantic, os.path.join(directory, "semantic.sft"))
    tensor_io.write_tensor(scene.saliency, os.path.join(directory, "saliency.sft"))
    tensor_io.write_tensor(scene.edge, os.path.join(directory, "edge.sft"))


def baseline_scores(scene: SynthScene, mode: str) -> np.ndarray:
    """Single-cue confidence maps used as comparison baselines.

    ``semantic``: per-pixel max over the min-max-normalized channels.
    ``saliency``: the saliency map itself.
    """
    if mode == "semantic":
        return normalize_semantic(scene.semantic).max(axis=2)
    if mode == "saliency":
        return scene.saliency.astype(np.float64)
    raise ValueError(f"mode must be one of {BASELINE_MODES}, got {mode!r}")
