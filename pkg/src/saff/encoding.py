"""Region feature encoding: unary values plus cross-inferred context.

Each superpixel is described by four values in [0, 1]:

    S_s     max over channels of its mean normalized semantic response
    S_sctx  semantic context, propagated through the apparent affinity
    S_a     mean saliency
    S_actx  apparent context, propagated through the semantic affinity

The two affinities are the histogram intersection of L1-normalized
semantic profiles and ``exp(-w_e * E)`` over geodesic boundary distances.
Context uses the *cross* pairing on purpose: the semantic similarity
weighs the apparent unary and vice versa, so no feature type feeds both
its own unary and binary route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

DEFAULT_EDGE_SCALE = 3.5

FEATURE_COLUMNS = ("S_s", "S_sctx", "S_a", "S_actx")


@dataclass
class AffinitySet:
    """Pairwise structure behind the context features of one image."""

    m_s: np.ndarray
    m_a: np.ndarray
    m_s_norm: np.ndarray
    m_a_norm: np.ndarray
    edge_dist: np.ndarray


def normalize_semantic(fmap: np.ndarray) -> np.ndarray:
    """Min-max normalize each channel to [0, 1]; constant channels go to 0."""
    arr = np.asarray(fmap, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
        squeeze = True
    elif arr.ndim == 3:
        squeeze = False
    else:
        raise ValueError(f"expected HxW or HxWxD map, got shape {arr.shape}")
    lo = arr.min(axis=(0, 1))
    hi = arr.max(axis=(0, 1))
    span = hi - lo
    out = np.zeros_like(arr)
    live = span > 0
    out[:, :, live] = (arr[:, :, live] - lo[live]) / span[live]
    return out[:, :, 0] if squeeze else out


def unary_features(vs: np.ndarray, sal: np.ndarray):
    """Unary region features from per-superpixel means.

    Returns ``(S_s, S_a, vs_hat)``: the per-row channel maximum, the
    saliency mean clamped to [0, 1], and the L1-normalized semantic profile
    (zero rows stay zero) used by the semantic affinity.
    """
    vs = np.asarray(vs, dtype=np.float64)
    sal = np.asarray(sal, dtype=np.float64)
    if vs.ndim != 2 or sal.ndim != 1 or vs.shape[0] != sal.shape[0]:
        raise ValueError("vs must be K x D and sal length K")
    s_s = vs.max(axis=1)
    s_a = np.clip(sal, 0.0, 1.0)
    norms = np.abs(vs).sum(axis=1)
    vs_hat = np.zeros_like(vs)
    live = norms > 0
    vs_hat[live] = vs[live] / norms[live, None]
    return s_s, s_a, vs_hat


def semantic_affinity(vs_hat: np.ndarray) -> np.ndarray:
    """Histogram intersection ``sum_d min(vs_i, vs_j)`` between all rows."""
    vh = np.asarray(vs_hat, dtype=np.float64)
    k = vh.shape[0]
    m = np.empty((k, k))
    for i in range(k):
        m[i] = np.minimum(vh[i], vh).sum(axis=1)
    return m


def apparent_affinity(edge_dist: np.ndarray, w_e: float = DEFAULT_EDGE_SCALE) -> np.ndarray:
    """Map boundary distances to similarities via ``exp(-w_e * E)``."""
    if w_e <= 0:
        raise ValueError("w_e must be positive")
    e = np.asarray(edge_dist, dtype=np.float64)
    if (e < 0).any():
        raise ValueError("edge distances must be non-negative")
    return np.exp(-w_e * e)


def geodesic_edge_matrix(adjacency: dict, k: int) -> np.ndarray:
    """All-pairs boundary distance: shortest-path cost over the segment
    adjacency graph, with boundary edge strengths as step costs."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return np.zeros((1, 1))
    rows = []
    cols = []
    data = []
    for (i, j), wgt in adjacency.items():
        if not (0 <= i < k and 0 <= j < k):
            raise ValueError(f"segment pair {(i, j)} outside 0..{k - 1}")
        if wgt < 0:
            raise ValueError("boundary weights must be non-negative")
        rows += [i, j]
        cols += [j, i]
        data += [wgt, wgt]
    graph = coo_matrix((data, (rows, cols)), shape=(k, k)).tocsr()
    dist = shortest_path(graph, method="D", directed=False)
    if not np.isfinite(dist).all():
        raise ValueError("segment adjacency graph is disconnected")
    return dist


def normalize_affinity(m: np.ndarray) -> np.ndarray:
    """Zero the diagonal and rescale every row to sum to 1.

    Rows that are all-zero off the diagonal fall back to a uniform
    1/(K-1) spread so context features stay defined.
    """
    a = np.asarray(m, dtype=np.float64)
    k = a.shape[0]
    if a.ndim != 2 or a.shape[1] != k:
        raise ValueError("affinity matrix must be square")
    if k < 2:
        raise ValueError("need at least 2 segments to normalize")
    if (a < 0).any():
        raise ValueError("affinity entries must be non-negative")
    out = a.copy()
    np.fill_diagonal(out, 0.0)
    sums = out.sum(axis=1)
    dead = sums == 0
    out[~dead] /= sums[~dead, None]
    if dead.any():
        out[dead] = 1.0 / (k - 1)
        out[dead, np.nonzero(dead)[0]] = 0.0
    return out


def context_features(m_s_norm, m_a_norm, s_s, s_a):
    """Cross-inferred context: ``S_actx = M_s' S_a`` and ``S_sctx = M_a' S_s``."""
    m_s_norm = np.asarray(m_s_norm, dtype=np.float64)
    m_a_norm = np.asarray(m_a_norm, dtype=np.float64)
    s_s = np.asarray(s_s, dtype=np.float64)
    s_a = np.asarray(s_a, dtype=np.float64)
    k = s_s.shape[0]
    if m_s_norm.shape != (k, k) or m_a_norm.shape != (k, k) or s_a.shape != (k,):
        raise ValueError("inconsistent shapes for context inference")
    s_actx = np.clip(m_s_norm @ s_a, 0.0, 1.0)
    s_sctx = np.clip(m_a_norm @ s_s, 0.0, 1.0)
    return s_sctx, s_actx


def encode_features(mean_semantic, mean_saliency, adjacency, w_e=DEFAULT_EDGE_SCALE):
    """Build the K x 4 feature table [S_s, S_sctx, S_a, S_actx].

    ``mean_semantic`` (K x D) and ``mean_saliency`` (K) are per-superpixel
    means of maps already normalized to [0, 1]; ``adjacency`` holds boundary
    edge strengths between 4-adjacent segments.
    """
    s_s, s_a, vs_hat = unary_features(mean_semantic, mean_saliency)
    k = s_s.shape[0]
    m_s = semantic_affinity(vs_hat)
    edge_dist = geodesic_edge_matrix(adjacency, k)
    m_a = apparent_affinity(edge_dist, w_e)
    m_s_norm = normalize_affinity(m_s)
    m_a_norm = normalize_affinity(m_a)
    s_sctx, s_actx = context_features(m_s_norm, m_a_norm, s_s, s_a)
    table = np.column_stack([s_s, s_sctx, s_a, s_actx])
    affinities = AffinitySet(m_s, m_a, m_s_norm, m_a_norm, edge_dist)
    return table, affinities
