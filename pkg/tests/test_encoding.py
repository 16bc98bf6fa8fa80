"""Feature normalization, affinities, geodesic distances, context."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saff.encoding import (
    FEATURE_COLUMNS,
    apparent_affinity,
    context_features,
    encode_features,
    geodesic_edge_matrix,
    normalize_affinity,
    normalize_semantic,
    semantic_affinity,
    unary_features,
)


def _random_connected_adjacency(rng, k):
    """Random spanning tree plus extra chords, weights in [0, 1]."""
    adj = {}
    order = rng.permutation(k)
    for i in range(1, k):
        a, b = int(order[i]), int(order[int(rng.integers(0, i))])
        adj[(min(a, b), max(a, b))] = float(rng.random())
    for _ in range(k):
        a, b = int(rng.integers(0, k)), int(rng.integers(0, k))
        if a != b:
            adj.setdefault((min(a, b), max(a, b)), float(rng.random()))
    return adj


def _random_tables(rng, k, d=5):
    vs = rng.random((k, d))
    vs[rng.random(k) < 0.1] = 0.0  # some all-zero rows
    sal = rng.random(k)
    return vs, sal


# ------------------------------------------------------------ normalize


def test_normalize_min_max_midpoint():
    chan = np.array([[2.0, 4.0], [6.0, 4.0]])[:, :, None]
    out = normalize_semantic(chan)
    assert abs(out[0, 1, 0] - 0.5) < 1e-12  # (4-2)/(6-2)
    assert out[0, 0, 0] == 0.0 and out[1, 0, 0] == 1.0


def test_normalize_constant_channel_zeroed():
    out = normalize_semantic(np.full((3, 3, 2), 7.0))
    assert (out == 0.0).all()


def test_normalize_identity_when_endpoints_hit():
    chan = np.array([[0.0, 0.25], [0.75, 1.0]])
    assert np.array_equal(normalize_semantic(chan), chan)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_normalize_range_and_channel_independence(seed):
    rng = np.random.default_rng(seed)
    fmap = rng.standard_normal((5, 4, 3)) * rng.integers(1, 50)
    out = normalize_semantic(fmap)
    assert out.min() >= 0.0 and out.max() <= 1.0
    solo = normalize_semantic(fmap[:, :, 1])
    assert np.allclose(out[:, :, 1], solo, atol=0)


# ---------------------------------------------------------------- unary


def test_unary_example_row():
    s_s, s_a, vs_hat = unary_features(np.array([[0.1, 0.7, 0.3]]), np.array([0.4]))
    assert abs(s_s[0] - 0.7) < 1e-12
    assert np.allclose(vs_hat[0], np.array([1.0, 7.0, 3.0]) / 11.0, atol=1e-12)
    assert abs(s_a[0] - 0.4) < 1e-12


def test_unary_zero_row_stays_zero():
    s_s, _, vs_hat = unary_features(np.zeros((1, 4)), np.array([0.2]))
    assert s_s[0] == 0.0
    assert (vs_hat == 0.0).all()


def test_unary_single_channel():
    s_s, _, vs_hat = unary_features(np.array([[0.4]]), np.array([0.0]))
    assert abs(s_s[0] - 0.4) < 1e-12
    assert vs_hat[0, 0] == 1.0


def test_unary_clamps_saliency():
    _, s_a, _ = unary_features(np.ones((2, 2)) * 0.5, np.array([-0.5, 1.5]))
    assert s_a.tolist() == [0.0, 1.0]


# ------------------------------------------------------------- affinity


def test_affinity_identical_rows_unit():
    vh = np.array([[0.25, 0.75], [0.25, 0.75]])
    m = semantic_affinity(vh)
    assert np.allclose(m, 1.0, atol=1e-12)


def test_affinity_disjoint_supports_zero():
    m = semantic_affinity(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert m[0, 1] == 0.0 and m[1, 0] == 0.0


def test_affinity_pairwise_value():
    m = semantic_affinity(np.array([[0.2, 0.8], [0.5, 0.5]]))
    assert abs(m[0, 1] - 0.7) < 1e-12  # min sums: 0.2 + 0.5


def test_affinity_matches_brute_force_exactly(rng):
    vs, _ = _random_tables(rng, 12)
    vh = unary_features(vs, np.zeros(12))[2]
    m = semantic_affinity(vh)
    for i in range(12):
        for j in range(12):
            assert m[i, j] == np.minimum(vh[i], vh[j]).sum()
    assert (m == m.T).all()


# ------------------------------------------------------------- apparent


def test_apparent_zero_distance():
    assert apparent_affinity(np.zeros((2, 2)))[0, 1] == 1.0


def test_apparent_reference_value():
    m = apparent_affinity(np.array([[0.0, 1.0], [1.0, 0.0]]), w_e=3.5)
    assert abs(m[0, 1] - math.exp(-3.5)) < 1e-12
    assert round(float(m[0, 1]), 7) == 0.0301974


def test_apparent_monotone_in_distance():
    m = apparent_affinity(np.array([[0.0, 0.2, 0.9]]))
    assert m[0, 0] > m[0, 1] > m[0, 2]


def test_apparent_rejects_bad_scale():
    with pytest.raises(ValueError):
        apparent_affinity(np.zeros((2, 2)), w_e=0.0)
    with pytest.raises(ValueError):
        apparent_affinity(np.array([[0.0, -1.0], [-1.0, 0.0]]))


# ------------------------------------------------------------- geodesic


def test_geodesic_single_edge():
    e = geodesic_edge_matrix({(0, 1): 0.4}, 2)
    assert abs(e[0, 1] - 0.4) < 1e-12 and e[0, 0] == 0.0


def test_geodesic_two_hop_path():
    e = geodesic_edge_matrix({(0, 1): 0.2, (1, 2): 0.3}, 3)
    assert abs(e[0, 2] - 0.5) < 1e-12


def test_geodesic_shortcut_wins():
    e = geodesic_edge_matrix({(0, 1): 0.9, (0, 2): 0.1, (1, 2): 0.1}, 3)
    assert abs(e[0, 1] - 0.2) < 1e-12


def test_geodesic_zero_weights_give_unit_affinity():
    adj = {(0, 1): 0.0, (1, 2): 0.0}
    e = geodesic_edge_matrix(adj, 3)
    assert (e == 0.0).all()
    assert (apparent_affinity(e) == 1.0).all()


def test_geodesic_disconnected_rejected():
    with pytest.raises(ValueError):
        geodesic_edge_matrix({(0, 1): 0.5}, 3)


def test_geodesic_invalid_pairs_rejected():
    with pytest.raises(ValueError):
        geodesic_edge_matrix({(0, 5): 0.5}, 3)
    with pytest.raises(ValueError):
        geodesic_edge_matrix({(0, 1): -0.5}, 2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(3, 12))
def test_geodesic_metric_properties(seed, k):
    rng = np.random.default_rng(seed)
    e = geodesic_edge_matrix(_random_connected_adjacency(rng, k), k)
    assert np.allclose(e, e.T, atol=1e-12)
    assert (np.diag(e) == 0.0).all()
    for i in range(k):
        for j in range(k):
            for via in range(k):
                assert e[i, j] <= e[i, via] + e[via, j] + 1e-9


# ------------------------------------------------------------ normalize


def test_normalize_affinity_all_ones():
    out = normalize_affinity(np.ones((3, 3)))
    expect = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    assert np.allclose(out, expect, atol=1e-12)


def test_normalize_affinity_dead_row_uniform():
    m = np.eye(3)  # off-diagonal all zero
    out = normalize_affinity(m)
    assert np.allclose(out[0], [0.0, 0.5, 0.5], atol=1e-12)


def test_normalize_affinity_guards():
    with pytest.raises(ValueError):
        normalize_affinity(np.ones((1, 1)))
    with pytest.raises(ValueError):
        normalize_affinity(np.array([[0.0, -1.0], [1.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 15))
def test_normalize_affinity_row_stochastic(seed, k):
    rng = np.random.default_rng(seed)
    m = rng.random((k, k))
    m[rng.random(k) < 0.2] = 0.0
    out = normalize_affinity(m)
    assert (np.diag(out) == 0.0).all()
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-9)
    assert (out >= 0.0).all()


# -------------------------------------------------------------- context


def test_context_constant_saliency_propagates():
    m = normalize_affinity(np.random.default_rng(0).random((5, 5)))
    s_s = np.linspace(0, 1, 5)
    s_sctx, s_actx = context_features(m, m, s_s, np.full(5, 0.3))
    assert np.allclose(s_actx, 0.3, atol=1e-12)


def test_context_two_node_swap():
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    s_sctx, s_actx = context_features(swap, swap, np.array([0.1, 0.5]), np.array([0.3, 0.9]))
    assert np.allclose(s_actx, [0.9, 0.3], atol=1e-12)
    assert np.allclose(s_sctx, [0.5, 0.1], atol=1e-12)


def test_context_cross_pairing():
    rng = np.random.default_rng(7)
    m_s = normalize_affinity(rng.random((6, 6)))
    m_a = normalize_affinity(rng.random((6, 6)))
    s_s, s_a = rng.random(6), rng.random(6)
    base_sctx, base_actx = context_features(m_s, m_a, s_s, s_a)
    perm = np.random.default_rng(8).permutation(6)
    new_sctx, new_actx = context_features(m_s, m_a[perm], s_s, s_a)
    assert not np.allclose(new_sctx, base_sctx)
    assert np.allclose(new_actx, base_actx, atol=0)


def test_context_shape_mismatch():
    m = normalize_affinity(np.ones((3, 3)))
    with pytest.raises(ValueError):
        context_features(m, m, np.ones(2), np.ones(3))


# --------------------------------------------------------------- encode


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 14))
def test_encoded_table_ranges_and_wiring(seed, k):
    rng = np.random.default_rng(seed)
    vs, sal = _random_tables(rng, k)
    adj = _random_connected_adjacency(rng, k)
    table, aff = encode_features(vs, sal, adj)
    assert table.shape == (k, 4)
    assert table.min() >= 0.0 and table.max() <= 1.0
    assert FEATURE_COLUMNS == ("S_s", "S_sctx", "S_a", "S_actx")
    s_s, s_a, vs_hat = unary_features(vs, sal)
    assert np.allclose(table[:, 0], s_s, atol=0)
    assert np.allclose(table[:, 2], s_a, atol=0)
    # context columns are convex mixes, so they stay inside the value range
    assert table[:, 3].min() >= s_a.min() - 1e-12
    assert table[:, 3].max() <= s_a.max() + 1e-12
    assert table[:, 1].min() >= s_s.min() - 1e-12
    assert table[:, 1].max() <= s_s.max() + 1e-12
    # cross pairing: the saliency context comes from the semantic affinity
    assert np.allclose(table[:, 3], aff.m_s_norm @ s_a, atol=1e-12)
    assert np.allclose(table[:, 1], aff.m_a_norm @ s_s, atol=1e-12)
    assert np.allclose(aff.m_s_norm.sum(axis=1), 1.0, atol=1e-9)
    assert np.allclose(aff.m_a_norm.sum(axis=1), 1.0, atol=1e-9)
    assert (np.diag(aff.m_s_norm) == 0.0).all()
    assert (np.diag(aff.m_a_norm) == 0.0).all()
