import numpy as np
import pytest

from lcfpca.cluster import (cut, export_dendrogram, import_dendrogram,
                            ward_linkage)

from oracles import (greedy_ward_partitions, labels_to_partition,
                     within_cluster_sse)


def test_four_point_line():
    points = np.array([0.0, 1.0, 10.0, 11.0])
    dend = ward_linkage(points)
    first_two = {frozenset((m.left, m.right)) for m in dend.merges[:2]}
    assert first_two == {frozenset((0, 1)), frozenset((2, 3))}
    assert cut(dend, 2).labels.tolist() == [0, 0, 1, 1]
    # brute force over every merge sequence confirms the k=2 optimum
    for k in (2, 3, 4):
        ours = within_cluster_sse(points,
                                  labels_to_partition(cut(dend, k).labels))
        oracle = within_cluster_sse(points,
                                    greedy_ward_partitions(points)[k])
        assert ours == pytest.approx(oracle, abs=1e-12)


def test_two_points_merge_at_euclidean_distance(rng):
    a, b = rng.normal(size=(2, 3))
    dend = ward_linkage(np.vstack([a, b]))
    assert len(dend.merges) == 1
    assert dend.merges[0].height == pytest.approx(
        float(np.linalg.norm(a - b)), rel=1e-12)


def test_duplicate_points_zero_first_height(rng):
    pts = rng.normal(size=(5, 2))
    pts[3] = pts[1]
    dend = ward_linkage(pts)
    assert dend.merges[0].height == 0.0
    assert {dend.merges[0].left, dend.merges[0].right} == {1, 3}


def test_merge_heights_nondecreasing(rng):
    pts = rng.normal(size=(40, 3))
    heights = [m.height for m in ward_linkage(pts).merges]
    assert all(a <= b + 1e-9 for a, b in zip(heights, heights[1:]))


def test_sizes_telescope(rng):
    pts = rng.normal(size=(23, 2))
    dend = ward_linkage(pts)
    assert dend.merges[-1].size == 23


def test_matches_exhaustive_oracle_small_n(rng):
    for trial in range(100):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        pts = rng.normal(size=(n, d))
        dend = ward_linkage(pts)
        oracle = greedy_ward_partitions(pts)
        for k in range(1, n + 1):
            ours = within_cluster_sse(pts,
                                      labels_to_partition(cut(dend, k).labels))
            ref = within_cluster_sse(pts, oracle[k])
            assert ours == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_permutation_invariant_partitions(rng):
    pts = rng.normal(size=(30, 2))
    dend = ward_linkage(pts)
    perm = rng.permutation(30)
    dend_p = ward_linkage(pts[perm])
    for k in (2, 3, 5):
        base = labels_to_partition(cut(dend, k).labels)
        permuted_raw = cut(dend_p, k).labels
        # map permuted leaf indices back to original identities
        back = {frozenset(int(perm[i]) for i in part)
                for part in labels_to_partition(permuted_raw)}
        assert base == back


def test_cut_extremes(rng):
    pts = rng.normal(size=(9, 2))
    dend = ward_linkage(pts)
    assert cut(dend, 1).labels.tolist() == [0] * 9
    assert cut(dend, 9).labels.tolist() == list(range(9))
    with pytest.raises(ValueError):
        cut(dend, 0)
    with pytest.raises(ValueError):
        cut(dend, 10)


def test_cut_labels_numbered_by_first_appearance(rng):
    pts = rng.normal(size=(12, 2))
    dend = ward_linkage(pts)
    for k in range(1, 13):
        labels = cut(dend, k).labels
        assert labels[0] == 0
        seen = set()
        top = -1
        for lab in labels:
            if lab not in seen:
                assert lab == top + 1
                top = int(lab)
                seen.add(lab)


def test_non_finite_rejected():
    with pytest.raises(ValueError, match="finite"):
        ward_linkage(np.array([[0.0], [np.nan]]))


def test_export_round_trip(rng):
    pts = rng.normal(size=(14, 2))
    dend = ward_linkage(pts, leaf_ids=[f"s{i}" for i in range(14)])
    text = export_dendrogram(dend)
    again = export_dendrogram(import_dendrogram(text))
    assert text == again
    assert import_dendrogram(text) == dend


def test_two_leaf_tree_single_record(rng):
    dend = ward_linkage(rng.normal(size=(2, 2)))
    doc = import_dendrogram(export_dendrogram(dend))
    assert len(doc.merges) == 1


def test_merge_count_scales(rng):
    pts = rng.normal(size=(150, 2))
    assert len(ward_linkage(pts).merges) == 149
