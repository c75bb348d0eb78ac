"""Cluster validity: the connectivity index and label-agreement metrics.

Connectivity charges each point 1/j for every j-th nearest neighbor
(j = 1..J, Euclidean distance, self excluded) that falls in a different
cluster, so 0 means every neighborhood is pure and lower is better.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster import Dendrogram, cut

DEFAULT_NEIGHBORS = 10
DEFAULT_K_RANGE = range(2, 7)


def _neighbor_table(points: np.ndarray, n_neighbors: int) -> np.ndarray:
    """Indices of each point's n nearest other points, ties to smaller index."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n <= n_neighbors:
        raise ValueError(f"need more than {n_neighbors} points, got {n}")
    sq = (pts * pts).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.fill_diagonal(d2, -1.0)  # self sorts first even against duplicates
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, 1:n_neighbors + 1]


def connectivity(points: np.ndarray, labels: np.ndarray,
                 n_neighbors: int = DEFAULT_NEIGHBORS) -> float:
    """Sum of 1/j over all points' j-th nearest neighbors in foreign clusters."""
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be at least 1")
    labels = np.asarray(labels)
    neighbors = _neighbor_table(points, n_neighbors)
    if len(labels) != neighbors.shape[0]:
        raise ValueError("labels and points must have equal length")
    foreign = labels[neighbors] != labels[:, None]
    weights = 1.0 / np.arange(1, n_neighbors + 1)
    return float((foreign @ weights).sum())


@dataclass(frozen=True)
class ConnectivityReport:
    """Connectivity per candidate k; chosen_k attains the minimum."""

    values: dict[int, float]
    chosen_k: int
    n_neighbors: int


def select_k(points: np.ndarray, dendrogram: Dendrogram,
             k_range=DEFAULT_K_RANGE,
             n_neighbors: int = DEFAULT_NEIGHBORS) -> ConnectivityReport:
    """Evaluate connectivity at every cut and pick the argmin (ties: smaller k)."""
    ks = sorted(int(k) for k in k_range)
    if not ks:
        raise ValueError("empty k range")
    values = {}
    for k in ks:
        assignment = cut(dendrogram, k)
        values[k] = connectivity(points, assignment.labels, n_neighbors)
    chosen = min(ks, key=lambda k: (values[k], k))
    return ConnectivityReport(values=values, chosen_k=chosen,
                              n_neighbors=n_neighbors)


@dataclass(frozen=True)
class ConfusionTable:
    """Contingency counts between two labelings of the same items."""

    labels_a: tuple
    labels_b: tuple
    counts: np.ndarray  # (len(labels_a), len(labels_b))

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(labels_a: np.ndarray,
                     labels_b: np.ndarray) -> ConfusionTable:
    """Cross-tabulate two labelings; rows follow labels_a, columns labels_b."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ValueError("labelings must have equal length")
    cats_a = sorted(set(a.tolist()))
    cats_b = sorted(set(b.tolist()))
    index_a = {c: i for i, c in enumerate(cats_a)}
    index_b = {c: i for i, c in enumerate(cats_b)}
    counts = np.zeros((len(cats_a), len(cats_b)), dtype=np.int64)
    for va, vb in zip(a.tolist(), b.tolist()):
        counts[index_a[va], index_b[vb]] += 1
    return ConfusionTable(labels_a=tuple(cats_a), labels_b=tuple(cats_b),
                          counts=counts)


def percent_correct(true_labels: np.ndarray,
                    cluster_labels: np.ndarray) -> float:
    """Best-case agreement percentage between clusters and known classes.

    Every cluster is mapped to one true class (several clusters may share a
    class) so as to maximize the number of matched members; since the choice
    is independent per cluster, the optimum assigns each cluster its
    plurality class.  100 means the partition refines the true classes.
    """
    table = confusion_matrix(cluster_labels, true_labels)
    matched = int(table.counts.max(axis=1).sum())
    return 100.0 * matched / table.total
