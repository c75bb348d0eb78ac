"""Ward agglomerative clustering with a deterministic merge order.

Distances between clusters follow the Lance-Williams recurrence on squared
Euclidean distances; reported merge heights are on the distance scale
(sqrt of twice the within-sum-of-squares increase), so two singletons merge
at their Euclidean distance.  Exact distance ties are broken by the
lexicographically smallest (left id, right id) pair, with leaves numbered
0..N-1 and merged clusters N, N+1, ... in creation order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HEIGHT_SLACK = 1e-9  # tolerance for the monotone-heights assertion


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Full merge history: N-1 steps over leaves 0..N-1."""

    n_leaves: int
    merges: tuple[Merge, ...]
    leaf_ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.merges) != max(self.n_leaves - 1, 0):
            raise ValueError("a dendrogram over N leaves has N-1 merges")
        if self.merges and self.merges[-1].size != self.n_leaves:
            raise ValueError("final merge must contain every leaf")
        if self.leaf_ids is not None and len(self.leaf_ids) != self.n_leaves:
            raise ValueError("one leaf id per leaf")


@dataclass(frozen=True)
class ClusterAssignment:
    """Flat labels in 0..k-1; every label occurs at least once."""

    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        present = set(int(v) for v in self.labels)
        if present != set(range(self.k)):
            raise ValueError(f"labels must cover 0..{self.k - 1}")


def ward_linkage(points: np.ndarray,
                 leaf_ids: list[str] | None = None) -> Dendrogram:
    """Agglomerate points by minimum increase in within-cluster sum of squares."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least 2 points to cluster")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite coordinates")

    # Squared Euclidean distances; diagonal poisoned so rows can be scanned.
    sq = (pts * pts).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, np.inf)

    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.int64)
    ids = np.arange(n)
    # Cached per-row minimum and its column, to avoid full-matrix scans.
    row_min = d2.min(axis=1)
    row_arg = d2.argmin(axis=1)

    merges: list[Merge] = []
    last_height = -np.inf
    for step in range(n - 1):
        gmin = row_min[active].min()
        # Candidate pairs at the global minimum; ties resolved by id pair.
        best = None
        for i in np.flatnonzero(active & (row_min == gmin)):
            for j in np.flatnonzero(active & (d2[i] == gmin)):
                pair = (min(ids[i], ids[j]), max(ids[i], ids[j]))
                if best is None or pair < best[0]:
                    best = (pair, i, j)
        (left, right), i, j = best
        if i > j:
            i, j = j, i

        height = float(np.sqrt(gmin))
        assert height >= last_height - HEIGHT_SLACK, \
            "Ward merge heights must be nondecreasing"
        last_height = max(last_height, height)

        ni, nj, nk = sizes[i], sizes[j], sizes
        merged_size = int(ni + nj)
        merges.append(Merge(left=int(left), right=int(right),
                            height=height, size=merged_size))

        # Lance-Williams update for the merged cluster, stored in slot i.
        new_d2 = ((ni + nk) * d2[i] + (nj + nk) * d2[j] - nk * gmin) \
            / (ni + nj + nk)
        new_d2[i] = np.inf
        new_d2[j] = np.inf
        d2[i] = new_d2
        d2[:, i] = new_d2
        d2[j] = np.inf
        d2[:, j] = np.inf
        active[j] = False
        sizes[i] = merged_size
        ids[i] = n + step
        row_min[j] = np.inf

        if active.sum() > 1:
            row_min[i] = d2[i].min()
            row_arg[i] = d2[i].argmin()
            # Rows whose cached minimum involved i or j must be refreshed;
            # everyone else can only improve via the new cluster.
            stale = np.flatnonzero(active & ((row_arg == i) | (row_arg == j)))
            for r in stale:
                if r != i:
                    row_min[r] = d2[r].min()
                    row_arg[r] = d2[r].argmin()
            better = active & (new_d2 < row_min)
            row_min[better] = new_d2[better]
            row_arg[better] = i

    return Dendrogram(n_leaves=n, merges=tuple(merges),
                      leaf_ids=tuple(leaf_ids) if leaf_ids else None)


def cut(dendrogram: Dendrogram, k: int) -> ClusterAssignment:
    """Undo the last k-1 merges; labels numbered by first leaf appearance."""
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    parent = np.arange(2 * n - 1)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n - k):
        merge = dendrogram.merges[step]
        node = n + step
        parent[find(merge.left)] = node
        parent[find(merge.right)] = node

    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for leaf in range(n):
        root = find(leaf)
        if root not in seen:
            seen[root] = len(seen)
        labels[leaf] = seen[root]
    return ClusterAssignment(labels=labels, k=k)


def export_dendrogram(dendrogram: Dendrogram) -> str:
    """Lossless JSON serialization (floats round-trip via repr)."""
    doc = {
        "n_leaves": dendrogram.n_leaves,
        "merges": [[m.left, m.right, m.height, m.size]
                   for m in dendrogram.merges],
    }
    if dendrogram.leaf_ids is not None:
        doc["leaf_ids"] = list(dendrogram.leaf_ids)
    return json.dumps(doc, indent=1)


def import_dendrogram(text: str) -> Dendrogram:
    doc = json.loads(text)
    merges = tuple(Merge(left=int(l), right=int(r), height=float(h),
                         size=int(s)) for l, r, h, s in doc["merges"])
    ids = doc.get("leaf_ids")
    return Dendrogram(n_leaves=int(doc["n_leaves"]), merges=merges,
                      leaf_ids=tuple(ids) if ids is not None else None)


def save_dendrogram(dendrogram: Dendrogram, path: str | Path) -> None:
    Path(path).write_text(export_dendrogram(dendrogram), encoding="utf-8")


def load_dendrogram(path: str | Path) -> Dendrogram:
    return import_dendrogram(Path(path).read_text(encoding="utf-8"))
