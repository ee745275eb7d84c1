"""Centroid-linkage agglomerative clustering of scalar strength estimates.

The paired-merge rules are fully deterministic:

* the pair with the smallest squared centroid distance merges first;
* distance ties break toward the lexicographically smallest pair of
  cluster positions (clusters are kept ordered by their smallest member
  index, so positions are stable identifiers);
* after a merge the new centroid is the size-weighted mean of the members
  and the merged cluster takes the position of its lower-index parent;
* labels of a c-cluster partition are 1..c in order of smallest member.

Partitions are only ever cut by cluster count, never by merge height, so
centroid-linkage inversions are harmless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NonFiniteInput


@dataclass(frozen=True)
class Merge:
    """One agglomeration step.

    ``a`` and ``b`` are the smallest member indices of the merged clusters
    (a < b); ``distance_sq`` is the squared centroid distance at the merge.
    """

    a: int
    b: int
    distance_sq: float


@dataclass(eq=False)
class ClusterHierarchy:
    """Nested partitions of K robots for every cluster count c = K..1."""

    num_items: int
    merges: tuple[Merge, ...]
    partitions: dict[int, np.ndarray]

    def assignment(self, c: int) -> np.ndarray:
        if c not in self.partitions:
            raise InvalidArgument(f"no partition with {c} clusters (K={self.num_items})")
        return self.partitions[c]


def _require_finite(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise InvalidArgument("values must be one-dimensional")
    if not np.all(np.isfinite(values)):
        raise NonFiniteInput("clustering input contains non-finite values")
    return values


def closest_pair(centroids: np.ndarray) -> tuple[int, int]:
    """Positions (i, j), i < j, of the closest centroid pair.

    Ties resolve to the smallest (i, j) in lexicographic order.
    """
    centroids = _require_finite(centroids)
    n = centroids.shape[0]
    if n < 2:
        raise InvalidArgument("need at least two clusters to merge")
    best = (0, 1)
    best_d = (centroids[0] - centroids[1]) ** 2
    for i in range(n):
        for j in range(i + 1, n):
            d = (centroids[i] - centroids[j]) ** 2
            if d < best_d:
                best_d = d
                best = (i, j)
    return best


def merge_centroids(
    centroids: np.ndarray, sizes: np.ndarray, i: int, j: int
) -> tuple[np.ndarray, np.ndarray]:
    """Merge positions i and j (i < j): weighted-mean centroid replaces i."""
    centroids = np.asarray(centroids, dtype=float)
    sizes = np.asarray(sizes, dtype=int)
    merged = (sizes[i] * centroids[i] + sizes[j] * centroids[j]) / (sizes[i] + sizes[j])
    new_centroids = np.delete(centroids, j)
    new_sizes = np.delete(sizes, j)
    new_centroids[i] = merged
    new_sizes[i] = sizes[i] + sizes[j]
    return new_centroids, new_sizes


def canonical_labels(groups: np.ndarray) -> np.ndarray:
    """Relabel an arbitrary grouping to 1..c ordered by smallest member index."""
    groups = np.asarray(groups)
    order: dict = {}
    out = np.empty(groups.shape[0], dtype=int)
    for idx, g in enumerate(groups):
        if g not in order:
            order[g] = len(order) + 1
        out[idx] = order[g]
    return out


def cluster_centroids(assignment: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-label centroids (means of ``values``) and sizes, labels 1..c."""
    assignment = np.asarray(assignment, dtype=int)
    values = _require_finite(values)
    c = int(assignment.max())
    centroids = np.empty(c)
    sizes = np.empty(c, dtype=int)
    for label in range(1, c + 1):
        members = np.flatnonzero(assignment == label)
        if members.size == 0:
            raise InvalidArgument(f"cluster label {label} has no members")
        sizes[label - 1] = members.size
        centroids[label - 1] = values[members].mean()
    return centroids, sizes


def single_merge(assignment: np.ndarray, values: np.ndarray) -> np.ndarray:
    """One agglomeration step: merge the two closest clusters of ``assignment``.

    ``values`` holds one scalar per item (constant within clusters after a
    refit, in which case each cluster centroid is its coefficient).  Returns
    the canonical (c-1)-cluster assignment.
    """
    assignment = np.asarray(assignment, dtype=int)
    centroids, sizes = cluster_centroids(assignment, values)
    i, j = closest_pair(centroids)
    # Positions are label-1 because canonical labels are ordered by smallest
    # member, matching the positional ordering used by closest_pair.
    label_i, label_j = i + 1, j + 1
    merged = np.where(assignment == label_j, label_i, assignment)
    return canonical_labels(merged)


def centroid_hierarchy(values: np.ndarray) -> ClusterHierarchy:
    """Full centroid-linkage hierarchy over scalar values.

    Returns all K-1 merges and the partition for every cluster count.
    """
    values = _require_finite(values)
    k = values.shape[0]
    if k < 1:
        raise InvalidArgument("need at least one value")

    partitions: dict[int, np.ndarray] = {k: np.arange(1, k + 1)}
    merges: list[Merge] = []

    centroids = values.copy()
    sizes = np.ones(k, dtype=int)
    smallest_member = np.arange(k)
    position = np.arange(k)  # item -> current cluster position

    for c in range(k - 1, 0, -1):
        i, j = closest_pair(centroids)
        d = float((centroids[i] - centroids[j]) ** 2)
        merges.append(Merge(int(smallest_member[i]), int(smallest_member[j]), d))
        centroids, sizes = merge_centroids(centroids, sizes, i, j)
        smallest_member = np.delete(smallest_member, j)
        position = np.where(position == j, i, position)
        position = np.where(position > j, position - 1, position)
        partitions[c] = position + 1

    return ClusterHierarchy(num_items=k, merges=tuple(merges), partitions=partitions)
