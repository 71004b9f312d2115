"""K-means over fPCA scores with silhouette-selected k, plus donor trimming.

Points are put into a canonical (lexicographic) order before seeding, so
results are invariant to input permutations for a fixed seed.  Restarts use
per-restart derived seeds and are merged by deterministic SSE argmin.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .fpca import FpcaScores
from .panel import DonorSelection

__all__ = [
    "ClusterAssignment",
    "kmeans",
    "silhouette_mean",
    "choose_k",
    "trim_by_cluster",
]

DEFAULT_RESTARTS = 10
MAX_LLOYD_ITER = 300


def _as_points(points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    return points


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster labels, centers (member means), and the mean silhouette score."""

    labels: np.ndarray
    centers: np.ndarray
    k: int
    mean_silhouette: float
    sse: float


def _kmeans_pp_centers(points, k, rng):
    """k-means++ seeding (Arthur & Vassilvitskii)."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = rng.integers(n)
    centers[0] = points[first]
    dist_sq = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = dist_sq.sum()
        if total <= 0.0:
            # All remaining mass at distance zero; duplicate any point.
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=dist_sq / total)
        centers[c] = points[idx]
        dist_sq = np.minimum(dist_sq, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter=MAX_LLOYD_ITER):
    """Lloyd iterations until labels stabilize; empty clusters steal the farthest point.

    Returns ``(labels, centers, sse, sse_path)`` where ``sse_path`` holds the
    within-cluster sum of squares after each center update.
    """
    n, _ = points.shape
    k = centers.shape[0]
    labels = None
    sse_path = []
    for _ in range(max_iter):
        dists = cdist(points, centers, "sqeuclidean")
        new_labels = np.argmin(dists, axis=1)
        # Re-home empty clusters to the point farthest from its current center,
        # never emptying the source cluster.
        for c in range(k):
            if np.any(new_labels == c):
                continue
            counts = np.bincount(new_labels, minlength=k)
            movable = counts[new_labels] > 1
            assigned = dists[np.arange(n), new_labels]
            assigned = np.where(movable, assigned, -np.inf)
            steal = int(np.argmax(assigned))
            new_labels[steal] = c
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
        sse_path.append(float(np.sum((points - centers[labels]) ** 2)))
    sse = float(np.sum((points - centers[labels]) ** 2))
    return labels, centers, sse, sse_path


def kmeans(
    points: np.ndarray,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> ClusterAssignment:
    """Best-of-restarts k-means, deterministic for a fixed seed.

    ``2 <= k <= n`` is required.  Restart ``r`` draws its k-means++ centers
    from ``default_rng([seed, k, r])`` on canonically ordered points, and the
    assignment with the lowest within-cluster sum of squares wins (ties to
    the lower restart index).
    """
    points = _as_points(points)
    n = points.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    if k < 2:
        raise ValueError("k must be at least 2")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")

    order = np.lexsort(points.T[::-1])
    canon = points[order]

    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, k, r])
        centers = _kmeans_pp_centers(canon, k, rng)
        labels, centers, sse, _ = _lloyd(canon, centers.copy())
        if best is None or sse < best[2]:
            best = (labels, centers, sse)

    labels_canon, centers, sse = best
    labels = np.empty(n, dtype=int)
    labels[order] = labels_canon
    score = silhouette_mean(points, labels)
    return ClusterAssignment(labels, centers, k, float(score), sse)


def silhouette_mean(points: np.ndarray, labels) -> float:
    """Mean silhouette score with Euclidean distances.

    For each point, ``a`` is the mean distance to its own cluster's other
    members and ``b`` the smallest mean distance to another cluster:
    ``s = (b - a) / max(a, b)``, zero for singleton clusters and for the
    degenerate ``a == b == 0`` case.
    """
    points = _as_points(points)
    labels = np.asarray(labels, dtype=int)
    ids = np.unique(labels)
    if ids.size < 2:
        raise ValueError("silhouette requires at least two clusters")

    dists = cdist(points, points)
    scores = np.zeros(points.shape[0])
    for i in range(points.shape[0]):
        own = labels == labels[i]
        n_own = own.sum()
        if n_own == 1:
            scores[i] = 0.0
            continue
        a = dists[i, own].sum() / (n_own - 1)
        b = min(dists[i, labels == c].mean() for c in ids if c != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def choose_k(
    points: np.ndarray,
    k_range: tuple = (2, 10),
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> ClusterAssignment:
    """Run :func:`kmeans` over a k range and keep the best mean silhouette.

    Ties break toward smaller k.
    """
    points = _as_points(points)
    k_min, k_max = k_range
    if k_min > k_max or k_min < 2:
        raise ValueError(f"invalid k range {k_range}")
    if k_max > points.shape[0] - 1:
        raise ValueError(
            f"k_max={k_max} too large for {points.shape[0]} points (needs <= n-1)"
        )
    best = None
    for k in range(k_min, k_max + 1):
        result = kmeans(points, k, restarts=restarts, seed=seed)
        if best is None or result.mean_silhouette > best.mean_silhouette:
            best = result
    return best


def trim_by_cluster(
    scores: FpcaScores,
    treated_index: int,
    k_max: int | None = None,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> DonorSelection:
    """Keep the donors sharing the treated unit's cluster.

    If the treated unit ends up alone in its cluster, the full donor pool is
    returned with ``fallback_full`` flagged in the diagnostics so estimation
    can proceed with a visible warning.
    """
    points = _as_points(scores.scores)
    n = points.shape[0]
    if not 0 <= treated_index < n:
        raise ValueError(f"treated_index {treated_index} out of range for {n} units")
    if k_max is None:
        k_max = min(10, n - 1)

    spread = float(np.abs(points - points[0]).max())
    if k_max < 2 or spread <= 1e-12 * max(1.0, float(np.abs(points).max())):
        # Too few units to cluster, or all units coincide in score space: a
        # single effective cluster, so trimming keeps the whole pool.
        donors = [i for i in range(n) if i != treated_index]
        return DonorSelection.build(
            donors,
            "fpca_cluster",
            treated_index,
            {"k": 1.0, "mean_silhouette": 0.0, "degenerate_scores": 1.0},
        )

    assignment = choose_k(points, (2, k_max), restarts=restarts, seed=seed)

    mates = np.flatnonzero(assignment.labels == assignment.labels[treated_index])
    donors = [int(i) for i in mates if i != treated_index]
    diagnostics = {
        "k": float(assignment.k),
        "mean_silhouette": assignment.mean_silhouette,
        "cluster_size": float(mates.size),
    }
    if not donors:
        donors = [i for i in range(n) if i != treated_index]
        diagnostics["fallback_full"] = 1.0
    return DonorSelection.build(donors, "fpca_cluster", treated_index, diagnostics)
