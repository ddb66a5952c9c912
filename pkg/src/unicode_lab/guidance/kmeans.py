import numpy as np

from .._validation import check_int


def _sq_dists(points, centroids):
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plusplus_seeds(points, k, rng):
    n = len(points)
    chosen = [int(rng.integers(n))]
    d2 = _sq_dists(points, points[chosen]).min(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every remaining point coincides with a centre
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        d2 = np.minimum(d2, _sq_dists(points, points[[nxt]])[:, 0])
    return points[chosen].copy()


def kmeans_cluster(points, K, iters=20, rng=None):
    """Lloyd's algorithm with k-means++ seeding.

    Returns ``(assignments, centroids)``. Clusters that go empty are
    re-seeded at the point farthest from its current centroid. When ``K``
    is at least the number of points every point is its own cluster and
    the surplus clusters are dropped.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    if n == 0:
        raise ValueError("kmeans_cluster needs at least one point")
    K = check_int(K, "K", min_val=1)
    iters = check_int(iters, "iters", min_val=1)
    if K >= n:
        return np.arange(n), points.copy()
    if rng is None:
        rng = np.random.default_rng(0)

    centroids = _plusplus_seeds(points, K, rng)
    assign = None
    for _ in range(iters):
        d2 = _sq_dists(points, centroids)
        new_assign = d2.argmin(axis=1)
        for k in range(K):
            if not np.any(new_assign == k):
                sizes = np.bincount(new_assign, minlength=K)
                own = d2[np.arange(n), new_assign]
                own[sizes[new_assign] < 2] = -1.0  # never empty another cluster
                far = int(np.argmax(own))
                new_assign[far] = k
                centroids[k] = points[far]
        for k in range(K):
            centroids[k] = points[new_assign == k].mean(axis=0)
        if assign is not None and np.array_equal(assign, new_assign):
            break
        assign = new_assign
    return new_assign, centroids
