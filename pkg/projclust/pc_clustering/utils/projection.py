"""Projection clustering.

Each subject i carries shared effects b_iA and a metric Q_i^{-1}. A partition
into K clusters with centroids d_1..d_K costs

    sum_i 0.5 (d_{z_i} - b_iA)^T Q_i^{-1} (d_{z_i} - b_iA),

which is minimized K-means style: precision-weighted centroids, then
nearest-centroid assignment under each subject's own metric, until the
labels stop changing. Single-subject moves then polish the best descent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_model.utils.replicate import kl_matrix
from projclust.utils.linalg import cholesky_solve, jitter_cholesky

logger = logging.getLogger(__name__)

MAX_ITER = 100
N_RESTARTS = 10
# redraws before a restart reuses a seed set
SEED_TRIES = 10
# clusters a subject tries in single_moves, and the relative gain a move needs
MOVE_CANDIDATES = 3
MOVE_TOL = 1e-12


@dataclass
class Partition:
    labels: np.ndarray
    centroids: np.ndarray
    objective: float
    iterations: int = 0
    converged: bool = True
    trace: list = field(default_factory=list)

    @property
    def K(self):
        return self.centroids.shape[0]

    @property
    def n(self):
        return len(self.labels)

    def as_record(self, draw_index=None):
        return {
            "draw_index": draw_index,
            "K": int(self.K),
            "labels": [int(z) for z in self.labels],
            "objective": float(self.objective),
            "converged": bool(self.converged),
        }


def contributions(b_A, Qinv, labels, centroids):
    """Per-subject KL of b_iA against its own centroid."""
    values = kl_matrix(b_A, Qinv, centroids)
    return values[np.arange(len(labels)), labels]


def objective_kl(b_A, Qinv, partition):
    return float(contributions(b_A, Qinv, partition.labels, partition.centroids).sum())


def centroid_update(labels, b_A, Qinv, K=None, previous=None):
    """Precision-weighted mean of every cluster.

    d_j = (sum_{i in C_j} Q_i^{-1})^{-1} sum_{i in C_j} Q_i^{-1} b_iA. A cluster
    whose members share one b_iA gets exactly that value; an empty cluster
    keeps its ``previous`` centroid.
    """
    labels = np.asarray(labels)
    b_A = np.asarray(b_A, dtype=float)
    Qinv = np.asarray(Qinv, dtype=float)
    K = int(labels.max()) + 1 if K is None else K

    centroids = np.empty((K, b_A.shape[1]))
    for j in range(K):
        members = np.flatnonzero(labels == j)
        if len(members) == 0:
            if previous is None:
                raise ValidationError(f"cluster {j} has no members", code="empty")
            centroids[j] = previous[j]
        else:
            centroids[j] = cluster_centroid(b_A, Qinv, members, name=j)
    return centroids


def cluster_centroid(b_A, Qinv, members, name=""):
    if np.all(b_A[members] == b_A[members[0]]):
        return b_A[members[0]].copy()
    precision = Qinv[members].sum(axis=0)
    weighted = np.einsum("nab,nb->a", Qinv[members], b_A[members])
    L = jitter_cholesky(precision, what=f"cluster {name} precision")
    return cholesky_solve(L, weighted)


def cluster_cost(b_A, Qinv, members):
    """KL of one cluster at its own precision-weighted centroid."""
    if len(members) == 0:
        return 0.0
    centroid = cluster_centroid(b_A, Qinv, members)
    return float(kl_matrix(b_A[members], Qinv[members], centroid[None, :]).sum())


def assign(b_A, Qinv, centroids):
    # argmin returns the first minimum, so ties go to the lowest index
    return np.argmin(kl_matrix(b_A, Qinv, centroids), axis=1)


def repair_empty(labels, centroids, b_A, Qinv, previous=None):
    """Reseat empty clusters at the worst-fitted subjects.

    The subject with the largest KL contribution, taken from a cluster with
    at least two members, moves to the empty cluster and becomes its
    centroid. When every contribution is zero the cluster stays empty.
    """
    labels = labels.copy()
    centroids = centroids.copy()
    K = centroids.shape[0]
    for j in range(K):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=K)
        movable = sizes[labels] >= 2
        if not movable.any():
            break
        fit = contributions(b_A, Qinv, labels, centroids)
        fit[~movable] = -np.inf
        worst = int(np.argmax(fit))
        if fit[worst] > 0:
            labels[worst] = j
            centroids[j] = b_A[worst]
        elif previous is None:
            centroids[j] = b_A[worst]
    return labels, centroids


def canonical(labels, centroids):
    """Relabel clusters by first appearance; empty clusters go last."""
    K = centroids.shape[0]
    order = list(dict.fromkeys(int(z) for z in labels))
    order += [j for j in range(K) if j not in order]
    mapping = np.empty(K, dtype=int)
    mapping[order] = np.arange(K)
    return mapping[labels], centroids[order]


def seeded_labels(b_A, Qinv, K, rng, taken=None):
    """Labels from K distinct random subjects used as the first centroids.

    Every other subject joins the seed that fits it best under its own
    metric. ``taken`` collects the seed sets already used so restarts try
    different ones while untried sets remain.
    """
    n = len(b_A)
    for _ in range(SEED_TRIES):
        chosen = np.sort(rng.choice(n, size=K, replace=False))
        if taken is None or tuple(chosen) not in taken:
            break
    if taken is not None:
        taken.add(tuple(chosen))
    labels = assign(b_A, Qinv, b_A[chosen])
    labels[chosen] = np.arange(K)
    return labels


def single_moves(b_A, Qinv, labels, centroids, max_passes=MAX_ITER):
    """Move single subjects to other clusters while that lowers the objective.

    Centroids are recomputed exactly for both clusters a move touches. A
    subject tries the ``MOVE_CANDIDATES`` other clusters whose centroids fit
    it best; no move empties a cluster. Returns the labels and the number of
    moves made.
    """
    labels = np.array(labels, dtype=int)
    centroids = np.array(centroids, dtype=float)
    K = centroids.shape[0]
    members = [np.flatnonzero(labels == j) for j in range(K)]
    costs = [cluster_cost(b_A, Qinv, m) for m in members]
    moves = 0
    for _ in range(max_passes):
        for j, m in enumerate(members):
            if len(m):
                centroids[j] = cluster_centroid(b_A, Qinv, m, name=j)
        fits = kl_matrix(b_A, Qinv, centroids)
        moved = False
        for i in range(len(labels)):
            source = labels[i]
            if len(members[source]) < 2:
                continue
            left = members[source][members[source] != i]
            left_cost = cluster_cost(b_A, Qinv, left)
            targets = [j for j in np.argsort(fits[i], kind="stable") if j != source]
            for j in targets[:MOVE_CANDIDATES]:
                joined = np.sort(np.append(members[j], i))
                joined_cost = cluster_cost(b_A, Qinv, joined)
                before = costs[source] + costs[j]
                if before - left_cost - joined_cost > MOVE_TOL * max(1.0, before):
                    labels[i] = j
                    members[source], members[j] = left, joined
                    costs[source], costs[j] = left_cost, joined_cost
                    moves += 1
                    moved = True
                    break
        if not moved:
            break
    return labels, moves


def descend(b_A, Qinv, labels, K, max_iter=MAX_ITER):
    """One greedy run from ``labels``; the objective never increases."""
    labels = np.asarray(labels, dtype=int)
    centroids = np.zeros((K, b_A.shape[1]))
    present = np.unique(labels)
    centroids[present] = centroid_update(labels, b_A, Qinv, K, previous=centroids)[present]
    if len(present) < K:
        labels, centroids = repair_empty(labels, centroids, b_A, Qinv)
        centroids = centroid_update(labels, b_A, Qinv, K, previous=centroids)

    trace = [float(contributions(b_A, Qinv, labels, centroids).sum())]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new_labels = assign(b_A, Qinv, centroids)
        new_labels, centroids = repair_empty(new_labels, centroids, b_A, Qinv, previous=centroids)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        centroids = centroid_update(labels, b_A, Qinv, K, previous=centroids)
        trace.append(float(contributions(b_A, Qinv, labels, centroids).sum()))

    labels, centroids = canonical(labels, centroids)
    return Partition(
        labels=labels,
        centroids=centroids,
        objective=float(contributions(b_A, Qinv, labels, centroids).sum()),
        iterations=iterations,
        converged=converged,
        trace=trace,
    )


def project_cluster(
    b_A, Qinv, K, init_labels=None, max_iter=MAX_ITER, n_restarts=N_RESTARTS, seed=0
):
    """Best of ``n_restarts`` seeded starts (plus ``init_labels``) for K clusters.

    The best descent is then polished by single-subject moves, descending
    again after every round of moves, until no move lowers the objective.
    ``seed`` may be an int or a numpy SeedSequence.
    """
    b_A = np.asarray(b_A, dtype=float)
    Qinv = np.asarray(Qinv, dtype=float)
    n = b_A.shape[0]
    if not 1 <= K <= n:
        raise ValidationError(f"K={K} must lie between 1 and n={n}", code="out_of_range")

    rng = np.random.default_rng(seed)
    taken = set()
    starts = [] if init_labels is None else [np.asarray(init_labels, dtype=int)]
    starts += [seeded_labels(b_A, Qinv, K, rng, taken) for _ in range(n_restarts)]

    best = None
    for labels in starts:
        candidate = descend(b_A, Qinv, labels, K, max_iter)
        if best is None or candidate.objective < best.objective:
            best = candidate

    for _ in range(max_iter):
        labels, moves = single_moves(b_A, Qinv, best.labels, best.centroids, max_iter)
        if not moves:
            break
        candidate = descend(b_A, Qinv, labels, K, max_iter)
        if candidate.objective >= best.objective:
            break
        best = candidate
    if not best.converged:
        logger.debug("K=%d: best start stopped after %d iterations", K, best.iterations)
    return best


def split_worst(partition, b_A, Qinv):
    """Labels for K + 1 clusters: the worst-fitted subject starts a new one."""
    fit = contributions(b_A, Qinv, partition.labels, partition.centroids)
    labels = partition.labels.copy()
    labels[int(np.argmax(fit))] = partition.K
    return labels


def project_cluster_path(
    b_A, Qinv, K_max, max_iter=MAX_ITER, n_restarts=N_RESTARTS, seed=0
):
    """Partitions for K = 1..K_max, each warm-started from the previous one.

    Splitting the worst subject off the K - 1 solution gives a start whose
    objective is already below KL_{K-1}, so the optimized objectives are
    nonincreasing in K.
    """
    seed = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    path = []
    for K in range(1, K_max + 1):
        init = split_worst(path[-1], b_A, Qinv) if path else None
        stream = np.random.SeedSequence(seed.entropy, spawn_key=(*seed.spawn_key, K))
        path.append(
            project_cluster(
                b_A, Qinv, K, init_labels=init, max_iter=max_iter, n_restarts=n_restarts, seed=stream
            )
        )
    return path
