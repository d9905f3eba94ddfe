"""Choosing the number of clusters.

Two rules are provided. The KL-ratio rule takes the smallest K whose mean
optimized objective falls below ``epsilon`` times the one-cluster objective.
The bootstrap rule clusters fitted replicate means on pairs of bootstrap
resamples and measures how often the two clusterings disagree about pairs
of subjects.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from joblib import Parallel, delayed
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from projclust.pc_clustering.utils.projection import (
    MAX_ITER,
    N_RESTARTS,
    project_cluster_path,
)
from projclust.pc_model.constants import FITTED_MEANS_MAX_DRAWS
from projclust.pc_model.utils.draws import subsample_draws
from projclust.pc_model.utils.replicate import (
    fitted_mean_replicate,
    partition_G,
    projection_problem,
)

logger = logging.getLogger(__name__)

HALF_MAX = "half_max"
MIN = "min"
BOOTSTRAP_RULES = [HALF_MAX, MIN]
KMEANS_RESTARTS = 10


@dataclass
class KlCurve:
    K: np.ndarray
    KL: np.ndarray

    @property
    def ratio(self):
        return self.KL / self.KL[0]

    def rows(self):
        return [{"K": int(k), "KL_K": float(v)} for k, v in zip(self.K, self.KL)]


@dataclass
class InstabilityCurve:
    K: np.ndarray
    I: np.ndarray

    def rows(self):
        return [{"K": int(k), "I_K": float(v)} for k, v in zip(self.K, self.I)]


def _clip_k_max(K_max, n):
    if K_max > n:
        logger.warning("K_max=%d exceeds the %d subjects; using K_max=%d", K_max, n, n)
        return n
    return K_max


def _draw_path(design, draw, shared, K_max, stream, max_iter, n_restarts):
    b_A, Qinv = projection_problem(design, draw, shared)
    path = project_cluster_path(
        b_A, Qinv, K_max, max_iter=max_iter, n_restarts=n_restarts, seed=stream
    )
    return [p.objective for p in path]


def kl_curve(
    design,
    draws,
    shared,
    K_max,
    S=None,
    seed=0,
    n_jobs=1,
    max_iter=MAX_ITER,
    n_restarts=N_RESTARTS,
):
    """Mean optimized KL objective for K = 1..K_max over S posterior draws."""
    if S is not None and S > len(draws):
        raise ValidationError(f"S={S} exceeds the {len(draws)} available draws", code="config")
    chosen = subsample_draws(draws, S)
    K_max = _clip_k_max(K_max, len(design))
    objectives = Parallel(n_jobs=n_jobs)(
        delayed(_draw_path)(
            design,
            draw,
            shared,
            K_max,
            np.random.SeedSequence(seed, spawn_key=(index,)),
            max_iter,
            n_restarts,
        )
        for index, draw in enumerate(chosen)
    )
    curve = KlCurve(K=np.arange(1, K_max + 1), KL=np.mean(objectives, axis=0))
    logger.info("KL curve over %d draws: KL_1=%.4g", len(chosen), curve.KL[0])
    return curve


def choose_k_kl(curve, epsilon=0.1):
    """Smallest K with KL_K / KL_1 < epsilon."""
    if curve.K[0] != 1:
        raise ValidationError("the KL curve must start at K=1", code="config")
    if not curve.KL[0] > 0:
        raise ValidationError(
            "KL_1 is zero: all subjects have identical shared effects",
            code="degenerate",
        )
    below = np.flatnonzero(curve.ratio < epsilon)
    if len(below) == 0:
        logger.warning(
            "No K up to %d brings KL_K/KL_1 below %.3g; choosing K=%d",
            curve.K[-1],
            epsilon,
            curve.K[-1],
        )
        return int(curve.K[-1])
    return int(curve.K[below[0]])


def pair_disagreement(a, b):
    """Fraction of unordered pairs grouped together by one labeling and
    apart by the other."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    together_a = a[:, None] == a[None, :]
    together_b = b[:, None] == b[None, :]
    upper = np.triu_indices(n, k=1)
    return float(np.mean(together_a[upper] != together_b[upper]))


def _bootstrap_pair(fitted, K, stream):
    rng = np.random.default_rng(stream)
    n = fitted.shape[0]
    labelings = []
    for _ in range(2):
        rows = rng.integers(0, n, size=n)
        kmeans = KMeans(
            n_clusters=K,
            n_init=KMEANS_RESTARTS,
            random_state=int(rng.integers(2**31 - 1)),
        )
        with warnings.catch_warnings():
            # resamples may hold fewer than K distinct rows
            warnings.simplefilter("ignore", ConvergenceWarning)
            kmeans.fit(fitted[rows])
        # nearest learned centroid for every original row
        labelings.append(kmeans.predict(fitted))
    return pair_disagreement(*labelings)


def instability(fitted, K, B=100, seed=0, n_jobs=1):
    """Mean pairwise disagreement of K-means clusterings fitted on B pairs of
    bootstrap resamples of the rows of ``fitted``."""
    fitted = np.asarray(fitted, dtype=float)
    n = fitted.shape[0]
    if not 1 <= K <= n:
        raise ValidationError(f"K={K} must lie between 1 and n={n}", code="out_of_range")
    if n < 2:
        raise ValidationError("instability needs at least two subjects", code="empty")
    values = Parallel(n_jobs=n_jobs)(
        delayed(_bootstrap_pair)(fitted, K, np.random.SeedSequence(seed, spawn_key=(K, b)))
        for b in range(B)
    )
    return float(np.mean(values))


def instability_curve(fitted, K_max=30, B=100, seed=0, n_jobs=1):
    K_max = _clip_k_max(K_max, np.asarray(fitted).shape[0])
    Ks = np.arange(2, K_max + 1)
    values = [instability(fitted, K, B=B, seed=seed, n_jobs=n_jobs) for K in Ks]
    return InstabilityCurve(K=Ks, I=np.asarray(values))


def choose_k_bootstrap(curve, K_max=30, rule=HALF_MAX):
    """K = min{k : I_k >= max_l I_l / 2} over 2 <= k <= K_max (``half_max``),
    or the K of smallest instability (``min``). K = 1 is never returned."""
    if rule not in BOOTSTRAP_RULES:
        raise ValidationError(
            f"unknown instability rule {rule!r}, expected one of {BOOTSTRAP_RULES}",
            code="config",
        )
    keep = (curve.K >= 2) & (curve.K <= K_max)
    Ks, values = curve.K[keep], curve.I[keep]
    if len(Ks) == 0:
        raise ValidationError("instability curve has no K in 2..K_max", code="empty")
    if not np.any(values > 0):
        logger.warning("Instability is zero for every K; choosing K=2")
        return 2
    if rule == MIN:
        return int(Ks[np.argmin(values)])
    return int(Ks[np.flatnonzero(values >= 0.5 * values.max())[0]])


def replicate_fitted_means(
    draws, spec, times, n_covariates=0, max_draws=FITTED_MEANS_MAX_DRAWS
):
    """Fitted replicate means of every subject on ``times`` (n x T), averaged
    over at most ``max_draws`` posterior draws."""
    if n_covariates and spec.use_covariates:
        logger.warning("Fitted means use zero covariates away from the observed times")
    chosen = subsample_draws(draws, min(len(draws), max_draws))
    n = chosen[0].n
    total = np.zeros((n, len(times)))
    for draw in chosen:
        gp = partition_G(draw.G, spec.shared)
        for i in range(n):
            total[i] += fitted_mean_replicate(draw, spec, i, times, n_covariates, gp=gp)
    return total / len(chosen)
