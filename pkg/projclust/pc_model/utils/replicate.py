"""Mixed predictive replicates.

A replicate of subject i keeps theta = (beta, sigma2, G) and the shared
random effects b_iA, and redraws the rest from the conditional prior

    r_iB | b_iA ~ N(gain b_iA, schur),  gain = G_AB^T G_A^{-1},
                                        schur = G_B - gain G_AB.

Integrating r_iB out gives a Gaussian for the replicate with mean
X_i beta + M_i b_iA, where M_i = Z_iA + Z_iB gain, and covariance
C_i = Z_iB schur Z_iB^T + sigma2 I. Two such Gaussians that differ only in
b_iA are compared through the metric Q_i^{-1} = M_i^T C_i^{-1} M_i.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from projclust.pc_model.constants import KL_NEGATIVE_TOLERANCE
from projclust.utils.linalg import cholesky_solve, jitter_cholesky, symmetrize, whiten

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GPartition:
    shared: tuple
    complement: tuple
    G_A: np.ndarray
    G_AB: np.ndarray
    G_B: np.ndarray
    gain: np.ndarray
    schur: np.ndarray

    @property
    def permutation(self):
        return list(self.shared) + list(self.complement)

    def reassemble(self):
        """G in the original column order, rebuilt from the blocks."""
        permuted = np.block([[self.G_A, self.G_AB], [self.G_AB.T, self.G_B]])
        q = len(self.permutation)
        inverse = np.empty(q, dtype=int)
        inverse[self.permutation] = np.arange(q)
        return permuted[np.ix_(inverse, inverse)]


def partition_G(G, shared):
    G = np.asarray(G, dtype=float)
    q = G.shape[0]
    shared = tuple(sorted(int(j) for j in shared))
    complement = tuple(j for j in range(q) if j not in shared)
    A, B = list(shared), list(complement)

    G_A = G[np.ix_(A, A)]
    G_AB = G[np.ix_(A, B)]
    G_B = G[np.ix_(B, B)]
    L_A = jitter_cholesky(G_A, what="G_A")
    gain = cholesky_solve(L_A, G_AB).T if B else np.zeros((0, len(A)))
    schur = symmetrize(G_B - gain @ G_AB) if B else np.zeros((0, 0))
    return GPartition(
        shared=shared, complement=complement, G_A=G_A, G_AB=G_AB, G_B=G_B, gain=gain, schur=schur
    )


def conditional_prior(gp, b_A):
    """Mean and covariance of r_iB given b_iA."""
    b_A = np.asarray(b_A, dtype=float)
    if b_A.shape[-1] != len(gp.shared):
        raise ValueError(f"b_A has {b_A.shape[-1]} entries, shared set has {len(gp.shared)}")
    return gp.gain @ b_A, gp.schur


def mean_loading(Z, gp):
    # M_i = Z_iA + Z_iB gain
    Z = np.asarray(Z, dtype=float)
    return Z[:, list(gp.shared)] + Z[:, list(gp.complement)] @ gp.gain


def replicate_covariance(Z, gp, sigma2):
    Z_B = np.asarray(Z, dtype=float)[:, list(gp.complement)]
    return symmetrize(Z_B @ gp.schur @ Z_B.T + sigma2 * np.eye(Z_B.shape[0]))


def replicate_mean(X, Z, beta, b_A, gp):
    return np.asarray(X) @ beta + mean_loading(Z, gp) @ np.asarray(b_A, dtype=float)


def replicate_predictive(design, draw, gp, i):
    """Gaussian (mean, cov) of subject i's replicate under one draw."""
    subject = design[i]
    b_A = draw.b[i, list(gp.shared)]
    mean = replicate_mean(subject.X, subject.Z, draw.beta, b_A, gp)
    return mean, replicate_covariance(subject.Z, gp, draw.sigma2)


def metric_from_design(Z, gp, sigma2):
    M = mean_loading(Z, gp)
    L = jitter_cholesky(replicate_covariance(Z, gp, sigma2), what="replicate covariance")
    W = whiten(L, M)
    return symmetrize(W.T @ W)


def projection_metric(design, draw, gp, i):
    return metric_from_design(design[i].Z, gp, draw.sigma2)


def kl_term(b_A, d, Qinv):
    """KL divergence 0.5 (d - b_A)^T Q^{-1} (d - b_A) between two replicate
    Gaussians that share their covariance."""
    delta = np.asarray(d, dtype=float) - np.asarray(b_A, dtype=float)
    value = 0.5 * float(delta @ np.asarray(Qinv) @ delta)
    return _clamp_kl(value)


def _clamp_kl(value):
    if value >= 0:
        return value
    if value >= -KL_NEGATIVE_TOLERANCE:
        return 0.0
    raise FloatingPointError(f"negative KL divergence {value:.3e}; metric is not PSD")


def kl_matrix(b_A, Qinv, centroids):
    """KL of every subject (rows) against every centroid (columns)."""
    delta = np.asarray(centroids)[None, :, :] - np.asarray(b_A)[:, None, :]
    values = 0.5 * np.einsum("nka,nab,nkb->nk", delta, np.asarray(Qinv), delta)
    if np.any(values < -KL_NEGATIVE_TOLERANCE):
        raise FloatingPointError(
            f"negative KL divergence {values.min():.3e}; metric is not PSD"
        )
    return np.maximum(values, 0.0)


def fitted_mean_replicate(draw, spec, i, times, n_covariates=0, gp=None):
    """Mean of subject i's replicate on an arbitrary time grid.

    Covariate columns of X are set to zero since covariates are only known
    at observed times.
    """
    times = np.asarray(times, dtype=float)
    gp = partition_G(draw.G, spec.shared) if gp is None else gp
    covariates = None
    if n_covariates and spec.use_covariates:
        covariates = np.zeros((len(times), n_covariates))
    X = spec.fixed_design(times, covariates)
    Z = spec.random_design(times)
    return replicate_mean(X, Z, draw.beta, draw.b[i, list(gp.shared)], gp)


def projection_problem(design, draw, shared):
    """Shared effects b_A (n, |A|) and metrics Q^{-1} (n, |A|, |A|) of one draw."""
    gp = partition_G(draw.G, shared)
    b_A = draw.b[:, list(gp.shared)]
    Qinv = np.stack([metric_from_design(s.Z, gp, draw.sigma2) for s in design])
    return b_A, Qinv
