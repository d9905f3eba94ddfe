"""Cholesky-based linear algebra used by the sampler and the projection code.

Explicit inverses are never formed: every ``A^{-1} B`` is a triangular solve
against a (possibly jittered) Cholesky factor of ``A``.
"""

import logging

import numpy as np
from django.conf import settings
from scipy import linalg

logger = logging.getLogger(__name__)


def jitter_cholesky(A, jitter=None, retries=None, what="matrix"):
    """Lower Cholesky factor of a symmetric positive (semi-)definite matrix.

    On failure, ``jitter * trace(A) / dim`` is added to the diagonal and the
    factorization retried, the jitter growing tenfold per retry. After
    ``retries`` failed retries a ``LinAlgError`` is raised.
    """
    jitter = settings.CHOLESKY_JITTER if jitter is None else jitter
    retries = settings.CHOLESKY_RETRIES if retries is None else retries
    A = np.asarray(A, dtype=float)
    try:
        return linalg.cholesky(A, lower=True)
    except linalg.LinAlgError:
        pass

    dim = A.shape[0]
    scale = np.trace(A) / dim
    if not np.isfinite(scale) or scale <= 0:
        scale = 1.0
    amount = jitter * scale
    di = np.diag_indices(dim)
    for attempt in range(1, retries + 1):
        jittered = A.copy()
        jittered[di] += amount
        try:
            L = linalg.cholesky(jittered, lower=True)
        except linalg.LinAlgError:
            amount *= 10
            continue
        logger.warning(
            "Added jitter of %.3e to %s diagonal (retry %d of %d)",
            amount,
            what,
            attempt,
            retries,
        )
        return L

    raise linalg.LinAlgError(
        f"{what} is not positive definite, even after {retries} jitter retries"
    )


def cholesky_solve(L, B):
    """Solve ``(L L^T) X = B`` given the lower factor ``L``."""
    return linalg.cho_solve((L, True), B)


def whiten(L, B):
    """Return ``L^{-1} B`` so that ``whiten(L, B).T @ whiten(L, B) = B^T A^{-1} B``."""
    return linalg.solve_triangular(L, B, lower=True)


def spd_inverse(A, what="matrix"):
    # precision matrices that enter a sum (e.g. G^{-1} in the random-effect
    # conditional) are realized as a Cholesky solve against the identity
    L = jitter_cholesky(A, what=what)
    return symmetrize(cholesky_solve(L, np.eye(A.shape[0])))


def symmetrize(A):
    return 0.5 * (A + A.T)


def batched_cholesky(stack, what="matrix"):
    """Lower Cholesky factors of a stack of SPD matrices, shape (m, d, d).

    The whole stack is factorized at once; only when that fails are the
    members factorized one by one with the jitter policy.
    """
    try:
        return np.linalg.cholesky(stack)
    except np.linalg.LinAlgError:
        return np.stack([jitter_cholesky(A, what=what) for A in stack])
