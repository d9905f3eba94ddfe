"""Blocked conjugate Gibbs sampler for the Gaussian linear mixed model

    y_i = X_i beta + Z_i b_i + e_i,   b_i ~ N(0, G),   e_i ~ N(0, sigma2 I).

One sweep draws beta, then every b_i (as one batch), then sigma2, then G,
each from its full conditional.
"""

import hashlib
import logging

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg, stats
from tqdm import tqdm

from projclust.pc_data.utils.design import build_design
from projclust.pc_model.constants import GLOBAL_STREAM, SUBJECT_STREAM
from projclust.pc_model.datatypes import ChainState, PosteriorDraw
from projclust.utils.linalg import batched_cholesky, jitter_cholesky, spd_inverse, symmetrize

logger = logging.getLogger(__name__)


def subject_key(subject_id):
    digest = hashlib.sha256(str(subject_id).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _generator(seed, *spawn_key):
    # Philox is counter-based: one independent stream per spawn key
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=spawn_key))
    )


def chain_streams(seed, chain, ids):
    """Random streams of one chain: a global one and one per subject id."""
    rng = _generator(seed, chain, GLOBAL_STREAM)
    subject_rngs = [_generator(seed, chain, SUBJECT_STREAM, subject_key(i)) for i in ids]
    return rng, subject_rngs


def _inv_gamma(rng, shape, rate, size=None):
    return rate / rng.gamma(shape, 1.0, size=size)


class GibbsKernel:
    """Full conditionals of the mixed model for a fixed design.

    Cross products that do not depend on the response are computed once;
    ``set_response`` swaps in new responses (used for prior-predictive
    checks). With ``fixed_sigma2`` the error variance is held constant.
    """

    def __init__(self, design, priors, fixed_sigma2=None):
        self.design = design
        self.priors = priors
        self.fixed_sigma2 = fixed_sigma2
        self.n, self.p, self.q = len(design), design.p, design.q

        self.XtX = np.stack([s.X.T @ s.X for s in design])
        self.XtX_sum = self.XtX.sum(axis=0)
        self.XtZ = np.stack([s.X.T @ s.Z for s in design])
        self.ZtZ = np.stack([s.Z.T @ s.Z for s in design])
        self.X_pool = np.vstack([s.X for s in design])
        self.Z_pool = np.vstack([s.Z for s in design])
        self.owner = np.concatenate([np.full(s.n_obs, i) for i, s in enumerate(design)])
        self.N = len(self.owner)
        self.set_response([s.y for s in design])

    def set_response(self, ys):
        ys = [np.asarray(y, dtype=float) for y in ys]
        self.y_pool = np.concatenate(ys)
        self.Xty = np.stack([s.X.T @ y for s, y in zip(self.design, ys)])
        self.Zty = np.stack([s.Z.T @ y for s, y in zip(self.design, ys)])
        self.Xty_sum = self.Xty.sum(axis=0)

    def initial_state(self):
        return ChainState(
            beta=np.zeros(self.p),
            sigma2=1.0 if self.fixed_sigma2 is None else float(self.fixed_sigma2),
            G=np.eye(self.q),
            b=np.zeros((self.n, self.q)),
        )

    def residuals(self, beta, b):
        fitted = self.X_pool @ beta + np.einsum("nq,nq->n", self.Z_pool, b[self.owner])
        return self.y_pool - fitted

    def draw_beta(self, state, rng):
        precision = self.XtX_sum / state.sigma2 + np.eye(self.p) / self.priors.beta_var
        rhs = (self.Xty_sum - np.einsum("npq,nq->p", self.XtZ, state.b)) / state.sigma2
        L = jitter_cholesky(precision, what="beta precision")
        half = linalg.solve_triangular(L, rhs, lower=True)
        z = rng.standard_normal(self.p)
        return linalg.solve_triangular(L.T, half + z, lower=False)

    def draw_effects(self, beta, state, subject_rngs):
        G_inv = spd_inverse(state.G, what="G")
        precision = G_inv[None, :, :] + self.ZtZ / state.sigma2
        rhs = (self.Zty - np.einsum("npq,p->nq", self.XtZ, beta)) / state.sigma2
        L = batched_cholesky(precision, what="random-effect precision")
        half = np.linalg.solve(L, rhs[..., None])[..., 0]
        z = np.stack([g.standard_normal(self.q) for g in subject_rngs])
        upper = np.swapaxes(L, -1, -2)
        return np.linalg.solve(upper, (half + z)[..., None])[..., 0]

    def draw_sigma2(self, beta, b, rng):
        if self.fixed_sigma2 is not None:
            return float(self.fixed_sigma2)
        r = self.residuals(beta, b)
        shape = self.priors.sigma2_shape + 0.5 * self.N
        rate = self.priors.sigma2_rate + 0.5 * float(r @ r)
        return float(_inv_gamma(rng, shape, rate))

    def draw_G(self, b, rng):
        if self.priors.diagonal:
            shape = self.priors.g_shape + 0.5 * self.n
            rate = self.priors.g_rate + 0.5 * np.sum(b**2, axis=0)
            return np.diag(_inv_gamma(rng, shape, rate, size=self.q))
        df = self.priors.wishart_df(self.q) + self.n
        scale = self.priors.wishart_scale(self.q) + b.T @ b
        G = stats.invwishart.rvs(df=df, scale=scale, random_state=rng)
        return symmetrize(np.atleast_2d(G))

    def sweep(self, state, rng, subject_rngs):
        beta = self.draw_beta(state, rng)
        b = self.draw_effects(beta, state, subject_rngs)
        sigma2 = self.draw_sigma2(beta, b, rng)
        G = self.draw_G(b, rng)
        return ChainState(beta=beta, sigma2=sigma2, G=G, b=b)


def draw_from_prior(design, priors, rng):
    """One joint draw of (beta, sigma2, G, b) from the prior."""
    n, p, q = len(design), design.p, design.q
    beta = np.sqrt(priors.beta_var) * rng.standard_normal(p)
    sigma2 = float(_inv_gamma(rng, priors.sigma2_shape, priors.sigma2_rate))
    if priors.diagonal:
        G = np.diag(_inv_gamma(rng, priors.g_shape, priors.g_rate, size=q))
    else:
        G = stats.invwishart.rvs(
            df=priors.wishart_df(q), scale=priors.wishart_scale(q), random_state=rng
        )
        G = symmetrize(np.atleast_2d(G))
    L = jitter_cholesky(G, what="G")
    b = rng.standard_normal((n, q)) @ L.T
    return ChainState(beta=beta, sigma2=sigma2, G=G, b=b)


def simulate_response(design, state, rng):
    """Responses y_i ~ N(X_i beta + Z_i b_i, sigma2 I) for every subject."""
    sd = np.sqrt(state.sigma2)
    return [
        s.X @ state.beta + s.Z @ state.b[i] + sd * rng.standard_normal(s.n_obs)
        for i, s in enumerate(design)
    ]


def run_chain(design, priors, cfg, chain, progress=False):
    kernel = GibbsKernel(design, priors)
    rng, subject_rngs = chain_streams(cfg.seed, chain, design.ids)
    state = kernel.initial_state()
    draws = []
    for iteration in tqdm(
        range(cfg.n_iter), desc=f"chain {chain}", disable=not progress, leave=False
    ):
        state = kernel.sweep(state, rng, subject_rngs)
        if cfg.kept(iteration):
            draws.append(PosteriorDraw.from_state(state, chain=chain, iteration=iteration))
    logger.info("Chain %d finished: kept %d of %d iterations", chain, len(draws), cfg.n_iter)
    return draws


def sample_design(design, priors, cfg, n_jobs=1, progress=False):
    chains = Parallel(n_jobs=n_jobs)(
        delayed(run_chain)(design, priors, cfg, chain, progress and n_jobs == 1)
        for chain in range(cfg.n_chains)
    )
    return [draw for chain in chains for draw in chain]


def gibbs_fit(ds, spec, cfg, n_jobs=1, progress=False):
    """Posterior draws of the mixed model for a dataset.

    Subjects are processed in sorted-id order and every b_i draws from a
    stream keyed by its id, so reordering the dataset leaves the draws
    unchanged; ``b`` rows of the returned draws follow the dataset order.
    Chains run in parallel with ``n_jobs`` workers and do not depend on it.
    """
    ids = sorted(ds.ids)
    design = build_design(ds.subset(ids), spec)
    logger.info(
        "Sampling %d chains x %d iterations (burn-in %d, thin %d) for %d subjects",
        cfg.n_chains,
        cfg.n_iter,
        cfg.burn_in,
        cfg.thin,
        len(design),
    )
    draws = sample_design(design, spec.priors, cfg, n_jobs=n_jobs, progress=progress)

    position = {subject_id: k for k, subject_id in enumerate(ids)}
    order = [position[subject_id] for subject_id in ds.ids]
    for draw in draws:
        draw.b = draw.b[order]
    return draws
