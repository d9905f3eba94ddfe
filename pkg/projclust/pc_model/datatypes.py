from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_model.constants import DIAGONAL, G_PRIORS, INVERSE_WISHART


@dataclass(frozen=True)
class PriorSpec:
    """Conjugate priors of the mixed model.

    beta ~ N(0, beta_var I), sigma2 ~ InvGamma(sigma2_shape, sigma2_rate) and
    either G ~ InvWishart(g_df, g_scale I) or independent
    G_jj ~ InvGamma(g_shape, g_rate) on a diagonal G. ``g_df=None`` means
    q + 2.
    """

    beta_var: float = 100.0
    sigma2_shape: float = 0.01
    sigma2_rate: float = 0.01
    g_prior: str = INVERSE_WISHART
    g_df: float | None = None
    g_scale: float = 1.0
    g_shape: float = 0.01
    g_rate: float = 0.01

    def __post_init__(self):
        if self.g_prior not in G_PRIORS:
            raise ValidationError(
                f"unknown G prior {self.g_prior!r}, expected one of {G_PRIORS}",
                code="config",
            )
        for name in ("beta_var", "sigma2_shape", "sigma2_rate", "g_scale", "g_shape", "g_rate"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"prior {name} must be positive", code="config")

    @property
    def diagonal(self):
        return self.g_prior == DIAGONAL

    def wishart_df(self, q):
        df = q + 2 if self.g_df is None else self.g_df
        if df <= q - 1:
            raise ValidationError(
                f"inverse-Wishart degrees of freedom {df} must exceed q - 1 = {q - 1}",
                code="config",
            )
        return float(df)

    def wishart_scale(self, q):
        return self.g_scale * np.eye(q)


@dataclass(frozen=True)
class McmcConfig:
    n_chains: int = 4
    n_iter: int = 2000
    burn_in: int = 1000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_chains < 1:
            raise ValidationError("need at least one chain", code="config")
        if not 0 <= self.burn_in < self.n_iter:
            raise ValidationError(
                f"burn-in {self.burn_in} must lie in [0, n_iter={self.n_iter})",
                code="config",
            )
        if self.thin < 1:
            raise ValidationError("thin must be at least 1", code="config")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer", code="config")

    def kept(self, iteration):
        return iteration >= self.burn_in and (iteration - self.burn_in) % self.thin == 0

    @property
    def draws_per_chain(self):
        return len(range(self.burn_in, self.n_iter, self.thin))

    @property
    def n_draws(self):
        return self.n_chains * self.draws_per_chain


@dataclass
class ChainState:
    beta: np.ndarray
    sigma2: float
    G: np.ndarray
    b: np.ndarray  # (n, q)


@dataclass
class PosteriorDraw:
    """One sample of (beta, sigma2, G, b_1..b_n); row i of ``b`` is b_i."""

    beta: np.ndarray
    sigma2: float
    G: np.ndarray
    b: np.ndarray
    chain: int = 0
    iteration: int = 0

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        self.G = np.atleast_2d(np.asarray(self.G, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1, self.G.shape[0])
        self.sigma2 = float(self.sigma2)

    @property
    def p(self):
        return len(self.beta)

    @property
    def q(self):
        return self.G.shape[0]

    @property
    def n(self):
        return self.b.shape[0]

    def validate(self):
        if not self.sigma2 > 0:
            raise ValidationError("sigma2 must be positive", code="draw")
        if not np.allclose(self.G, self.G.T, rtol=0, atol=1e-10):
            raise ValidationError("G is not symmetric", code="draw")
        try:
            np.linalg.cholesky(self.G)
        except np.linalg.LinAlgError as err:
            raise ValidationError("G is not positive definite", code="draw") from err

    @classmethod
    def from_state(cls, state, chain=0, iteration=0):
        return cls(
            beta=state.beta.copy(),
            sigma2=state.sigma2,
            G=state.G.copy(),
            b=state.b.copy(),
            chain=chain,
            iteration=iteration,
        )
