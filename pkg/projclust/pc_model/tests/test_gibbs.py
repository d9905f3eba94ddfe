import numpy as np
import pytest

from projclust.pc_data.datatypes import BasisSpec, LongitudinalDataset, ModelSpec, SubjectRecord
from projclust.pc_data.utils.basis import fourier_design
from projclust.pc_data.utils.design import ModelDesign, SubjectDesign
from projclust.pc_model.datatypes import ChainState, McmcConfig, PriorSpec
from projclust.pc_model.utils.gibbs import (
    GibbsKernel,
    chain_streams,
    draw_from_prior,
    gibbs_fit,
    simulate_response,
    subject_key,
)
from projclust.tests.factories import LongitudinalDatasetFactory, McmcConfigFactory


def batch_mean_se(values, n_batches=50):
    batches = np.array_split(np.asarray(values), n_batches)
    means = np.array([b.mean(axis=0) for b in batches])
    return means.mean(axis=0), means.std(axis=0, ddof=1) / np.sqrt(n_batches)


def test_default_run_keeps_4000_draws():
    assert McmcConfig().n_draws == 4000


def test_fit_returns_valid_draws(dataset, spec):
    cfg = McmcConfigFactory.build()

    draws = gibbs_fit(dataset, spec, cfg)

    assert len(draws) == cfg.n_draws == 80
    for draw in draws:
        draw.validate()
        assert draw.b.shape == (len(dataset), spec.q)
    assert {d.chain for d in draws} == {0, 1}


def test_fit_is_deterministic(dataset, spec):
    cfg = McmcConfigFactory.build()
    first = gibbs_fit(dataset, spec, cfg)
    second = gibbs_fit(dataset, spec, cfg)
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.beta, b.beta)
        np.testing.assert_array_equal(a.G, b.G)
        np.testing.assert_array_equal(a.b, b.b)
        assert a.sigma2 == b.sigma2


def test_fit_does_not_depend_on_worker_count(dataset, spec):
    cfg = McmcConfigFactory.build()
    serial = gibbs_fit(dataset, spec, cfg, n_jobs=1)
    parallel = gibbs_fit(dataset, spec, cfg, n_jobs=2)
    for a, b in zip(serial, parallel):
        np.testing.assert_array_equal(a.b, b.b)
        assert a.sigma2 == b.sigma2


def test_subject_order_does_not_change_draws(dataset, spec):
    cfg = McmcConfigFactory.build()
    reversed_ds = LongitudinalDataset(list(reversed(dataset.subjects)))

    draws = gibbs_fit(dataset, spec, cfg)
    reversed_draws = gibbs_fit(reversed_ds, spec, cfg)

    for a, b in zip(draws, reversed_draws):
        np.testing.assert_array_equal(a.beta, b.beta)
        np.testing.assert_array_equal(a.b, b.b[::-1])


def test_subject_streams_are_keyed_by_id():
    _, first = chain_streams(5, 0, ["a", "b"])
    _, second = chain_streams(5, 0, ["b", "a"])
    assert first[0].standard_normal() == second[1].standard_normal()
    assert subject_key("a") != subject_key("b")


def test_known_variance_beta_matches_conjugate_posterior(rng):
    # one subject with a zero random-effect column: beta has the ridge posterior
    n_obs, sigma2, tau2 = 12, 0.5, 4.0
    t = np.linspace(0, 1, n_obs)
    X = np.column_stack([np.ones(n_obs), t])
    y = X @ np.array([1.0, -2.0]) + np.sqrt(sigma2) * rng.standard_normal(n_obs)
    design = ModelDesign([SubjectDesign(id="a", X=X, Z=np.zeros((n_obs, 1)), y=y)])
    kernel = GibbsKernel(design, PriorSpec(beta_var=tau2), fixed_sigma2=sigma2)

    precision = np.eye(2) / tau2 + X.T @ X / sigma2
    covariance = np.linalg.inv(precision)
    expected = covariance @ X.T @ y / sigma2

    state = kernel.initial_state()
    chain_rng, subject_rngs = np.random.default_rng(1), [np.random.default_rng(2)]
    betas = []
    for _ in range(4000):
        state = kernel.sweep(state, chain_rng, subject_rngs)
        betas.append(state.beta)
        assert state.sigma2 == sigma2

    se = np.sqrt(np.diag(covariance) / len(betas))
    assert np.all(np.abs(np.mean(betas, axis=0) - expected) < 4 * se)


def test_posterior_mean_recovers_true_beta(rng):
    n, n_obs = 100, 8
    beta_true = np.array([0.7])
    G_true = np.array([[0.5, 0.1], [0.1, 0.3]])
    times = np.linspace(0, 1, n_obs)
    Z = fourier_design(times, 1)
    effects = rng.multivariate_normal(np.zeros(2), G_true, size=n)
    subjects = [
        SubjectRecord(
            id=f"s{i:03d}",
            times=times,
            y=beta_true[0] + Z @ effects[i] + np.sqrt(0.2) * rng.standard_normal(n_obs),
        )
        for i in range(n)
    ]
    spec = ModelSpec(random_basis=BasisSpec(order=1), shared=(0, 1))

    draws = gibbs_fit(
        LongitudinalDataset(subjects),
        spec,
        McmcConfig(n_chains=1, n_iter=800, burn_in=300, seed=3),
    )

    betas = np.array([d.beta for d in draws])
    assert abs(betas.mean(axis=0)[0] - beta_true[0]) < 3 * betas.std(axis=0)[0]


def test_prior_draw_shapes(spec, rng):
    design = ModelDesign(
        [
            SubjectDesign(id=s.id, X=np.ones((s.n_obs, 1)), Z=spec.random_design(s.times), y=s.y)
            for s in LongitudinalDatasetFactory.build(n_subjects=4)
        ]
    )
    state = draw_from_prior(design, spec.priors, rng)
    ys = simulate_response(design, state, rng)

    assert state.b.shape == (4, spec.q)
    assert state.sigma2 > 0
    assert [len(y) for y in ys] == [s.n_obs for s in design]


def geweke_statistics(state):
    first = np.concatenate([state.beta, [state.sigma2], np.diag(state.G)])
    return np.concatenate([first, first**2])


@pytest.mark.slow()
@pytest.mark.parametrize(
    "priors",
    [
        PriorSpec(beta_var=1.0, sigma2_shape=5.0, sigma2_rate=4.0, g_prior="diagonal", g_shape=5.0, g_rate=4.0),
        PriorSpec(beta_var=1.0, sigma2_shape=5.0, sigma2_rate=4.0, g_df=8.0, g_scale=5.0),
    ],
)
def test_geweke_successive_conditional(priors):
    times = np.linspace(0, 1, 4)
    X = np.column_stack([np.ones(4), times])
    Z = fourier_design(times, 1)
    design = ModelDesign(
        [SubjectDesign(id=f"s{i}", X=X, Z=Z, y=np.zeros(4)) for i in range(5)]
    )
    cycles = 5000

    # marginal-conditional: independent draws from the prior
    rng = np.random.default_rng(100)
    marginal = np.array(
        [geweke_statistics(draw_from_prior(design, priors, rng)) for _ in range(cycles)]
    )

    # successive-conditional: alternate a Gibbs sweep and a fresh response
    rng = np.random.default_rng(200)
    kernel = GibbsKernel(design, priors)
    chain_rng, subject_rngs = chain_streams(300, 0, design.ids)
    state = draw_from_prior(design, priors, rng)
    successive = []
    for _ in range(cycles):
        kernel.set_response(simulate_response(design, state, rng))
        state = kernel.sweep(state, chain_rng, subject_rngs)
        successive.append(geweke_statistics(state))

    mean_mc = marginal.mean(axis=0)
    se_mc = marginal.std(axis=0, ddof=1) / np.sqrt(cycles)
    mean_sc, se_sc = batch_mean_se(successive)
    z = (mean_sc - mean_mc) / np.sqrt(se_mc**2 + se_sc**2)
    assert np.all(np.abs(z) < 4), z


def test_random_effects_match_conditional_posterior(rng):
    # two subjects, two fixed effects: b_i | beta, sigma2, G is Gaussian in closed form
    n_obs, sigma2 = 10, 0.3
    t = np.linspace(0, 1, n_obs)
    X = np.column_stack([np.ones(n_obs), t])
    Z = fourier_design(t, 1)
    G = np.array([[1.0, 0.2], [0.2, 0.5]])
    beta = np.array([0.5, -1.0])
    ys = [X @ beta + Z @ np.array([1.0, -0.5]), X @ beta + Z @ np.array([-0.3, 0.8])]
    design = ModelDesign(
        [SubjectDesign(id=f"s{i}", X=X, Z=Z, y=y) for i, y in enumerate(ys)]
    )
    kernel = GibbsKernel(design, PriorSpec(), fixed_sigma2=sigma2)
    state = ChainState(beta=beta, sigma2=sigma2, G=G, b=np.zeros((2, 2)))
    subject_rngs = [np.random.default_rng(5), np.random.default_rng(6)]

    samples = np.array([kernel.draw_effects(beta, state, subject_rngs) for _ in range(4000)])

    precision = np.linalg.inv(G) + Z.T @ Z / sigma2
    covariance = np.linalg.inv(precision)
    se = np.sqrt(np.diag(covariance) / len(samples))
    for i, y in enumerate(ys):
        expected = covariance @ Z.T @ (y - X @ beta) / sigma2
        assert np.all(np.abs(samples[:, i].mean(axis=0) - expected) < 4 * se)
