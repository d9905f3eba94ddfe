import logging

import arviz as az
import numpy as np

logger = logging.getLogger(__name__)

# split R-hat above this is reported as a warning
RHAT_WARNING = 1.1


def draws_to_inference_data(draws):
    """Scalar parameters as an arviz InferenceData with (chain, draw) axes."""
    chains = sorted({d.chain for d in draws})
    per_chain = [[d for d in draws if d.chain == c] for c in chains]
    length = min(len(c) for c in per_chain)
    per_chain = [c[:length] for c in per_chain]

    posterior = {
        "beta": np.array([[d.beta for d in c] for c in per_chain]),
        "sigma2": np.array([[d.sigma2 for d in c] for c in per_chain]),
        "G_diag": np.array([[np.diag(d.G) for d in c] for c in per_chain]),
    }
    return az.from_dict(posterior=posterior)


def summarize_draws(draws):
    """Posterior mean, sd, ESS and split R-hat of beta, sigma2 and diag(G).

    Returns a pandas DataFrame indexed by parameter name.
    """
    idata = draws_to_inference_data(draws)
    summary = az.summary(idata, round_to="none")
    summary.index.name = "parameter"

    rhat = summary["r_hat"].to_numpy(dtype=float)
    finite = rhat[np.isfinite(rhat)]
    if finite.size:
        logger.info("Split R-hat: max %.3f over %d parameters", finite.max(), finite.size)
        for name in summary.index[summary["r_hat"] > RHAT_WARNING]:
            logger.warning("Parameter %s has split R-hat %.3f", name, summary.loc[name, "r_hat"])
    else:
        logger.info("Split R-hat needs at least two chains")
    return summary
