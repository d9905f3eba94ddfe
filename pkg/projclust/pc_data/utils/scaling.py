import logging

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_data.datatypes import LongitudinalDataset, ScaleTransform, SubjectRecord

logger = logging.getLogger(__name__)


def fit_scale(ds):
    times = ds.pooled_times()
    y = ds.pooled_y()
    t_min = float(times.min())
    t_range = float(times.max() - t_min)
    if t_range <= 0:
        raise ValidationError(
            "all observation times are equal; cannot rescale to [0, 1]",
            code="degenerate_scale",
        )
    if len(y) < 2:
        raise ValidationError("need at least two responses to standardize", code="degenerate_scale")
    y_sd = float(np.std(y, ddof=1))
    if not y_sd > 0:
        raise ValidationError("all responses are equal; variance is 0", code="degenerate_scale")
    return ScaleTransform(t_min=t_min, t_range=t_range, y_mean=float(np.mean(y)), y_sd=y_sd)


def apply_scale(ds, transform):
    subjects = [
        SubjectRecord(
            id=s.id,
            times=(s.times - transform.t_min) / transform.t_range,
            y=(s.y - transform.y_mean) / transform.y_sd,
            x_covariates=s.x_covariates,
        )
        for s in ds
    ]
    return LongitudinalDataset(subjects)


def standardize(ds):
    """Map pooled times onto [0, 1] and pooled responses to mean 0, variance 1.

    Returns ``(dataset, transform)``; the transform inverts the mapping.
    """
    transform = fit_scale(ds)
    logger.debug("Standardizing with %s", transform)
    return apply_scale(ds, transform), transform
