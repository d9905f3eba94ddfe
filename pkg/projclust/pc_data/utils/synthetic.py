from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_data.constants import (
    EXAMPLE1_COEFFICIENTS,
    EXAMPLE1_HIGH_FREQUENCIES,
    EXAMPLE1_LOW_FREQUENCIES,
)
from projclust.pc_data.datatypes import LongitudinalDataset, SubjectRecord


@dataclass(frozen=True)
class SynthConfig:
    n_per_group: int = 10
    T: int = 40
    noise_var: float = 0.1
    seed: int = 0
    coefficients: tuple = tuple(EXAMPLE1_COEFFICIENTS)
    low_frequencies: tuple = tuple(EXAMPLE1_LOW_FREQUENCIES)
    high_frequencies: tuple = tuple(EXAMPLE1_HIGH_FREQUENCIES)

    def __post_init__(self):
        if self.n_per_group < 1:
            raise ValidationError("n_per_group must be at least 1", code="config")
        if self.T < 2:
            raise ValidationError("T must be at least 2", code="config")
        if self.noise_var < 0:
            raise ValidationError("noise variance must be nonnegative", code="config")

    @property
    def times(self):
        return np.arange(1, self.T + 1) / self.T


def example1_mean(times, coefficients, low, high):
    strength_low, strength_high = coefficients
    return strength_low * np.cos(np.pi * low * times) + strength_high * np.cos(
        np.pi * high * times
    )


def generate_example1(cfg):
    """Four-group cosine dataset (SLSH, SLWH, WLSH, WLWH).

    Each subject gets one low and one high frequency, drawn uniformly, with
    group-specific amplitudes and independent N(0, noise_var) noise. Returns
    the dataset together with 0-based group labels.
    """
    rng = np.random.default_rng(cfg.seed)
    times = cfg.times
    noise_sd = np.sqrt(cfg.noise_var)
    width = len(str(len(cfg.coefficients) * cfg.n_per_group))

    subjects = []
    labels = []
    for group, coefficients in enumerate(cfg.coefficients):
        for _ in range(cfg.n_per_group):
            low = rng.choice(cfg.low_frequencies)
            high = rng.choice(cfg.high_frequencies)
            y = example1_mean(times, coefficients, low, high)
            y = y + noise_sd * rng.standard_normal(cfg.T)
            subjects.append(
                SubjectRecord(id=f"s{len(subjects) + 1:0{width}d}", times=times, y=y)
            )
            labels.append(group)

    return LongitudinalDataset(subjects), np.asarray(labels, dtype=int)
