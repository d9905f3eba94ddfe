import logging

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_data.datatypes import LongitudinalDataset, SubjectRecord

logger = logging.getLogger(__name__)


def dft(signal):
    # DFT(k) = sum_j Y(j) exp(-2 pi i j k / J), 0-based j and k
    return np.fft.fft(np.asarray(signal, dtype=float))


def window_offsets(h):
    reach = int(np.floor(h))
    offsets = np.arange(-reach, reach + 1)
    return offsets[np.abs(offsets) <= h]


def power_spectrum(signal, n_freq=40, h=0.5):
    """Periodogram of ``signal`` at its first ``n_freq`` DFT bins.

    Bin k is replaced by the average of the DFT over the integer bins within
    +-h of k (indices wrap around), then squared in modulus. With h = 0.5
    this is ``|DFT(k)|**2``.
    """
    signal = np.asarray(signal, dtype=float).ravel()
    if signal.size == 0:
        raise ValidationError("cannot take the spectrum of an empty signal", code="empty")
    if n_freq < 1 or signal.size < n_freq:
        raise ValidationError(
            f"signal of length {signal.size} is too short for {n_freq} frequencies",
            code="config",
        )
    if h < 0:
        raise ValidationError("window half-width h must be nonnegative", code="config")

    coefficients = dft(signal)
    bins = np.arange(n_freq)[:, None] + window_offsets(h)[None, :]
    averaged = coefficients[bins % signal.size].mean(axis=1)
    return np.abs(averaged) ** 2


def spectrum_frequencies(n_freq):
    # omega_k = (k - 1) / n_freq for k = 1..n_freq
    return np.arange(n_freq) / n_freq


def spectrum_dataset(ds, n_freq=40, h=0.5):
    """Replace each subject's series by its power spectrum.

    The time column of the result holds the frequencies omega_k, so the
    spectra can be fitted like any other longitudinal response.
    """
    omega = spectrum_frequencies(n_freq)
    subjects = [
        SubjectRecord(id=s.id, times=omega, y=power_spectrum(s.y, n_freq, h))
        for s in ds
    ]
    logger.info("Computed %d-frequency spectra for %d subjects", n_freq, len(subjects))
    return LongitudinalDataset(subjects)
