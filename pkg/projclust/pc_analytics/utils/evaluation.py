import logging

import numpy as np
from django.core.exceptions import ValidationError
from scipy.special import comb
from sklearn.metrics import adjusted_rand_score, rand_score
from sklearn.metrics.cluster import contingency_matrix

logger = logging.getLogger(__name__)

# coincidence bands: weak in (WEAK, SOLID], solid above SOLID
WEAK_COINCIDENCE = 0.5
SOLID_COINCIDENCE = 0.8


def _labels_of(partition):
    return np.asarray(getattr(partition, "labels", partition))


def coincidence(partitions):
    """Fraction of partitions placing each pair of subjects together."""
    labelings = [_labels_of(p) for p in partitions]
    if not labelings:
        raise ValidationError("no partitions to summarize", code="empty")
    n = len(labelings[0])
    if any(len(z) != n for z in labelings):
        raise ValidationError("partitions cover different numbers of subjects", code="shape")

    counts = np.zeros((n, n), dtype=np.int64)
    for z in labelings:
        counts += z[:, None] == z[None, :]
    return counts / len(labelings)


def coincidence_summary(matrix, weak=WEAK_COINCIDENCE, solid=SOLID_COINCIDENCE):
    upper = matrix[np.triu_indices(matrix.shape[0], k=1)]
    pairs = len(upper)
    n_weak = int(np.sum((upper > weak) & (upper <= solid)))
    n_solid = int(np.sum(upper > solid))
    return {
        "subjects": int(matrix.shape[0]),
        "pairs": pairs,
        "weak": n_weak,
        "solid": n_solid,
        "weak_fraction": n_weak / pairs if pairs else 0.0,
        "solid_fraction": n_solid / pairs if pairs else 0.0,
        "bands": {"weak": [weak, solid], "solid": [solid, 1.0]},
    }


def _check_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValidationError(
            f"label vectors differ in length ({len(a)} vs {len(b)})", code="shape"
        )
    if len(a) < 2:
        raise ValidationError("need at least two labels to compare pairs", code="empty")
    return a, b


def rand_index(a, b):
    a, b = _check_pair(a, b)
    return float(rand_score(a, b))


def adjusted_rand(a, b):
    """Hubert-Arabie adjusted Rand index.

    When the maximum index equals its expectation (both labelings trivial
    in a compatible way) the index is 1 for identical partitions and 0
    otherwise.
    """
    a, b = _check_pair(a, b)
    table = contingency_matrix(a, b)
    sum_a = comb(table.sum(axis=1), 2).sum()
    sum_b = comb(table.sum(axis=0), 2).sum()
    expected = sum_a * sum_b / comb(len(a), 2)
    maximum = 0.5 * (sum_a + sum_b)
    if np.isclose(maximum, expected, rtol=1e-12, atol=0):
        identical = np.count_nonzero(table) == table.shape[0] == table.shape[1]
        logger.warning("Adjusted Rand index is degenerate for these labelings")
        return 1.0 if identical else 0.0
    return float(adjusted_rand_score(a, b))


def label_agreement_report(partitions, truth):
    """Mean and sd of the Rand and adjusted Rand indices of each partition
    against ``truth``."""
    truth = np.asarray(truth)
    rand = []
    ari = []
    for partition in partitions:
        labels = _labels_of(partition)
        rand.append(rand_index(labels, truth))
        ari.append(adjusted_rand(labels, truth))
    if not rand:
        raise ValidationError("no partitions to evaluate", code="empty")
    ddof = 1 if len(rand) > 1 else 0
    return {
        "partitions": len(rand),
        "rand_mean": float(np.mean(rand)),
        "rand_sd": float(np.std(rand, ddof=ddof)),
        "ari_mean": float(np.mean(ari)),
        "ari_sd": float(np.std(ari, ddof=ddof)),
    }
