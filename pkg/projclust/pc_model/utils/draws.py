"""JSON-lines draw file.

Line 1 is a header naming the format, the field order of every record, the
dimensions and the subject ids (the row order of ``b``). Each further line
is one draw: ``G_lower`` is the row-major lower triangle of G and ``b`` the
concatenation b_1, ..., b_n.
"""

import json
import logging

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_model.constants import DRAW_FIELDS, DRAW_FILE_FORMAT
from projclust.pc_model.datatypes import PosteriorDraw

logger = logging.getLogger(__name__)


def spread_indices(total, count):
    """``count`` indices spread evenly over range(total); all of them when
    ``count`` is 0 or at least ``total``."""
    if not count or count >= total:
        return np.arange(total)
    return np.linspace(0, total - 1, count).round().astype(int)


def subsample_draws(draws, count):
    return [draws[k] for k in spread_indices(len(draws), count)]


def lower_triangle(G):
    return G[np.tril_indices(G.shape[0])]


def from_lower_triangle(values, q):
    G = np.zeros((q, q))
    G[np.tril_indices(q)] = values
    return G + np.tril(G, -1).T


def draw_record(draw):
    return {
        "chain": int(draw.chain),
        "iteration": int(draw.iteration),
        "beta": draw.beta.tolist(),
        "sigma2": float(draw.sigma2),
        "G_lower": lower_triangle(draw.G).tolist(),
        "b": draw.b.ravel().tolist(),
    }


def write_draws(path, draws, ids, config_hash="", design=None):
    """Write the header and one line per draw.

    ``design`` holds the design keys (BASIS, FIXED_BASIS, USE_COVARIATES) the
    draws were fitted with; later steps default to them.
    """
    header = {
        "format": DRAW_FILE_FORMAT,
        "fields": DRAW_FIELDS,
        "p": draws[0].p if draws else 0,
        "q": draws[0].q if draws else 0,
        "n": len(ids),
        "subjects": list(ids),
        "config_hash": config_hash,
        **(design or {}),
    }
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(header) + "\n")
        for draw in draws:
            handle.write(json.dumps(draw_record(draw)) + "\n")
    logger.info("Wrote %d draws to %s", len(draws), path)


def read_draws(path):
    """Return ``(header, draws)`` from a draw file."""
    with open(path, encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip()]
    if not lines:
        raise ValidationError(f"{path} is empty", code="empty")
    try:
        header = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: malformed draw file ({err})", code="parse") from err
    if header.get("format") != DRAW_FILE_FORMAT:
        raise ValidationError(f"{path} is not a draw file", code="parse")

    q = header["q"]
    draws = [
        PosteriorDraw(
            beta=record["beta"],
            sigma2=record["sigma2"],
            G=from_lower_triangle(record["G_lower"], q),
            b=np.reshape(record["b"], (header["n"], q)),
            chain=record["chain"],
            iteration=record["iteration"],
        )
        for record in records
    ]
    logger.info("Read %d draws from %s", len(draws), path)
    return header, draws
