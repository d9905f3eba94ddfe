import logging

import numpy as np
import pandas as pd
from django.core.exceptions import ValidationError

from projclust.pc_data.constants import (
    REQUIRED_COLUMNS,
    RESPONSE_COLUMN,
    SUBJECT_COLUMN,
    TIME_COLUMN,
)
from projclust.pc_data.datatypes import LongitudinalDataset, SubjectRecord

logger = logging.getLogger(__name__)

# header is line 1, so data row i sits on line i + 2
HEADER_LINES = 1


def _to_float(value):
    try:
        return float(value)
    except (TypeError, ValueError):
        return np.nan


# load a long-format CSV (subject,time,y[,x1,...,xm]) into a dataset
def load_csv(path):
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as err:
        raise ValidationError(f"{path} is empty", code="empty") from err
    except (pd.errors.ParserError, UnicodeDecodeError) as err:
        raise ValidationError(f"{path}: {err}", code="parse") from err
    return dataset_from_frame(raw, source=str(path))


def dataset_from_frame(raw, source="<frame>"):
    raw = raw.rename(columns=lambda c: str(c).strip())
    missing = [c for c in REQUIRED_COLUMNS if c not in raw.columns]
    if missing:
        raise ValidationError(
            f"{source}: missing required column(s) {missing}; expected header "
            "subject,time,y[,x1,...]",
            code="schema",
        )
    if raw.empty:
        raise ValidationError(f"{source} has a header but no rows", code="empty")

    covariate_columns = [c for c in raw.columns if c not in REQUIRED_COLUMNS]
    frame = pd.DataFrame({SUBJECT_COLUMN: raw[SUBJECT_COLUMN].astype(str).str.strip()})
    for column in [TIME_COLUMN, RESPONSE_COLUMN, *covariate_columns]:
        values = raw[column].map(_to_float).to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if len(bad):
            row = bad[0]
            raise ValidationError(
                f"{source}, line {row + 1 + HEADER_LINES}: cannot parse "
                f"{column} value {raw[column].iloc[row]!r} as a finite number",
                code="parse",
            )
        frame[column] = values

    duplicated = frame.duplicated([SUBJECT_COLUMN, TIME_COLUMN])
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise ValidationError(
            f"{source}, line {row + 1 + HEADER_LINES}: duplicate time "
            f"{frame[TIME_COLUMN].iloc[row]} for subject {frame[SUBJECT_COLUMN].iloc[row]}",
            code="duplicate",
        )

    subjects = []
    # subjects keep their order of first appearance
    for subject_id in pd.unique(frame[SUBJECT_COLUMN]):
        rows = frame[frame[SUBJECT_COLUMN] == subject_id].sort_values(
            TIME_COLUMN, kind="mergesort"
        )
        covariates = (
            rows[covariate_columns].to_numpy(dtype=float) if covariate_columns else None
        )
        subjects.append(
            SubjectRecord(
                id=subject_id,
                times=rows[TIME_COLUMN].to_numpy(dtype=float),
                y=rows[RESPONSE_COLUMN].to_numpy(dtype=float),
                x_covariates=covariates,
            )
        )

    dataset = LongitudinalDataset(subjects)
    logger.info(
        "Loaded %d subjects (%d rows, %d covariates) from %s",
        len(dataset),
        dataset.n_total,
        len(covariate_columns),
        source,
    )
    return dataset


def dataset_to_frame(ds):
    m = ds.n_covariates
    frames = []
    for subject in ds:
        columns = {
            SUBJECT_COLUMN: [subject.id] * subject.n_obs,
            TIME_COLUMN: subject.times,
            RESPONSE_COLUMN: subject.y,
        }
        for k in range(m):
            columns[f"x{k + 1}"] = subject.x_covariates[:, k]
        frames.append(pd.DataFrame(columns))
    return pd.concat(frames, ignore_index=True)


def write_csv(ds, path):
    dataset_to_frame(ds).to_csv(path, index=False, lineterminator="\n")


def union_times(ds):
    return np.unique(ds.pooled_times())


def drop_random_rows(ds, fraction, seed):
    """Delete about ``fraction`` of all rows uniformly at random.

    Every subject keeps at least one observation, so the result is a valid
    unbalanced dataset.
    """
    if not 0 <= fraction < 1:
        raise ValidationError("missing fraction must lie in [0, 1)", code="config")
    rng = np.random.default_rng(seed)
    owners = np.concatenate([np.full(s.n_obs, k) for k, s in enumerate(ds)])
    positions = np.concatenate([np.arange(s.n_obs) for s in ds])
    remaining = np.array([s.n_obs for s in ds])
    target = int(round(fraction * len(owners)))

    dropped = set()
    for row in rng.permutation(len(owners)):
        if len(dropped) == target:
            break
        owner = owners[row]
        if remaining[owner] > 1:
            remaining[owner] -= 1
            dropped.add((owner, positions[row]))

    subjects = []
    for k, subject in enumerate(ds):
        keep = [j for j in range(subject.n_obs) if (k, j) not in dropped]
        subjects.append(
            SubjectRecord(
                id=subject.id,
                times=subject.times[keep],
                y=subject.y[keep],
                x_covariates=(
                    None if subject.x_covariates is None else subject.x_covariates[keep]
                ),
            )
        )
    logger.info("Dropped %d of %d rows", len(dropped), len(owners))
    return LongitudinalDataset(subjects)
