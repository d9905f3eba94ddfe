import csv
import json
import logging
from pathlib import Path

import pandas as pd
from django.core.exceptions import ValidationError

from projclust.pc_data.constants import LABEL_COLUMN, SUBJECT_COLUMN

logger = logging.getLogger(__name__)

RUN_CONFIG_FILE = "run_config.{command}.json"


def ensure_out_dir(path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_rows_csv(path, rows, field_names):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=field_names, lineterminator="\n")
        # header first, then one row per dict
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_matrix_csv(path, matrix, ids, columns=None):
    """Matrix with one row per subject; columns default to the subject ids."""
    frame = pd.DataFrame(matrix, index=pd.Index(ids, name=SUBJECT_COLUMN))
    frame.columns = ids if columns is None else columns
    frame.to_csv(path, lineterminator="\n")


def write_run_config(out_dir, cfg, command):
    write_json(
        Path(out_dir) / RUN_CONFIG_FILE.format(command=command),
        {"config": cfg.as_dict(), "config_hash": cfg.config_hash},
    )


def write_labels(path, ids, labels):
    rows = [{SUBJECT_COLUMN: i, LABEL_COLUMN: int(z)} for i, z in zip(ids, labels)]
    write_rows_csv(path, rows, [SUBJECT_COLUMN, LABEL_COLUMN])


def read_labels(path, ids):
    """Labels of ``ids`` (in that order) from a subject,label CSV."""
    frame = pd.read_csv(path, dtype={SUBJECT_COLUMN: str})
    if list(frame.columns[:2]) != [SUBJECT_COLUMN, LABEL_COLUMN]:
        raise ValidationError(f"{path}: expected header subject,label", code="schema")
    lookup = dict(zip(frame[SUBJECT_COLUMN].str.strip(), frame[LABEL_COLUMN]))
    missing = [i for i in ids if i not in lookup]
    if missing or len(lookup) != len(ids):
        raise ValidationError(
            f"{path} has labels for {len(lookup)} subjects, partitions cover {len(ids)}"
            + (f"; missing {missing[:5]}" if missing else ""),
            code="shape",
        )
    return [lookup[i] for i in ids]
