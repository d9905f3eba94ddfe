import json
import logging

import numpy as np
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


def write_partitions(path, records, ids, K, shared):
    """JSON lines: a header ``{subjects, K, shared}`` then one record per draw
    ``{draw_index, K, labels, objective, converged}``."""
    with open(path, "w", encoding="utf-8") as handle:
        header = {"subjects": list(ids), "K": int(K), "shared": [int(j) for j in shared]}
        handle.write(json.dumps(header) + "\n")
        for record in records:
            handle.write(json.dumps(record) + "\n")
    logger.info("Wrote %d partitions to %s", len(records), path)


def read_partitions(path):
    with open(path, encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip()]
    if not lines:
        raise ValidationError(f"{path} is empty", code="empty")
    try:
        header = json.loads(lines[0])
        records = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as err:
        raise ValidationError(f"{path}: malformed partition file ({err})", code="parse") from err
    if "subjects" not in header:
        raise ValidationError(f"{path} is not a partition file", code="parse")
    n = len(header["subjects"])
    for record in records:
        if len(record["labels"]) != n:
            raise ValidationError(
                f"{path}: draw {record.get('draw_index')} labels {len(record['labels'])} "
                f"subjects, header lists {n}",
                code="shape",
            )
    return header, [np.asarray(r["labels"], dtype=int) for r in records], records
