import json
from io import StringIO

import pandas as pd
import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from projclust.pc_clustering.utils.partition_file import write_partitions


@pytest.fixture()
def partitions_out(out_dir):
    out_dir.mkdir(parents=True)
    ids = ["a", "b", "c", "d"]
    records = [
        {"draw_index": 0, "K": 2, "labels": [0, 0, 1, 1], "objective": 1.0, "converged": True},
        {"draw_index": 1, "K": 2, "labels": [0, 1, 0, 1], "objective": 1.5, "converged": True},
    ]
    write_partitions(out_dir / "partitions.jsonl", records, ids, 2, (0,))
    return out_dir


def write_labels(path, labels):
    pd.DataFrame({"subject": list("abcd"), "label": labels}).to_csv(path, index=False)


def test_evaluate_reports_mean_and_sd(partitions_out):
    write_labels(partitions_out / "labels.csv", [5, 5, 7, 7])
    output = StringIO()

    call_command("evaluate", stdout=output)

    report = json.loads((partitions_out / "evaluation.json").read_text())
    assert report["partitions"] == 2
    assert report["K"] == 2
    assert report["rand_mean"] == pytest.approx((1 + 1 / 3) / 2)
    assert report["ari_mean"] == pytest.approx((1 - 0.5) / 2)
    assert report["rand_sd"] > 0
    assert "over 2 partitions" in output.getvalue()


def test_evaluate_perfect_agreement(partitions_out):
    header = json.loads((partitions_out / "partitions.jsonl").read_text().splitlines()[0])
    write_partitions(
        partitions_out / "partitions.jsonl",
        [{"draw_index": k, "K": 2, "labels": [0, 0, 1, 1]} for k in range(3)],
        header["subjects"],
        2,
        (0,),
    )
    write_labels(partitions_out / "truth.csv", [1, 1, 2, 2])

    call_command("evaluate", f"--labels={partitions_out / 'truth.csv'}", stdout=StringIO())

    report = json.loads((partitions_out / "evaluation.json").read_text())
    assert (report["rand_mean"], report["ari_mean"]) == pytest.approx((1.0, 1.0))
    assert (report["rand_sd"], report["ari_sd"]) == pytest.approx((0.0, 0.0))


def test_evaluate_label_count_mismatch(partitions_out):
    pd.DataFrame({"subject": list("abc"), "label": [1, 1, 2]}).to_csv(
        partitions_out / "labels.csv", index=False
    )
    with pytest.raises(CommandError) as excinfo:
        call_command("evaluate", stdout=StringIO())
    assert excinfo.value.returncode == 2


def test_evaluate_without_partitions(out_dir):
    with pytest.raises(CommandError) as excinfo:
        call_command("evaluate", stdout=StringIO())
    assert excinfo.value.returncode == 4
