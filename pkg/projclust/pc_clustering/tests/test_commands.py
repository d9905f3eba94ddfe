import json
from io import StringIO

import numpy as np
import pandas as pd
import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from projclust.pc_clustering.utils.partition_file import read_partitions


def run(name, out_dir, *args):
    output = StringIO()
    call_command(name, f"--input={out_dir / 'data.csv'}", "--basis=fourier:3", *args, stdout=output)
    return output.getvalue()


def test_cluster_with_fixed_k(fitted_out):
    message = run("cluster", fitted_out, "--k=2", "--draws-used=20")

    header, partitions, records = read_partitions(fitted_out / "partitions.jsonl")
    matrix = pd.read_csv(fitted_out / "coincidence.csv", index_col="subject")
    summary = json.loads((fitted_out / "coincidence_summary.json").read_text())

    assert header["K"] == 2
    assert header["shared"] == [0, 1, 2, 3]
    assert len(partitions) == 20
    assert all(set(labels) == {0, 1} for labels in partitions)
    assert all(record["labels"][0] == 0 for record in records)
    assert matrix.shape == (12, 12)
    assert list(matrix.index) == header["subjects"]
    np.testing.assert_allclose(np.diag(matrix.to_numpy()), 1.0)
    np.testing.assert_allclose(matrix.to_numpy(), matrix.to_numpy().T)
    assert (summary["K"], summary["draws"]) == (2, 20)
    assert "Clustered 20 draws into K=2 clusters" in message


def test_one_cluster_per_subject_has_zero_objective(fitted_out):
    run("cluster", fitted_out, "--k=12", "--draws-used=5")

    _, partitions, records = read_partitions(fitted_out / "partitions.jsonl")

    assert all(sorted(labels) == list(range(12)) for labels in partitions)
    assert [r["objective"] for r in records] == pytest.approx([0.0] * 5, abs=1e-12)


def test_cluster_on_a_shared_band(fitted_out):
    run("cluster", fitted_out, "--k=2", "--shared=1..2", "--draws-used=5")

    header, _, _ = read_partitions(fitted_out / "partitions.jsonl")
    assert header["shared"] == [1, 2]


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["--k=2", "--select=kl"],
        ["--select=both"],
        ["--k=13"],
        ["--basis=fourier:5", "--k=2"],
    ],
)
def test_cluster_validation_errors(fitted_out, args):
    with pytest.raises(CommandError) as excinfo:
        run("cluster", fitted_out, *args)
    assert excinfo.value.returncode == 2


def test_cluster_without_draws(simulated_out):
    with pytest.raises(CommandError) as excinfo:
        run("cluster", simulated_out, "--k=2")
    assert excinfo.value.returncode == 4


def test_cluster_selects_k_first(fitted_out):
    run("cluster", fitted_out, "--select=kl", "--draws-used=10")

    chosen = json.loads((fitted_out / "chosen_k.json").read_text())
    header, _, _ = read_partitions(fitted_out / "partitions.jsonl")

    assert set(chosen) == {"shared", "K_max", "kl"}
    assert header["K"] == chosen["kl"]["K"]


def test_select_k_runs_both_rules(fitted_out):
    message = run("select_k", fitted_out, "--B=3")

    chosen = json.loads((fitted_out / "chosen_k.json").read_text())
    kl = pd.read_csv(fitted_out / "kl_curve.csv")
    instability = pd.read_csv(fitted_out / "instability_curve.csv")
    fitted = pd.read_csv(fitted_out / "fitted_means.csv", index_col="subject")

    assert chosen["K_max"] == 6
    assert chosen["bootstrap"]["B"] == 3
    assert list(kl["K"]) == [1, 2, 3, 4, 5, 6]
    assert list(instability["K"]) == [2, 3, 4, 5, 6]
    assert (instability["I_K"] >= 0).all()
    assert 2 <= chosen["bootstrap"]["K"] <= 6
    assert fitted.shape == (12, 12)

    # the reported K is the first to pass the ratio rule on the written curve
    ratio = kl["KL_K"] / kl["KL_K"].iloc[0]
    passing = kl["K"][ratio < chosen["kl"]["epsilon"]]
    expected = int(passing.iloc[0]) if len(passing) else 6
    assert chosen["kl"]["K"] == expected
    assert f"kl: K={expected}" in message


def test_select_k_single_method(fitted_out):
    run("select_k", fitted_out, "--method=bootstrap", "--B=2", "--rule=min", "--k-max=4")

    chosen = json.loads((fitted_out / "chosen_k.json").read_text())
    assert set(chosen) == {"shared", "K_max", "bootstrap"}
    assert chosen["bootstrap"]["rule"] == "min"
    assert not (fitted_out / "kl_curve.csv").exists()


def test_select_k_rejects_bad_rule(fitted_out):
    with pytest.raises(CommandError) as excinfo:
        run("select_k", fitted_out, "--method=bootstrap", "--rule=elbow")
    assert excinfo.value.returncode == 2


def test_cluster_defaults_to_the_fitted_basis(fitted_out):
    call_command(
        "cluster", f"--input={fitted_out / 'data.csv'}", "--k=2", "--draws-used=5",
        stdout=StringIO(),
    )

    header, partitions, _ = read_partitions(fitted_out / "partitions.jsonl")
    echo = json.loads((fitted_out / "run_config.cluster.json").read_text())

    assert header["shared"] == [0, 1, 2, 3]
    assert len(partitions) == 5
    assert echo["config"]["BASIS"] == "fourier:3"


def test_select_k_defaults_to_the_fitted_basis(fitted_out):
    call_command(
        "select_k", f"--input={fitted_out / 'data.csv'}", "--method=kl", stdout=StringIO()
    )

    chosen = json.loads((fitted_out / "chosen_k.json").read_text())
    assert chosen["shared"] == [0, 1, 2, 3]


def test_each_step_keeps_its_own_config_echo(fitted_out):
    run("cluster", fitted_out, "--k=2", "--draws-used=5")

    fit_echo = json.loads((fitted_out / "run_config.fit.json").read_text())
    cluster_echo = json.loads((fitted_out / "run_config.cluster.json").read_text())

    assert (fitted_out / "run_config.simulate.json").exists()
    assert fit_echo["config"]["K"] is None
    assert cluster_echo["config"]["K"] == 2
    assert not (fitted_out / "run_config.json").exists()
