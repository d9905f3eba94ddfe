import json
from io import StringIO

import numpy as np
import pandas as pd
import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from projclust.pc_model.utils.draws import read_draws


def fit(data_path, *args):
    output = StringIO()
    call_command("fit", f"--input={data_path}", "--basis=fourier:3", *args, stdout=output)
    return output.getvalue()


def test_fit_writes_draws_and_diagnostics(simulated_out):
    message = fit(simulated_out / "data.csv")

    header, draws = read_draws(simulated_out / "draws.jsonl")
    standardization = json.loads((simulated_out / "standardization.json").read_text())
    diagnostics = pd.read_csv(simulated_out / "diagnostics.csv", index_col="parameter")

    # 2 chains x (200 - 100) kept iterations
    assert len(draws) == 200
    assert (header["n"], header["p"], header["q"]) == (12, 1, 4)
    assert (header["BASIS"], header["FIXED_BASIS"], header["USE_COVARIATES"]) == (
        "fourier:3",
        "",
        True,
    )
    assert {"mean", "sd", "r_hat"} <= set(diagnostics.columns)
    assert standardization["t_range"] > 0
    assert "Wrote 200 draws (2 chains) for 12 subjects" in message


def test_fit_refuses_to_overwrite(simulated_out):
    fit(simulated_out / "data.csv")
    first = (simulated_out / "draws.jsonl").read_bytes()

    with pytest.raises(CommandError) as excinfo:
        fit(simulated_out / "data.csv")
    assert excinfo.value.returncode == 2

    fit(simulated_out / "data.csv", "--force")
    assert (simulated_out / "draws.jsonl").read_bytes() == first


def test_fit_checks_shared_set_before_sampling(simulated_out):
    with pytest.raises(CommandError) as excinfo:
        fit(simulated_out / "data.csv", "--shared=0..12")

    assert excinfo.value.returncode == 2
    assert "outside" in str(excinfo.value)
    assert not (simulated_out / "draws.jsonl").exists()


def test_fit_missing_input(tmp_path):
    with pytest.raises(CommandError) as excinfo:
        fit(tmp_path / "absent.csv")
    assert excinfo.value.returncode == 4


def test_fit_malformed_input(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("subject,time,y\ns1,0.1,abc\n")
    with pytest.raises(CommandError) as excinfo:
        fit(path)
    assert excinfo.value.returncode == 2


def test_numerical_failure_exit_code(simulated_out, monkeypatch):
    def failing_fit(*args, **kwargs):
        raise np.linalg.LinAlgError("matrix is not positive definite")

    monkeypatch.setattr("projclust.pc_model.management.commands.fit.gibbs_fit", failing_fit)
    with pytest.raises(CommandError) as excinfo:
        fit(simulated_out / "data.csv")
    assert excinfo.value.returncode == 3
