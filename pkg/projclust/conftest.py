from io import StringIO

import numpy as np
import pytest
from django.core.management import call_command

from projclust.pc_data.utils.loading import write_csv
from projclust.pc_data.utils.synthetic import SynthConfig, generate_example1
from projclust.tests.factories import LongitudinalDatasetFactory, ModelSpecFactory


@pytest.fixture(autouse=True)
def _out_dir(settings, tmp_path):
    settings.PROJCLUST = {**settings.PROJCLUST, "OUT": str(tmp_path / "out")}


@pytest.fixture()
def out_dir(tmp_path):
    return tmp_path / "out"


@pytest.fixture()
def rng():
    return np.random.default_rng(20230101)


@pytest.fixture()
def dataset():
    return LongitudinalDatasetFactory.build()


@pytest.fixture()
def spec():
    return ModelSpecFactory.build()


@pytest.fixture()
def example1():
    """A small four-group cosine dataset and its 0-based labels."""
    return generate_example1(SynthConfig(n_per_group=3, T=12, seed=3))


@pytest.fixture()
def example1_csv(tmp_path, example1):
    path = tmp_path / "data.csv"
    write_csv(example1[0], path)
    return path


@pytest.fixture()
def simulated_out(out_dir):
    """OUT holding a simulated 12-subject data.csv and labels.csv."""
    call_command("simulate", "--per-group=3", "--T=12", stdout=StringIO())
    return out_dir


@pytest.fixture()
def fitted_out(simulated_out):
    """OUT after simulate and a short fit with a four-column Fourier basis."""
    call_command(
        "fit", f"--input={simulated_out / 'data.csv'}", "--basis=fourier:3", stdout=StringIO()
    )
    return simulated_out
