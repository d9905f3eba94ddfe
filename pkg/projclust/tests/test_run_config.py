import pytest
from django.core.exceptions import ValidationError

from projclust.utils.run_config import RunConfig, parse_shared_set


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("all", (0, 1, 2, 3, 4, 5, 6, 7, 8, 9)),
        ("low:0..3", (0, 1, 2, 3)),
        ("mid:4..6", (4, 5, 6)),
        ("7..9", (7, 8, 9)),
        ("2,0,2", (0, 2)),
    ],
)
def test_parse_shared_set(text, expected):
    assert parse_shared_set(text, 10) == expected


@pytest.mark.parametrize(("text", "code"), [("0..12", "out_of_range"), ("3..1", "config"), ("a,b", "config"), ("", "config")])
def test_parse_shared_set_errors(text, code):
    with pytest.raises(ValidationError) as excinfo:
        parse_shared_set(text, 10)
    assert excinfo.value.code == code


def test_settings_provide_defaults(settings):
    cfg = RunConfig.load()
    assert cfg.mcmc_chains == settings.PROJCLUST["MCMC_CHAINS"]
    assert cfg.k is None
    assert cfg.prior_g_df is None
    assert cfg.out == settings.PROJCLUST["OUT"]


def test_file_overrides_settings_and_flags_override_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("PROJCLUST_SEED=11\nK=3\nSHARED=low:0..3\nFORCE=on\n")

    from_file = RunConfig.load(path)
    flagged = RunConfig.load(path, {"SEED": 12, "K": None})

    assert (from_file.seed, from_file.k, from_file.shared, from_file.force) == (11, 3, "low:0..3", True)
    assert (flagged.seed, flagged.k) == (12, 3)


def test_config_file_does_not_touch_environment(tmp_path, monkeypatch):
    monkeypatch.delenv("PROJCLUST_SEED", raising=False)
    path = tmp_path / "run.env"
    path.write_text("PROJCLUST_SEED=11\n")

    RunConfig.load(path)

    import os

    assert "PROJCLUST_SEED" not in os.environ


def test_unknown_file_key(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("CLUSTERS=4\n")
    with pytest.raises(ValidationError) as excinfo:
        RunConfig.load(path)
    assert "CLUSTERS" in excinfo.value.message


def test_bad_file_value(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("SEED=many\n")
    with pytest.raises(ValidationError):
        RunConfig.load(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        RunConfig.load(tmp_path / "absent.env")


@pytest.mark.parametrize(
    "overrides",
    [{"SELECTION": "elbow"}, {"K": 0}, {"THREADS": 0}, {"K_MAX": 1}],
)
def test_invalid_values(overrides):
    with pytest.raises(ValidationError):
        RunConfig.load(overrides=overrides)


def test_hash_ignores_output_location_and_workers():
    base = RunConfig.load()
    moved = RunConfig.load(overrides={"OUT": "elsewhere", "THREADS": 4, "FORCE": True})
    reseeded = RunConfig.load(overrides={"SEED": base.seed + 1})

    assert moved.config_hash == base.config_hash
    assert reseeded.config_hash != base.config_hash
    assert "THREADS" not in base.as_dict()
    assert "OUT" not in base.as_dict()


def test_builders():
    cfg = RunConfig.load(
        overrides={"BASIS": "bspline:12", "SHARED": "0..2", "PRIOR_G": "diagonal", "PRIOR_G_DF": "6"}
    )

    spec = cfg.model_spec()

    assert spec.q == 12
    assert spec.shared == (0, 1, 2)
    assert spec.priors.diagonal
    assert spec.priors.g_df == 6.0
    assert cfg.mcmc_config().seed == cfg.seed
    assert cfg.synth_config().n_per_group == cfg.sim_per_group


def test_file_keys_ignore_case_and_prefix(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("projclust_seed=5\nsim_t=12\nPROJCLUST_MCMC_CHAINS=3\n")

    cfg = RunConfig.load(path)

    assert (cfg.seed, cfg.sim_t, cfg.mcmc_chains) == (5, 12, 3)
