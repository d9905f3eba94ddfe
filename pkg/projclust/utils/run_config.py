"""Run configuration shared by the pipeline commands.

Values come from three layers, later ones winning: the ``PROJCLUST`` settings
dict (itself read from the environment), an optional ``.env``-style config
file, and command-line flags.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

import environ
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured, ValidationError

from projclust.pc_data.datatypes import BasisSpec, ModelSpec
from projclust.pc_data.utils.synthetic import SynthConfig
from projclust.pc_model.datatypes import McmcConfig, PriorSpec

KEY_PREFIX = "PROJCLUST_"
# keys that fix the design matrices, carried in the draw file header
DESIGN_KEYS = ("BASIS", "FIXED_BASIS", "USE_COVARIATES")
SELECTION_METHODS = ["kl", "bootstrap", "both"]
# keys that never change results, left out of the hash and the echoed config
NON_RESULT_KEYS = {"OUT", "THREADS", "FORCE"}

_RANGE = re.compile(r"^(?:(?P<band>[a-z]+):)?(?P<first>\d+)\.\.(?P<last>\d+)$")


def parse_shared_set(text, q):
    """Shared set A from ``all``, a band such as ``low:0..3`` or a list ``0,1,2``.

    Indices are 0-based columns of the random-effect design.
    """
    text = str(text).strip().lower()
    if text == "all":
        indices = list(range(q))
    elif match := _RANGE.match(text):
        first, last = int(match["first"]), int(match["last"])
        if first > last:
            raise ValidationError(f"empty shared range {text!r}", code="config")
        indices = list(range(first, last + 1))
    else:
        try:
            indices = [int(part) for part in text.split(",") if part.strip()]
        except ValueError as err:
            raise ValidationError(f"cannot parse shared set {text!r}", code="config") from err
    if not indices:
        raise ValidationError("the shared set A must be nonempty", code="config")
    outside = [j for j in indices if not 0 <= j < q]
    if outside:
        raise ValidationError(
            f"shared indices {outside} outside the {q} random-effect columns (0..{q - 1})",
            code="out_of_range",
        )
    return tuple(sorted(set(indices)))


def read_config_file(path):
    """KEY=value pairs of a config file, read without touching os.environ."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file {path} does not exist")
    raw = type("RunConfigFile", (environ.Env,), {"ENVIRON": {}})
    raw.read_env(str(path))
    # keys are matched case-insensitively, with or without the prefix
    values = {
        key.upper().removeprefix(KEY_PREFIX): value for key, value in raw.ENVIRON.items()
    }
    scoped = type("RunConfigEnv", (environ.Env,), {"ENVIRON": dict(values)})
    return scoped(), values


def _optional_int(value):
    return None if value in (None, "") else int(value)


def _optional_float(value):
    return None if value in (None, "") else float(value)


@dataclass(frozen=True)
class RunConfig:
    input: str = "data.csv"
    out: str = "out"
    seed: int = 2023
    threads: int = 1
    force: bool = False
    basis: str = "fourier:9"
    fixed_basis: str = ""
    use_covariates: bool = True
    shared: str = "all"
    mcmc_chains: int = 4
    mcmc_iter: int = 2000
    mcmc_burn_in: int = 1000
    mcmc_thin: int = 1
    prior_beta_var: float = 100.0
    prior_sigma2_shape: float = 0.01
    prior_sigma2_rate: float = 0.01
    prior_g: str = "inverse_wishart"
    prior_g_df: float | None = None
    prior_g_scale: float = 1.0
    prior_g_shape: float = 0.01
    prior_g_rate: float = 0.01
    k: int | None = None
    selection: str = ""
    epsilon: float = 0.1
    bootstrap_b: int = 100
    bootstrap_rule: str = "half_max"
    k_max: int = 30
    cluster_draws: int = 0
    curve_draws: int = 100
    fitted_draws: int = 200
    restarts: int = 10
    max_iter: int = 100
    sim_per_group: int = 10
    sim_t: int = 40
    sim_noise_var: float = 0.1
    sim_missing: float = 0.0
    spectrum_freqs: int = 40
    spectrum_h: float = 0.5

    def __post_init__(self):
        if self.selection and self.selection not in SELECTION_METHODS:
            raise ValidationError(
                f"unknown selection method {self.selection!r}, expected one of "
                f"{SELECTION_METHODS}",
                code="config",
            )
        if self.k is not None and self.k < 1:
            raise ValidationError("K must be at least 1", code="config")
        if self.threads < 1:
            raise ValidationError("threads must be at least 1", code="config")
        if self.k_max < 2:
            raise ValidationError("K_max must be at least 2", code="config")

    @classmethod
    def keys(cls):
        return [f.name.upper() for f in fields(cls)]

    @classmethod
    def load(cls, config_path=None, overrides=None):
        """Merge settings defaults, the config file and non-None overrides."""
        raw = {k.upper(): v for k, v in getattr(settings, "PROJCLUST", {}).items()}
        env = None
        file_keys = set()
        if config_path:
            env, file_values = read_config_file(config_path)
            unknown = sorted(set(file_values) - set(cls.keys()))
            if unknown:
                raise ValidationError(
                    f"unknown key(s) {unknown} in config file {config_path}", code="config"
                )
            file_keys = set(file_values)
        for key, value in (overrides or {}).items():
            if value is not None:
                raw[key.upper()] = value
                file_keys.discard(key.upper())

        values = {}
        for f in fields(cls):
            key = f.name.upper()
            try:
                if key in file_keys:
                    values[f.name] = cls._from_env(env, key, f.name)
                elif key in raw:
                    values[f.name] = cls._cast(f.name, raw[key])
            except (ValueError, ImproperlyConfigured) as err:
                raise ValidationError(f"invalid value for {key}: {err}", code="config") from err
        return cls(**values)

    @classmethod
    def _cast(cls, name, value):
        default = cls.__dataclass_fields__[name].default
        if name == "k":
            return _optional_int(value)
        if name == "prior_g_df":
            return _optional_float(value)
        if isinstance(default, bool):
            if isinstance(value, str):
                return environ.Env.parse_value(value, bool)
            return bool(value)
        return type(default)(value)

    @classmethod
    def _from_env(cls, env, key, name):
        default = cls.__dataclass_fields__[name].default
        if name in ("k", "prior_g_df"):
            return cls._cast(name, env.str(key))
        if isinstance(default, bool):
            return env.bool(key)
        if isinstance(default, int):
            return env.int(key)
        if isinstance(default, float):
            return env.float(key)
        return env.str(key)

    def as_dict(self):
        return {
            f.name.upper(): getattr(self, f.name)
            for f in fields(self)
            if f.name.upper() not in NON_RESULT_KEYS
        }

    @property
    def config_hash(self):
        canonical = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def design_keys(self):
        return {key: getattr(self, key.lower()) for key in DESIGN_KEYS}

    def with_design(self, values):
        """Copy with the design keys found in ``values``."""
        changes = {
            key.lower(): self._cast(key.lower(), values[key])
            for key in DESIGN_KEYS
            if key in values
        }
        return replace(self, **changes) if changes else self

    @property
    def out_dir(self):
        return Path(self.out)

    # builders

    def basis_spec(self):
        return BasisSpec.parse(self.basis)

    def fixed_basis_spec(self):
        return BasisSpec.parse(self.fixed_basis) if self.fixed_basis else None

    def prior_spec(self):
        return PriorSpec(
            beta_var=self.prior_beta_var,
            sigma2_shape=self.prior_sigma2_shape,
            sigma2_rate=self.prior_sigma2_rate,
            g_prior=self.prior_g,
            g_df=self.prior_g_df,
            g_scale=self.prior_g_scale,
            g_shape=self.prior_g_shape,
            g_rate=self.prior_g_rate,
        )

    def model_spec(self):
        random_basis = self.basis_spec()
        return ModelSpec(
            random_basis=random_basis,
            shared=parse_shared_set(self.shared, random_basis.n_columns),
            fixed_basis=self.fixed_basis_spec(),
            use_covariates=self.use_covariates,
            priors=self.prior_spec(),
        )

    def mcmc_config(self):
        return McmcConfig(
            n_chains=self.mcmc_chains,
            n_iter=self.mcmc_iter,
            burn_in=self.mcmc_burn_in,
            thin=self.mcmc_thin,
            seed=self.seed,
        )

    def synth_config(self):
        return SynthConfig(
            n_per_group=self.sim_per_group,
            T=self.sim_t,
            noise_var=self.sim_noise_var,
            seed=self.seed,
        )
