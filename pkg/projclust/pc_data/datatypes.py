from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from django.core.exceptions import ValidationError

from projclust.pc_data.constants import (
    BASIS_KINDS,
    BSPLINE,
    DEFAULT_BSPLINE_BASIS,
    DEFAULT_BSPLINE_DEGREE,
    FOURIER,
)
from projclust.pc_data.utils.basis import bspline_design, fourier_design
from projclust.pc_model.datatypes import PriorSpec


@dataclass
class SubjectRecord:
    id: str
    times: np.ndarray
    y: np.ndarray
    x_covariates: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x_covariates is not None:
            self.x_covariates = np.asarray(self.x_covariates, dtype=float)
            if self.x_covariates.ndim == 1:
                self.x_covariates = self.x_covariates.reshape(-1, 1)

    @property
    def n_obs(self):
        return len(self.times)

    @property
    def n_covariates(self):
        return 0 if self.x_covariates is None else self.x_covariates.shape[1]

    def validate(self):
        if self.n_obs < 1:
            raise ValidationError(f"subject {self.id} has no observations", code="empty")
        if len(self.y) != self.n_obs:
            raise ValidationError(
                f"subject {self.id}: {len(self.y)} responses for {self.n_obs} times",
                code="shape",
            )
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError(
                f"subject {self.id}: times must be strictly increasing",
                code="duplicate",
            )
        if self.x_covariates is not None and self.x_covariates.shape[0] != self.n_obs:
            raise ValidationError(
                f"subject {self.id}: covariate rows do not match observations",
                code="shape",
            )


@dataclass
class LongitudinalDataset:
    subjects: list[SubjectRecord]

    def __post_init__(self):
        counts = {s.n_covariates for s in self.subjects}
        if len(counts) > 1:
            raise ValidationError(
                "all subjects must share the same number of covariate columns",
                code="shape",
            )
        if len(set(self.ids)) != len(self.subjects):
            raise ValidationError("subject ids must be unique", code="duplicate")
        for subject in self.subjects:
            subject.validate()

    def __len__(self):
        return len(self.subjects)

    def __iter__(self):
        return iter(self.subjects)

    def __getitem__(self, item):
        return self.subjects[item]

    @property
    def ids(self):
        return [s.id for s in self.subjects]

    @property
    def n_covariates(self):
        return self.subjects[0].n_covariates if self.subjects else 0

    @property
    def n_total(self):
        return sum(s.n_obs for s in self.subjects)

    def pooled_times(self):
        return np.concatenate([s.times for s in self.subjects])

    def pooled_y(self):
        return np.concatenate([s.y for s in self.subjects])

    def subset(self, ids):
        lookup = {s.id: s for s in self.subjects}
        return LongitudinalDataset([lookup[i] for i in ids])


@dataclass(frozen=True)
class ScaleTransform:
    """Affine maps applied by ``standardize``: ``t' = (t - t_min) / t_range``
    and ``y' = (y - y_mean) / y_sd``."""

    t_min: float
    t_range: float
    y_mean: float
    y_sd: float

    def inverse_times(self, times):
        return np.asarray(times) * self.t_range + self.t_min

    def inverse_y(self, y):
        return np.asarray(y) * self.y_sd + self.y_mean

    def as_dict(self):
        return {
            "t_min": self.t_min,
            "t_range": self.t_range,
            "y_mean": self.y_mean,
            "y_sd": self.y_sd,
        }


@dataclass(frozen=True)
class BasisSpec:
    """Basis used to build rows of a design matrix from observation times.

    For ``fourier`` the order J gives frequencies 0..J (J+1 columns); for
    ``bspline`` it is the number of basis functions (optionally preceded by a
    constant column when ``intercept`` is set).
    """

    kind: str = FOURIER
    order: int = 9
    degree: int = DEFAULT_BSPLINE_DEGREE
    intercept: bool = False

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValidationError(
                f"unknown basis kind {self.kind!r}, expected one of {BASIS_KINDS}",
                code="config",
            )
        if self.order < 0:
            raise ValidationError("basis order must be nonnegative", code="config")
        if self.kind == BSPLINE and self.order < self.degree + 1:
            raise ValidationError(
                f"a degree {self.degree} B-spline basis needs at least "
                f"{self.degree + 1} functions, got {self.order}",
                code="config",
            )

    @classmethod
    def parse(cls, text):
        # "fourier:9", "bspline:30", "bspline:30:intercept"
        parts = [p.strip() for p in str(text).split(":") if p.strip()]
        if not parts or len(parts) > 3:
            raise ValidationError(f"cannot parse basis {text!r}", code="config")
        kind = parts[0].lower()
        try:
            if len(parts) > 1:
                order = int(parts[1])
            else:
                order = DEFAULT_BSPLINE_BASIS if kind == BSPLINE else cls.order
        except ValueError as err:
            raise ValidationError(f"cannot parse basis {text!r}", code="config") from err
        intercept = len(parts) == 3 and parts[2].lower() == "intercept"
        if len(parts) == 3 and not intercept:
            raise ValidationError(f"cannot parse basis {text!r}", code="config")
        return cls(kind=kind, order=order, intercept=intercept)

    def __str__(self):
        text = f"{self.kind}:{self.order}"
        return f"{text}:intercept" if self.intercept else text

    @property
    def n_columns(self):
        if self.kind == FOURIER:
            return self.order + 1
        return self.order + int(self.intercept)

    def design(self, times):
        times = np.asarray(times, dtype=float)
        if self.kind == FOURIER:
            return fourier_design(times, self.order)
        basis = bspline_design(times, self.order, self.degree)
        if self.intercept:
            basis = np.hstack([np.ones((len(times), 1)), basis])
        return basis


@dataclass(frozen=True)
class ModelSpec:
    """Fixed and random design builders, the shared set A and the priors.

    ``shared`` holds 0-based column indices of the random-effect design Z;
    the complement B may be empty. ``fixed_basis=None`` means X_ij is the
    intercept followed by the subject's covariate row.
    """

    random_basis: BasisSpec
    shared: tuple[int, ...]
    fixed_basis: BasisSpec | None = None
    use_covariates: bool = True
    priors: PriorSpec = field(default_factory=PriorSpec)

    def __post_init__(self):
        shared = tuple(sorted({int(j) for j in self.shared}))
        object.__setattr__(self, "shared", shared)
        if not shared:
            raise ValidationError("the shared set A must be nonempty", code="config")
        if shared[0] < 0 or shared[-1] >= self.q:
            raise ValidationError(
                f"shared indices {list(shared)} outside the {self.q} random-effect "
                "columns",
                code="out_of_range",
            )

    @property
    def q(self):
        return self.random_basis.n_columns

    @property
    def complement(self):
        return tuple(j for j in range(self.q) if j not in self.shared)

    def with_shared(self, shared):
        return replace(self, shared=tuple(shared))

    def n_fixed(self, n_covariates):
        base = 1 if self.fixed_basis is None else self.fixed_basis.n_columns
        return base + (n_covariates if self.use_covariates else 0)

    def fixed_design(self, times, covariates=None):
        times = np.asarray(times, dtype=float)
        if self.fixed_basis is None:
            X = np.ones((len(times), 1))
        else:
            X = self.fixed_basis.design(times)
        if self.use_covariates and covariates is not None and covariates.shape[1]:
            X = np.hstack([X, covariates])
        return X

    def random_design(self, times):
        return self.random_basis.design(times)
