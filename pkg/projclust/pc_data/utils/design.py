from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class SubjectDesign:
    id: str
    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray

    @property
    def n_obs(self):
        return len(self.y)


@dataclass
class ModelDesign:
    """Per-subject design matrices (X_i, Z_i) and responses y_i."""

    subjects: list[SubjectDesign]
    spec: object = None
    n_covariates: int = 0

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
    def p(self):
        return self.subjects[0].X.shape[1]

    @property
    def q(self):
        return self.subjects[0].Z.shape[1]

    @property
    def n_total(self):
        return sum(s.n_obs for s in self.subjects)

    def with_response(self, ys):
        subjects = [
            SubjectDesign(id=s.id, X=s.X, Z=s.Z, y=np.asarray(y, dtype=float))
            for s, y in zip(self.subjects, ys)
        ]
        return ModelDesign(subjects, spec=self.spec, n_covariates=self.n_covariates)

    def reordered(self, ids):
        lookup = {s.id: s for s in self.subjects}
        return ModelDesign(
            [lookup[i] for i in ids], spec=self.spec, n_covariates=self.n_covariates
        )


def build_design(ds, spec):
    subjects = [
        SubjectDesign(
            id=s.id,
            X=spec.fixed_design(s.times, s.x_covariates),
            Z=spec.random_design(s.times),
            y=s.y.copy(),
        )
        for s in ds
    ]
    design = ModelDesign(subjects, spec=spec, n_covariates=ds.n_covariates)
    logger.debug(
        "Built designs for %d subjects: p=%d, q=%d, shared=%s",
        len(design),
        design.p,
        design.q,
        list(spec.shared),
    )
    return design
