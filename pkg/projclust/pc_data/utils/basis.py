import numpy as np
from django.core.exceptions import ValidationError


# F(j, t) = cos(pi j t) for j = 0..J; column 0 is the intercept
def fourier_design(times, J):
    if int(J) != J or J < 0:
        raise ValidationError(f"Fourier order must be a nonnegative integer, got {J}")
    times = np.asarray(times, dtype=float)
    return np.cos(np.pi * np.outer(times, np.arange(int(J) + 1)))


def clamped_knots(num_basis, degree=3):
    # degree + 1 copies of each boundary, equally spaced interior knots
    interior = np.linspace(0.0, 1.0, num_basis - degree + 1)
    return np.concatenate([np.zeros(degree), interior, np.ones(degree)])


def bspline_design(points, num_basis=30, degree=3):
    """B-spline basis on [0, 1] with a clamped uniform knot vector.

    Evaluated with the Cox-de Boor recursion, vectorized over points. Columns
    are ordered by knot position, so low column indices describe the left end
    of the interval. Each row sums to one.
    """
    if num_basis < degree + 1:
        raise ValidationError(
            f"need at least {degree + 1} basis functions for degree {degree}",
            code="config",
        )
    points = np.asarray(points, dtype=float)
    if np.any(~np.isfinite(points)) or np.any(points < 0) or np.any(points > 1):
        raise ValidationError(
            "B-spline points must lie in [0, 1]; standardize times first",
            code="out_of_range",
        )

    knots = clamped_knots(num_basis, degree)
    n_intervals = len(knots) - 1
    rows = np.arange(len(points))

    # degree 0: indicator of the half-open knot interval, with the right
    # boundary folded into the last nonempty interval
    span = np.searchsorted(knots, points, side="right") - 1
    span = np.minimum(span, num_basis - 1)
    basis = np.zeros((len(points), n_intervals))
    basis[rows, span] = 1.0

    for p in range(1, degree + 1):
        raised = np.zeros((len(points), n_intervals - p))
        for j in range(n_intervals - p):
            left = knots[j + p] - knots[j]
            right = knots[j + p + 1] - knots[j + 1]
            # 0/0 terms vanish
            if left > 0:
                raised[:, j] += (points - knots[j]) / left * basis[:, j]
            if right > 0:
                raised[:, j] += (knots[j + p + 1] - points) / right * basis[:, j + 1]
        basis = raised

    return basis
