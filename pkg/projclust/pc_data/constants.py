"""
Column names of the long-format CSV schema: ``subject,time,y[,x1,...,xm]``.
Rows may arrive in any order; they are grouped by subject and sorted by time
on load.
"""

SUBJECT_COLUMN = "subject"
TIME_COLUMN = "time"
RESPONSE_COLUMN = "y"
REQUIRED_COLUMNS = [SUBJECT_COLUMN, TIME_COLUMN, RESPONSE_COLUMN]

LABEL_COLUMN = "label"

FOURIER = "fourier"
BSPLINE = "bspline"
BASIS_KINDS = [FOURIER, BSPLINE]

DEFAULT_BSPLINE_BASIS = 30
DEFAULT_BSPLINE_DEGREE = 3

# Example 1 group names, in label order
EXAMPLE1_GROUPS = ["SLSH", "SLWH", "WLSH", "WLWH"]
# (low frequency, high frequency) coefficient per group
EXAMPLE1_COEFFICIENTS = [(1.0, 1.0), (1.0, 0.1), (0.1, 1.0), (0.1, 0.1)]
EXAMPLE1_LOW_FREQUENCIES = [1, 2, 3]
EXAMPLE1_HIGH_FREQUENCIES = [7, 8, 9]
