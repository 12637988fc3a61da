"""Shared helpers for the test suite."""

import csv
from importlib import resources

import gmpy2

from cpsplit.asymptotics import extrapolate, linreg


def load_table(name):
    """Rows of a bundled reference table as dict-of-strings records."""
    with resources.files("cpsplit.data").joinpath(name).open() as fh:
        return list(csv.DictReader(fh))


def reproduce_table(ctx, rows, steps=2):
    """Recompute the extrapolation columns of a reference table.

    The printed K values carry only 4 significant digits, which is too
    coarse to survive two elimination steps; since the grid is geometric,
    ln K is smoothed by a least-squares line in the row index first.
    Returns the tableau columns (column 0 is the input Z).
    """
    with ctx.activate():
        lnK = [gmpy2.log(ctx.mpf(r["K"])) for r in rows]
        pts = [(ctx.mpf(i), v) for i, v in enumerate(lnK)]
        slope, intercept = linreg(ctx, pts)
        eps = [gmpy2.rootn(gmpy2.exp(intercept + slope * i) / 3, 4)
               for i in range(len(rows))]
        Z = [ctx.mpf(r["Z"]) for r in rows]
    cols, _ = extrapolate(ctx, eps, Z, steps=steps)
    return cols
