"""Fitting machinery for exponentially small splitting laws.

Measurements value(K) ~ eps^c A |omega|^r e^(omega pi/2) are reduced to
Y = ln(value) - c ln(eps) - omega pi/2, which is affine in ln|omega|; the
exponent and constant come from a global regression, a pairwise-slope
sequence (tendency diagnostics), and a Neville-style extrapolation in powers
of eps^2 that removes the A_1 eps^2 + A_2 eps^4 + ... corrections once a
rational guess for r is fixed.

The reduction is done in the working precision: value and e^(omega pi/2)
can be ~300 orders of magnitude apart, so the logs must cancel exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import gmpy2

from cpsplit.context import PrecisionContext
from cpsplit.errors import (
    DegenerateAbscissae,
    DuplicateAbscissae,
    IllConditioned,
    NonpositiveValue,
)


@dataclass
class FitResult:
    kind: str
    r: gmpy2.mpfr
    lnA: gmpy2.mpfr
    A: gmpy2.mpfr
    r_guess: Optional[object] = None
    pairwise: list = field(default_factory=list)   # (ln|w_i|, r_i, lnA_i)
    tableau: list = field(default_factory=list)    # columns, col 0 = Z
    A_extrapolated: Optional[gmpy2.mpfr] = None
    residual: Optional[gmpy2.mpfr] = None          # max |Y - fit| over window
    sensitivity: Optional[gmpy2.mpfr] = None       # dA per 1e-3 shift of r_guess


def reduce(ctx: PrecisionContext, samples, c):
    """(eps, omega, value) triples -> (ln|omega|, Y) with
    Y = ln(value) - c ln(eps) - omega pi/2."""
    pts = []
    with ctx.activate():
        c = ctx.mpf(c)
        half_pi = ctx.pi() / 2
        for eps, omega, value in samples:
            eps = ctx.mpf(eps)
            omega = ctx.mpf(omega)
            value = abs(ctx.mpf(value))
            if value <= 0:
                raise NonpositiveValue(
                    "cannot reduce value {} at omega {}".format(value, omega))
            Y = gmpy2.log(value) - c * gmpy2.log(eps) - omega * half_pi
            pts.append((gmpy2.log(abs(omega)), Y))
    return pts


def linreg(ctx: PrecisionContext, points):
    """Ordinary least squares: returns (slope r, intercept lnA)."""
    if len(points) < 3:
        raise DegenerateAbscissae("need at least 3 points, got {}".format(len(points)))
    with ctx.activate():
        n = ctx.mpf(len(points))
        sx = sum((p[0] for p in points), ctx.mpf(0))
        sy = sum((p[1] for p in points), ctx.mpf(0))
        mx = sx / n
        my = sy / n
        sxx = sum(((p[0] - mx) ** 2 for p in points), ctx.mpf(0))
        sxy = sum(((p[0] - mx) * (p[1] - my) for p in points), ctx.mpf(0))
        if sxx == 0:
            raise DegenerateAbscissae("all abscissae coincide")
        r = sxy / sxx
        return r, my - r * mx


def pairwise_slopes(ctx: PrecisionContext, points):
    """Per consecutive pair: (ln|omega_{i+1}|, slope, intercept)."""
    if len(points) < 2:
        raise DuplicateAbscissae("need at least 2 points")
    out = []
    with ctx.activate():
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if x1 == x0:
                raise DuplicateAbscissae("repeated abscissa {}".format(x0))
            ri = (y1 - y0) / (x1 - x0)
            out.append((x1, ri, y1 - ri * x1))
    return out


def extrapolate(ctx: PrecisionContext, eps_list, Z_list, steps=2, j_exponents=None):
    """Neville elimination of the eps^{j_t} corrections.

    Column t+1, row i = (e_{i+1}^{j_t} T_i - e_i^{j_t} T_{i+1})
                        / (e_{i+1}^{j_t} - e_i^{j_t}); j_t = 2(t+1) by default.
    Returns (tableau columns, estimate = last row of the final column).
    """
    if len(eps_list) != len(Z_list):
        raise IllConditioned("eps and Z length mismatch")
    if len(eps_list) < steps + 1:
        raise IllConditioned("need at least steps+1 rows")
    with ctx.activate():
        eps = [ctx.mpf(e) for e in eps_list]
        for e0, e1 in zip(eps, eps[1:]):
            if not e1 < e0:
                raise IllConditioned("eps must be strictly decreasing")
        floor = gmpy2.mpfr(10) ** (-(ctx.digits // 2))
        cols = [[ctx.mpf(z) for z in Z_list]]
        for t in range(steps):
            j = j_exponents[t] if j_exponents is not None else 2 * (t + 1)
            prev = cols[-1]
            nxt = []
            for i in range(len(prev) - 1):
                a = eps[i] ** j
                b = eps[i + 1] ** j
                den = b - a
                if abs(den) < floor:
                    raise IllConditioned(
                        "eps^{} gap {} below extrapolation floor".format(j, den))
                nxt.append((b * prev[i] - a * prev[i + 1]) / den)
            cols.append(nxt)
    return cols, cols[-1][-1]


def fit_scan(ctx: PrecisionContext, kind, samples, c, r_guess, *,
             window=50, steps=2) -> FitResult:
    """Full fit of a scan: regression + pairwise tendency + extrapolation.

    samples: (eps, omega, value) triples, any order; the window keeps the
    smallest-eps (largest |omega|) entries.
    """
    with ctx.activate():
        rows = sorted(((ctx.mpf(e), ctx.mpf(w), ctx.mpf(v))
                       for e, w, v in samples),
                      key=lambda t: t[0], reverse=True)
    rows = rows[-window:] if window else rows
    pts = reduce(ctx, rows, c)
    r, lnA = linreg(ctx, pts)
    pw = pairwise_slopes(ctx, pts)
    with ctx.activate():
        resid = max(abs(y - (lnA + r * x)) for x, y in pts)
        A = gmpy2.exp(lnA)
    res = FitResult(kind, r, lnA, A, r_guess=r_guess, pairwise=pw,
                    residual=resid)
    if r_guess is not None:
        eps_list = [t[0] for t in rows]
        Z = _normalize(ctx, rows, c, r_guess)
        res.tableau, res.A_extrapolated = extrapolate(ctx, eps_list, Z, steps)
        with ctx.activate():
            shift = ctx.mpf(r_guess) + ctx.mpf("1e-3")
        _, A_shift = extrapolate(ctx, eps_list,
                                 _normalize(ctx, rows, c, shift), steps)
        with ctx.activate():
            res.sensitivity = A_shift - res.A_extrapolated
    return res


def _normalize(ctx, rows, c, r_guess):
    """Z = value |omega|^(-r) e^(-omega pi/2) / eps^c."""
    with ctx.activate():
        c = ctx.mpf(c)
        rg = ctx.mpf(r_guess)
        half_pi = ctx.pi() / 2
        out = []
        for eps, omega, value in rows:
            lnZ = (gmpy2.log(abs(value)) - rg * gmpy2.log(abs(omega))
                   - omega * half_pi - c * gmpy2.log(eps))
            out.append(gmpy2.exp(lnZ))
        return out
