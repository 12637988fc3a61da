import gmpy2
import pytest

from cpsplit.asymptotics import (
    extrapolate,
    fit_scan,
    linreg,
    pairwise_slopes,
    reduce,
)
from cpsplit.errors import (
    DegenerateAbscissae,
    DuplicateAbscissae,
    IllConditioned,
    NonpositiveValue,
)
from helpers import load_table, reproduce_table


def synth_samples(ctx, c, r, lnA, eps_list, corrections=()):
    """value = eps^c e^{lnA} |omega|^r e^{omega pi/2} (1 + sum B_j eps^j)."""
    out = []
    with ctx.activate():
        for e in eps_list:
            e = ctx.mpf(e)
            w = -1 / (3 * e * e)
            lnv = (ctx.mpf(c) * gmpy2.log(e) + ctx.mpf(lnA)
                   + ctx.mpf(r) * gmpy2.log(abs(w)) + w * ctx.pi() / 2)
            v = gmpy2.exp(lnv)
            for j, B in corrections:
                v *= 1 + ctx.mpf(B) * e ** j
            out.append((e, w, v))
    return out


EPS_GRID = ["0.2", "0.17", "0.15", "0.13", "0.11", "0.1", "0.09", "0.08"]


def test_exact_law_recovery(ctx40):
    samples = synth_samples(ctx40, 1, "1.6111", "2.7", EPS_GRID)
    res = fit_scan(ctx40, "synthetic", samples, 1, "1.6111")
    with ctx40.activate():
        assert abs(res.r - ctx40.mpf("1.6111")) < 1e-30
        assert abs(res.lnA - ctx40.mpf("2.7")) < 1e-30
        assert res.residual < 1e-30
        for _, ri, lnAi in res.pairwise:
            assert abs(ri - ctx40.mpf("1.6111")) < 1e-30
        assert abs(res.A_extrapolated - gmpy2.exp(ctx40.mpf("2.7"))) < 1e-25


def test_reduction_cancels_exponential(ctx40):
    # values span hundreds of orders of magnitude; Y stays O(1)
    samples = synth_samples(ctx40, 2, "2.0", "0.5",
                            ["0.1", "0.05", "0.03", "0.02"])
    pts = reduce(ctx40, samples, 2)
    with ctx40.activate():
        assert all(abs(y) < 20 for _, y in pts)
        # and the points are collinear with slope 2
        r, _ = linreg(ctx40, pts)
        assert abs(r - 2) < 1e-30


def test_extrapolation_removes_power_corrections(ctx40):
    # with B2 eps^2 + B4 eps^4 pollution the raw constant is off by ~1e-2,
    # two elimination steps recover it to ~eps^6 accuracy
    samples = synth_samples(ctx40, 1, "1.5", "1.0", EPS_GRID,
                            corrections=((2, "0.8"), (4, "-0.5")))
    res = fit_scan(ctx40, "synthetic", samples, 1, "1.5")
    with ctx40.activate():
        A_true = gmpy2.exp(ctx40.mpf(1))
        raw = res.tableau[0][-1]
        assert abs(raw / A_true - 1) > 1e-3
        # the product of corrections leaves an eps^6 cross term
        assert abs(res.A_extrapolated / A_true - 1) < 1e-5
        assert len(res.tableau) == 3
        assert res.sensitivity is not None


def test_pairwise_slope_tendency(ctx40):
    # an eps^2 correction makes pairwise slopes drift toward r
    samples = synth_samples(ctx40, 1, "1.5", "1.0", EPS_GRID,
                            corrections=((2, "0.8"),))
    pw = pairwise_slopes(ctx40, reduce(ctx40, samples, 1))
    with ctx40.activate():
        errs = [abs(ri - ctx40.mpf("1.5")) for _, ri, _ in pw]
        assert errs[-1] < errs[0]


@pytest.mark.parametrize("name", ["table1.csv", "table2.csv"])
def test_reference_table_reproduction(ctx40, name):
    rows = load_table(name)
    cols = reproduce_table(ctx40, rows)
    with ctx40.activate():
        bound = ctx40.mpf("1e-5")
        for step, key in ((1, "extrap1"), (2, "extrap2")):
            for i, val in enumerate(cols[step]):
                printed = ctx40.mpf(rows[i][key])
                assert abs(val / printed - 1) < bound


def test_error_conditions(ctx40):
    with ctx40.activate():
        good = [(ctx40.mpf("0.1"), ctx40.mpf(-33), ctx40.mpf("1e-40"))]
        zero = [(ctx40.mpf("0.1"), ctx40.mpf(-33), ctx40.mpf(0))]
    with pytest.raises(NonpositiveValue):
        reduce(ctx40, zero, 1)
    with pytest.raises(DegenerateAbscissae):
        linreg(ctx40, reduce(ctx40, good, 1))
    with pytest.raises(DuplicateAbscissae):
        pairwise_slopes(ctx40, reduce(ctx40, good * 2, 1))
    with pytest.raises(IllConditioned):
        extrapolate(ctx40, ["0.1", "0.2"], ["1", "1"], steps=1)
    with pytest.raises(IllConditioned):
        extrapolate(ctx40, ["0.1"], ["1"], steps=2)


def test_window_keeps_smallest_eps(ctx40):
    samples = synth_samples(ctx40, 1, "1.5", "1.0", EPS_GRID,
                            corrections=((2, "0.8"),))
    full = fit_scan(ctx40, "synthetic", samples, 1, None)
    tail = fit_scan(ctx40, "synthetic", samples, 1, None, window=4)
    assert len(tail.pairwise) == 3
    with ctx40.activate():
        # the small-eps window sits closer to the asymptotic slope
        assert abs(tail.r - ctx40.mpf("1.5")) < abs(full.r - ctx40.mpf("1.5"))
