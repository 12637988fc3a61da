import gmpy2
import pytest

from cpsplit.errors import PipelineDomainError
from cpsplit.singularity import cubic_roots, delta_fit, s_star


def tol_of(ctx):
    with ctx.activate():
        return gmpy2.mpfr(10) ** (-(ctx.digits + ctx.guard // 2))


def test_cubic_roots_limits(ctx40):
    with ctx40.activate():
        y0, y1, y2 = cubic_roots(ctx40, 0)
        assert y0 == 2 and y2 == -2
        assert gmpy2.is_infinite(y1)
        # small eps: y0 ~ 2, y1 ~ 3/(4 eps^2), y2 ~ -2
        eps = ctx40.mpf("0.01")
        y0, y1, y2 = cubic_roots(ctx40, eps)
        assert abs(y0 - 2) < ctx40.mpf("0.01")
        assert abs(y2 + 2) < ctx40.mpf("0.01")
        assert abs(y1 * 4 * eps ** 2 / 3 - 1) < ctx40.mpf("0.01")
        assert y2 < 0 < y0 < y1


def test_cubic_roots_ordering_and_residual(ctx40):
    # the closed trig form is checked against the cubic internally; an
    # out-of-range eps is refused
    with pytest.raises(PipelineDomainError):
        cubic_roots(ctx40, "0.6")


@pytest.mark.parametrize("eps", ["0.02", "0.05", "0.1"])
def test_route_agreement(ctx40, eps):
    tol = tol_of(ctx40)
    res = s_star(ctx40, eps, tol)
    with ctx40.activate():
        assert res.route_gap <= 100 * tol


def test_exact_real_part_identity(ctx40):
    # Re(-s*) - pi/2 comes out of an exact cancellation between the two
    # incomplete-integral pieces, so delta is tiny compared to each piece
    tol = tol_of(ctx40)
    with ctx40.activate():
        eps = ctx40.mpf("0.05")
    res = s_star(ctx40, eps, tol)
    with ctx40.activate():
        re = res.s_star[0]
        assert abs(-re - ctx40.pi() / 2 - res.delta) <= 100 * tol
        assert res.delta > 0
        # delta = O(eps^2 ln eps): far below pi/2 itself
        assert res.delta < 10 * eps ** 2 * abs(gmpy2.log(eps))


def test_imaginary_part_quarter_ratio(ctx40):
    # Im(-s*) ~ (8 pi / 3) eps^2: halving eps divides it by ~4
    tol = tol_of(ctx40)
    with ctx40.activate():
        e1 = ctx40.mpf("0.04")
        e2 = e1 / 2
    r1 = s_star(ctx40, e1, tol)
    r2 = s_star(ctx40, e2, tol)
    with ctx40.activate():
        lead = 8 * ctx40.pi() / 3 * e1 ** 2
        assert abs(r1.im_minus_s / lead - 1) < ctx40.mpf("0.05")
        ratio = r1.im_minus_s / r2.im_minus_s
        assert abs(ratio - 4) < ctx40.mpf("0.2")


def test_delta_monotone_in_eps(ctx40):
    tol = tol_of(ctx40)
    deltas = []
    for eps in ("0.1", "0.05", "0.02"):
        deltas.append(s_star(ctx40, eps, tol).delta)
    with ctx40.activate():
        assert deltas[0] > deltas[1] > deltas[2] > 0


def test_delta_fit_runs(ctx40):
    Ks = ["1e-3", "5e-4", "2e-4", "1e-4"]
    rho, lnA, results, normalized = delta_fit(ctx40, Ks)
    assert len(results) == len(Ks) == len(normalized)
    with ctx40.activate():
        assert rho > 0
        assert all(n > 0 for n in normalized)
