import gmpy2
import pytest

from cpsplit.errors import PipelineDomainError
from cpsplit.melnikov import (
    amended_z0,
    closed_A,
    melnikov_prediction,
    quadrature_A,
)
from cpsplit.models import Model


def tol_of(ctx):
    with ctx.activate():
        return gmpy2.mpfr(10) ** (-(ctx.digits + ctx.guard // 2))


@pytest.mark.parametrize("omega", ["-3", "-5", "-10"])
def test_quadrature_matches_closed_form(ctx40, omega):
    model = Model.pendulum(ctx40, a=0, eps=0)
    tol = tol_of(ctx40)
    res = quadrature_A(model, omega, "external", tol)
    with ctx40.activate():
        closed = closed_A(ctx40, omega)
        assert abs(res.value - closed) <= abs(closed) * ctx40.mpf("1e-25")
        assert abs(res.delta_p1 + res.value / 2) == 0


def test_quadrature_internal_branch(ctx40):
    model = Model.pendulum(ctx40, a=0, eps=0)
    tol = tol_of(ctx40)
    res = quadrature_A(model, "-4", "internal", tol)
    with ctx40.activate():
        closed = closed_A(ctx40, "-4", branch="internal")
        assert abs(res.value - closed) <= abs(closed) * ctx40.mpf("1e-25")


def test_closed_branch_ratio_is_exp_pi_omega(ctx40):
    # the two branches differ exactly by the factor e^{pi omega}
    with ctx40.activate():
        for omega in ("-3", "-7"):
            w = ctx40.mpf(omega)
            ratio = closed_A(ctx40, w, "internal") / closed_A(ctx40, w)
            expect = gmpy2.exp(gmpy2.const_pi() * w)
            assert abs(ratio - expect) < abs(expect) * ctx40.eps_guarded()


def test_s_scale_invariance(ctx40):
    # halving the local-segment endpoint moves weight between the series
    # tail and the quadrature leg without changing the total
    model = Model.pendulum(ctx40, a=0, eps=0)
    tol = tol_of(ctx40)
    r1 = quadrature_A(model, "-4", "external", tol)
    r2 = quadrature_A(model, "-4", "external", tol, s_scale="0.5")
    with ctx40.activate():
        assert abs(r1.value - r2.value) < abs(r1.value) * ctx40.mpf("1e-25")
        assert abs(r2.s_hat - r1.s_hat / 2) == 0
        assert r2.tail != r1.tail  # the split itself did move


def test_amended_pipeline_s_scale_invariance(ctx40):
    tol = tol_of(ctx40)
    r1 = amended_z0(ctx40, "0.2", tol)
    r2 = amended_z0(ctx40, "0.2", tol, s_scale="0.5")
    with ctx40.activate():
        assert abs(r1.value - r2.value) < abs(r1.value) * ctx40.mpf("1e-25")


def test_amended_below_unperturbed(ctx40):
    # the amended value carries a smaller power of |omega| than the closed
    # form, so the ratio lies in (0, 1) and shrinks as eps decreases
    tol = tol_of(ctx40)
    ratios = []
    for eps in ("0.2", "0.15"):
        res = amended_z0(ctx40, eps, tol)
        with ctx40.activate():
            closed = closed_A(ctx40, res.omega)
            ratios.append(abs(res.value / closed))
    assert 0 < ratios[0] < 1
    assert ratios[1] < ratios[0]


def test_prediction_closed_route(ctx40):
    with ctx40.activate():
        eps = ctx40.mpf("0.2")
        omega = -1 / (3 * eps ** 2)
        pred = melnikov_prediction(ctx40, eps, 4, 0)
        expect = -(eps ** 4) * closed_A(ctx40, omega) / 2
        assert abs(pred - expect) < abs(expect) * ctx40.eps_guarded()


def test_prediction_rejects_bad_a(ctx40):
    with pytest.raises(PipelineDomainError):
        melnikov_prediction(ctx40, "0.1", 2, 7)


def test_closed_A_requires_negative_omega(ctx40):
    with pytest.raises(PipelineDomainError):
        closed_A(ctx40, "2")


def test_amended_domain_guard(ctx40):
    with pytest.raises(PipelineDomainError):
        amended_z0(ctx40, "0.6", tol_of(ctx40))
