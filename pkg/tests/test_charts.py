import gmpy2
import pytest

from cpsplit import charts
from cpsplit.context import PrecisionContext
from cpsplit.errors import ChartMismatch, CollisionPoint, HyperbolicState
from cpsplit.models import State


def coord_err(ctx, z1, z2):
    with ctx.activate():
        return max(abs(a - b) for a, b in zip(z1.coords, z2.coords))


def random_elliptic_state(ctx, rng):
    """A synodic state of a clearly elliptic osculating orbit."""
    with ctx.activate():
        r = ctx.mpf(rng.uniform(0.7, 1.3))
        th = ctx.mpf(rng.uniform(0, 6.0))
        x = r * gmpy2.cos(th)
        y = r * gmpy2.sin(th)
        # near-circular prograde velocity plus a small perturbation
        vc = 1 / gmpy2.sqrt(r)
        px = -vc * gmpy2.sin(th) + ctx.mpf(rng.uniform(-0.05, 0.05))
        py = vc * gmpy2.cos(th) + ctx.mpf(rng.uniform(-0.05, 0.05))
        return State("synodic", (x, y, px, py))


def test_lc_round_trip(ctx40, rng):
    bound = ctx40.eps_guarded()
    for _ in range(10):
        z = random_elliptic_state(ctx40, rng)
        for branch in (1, -1):
            w = charts.synodic_to_lc(ctx40, z, branch=branch)
            back = charts.lc_to_synodic(ctx40, w)
            assert coord_err(ctx40, z, back) < bound


def test_lc_duplication(ctx40, rng):
    # (u, v, u', v') and its negative are the same synodic state
    z = random_elliptic_state(ctx40, rng)
    w = charts.synodic_to_lc(ctx40, z)
    with ctx40.activate():
        wneg = State("levi_civita", tuple(-c for c in w.coords))
    assert coord_err(ctx40, charts.lc_to_synodic(ctx40, w),
                     charts.lc_to_synodic(ctx40, wneg)) < ctx40.eps_guarded()


def test_delaunay_round_trip(ctx40, rng):
    bound = ctx40.eps_guarded()
    for _ in range(10):
        z = random_elliptic_state(ctx40, rng)
        d = charts.synodic_to_delaunay(ctx40, z)
        back = charts.delaunay_to_synodic(ctx40, d)
        assert coord_err(ctx40, z, back) < bound


def test_resonant_round_trip(ctx40, rng):
    bound = ctx40.eps_guarded()
    with ctx40.activate():
        eps = ctx40.mpf("0.1")
    for _ in range(10):
        z = random_elliptic_state(ctx40, rng)
        r = charts.synodic_to_resonant(ctx40, z, eps)
        back = charts.resonant_to_synodic(ctx40, r, eps)
        assert coord_err(ctx40, z, back) < bound


def test_resonant_matches_delaunay_composition(ctx40, rng):
    # the fused anti-cancellation pipeline equals the two-step route
    with ctx40.activate():
        eps = ctx40.mpf("0.1")
    for _ in range(5):
        z = random_elliptic_state(ctx40, rng)
        fused = charts.synodic_to_resonant(ctx40, z, eps)
        two_step = charts.delaunay_to_resonant(
            ctx40, charts.synodic_to_delaunay(ctx40, z), eps)
        assert coord_err(ctx40, fused, two_step) < ctx40.mpf("1e-30")


def test_near_circular_no_cancellation():
    # at eccentricity ~ 1e-50 the fused (q, p) keeps ~full precision while
    # the L - G route would lose half the digits
    ctx = PrecisionContext(digits=120)
    with ctx.activate():
        e = ctx.mpf("1e-50")
        # perihelion of an orbit with a = 1, argument g = 0
        r = 1 - e
        x, y = r, ctx.mpf(0)
        v = gmpy2.sqrt((1 + e) / (1 - e))
        z = State("synodic", (x, y, ctx.mpf(0), v))
        eps = ctx.mpf("0.1")
        res = charts.synodic_to_resonant(ctx, z, eps)
        q, p = res.coords[2], res.coords[3]
        # q = sqrt(2L/(1+G/L)) e1 / eps with e1 = e here
        L = 1 / gmpy2.sqrt(2 / r - v * v)
        G = r * v
        expect = gmpy2.sqrt(2 * L / (1 + G / L)) * e / eps
        assert abs(p) < ctx.mpf("1e-140")
        assert abs(q - expect) < abs(expect) * ctx.mpf("1e-60")


def test_clamp_counter_stays_zero(ctx40, rng):
    charts.reset_clamp_counter()
    for _ in range(10):
        z = random_elliptic_state(ctx40, rng)
        charts.synodic_to_resonant(ctx40, z, "0.1")
    assert charts.CLAMP_EVENTS == 0


def test_collision_rejected(ctx40):
    with ctx40.activate():
        z = State("synodic", (ctx40.mpf(0),) * 4)
    with pytest.raises(CollisionPoint):
        charts.synodic_to_delaunay(ctx40, z)


def test_hyperbolic_rejected(ctx40):
    with ctx40.activate():
        z = State("synodic", (ctx40.mpf(1), ctx40.mpf(0),
                              ctx40.mpf(0), ctx40.mpf(3)))
    with pytest.raises(HyperbolicState):
        charts.synodic_to_delaunay(ctx40, z)


def test_chart_mismatch(ctx40):
    with ctx40.activate():
        z = State("synodic", (ctx40.mpf(1),) * 4)
    with pytest.raises(ChartMismatch):
        charts.lc_to_synodic(ctx40, z)
