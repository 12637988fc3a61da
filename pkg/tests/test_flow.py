import gmpy2
import pytest

from cpsplit.errors import NoCrossing
from cpsplit.flow import (
    SectionSpec,
    TapeSystem,
    default_order,
    integrate,
    integrate_system,
    integrate_to_section,
)
from cpsplit.jets import Tape
from cpsplit.models import Model, State, first_integral, reversibility_map


def pendulum_state(ctx, x, y):
    return State("pendulum2d", (ctx.mpf(x), ctx.mpf(y)))


def tol_of(ctx):
    with ctx.activate():
        return gmpy2.mpfr(10) ** (-(ctx.digits + ctx.guard // 2))


def test_exponential_oracle(ctx40):
    # z' = z from 1: the final value is e^t to working accuracy
    tape = Tape(ctx40)
    z = tape.var()
    system = TapeSystem(ctx40, tape, (z,), (z,))
    tol = tol_of(ctx40)
    with ctx40.activate():
        traj = integrate_system(system, (ctx40.mpf(1),), ctx40.mpf(2), tol)
        err = abs(traj.final[0] - gmpy2.exp(ctx40.mpf(2)))
        assert err < 100 * tol * gmpy2.exp(ctx40.mpf(2))


def test_energy_drift_pendulum(ctx40):
    model = Model.pendulum(ctx40, a=0, eps=0)
    z0 = pendulum_state(ctx40, "0.4", "1.3")
    tol = tol_of(ctx40)
    h0 = first_integral(model, z0)
    traj = integrate(model, z0, 20, tol)
    with ctx40.activate():
        h1 = first_integral(model, State("pendulum2d", traj.final))
        assert abs(h1 - h0) < 100 * tol


def test_energy_drift_cp(ctx40):
    model = Model.cp_synodic(ctx40, "1e-3")
    with ctx40.activate():
        z0 = State("synodic", (ctx40.mpf("-0.9"), ctx40.mpf("0.1"),
                               ctx40.mpf("0.05"), ctx40.mpf("-0.92")))
    tol = tol_of(ctx40)
    h0 = first_integral(model, z0)
    traj = integrate(model, z0, 10, tol)
    with ctx40.activate():
        h1 = first_integral(model, State("synodic", traj.final))
        assert abs(h1 - h0) < 100 * tol


def test_reversibility_shadowing(ctx40):
    # flow_{-t} = R flow_t R: going forward from the reflected endpoint
    # returns to the reflected start
    model = Model.pendulum(ctx40, a=1, eps="0.1")
    z0 = pendulum_state(ctx40, "0.7", "0.9")
    tol = tol_of(ctx40)
    T = 5
    w = integrate(model, z0, T, tol)
    zw = State("pendulum2d", w.final)
    back = integrate(model, reversibility_map(model, zw), T, tol)
    target = reversibility_map(model, z0)
    with ctx40.activate():
        err = max(abs(a - b) for a, b in zip(back.final, target.coords))
        assert err < 1000 * tol


def test_section_crossing_refined(ctx40):
    # rotational pendulum orbit must cross x = pi with y > 0
    model = Model.pendulum(ctx40, a=0, eps=0)
    z0 = pendulum_state(ctx40, 0, "2.1")
    tol = tol_of(ctx40)
    section = SectionSpec("pendulum_xpi")
    zs, T = integrate_to_section(model, z0, section, tol, 50)
    with ctx40.activate():
        assert abs(zs.coords[0] - ctx40.pi()) < 10 * tol
        assert zs.coords[1] > 0
        assert T > 0
        # energy is still conserved through the refined crossing
        assert abs(first_integral(model, zs)
                   - first_integral(model, z0)) < 100 * tol


def test_section_gate_rejects_wrong_side(ctx40):
    # the same orbit reaches x = -pi only backward; forward it never
    # crosses with y < 0, so the gated section times out
    model = Model.pendulum(ctx40, a=0, eps=0)
    z0 = pendulum_state(ctx40, 0, "2.1")
    tol = tol_of(ctx40)
    with pytest.raises(NoCrossing):
        integrate_to_section(model, z0, SectionSpec("pendulum_xmpi"), tol, 30)


def test_start_on_section_is_skipped(ctx40):
    # libration around the potential minimum at x = pi: starting exactly on
    # the section (moving upward) must count the next return, not t = 0
    model = Model.pendulum(ctx40, a=0, eps=0)
    z0 = pendulum_state(ctx40, ctx40.pi(), "0.5")
    tol = tol_of(ctx40)
    zs, T = integrate_to_section(model, z0, SectionSpec("pendulum_xpi"),
                                 tol, 50)
    with ctx40.activate():
        assert T > 1  # one full oscillation period later
        assert zs.coords[1] > 0


def test_default_order_clamps():
    from cpsplit.context import PrecisionContext

    ctx = PrecisionContext(digits=40)
    assert default_order(ctx, -5) == 20
    assert 20 <= default_order(ctx, -45) <= 40


def test_dense_steps_reconstruct_endpoint(ctx40):
    model = Model.pendulum(ctx40, a=0, eps=0)
    z0 = pendulum_state(ctx40, "0.4", "1.3")
    tol = tol_of(ctx40)
    traj = integrate(model, z0, 7, tol, dense=True)
    assert traj.steps
    last = traj.steps[-1]
    with ctx40.activate():
        vals = []
        for poly in last.polys:
            acc = gmpy2.mpfr(0)
            for c in reversed(poly):
                acc = acc * last.h + c
            vals.append(acc)
        err = max(abs(a - b) for a, b in zip(vals, traj.final))
        assert err < 10 * tol
