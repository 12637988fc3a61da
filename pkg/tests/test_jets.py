import gmpy2

from cpsplit.jets import Tape
from cpsplit.series import TruncSeries


def extend_times(tape, n, x=None):
    """Drive n orders; past order 1 the variable is padded with zeros (the
    identity jet x = c0 + s), mirroring how the expansion solver seeds it."""
    ctx = tape.ctx
    for k in range(n):
        if x is not None and k >= 2:
            with ctx.activate():
                x.set_coeff(k, ctx.mpf(0))
        tape.extend()


def test_polynomial_jet_matches_series(ctx40):
    # y = x^2 - 3x + 1 propagated through the tape equals series arithmetic
    tape = Tape(ctx40)
    x = tape.var()
    with ctx40.activate():
        y = x * x - tape.lift(3) * x + tape.lift(1)
        x.reset(ctx40.mpf("0.7"))
        x.set_coeff(1, ctx40.mpf(1))
    extend_times(tape, 8, x)
    xs = TruncSeries.variable(ctx40, "0.7", 7)
    ref = xs.mul(xs).sub(xs.scale(3)).add_const(1)
    with ctx40.activate():
        for k in range(8):
            assert abs(y.coeffs[k] - ref.coeffs[k]) < ctx40.eps_guarded()


def test_sincos_jet(ctx40):
    tape = Tape(ctx40)
    x = tape.var()
    sn, cs = tape.sincos(x)
    with ctx40.activate():
        x.reset(ctx40.mpf("0.4"))
        x.set_coeff(1, ctx40.mpf(1))
    extend_times(tape, 10, x)
    xs = TruncSeries.variable(ctx40, "0.4", 9)
    rs, rc = xs.sin_cos()
    with ctx40.activate():
        for k in range(10):
            assert abs(sn.coeffs[k] - rs.coeffs[k]) < ctx40.eps_guarded()
            assert abs(cs.coeffs[k] - rc.coeffs[k]) < ctx40.eps_guarded()


def test_pow_const_jet(ctx40):
    tape = Tape(ctx40)
    x = tape.var()
    y = tape.pow_const(x, "-0.5")
    with ctx40.activate():
        x.reset(ctx40.mpf(4))
        x.set_coeff(1, ctx40.mpf(1))
    extend_times(tape, 8, x)
    xs = TruncSeries.variable(ctx40, 4, 7)
    ref = xs.pow_const("-0.5")
    with ctx40.activate():
        for k in range(8):
            assert abs(y.coeffs[k] - ref.coeffs[k]) < ctx40.eps_guarded()


def test_redo_last_recomputes_top_order(ctx40):
    # the manifold solver writes the top input coefficient after seeing the
    # provisional output; redo_last must refresh exactly that order
    tape = Tape(ctx40)
    x = tape.var()
    y = x * x
    with ctx40.activate():
        x.reset(ctx40.mpf(1))
        x.set_coeff(1, ctx40.mpf(1))
    extend_times(tape, 2)
    with ctx40.activate():
        x.set_coeff(2, ctx40.mpf(0))
    tape.extend()  # orders 0..2 done, top input provisionally zero
    with ctx40.activate():
        before = gmpy2.mpfr(y.coeffs[2])
        x.set_coeff(2, ctx40.mpf(5))
    tape.redo_last()
    with ctx40.activate():
        # (1 + s + 5 s^2)^2 has order-2 coefficient 2*5 + 1 = 11
        assert before == 1
        assert abs(y.coeffs[2] - 11) < ctx40.eps_guarded()


def test_reset_clears_history(ctx40):
    tape = Tape(ctx40)
    x = tape.var()
    y = x * tape.lift(2)
    with ctx40.activate():
        x.reset(ctx40.mpf(3))
        x.set_coeff(1, ctx40.mpf(1))
    extend_times(tape, 4, x)
    tape.reset()
    with ctx40.activate():
        x.reset(ctx40.mpf(-1))
        x.set_coeff(1, ctx40.mpf(1))
    extend_times(tape, 2)
    with ctx40.activate():
        assert abs(y.coeffs[0] + 2) < ctx40.eps_guarded()
        assert abs(y.coeffs[1] - 2) < ctx40.eps_guarded()
