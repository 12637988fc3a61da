"""Complex-time singularity of the amended-pendulum separatrix.

On the zero-energy level of P = y^2/2 - (2/3) e^2 y^3 + cos x - 1 the
separatrix through (pi, y0) reaches its singularity at t* = i(-s*) with

    -s* = int_{y0}^{inf} dY / sqrt(-R(Y)),
    R(Y) = (1/2 - 2 e^2 Y/3)(Y - y0)(2 e^2/3)(Y - y1)(Y - y2) Y^2,

y0 < y1 < y2-ordering aside (y2 < 0 < y0 < y1): the radicand -R changes sign
at y1 and again at Yc = 3/(4 e^2), so the path splits into real / imaginary /
real pieces.  The square root is the principal branch continued analytically
through both sign changes (path indented into the upper half plane): each
simple-root crossing multiplies the continued root by -i, so the middle piece
contributes +i I2 and the far piece -I3, giving -s* = (I1 - I3) + i I2.  This
is the actual nearest singularity of the separatrix: Newton iteration on
1/y(t)^2 for the complexified flow lands on t* = i(-s*) = -I2 + i(I1 - I3).
The same value is computed through Y = 2/v as a cross-check, and the real
offset delta = Re(-s*) - pi/2 is fitted against (K |ln K|)^rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import gmpy2
import mpmath

from cpsplit.context import PrecisionContext
from cpsplit.errors import PipelineDomainError, RouteMismatch
from cpsplit.asymptotics import linreg


@dataclass(frozen=True)
class SingularityResult:
    eps: gmpy2.mpfr
    y0: gmpy2.mpfr
    y1: gmpy2.mpfr  # +inf at eps = 0
    y2: gmpy2.mpfr
    s_star: tuple   # (Re s*, Im s*)
    delta: gmpy2.mpfr           # Re(-s*) - pi/2
    im_minus_s: gmpy2.mpfr      # Im(-s*), reported separately
    route_gap: gmpy2.mpfr


def cubic_roots(ctx: PrecisionContext, eps):
    """Roots of P(pi, y) = y^2/2 - (2/3) e^2 y^3 - 2 in closed trig form."""
    with ctx.activate():
        eps = ctx.mpf(eps)
        arg = 4 * gmpy2.sqrt(ctx.mpf(3)) * eps ** 2
        if arg > 1:
            raise PipelineDomainError("4 sqrt(3) eps^2 = {} > 1".format(arg))
        s3 = gmpy2.sqrt(ctx.mpf(3))
        if eps == 0:
            roots = (ctx.mpf(2), gmpy2.mpfr("inf"), ctx.mpf(-2))
        else:
            ac = gmpy2.acos(arg)
            pi = ctx.pi()
            roots = (s3 / gmpy2.cos((pi - ac) / 3),
                     s3 / gmpy2.cos((pi + ac) / 3),
                     -s3 / gmpy2.cos(ac / 3))
        check = gmpy2.mpfr(10) ** (-ctx.digits + ctx.guard // 2)
        for y in roots:
            if not gmpy2.is_finite(y):
                continue
            resid = abs(y * y / 2 - 2 * eps ** 2 * y ** 3 / 3 - 2)
            if resid > check * max(abs(y) ** 3, 1):
                raise PipelineDomainError(
                    "trig root {} fails the cubic by {}".format(y, resid))
        return roots


def _mp(x):
    """gmpy2 mpfr -> mpmath mpf without precision loss."""
    if not isinstance(x, gmpy2.mpfr):
        # never gmpy2.mpfr(x) on an existing mpfr: that re-rounds at the
        # ambient context precision
        x = gmpy2.mpfr(x, 113)
    if not gmpy2.is_finite(x) or x == 0:
        return mpmath.mpf(float(x))
    digits, exp, _ = x.digits(10)
    neg = digits.startswith("-")
    if neg:
        digits = digits[1:]
    return mpmath.mpf(("-" if neg else "") + "0." + digits) * mpmath.mpf(10) ** exp


def s_star(ctx: PrecisionContext, eps, tol) -> SingularityResult:
    """-s* by both improper-integral routes; asserts their agreement."""
    with ctx.activate():
        eps_m = ctx.mpf(eps)
        tol_m = ctx.mpf(tol)
        if not 0 < 4 * gmpy2.sqrt(ctx.mpf(3)) * eps_m ** 2 < 1:
            raise PipelineDomainError("need 0 < 4 sqrt(3) eps^2 < 1")
    y0g, y1g, y2g = cubic_roots(ctx, eps_m)
    old_dps = mpmath.mp.dps
    mpmath.mp.dps = ctx.digits + ctx.guard
    try:
        e2 = _mp(eps_m) ** 2
        y0 = _mp(y0g)
        y1 = _mp(y1g)
        y2 = _mp(y2g)
        Yc = 3 / (4 * e2)

        def R(Y):
            return ((mpmath.mpf(1) / 2 - 2 * e2 * Y / 3) * (Y - y0)
                    * (2 * e2 / 3) * (Y - y1) * (Y - y2) * Y ** 2)

        def Q(v):
            return ((v - 8 * e2 / 3) * (v - 2 / y0)
                    * (v - 2 / y1) * (v - 2 / y2))

        quad = mpmath.quad
        sqrt = mpmath.sqrt
        c = 2 * e2 / 3

        # Every segment endpoint is a simple zero of the radicand; each half
        # is desingularized by Y = endpoint -+ w^2, dividing the vanishing
        # factor out analytically so tanh-sinh sees a smooth integrand.

        # route A, (y0, y1): real piece.  -R = (Y-y0)(y1-Y) h1(Y)
        h1 = lambda Y: (mpmath.mpf(1) / 2 - 2 * e2 * Y / 3) * c * (Y - y2) * Y ** 2
        half = sqrt((y1 - y0) / 2)
        I1 = (quad(lambda w: 2 / sqrt((y1 - y0 - w * w) * h1(y0 + w * w)),
                   [0, half])
              + quad(lambda w: 2 / sqrt((y1 - w * w - y0) * h1(y1 - w * w)),
                     [0, half]))

        # (y1, Yc): negative radicand, +i branch.  R = (Y-y1)(Yc-Y) h2(Y)
        h2 = lambda Y: c * c * (Y - y0) * (Y - y2) * Y ** 2
        half = sqrt((Yc - y1) / 2)
        I2 = (quad(lambda w: 2 / sqrt((Yc - y1 - w * w) * h2(y1 + w * w)),
                   [0, half])
              + quad(lambda w: 2 / sqrt((Yc - w * w - y1) * h2(Yc - w * w)),
                     [0, half]))

        # (Yc, inf): radicand positive again, but the branch continued through
        # two simple-root crossings returns real with a flipped sign, so this
        # piece enters as -I3.  Tail via Y = y0/u^2.
        h3 = lambda Y: c * c * (Y - y0) * (Y - y1) * (Y - y2) * Y ** 2
        I3 = (quad(lambda w: 2 / sqrt(h3(Yc + w * w)), [0, sqrt(Yc)])
              + quad(lambda u: 2 * y0 / (u ** 3 * sqrt(-R(y0 / (u * u)))),
                     [0, sqrt(y0 / (2 * Yc))]))
        routeA = I1 - I3 + 1j * I2

        # route B: v = 2/Y on (0, 2/y0); ordering 0 < vc < v1 < ve.  The
        # branch is anchored positive on the (v1, ve) piece adjoining the
        # turning point v = ve (Y = y0) and continued toward v = 0, so the
        # crossings at v1 and vc mirror route A: +J3, +i J2, -J1.
        vc = 8 * e2 / 3
        v1 = 2 / y1
        ve = 2 / y0
        v2n = 2 / y2

        # (0, vc) <-> (Yc, inf): -Q = (vc-v)(ve-v)(v1-v)(v-v2n)
        J1 = (quad(lambda v: v / sqrt(-Q(v)), [0, vc / 2])
              + quad(lambda w: 2 * (vc - w * w)
                     / sqrt((ve - vc + w * w) * (v1 - vc + w * w)
                            * (vc - w * w - v2n)),
                     [0, sqrt(vc / 2)]))

        # (vc, v1) <-> (y1, Yc): Q = (v-vc)(v1-v)(ve-v)(v-v2n), +i branch
        half = sqrt((v1 - vc) / 2)
        J2 = (quad(lambda w: 2 * (vc + w * w)
                   / sqrt((v1 - vc - w * w) * (ve - vc - w * w)
                          * (vc + w * w - v2n)),
                   [0, half])
              + quad(lambda w: 2 * (v1 - w * w)
                     / sqrt((v1 - w * w - vc) * (ve - v1 + w * w)
                            * (v1 - w * w - v2n)),
                     [0, half]))

        # (v1, ve) <-> (y0, y1): -Q = (v-v1)(ve-v)(v-vc)(v-v2n)
        half = sqrt((ve - v1) / 2)
        J3 = (quad(lambda w: 2 * (v1 + w * w)
                   / sqrt((ve - v1 - w * w) * (v1 + w * w - vc)
                          * (v1 + w * w - v2n)),
                   [0, half])
              + quad(lambda w: 2 * (ve - w * w)
                     / sqrt((ve - w * w - v1) * (ve - w * w - vc)
                            * (ve - w * w - v2n)),
                     [0, half]))
        routeB = J3 - J1 + 1j * J2

        gap = abs(routeA - routeB)
        minus_s = (routeA + routeB) / 2
        delta = minus_s.real - mpmath.pi / 2
        # negate while the working dps is still active: mpmath arithmetic
        # rounds to the *current* precision, and dps is restored below
        s_re, s_im = -minus_s.real, -minus_s.imag
        im_minus = minus_s.imag
    finally:
        mpmath.mp.dps = old_dps
    with ctx.activate():
        gap_m = ctx.mpf(mpmath.nstr(gap, 30))
        if gap_m > 100 * tol_m:
            raise RouteMismatch(
                "integral routes disagree by {} at eps = {}".format(gap_m, eps_m))
        fmt = lambda x: ctx.mpf(mpmath.nstr(x, ctx.digits + ctx.guard))
        return SingularityResult(
            eps_m, y0g, y1g, y2g,
            s_star=(fmt(s_re), fmt(s_im)),
            delta=fmt(delta),
            im_minus_s=fmt(im_minus),
            route_gap=gap_m)


def delta_fit(ctx: PrecisionContext, K_list, tol=None, rho_ref="2.051"):
    """Fit delta(K) = A (K |ln K|)^rho over decreasing K.

    Returns (rho, lnA, results, normalized) where normalized is the sequence
    delta / (K |ln K|)^rho_ref whose flattening signals the model law.
    """
    with ctx.activate():
        Ks = [ctx.mpf(K) for K in K_list]
        if tol is None:
            tol = gmpy2.mpfr(10) ** (-(ctx.digits // 2))
    results = []
    pts = []
    normalized = []
    with ctx.activate():
        rr = ctx.mpf(rho_ref)
    for K in Ks:
        with ctx.activate():
            eps = gmpy2.sqrt(gmpy2.sqrt(K / 3))
        res = s_star(ctx, eps, tol)
        results.append(res)
        with ctx.activate():
            x = gmpy2.log(K * abs(gmpy2.log(K)))
            pts.append((x, gmpy2.log(res.delta)))
            normalized.append(res.delta * gmpy2.exp(-rr * x))
    rho, lnA = linreg(ctx, pts)
    return rho, lnA, results, normalized
