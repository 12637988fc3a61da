"""Coordinate charts: synodic, Levi-Civita, Delaunay and resonant variables.

All maps are pointwise and exact (no averaging): Levi-Civita doubles the
configuration plane through x + iy = (u + iv)^2 with rescaled time
dt/dtau = 4(u^2+v^2); Delaunay elements come from the instantaneous two-body
problem of the synodic positions/momenta; resonant variables blow up the
neighbourhood of the circular 1:1 orbit, with the Poincare pair (q, p)
computed through the Laplace-Runge-Lenz components so that nothing degenerates
as the eccentricity vanishes.
"""

from __future__ import annotations

import gmpy2

from cpsplit.context import PrecisionContext
from cpsplit.errors import (
    ChartMismatch,
    CollisionPoint,
    HyperbolicState,
    NearParabolic,
    NegativeAction,
)
from cpsplit.models import State

# how many times the e ~ 0 clamp fired (must stay 0 in standard scans)
CLAMP_EVENTS = 0


def reset_clamp_counter():
    global CLAMP_EVENTS
    CLAMP_EVENTS = 0


def _require(z: State, chart: str):
    if z.chart != chart:
        raise ChartMismatch("expected a {} state, got {}".format(chart, z.chart))


def lc_to_synodic(ctx: PrecisionContext, z: State) -> State:
    """x = u^2 - v^2, y = 2uv; momenta through the chain rule and
    p_x = xdot - y, p_y = ydot + x."""
    _require(z, "levi_civita")
    with ctx.activate():
        u, v, up, vp = (ctx.mpf(c) for c in z.coords)
        s2 = u * u + v * v
        if s2 == 0:
            raise CollisionPoint("velocity transform undefined at u = v = 0")
        x = u * u - v * v
        y = 2 * u * v
        xdot = (u * up - v * vp) / (2 * s2)
        ydot = (v * up + u * vp) / (2 * s2)
        return State("synodic", (x, y, xdot - y, ydot + x))


def synodic_to_lc(ctx: PrecisionContext, z: State, branch=1) -> State:
    """Inverse of lc_to_synodic with sign(u) = branch; the square root is
    taken on whichever of r+x, r-x is larger, for conditioning."""
    _require(z, "synodic")
    with ctx.activate():
        x, y, px, py = (ctx.mpf(c) for c in z.coords)
        r = gmpy2.sqrt(x * x + y * y)
        if r == 0:
            raise CollisionPoint("chart undefined at r = 0")
        sgn = ctx.mpf(branch)
        if x >= 0:
            u = sgn * gmpy2.sqrt((r + x) / 2)
            v = y / (2 * u)
        else:
            vm = gmpy2.sqrt((r - x) / 2)
            if y == 0:
                u, v = ctx.mpf(0), vm
            else:
                v = sgn * gmpy2.sign(y) * vm
                u = y / (2 * v)
        xdot = px + y
        ydot = py - x
        return State("levi_civita", (u, v,
                                     2 * (u * xdot + v * ydot),
                                     2 * (-v * xdot + u * ydot)))


def _two_body_elements(ctx, z: State):
    """(L, G, e1, e2, e2sq) of the instantaneous Kepler problem; clamps a
    barely negative e^2 and counts the event."""
    global CLAMP_EVENTS
    with ctx.activate():
        x, y, px, py = (ctx.mpf(c) for c in z.coords)
        r = gmpy2.sqrt(x * x + y * y)
        if r == 0:
            raise CollisionPoint("elements undefined at r = 0")
        E = (px * px + py * py) / 2 - 1 / r
        if E >= 0:
            raise HyperbolicState("two-body energy {} >= 0".format(E))
        L = 1 / gmpy2.sqrt(-2 * E)
        G = x * py - y * px
        e1 = py * G - x / r
        e2 = -px * G - y / r
        e2sq = e1 * e1 + e2 * e2
        rad = 1 - (G / L) ** 2
        if rad < 0:
            if rad < -ctx.eps_guarded() * 10:
                raise ChartMismatch("|G| > L beyond tolerance: e^2 = {}".format(rad))
            CLAMP_EVENTS += 1
            e2sq = ctx.mpf(0)
            e1 = e2 = ctx.mpf(0)
        return L, G, e1, e2, e2sq


def synodic_to_delaunay(ctx: PrecisionContext, z: State) -> State:
    """Delaunay (l, g, L, G) of the osculating ellipse of (x, y, p_x, p_y)."""
    _require(z, "synodic")
    L, G, e1, e2, e2sq = _two_body_elements(ctx, z)
    with ctx.activate():
        x, y, px, py = (ctx.mpf(c) for c in z.coords)
        r = gmpy2.sqrt(x * x + y * y)
        e = gmpy2.sqrt(e2sq)
        if abs(e - 1) < ctx.mpf("1e-10"):
            raise NearParabolic("eccentricity {} too close to 1".format(e))
        g = gmpy2.atan2(e2, e1)
        # e cos E = 1 - r/a, e sin E = (r.p)/sqrt(a); E from atan2 keeps the
        # circular limit finite (both arguments vanish together with e)
        ecosE = 1 - r / (L * L)
        esinE = (x * px + y * py) / L
        Ecc = gmpy2.atan2(esinE, ecosE)
        l = Ecc - esinE
        return State("delaunay", (l, g, L, G))


def _solve_kepler(ctx, l, e):
    """E - e sin E = l by Newton from E = l (e < 1 keeps it contracting)."""
    with ctx.activate():
        E = ctx.mpf(l)
        tol = ctx.eps_work()
        scale = max(abs(l), ctx.mpf(1))
        for _ in range(200):
            f = E - e * gmpy2.sin(E) - l
            if abs(f) <= tol * scale:
                break
            step = f / (1 - e * gmpy2.cos(E))
            E -= step
            if abs(step) <= tol * scale:
                break
        return E


def delaunay_to_synodic(ctx: PrecisionContext, z: State) -> State:
    """Recompose position/momenta: Kepler equation, perifocal frame, rotation
    by the perihelion argument g."""
    _require(z, "delaunay")
    with ctx.activate():
        l, g, L, G = (ctx.mpf(c) for c in z.coords)
        a = L * L
        rad = 1 - (G / L) ** 2
        e = gmpy2.sqrt(rad) if rad > 0 else ctx.mpf(0)
        if G < 0:
            raise ChartMismatch("retrograde osculating orbit (G < 0)")
        E = _solve_kepler(ctx, l, e)
        cE, sE = gmpy2.cos(E), gmpy2.sin(E)
        b_over_a = gmpy2.sqrt(1 - e * e)
        X = a * (cE - e)
        Y = a * b_over_a * sE
        den = L * (1 - e * cE)
        VX = -sE / den
        VY = b_over_a * cE / den
        cg, sg = gmpy2.cos(g), gmpy2.sin(g)
        return State("synodic", (cg * X - sg * Y,
                                 sg * X + cg * Y,
                                 cg * VX - sg * VY,
                                 sg * VX + cg * VY))


def delaunay_to_resonant(ctx: PrecisionContext, z: State, eps) -> State:
    """x = l + g - pi (representative nearest pi), y = (L-1)/eps^2,
    q = sqrt(2I) cos g, p = sqrt(2I) sin g with I = (L-G)/eps^2."""
    _require(z, "delaunay")
    with ctx.activate():
        l, g, L, G = (ctx.mpf(c) for c in z.coords)
        eps = ctx.mpf(eps)
        I = (L - G) / eps ** 2
        if I < 0:
            if I < -ctx.eps_guarded():
                raise NegativeAction("L - G = {}".format(L - G))
            I = ctx.mpf(0)
        x = _wrap_near_pi(ctx, l + g - ctx.pi())
        y = (L - 1) / eps ** 2
        s2I = gmpy2.sqrt(2 * I)
        return State("resonant_qp", (x, y, s2I * gmpy2.cos(g), s2I * gmpy2.sin(g)))


def _wrap_near_pi(ctx, x):
    """Representative of x (mod 2pi) in (0, 2pi] -- section work lives at pi."""
    with ctx.activate():
        twopi = 2 * ctx.pi()
        x = gmpy2.fmod(x, twopi)
        if x <= 0:
            x += twopi
        return x


def resonant_to_delaunay(ctx: PrecisionContext, z: State, eps) -> State:
    _require(z, "resonant_qp")
    with ctx.activate():
        x, y, q, p = (ctx.mpf(c) for c in z.coords)
        eps = ctx.mpf(eps)
        L = 1 + eps ** 2 * y
        I = (q * q + p * p) / 2
        G = L - eps ** 2 * I
        g = gmpy2.atan2(p, q) if (q != 0 or p != 0) else ctx.mpf(0)
        l = x + ctx.pi() - g
        return State("delaunay", (l, g, L, G))


def synodic_to_resonant(ctx: PrecisionContext, z: State, eps) -> State:
    """Fused pipeline used on the Poincare section.

    (q, p) come straight from the Laplace-Runge-Lenz components,
    (q, p) = sqrt(2L/(1+G/L)) (e1, e2)/eps, so the exponentially small
    eccentricity of near-circular section states is never formed as L - G
    (which cancels catastrophically); the angle sum l + g feeds x.
    """
    _require(z, "synodic")
    L, G, e1, e2, e2sq = _two_body_elements(ctx, z)
    with ctx.activate():
        x, y, px, py = (ctx.mpf(c) for c in z.coords)
        r = gmpy2.sqrt(x * x + y * y)
        eps = ctx.mpf(eps)
        scale = gmpy2.sqrt(2 * L / (1 + G / L)) / eps
        q = scale * e1
        p = scale * e2
        g = gmpy2.atan2(e2, e1) if e2sq != 0 else ctx.mpf(0)
        ecosE = 1 - r / (L * L)
        esinE = (x * px + y * py) / L
        Ecc = gmpy2.atan2(esinE, ecosE)
        l = Ecc - esinE
        xr = _wrap_near_pi(ctx, l + g - ctx.pi())
        yr = (L - 1) / eps ** 2
        return State("resonant_qp", (xr, yr, q, p))


def resonant_to_synodic(ctx: PrecisionContext, z: State, eps) -> State:
    return delaunay_to_synodic(ctx, resonant_to_delaunay(ctx, z, eps))
