"""Melnikov splitting predictions for the pendulum family.

closed_A gives the explicit A+-(omega) of the standard pendulum; quadrature_A
evaluates the Melnikov integral along any (possibly amended) separatrix by the
six-step numerical pipeline: parameterize the separatrix, validate its domain,
flow to x = +-pi recording T, sum the (-inf, -T] tail of z' analytically
term-by-term against the exponential series s = s0 e^t, then integrate the
z-equation from -T to 0.  The splitting prediction is Delta p1(0) = -A/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import gmpy2

from cpsplit.context import PrecisionContext
from cpsplit.errors import PipelineDomainError
from cpsplit.flow import SectionSpec, TapeSystem, integrate_system, integrate_to_section
from cpsplit.jets import Tape
from cpsplit.manifold import choose_domain, expand
from cpsplit.models import Model, equilibria
from cpsplit.series import TruncSeries


@dataclass(frozen=True)
class MelnikovResult:
    eps: gmpy2.mpfr
    omega: gmpy2.mpfr
    branch: str  # external | internal
    method: str  # closed_form | quadrature | amended_pipeline
    value: gmpy2.mpfr          # A(omega); Delta p1(0) = -A/2
    z0: Optional[gmpy2.mpfr] = None
    tail: Optional[gmpy2.mpfr] = None
    main: Optional[gmpy2.mpfr] = None
    T: Optional[gmpy2.mpfr] = None
    s0: Optional[gmpy2.mpfr] = None
    s_hat: Optional[gmpy2.mpfr] = None

    @property
    def delta_p1(self):
        return -self.value / 2


def closed_A(ctx: PrecisionContext, omega, branch="external"):
    """A+-(omega) = (16 pi/3) w^3 (1-2/w^2) e^(c pi w/2) / (1 - e^(2 pi w)),
    c = 1 (external) or 3 (internal); omega < 0."""
    if branch not in ("external", "internal"):
        raise ValueError("branch must be external or internal")
    c = 1 if branch == "external" else 3
    with ctx.activate():
        w = ctx.mpf(omega)
        if not w < 0:
            raise PipelineDomainError("closed_A requires omega < 0")
        pi = gmpy2.const_pi()
        return (16 * pi / 3 * w ** 3 * (1 - 2 / w ** 2)
                * gmpy2.exp(c * pi * w / 2) / (1 - gmpy2.exp(2 * pi * w)))


def _pipeline_z0(model: Model, omega, branch, tol, N, s_scale=1):
    """Steps 1-6 along the separatrix of the (possibly amended) pendulum.

    Returns (z(0), tail, main, T, s0, s_hat).  z(0) = int_{-inf}^{0} z' dt with
    z' = cos(2x + omega t) - cos(omega t).
    """
    ctx = model.ctx
    with ctx.activate():
        omega = ctx.mpf(omega)
        tol = ctx.mpf(tol)
    eq = equilibria(model)[0]
    lam, v = eq.real_eigenpair
    sigma = 1 if branch == "external" else -1
    section = SectionSpec("pendulum_xpi" if sigma > 0 else "pendulum_xmpi",
                          direction=0)

    # 1-2: parameterize and validate the local domain
    W = expand(model, eq, lam, v, N, sigma=sigma)
    s_hat = choose_domain(W, tol)
    if s_scale != 1:
        # shrinking s_hat keeps it admissible; T and s0 adjust, the value
        # tail + main must not (used by the invariance checks)
        with ctx.activate():
            s_hat = s_hat * ctx.mpf(s_scale)
        W.s_hat = s_hat
        W.residual_at_s_hat = W.residual(s_hat)

    # 3-4: globalize to x = +-pi; s0 is the section point's parameter
    zhat = W.state(s_hat)
    with ctx.activate():
        t_max = 200 * gmpy2.const_pi()
    zs, T = integrate_to_section(model, zhat, section, tol, t_max)
    with ctx.activate():
        s0 = s_hat * gmpy2.exp(lam * T)

    # 5: analytic tail of z' over (-inf, -T].  Using the energy relation
    # cos x = 1 - y^2/2 + (2a/3) e^2 y^3 on the separatrix,
    # z' = -2 y'^2 cos(wt) + y'(-2 + y^2 - (4a/3) e^2 y^3) sin(wt)
    # and y'(t) = lam s dy/ds as a series in s = s0 e^(lam t).
    with ctx.activate():
        ys = TruncSeries(ctx, [wk[1] for wk in W.coeffs], convert=False)
        ydot = TruncSeries(ctx, [k * c for k, c in enumerate(ys.coeffs)],
                           convert=False).scale(lam)
        pc = ydot.mul(ydot).scale(-2)
        poly = ys.mul(ys).add_const(-2)
        if model.a != 0:
            y3 = ys.mul(ys).mul(ys)
            poly = poly.sub(y3.scale(4 * model.a / 3 * model.eps ** 2))
        ps = ydot.mul(poly)
        cwT = gmpy2.cos(omega * T)
        swT = gmpy2.sin(omega * T)
        tail = gmpy2.mpfr(0)
        spow = gmpy2.mpfr(1)
        for k in range(N + 1):
            if k > 0:
                spow *= s_hat
            den = k * k + omega * omega
            tail += pc.coeffs[k] * spow * (k * cwT - omega * swT) / den
            tail += ps.coeffs[k] * spow * (-k * swT - omega * cwT) / den

    # 6: integrate (x, y, z, t) from -T to 0 resolving the cos(2x+wt) carrier
    tape = Tape(ctx)
    xv, yv, zv, tv = (tape.var() for _ in range(4))
    with ctx.activate():
        a2 = 2 * model.a * model.eps ** 2
        sn, cs = tape.sincos(xv)
        arg = 2 * xv + omega * tv
        s_arg, c_arg = tape.sincos(arg)
        s_wt, c_wt = tape.sincos(omega * tv)
        outs = (yv - a2 * (yv * yv),
                sn,
                c_arg - c_wt,
                tape.const(1))
    system = TapeSystem(ctx, tape, (xv, yv, zv, tv), outs)
    with ctx.activate():
        z_init = (zhat.coords[0], zhat.coords[1], tail, -T)
        max_step = 2 * gmpy2.const_pi() / (10 * abs(omega))
    traj = integrate_system(system, z_init, T, tol, max_step=max_step)
    z0 = traj.final[2]
    with ctx.activate():
        main = z0 - tail
    return z0, tail, main, T, s0, s_hat


def _default_order(ctx):
    return max(100, int(1.2 * ctx.digits) + 1)


def quadrature_A(model: Model, omega, branch, tol, N=None, s_scale=1) -> MelnikovResult:
    """A(omega) by the numerical pipeline: A = -2 z(0) (full line = twice the
    half line by the separatrix reversibility, x0(0) = +-pi)."""
    ctx = model.ctx
    if N is None:
        N = _default_order(ctx)
    z0, tail, main, T, s0, s_hat = _pipeline_z0(model, omega, branch, tol, N,
                                                s_scale=s_scale)
    with ctx.activate():
        value = -2 * z0
    return MelnikovResult(model.eps, ctx.mpf(omega), branch, "quadrature",
                          value, z0, tail, main, T, s0, s_hat)


def amended_z0(ctx: PrecisionContext, eps, tol, N=None, branch="external",
               s_scale=1) -> MelnikovResult:
    """z(0) for the amended pendulum (a=1) with omega = -1/(3 eps^2) tied."""
    with ctx.activate():
        eps = ctx.mpf(eps)
        if not 4 * gmpy2.sqrt(ctx.mpf(3)) * eps ** 2 < 1:
            raise PipelineDomainError("amended pipeline requires 4 sqrt(3) eps^2 < 1")
    model = Model.pendulum(ctx, a=1, eps=eps)
    if N is None:
        N = _default_order(ctx)
    z0, tail, main, T, s0, s_hat = _pipeline_z0(model, model.omega, branch, tol, N,
                                                s_scale=s_scale)
    with ctx.activate():
        value = -2 * z0
    return MelnikovResult(eps, model.omega, branch, "amended_pipeline",
                          value, z0, tail, main, T, s0, s_hat)


def melnikov_prediction(ctx: PrecisionContext, eps, m, a, branch="external", tol=None):
    """Delta p = -eps^m A/2 with A = -2 z(0) from the amended pipeline (a=1) or closed_A (a=0)."""
    if a not in (0, 1):
        raise PipelineDomainError("melnikov_prediction requires a in {0, 1}")
    with ctx.activate():
        eps = ctx.mpf(eps)
        omega = -1 / (3 * eps ** 2)
        if tol is None:
            tol = gmpy2.mpfr(10) ** (-(ctx.digits + ctx.guard // 2))
    if a == 0:
        A = closed_A(ctx, omega, branch)
    else:
        A = amended_z0(ctx, eps, tol, branch=branch).value
    with ctx.activate():
        em = gmpy2.exp(ctx.mpf(m) * gmpy2.log(eps))
        return -em * A / 2
