"""Taylor-method integration with adaptive order/step and section refinement.

Each step builds the solution jet through the model's tape (state coefficient
k+1 = field coefficient k / (k+1)), picks the stepsize from the standard
two-last-terms heuristic h = rho * min_k (tol/||c_k||)^(1/k), and advances by
Horner evaluation.  Poincare crossings are refined by Newton iteration on the
step's own dense polynomial -- no re-integration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import gmpy2

from cpsplit.errors import (
    CollisionApproach,
    NoCrossing,
    StepUnderflow,
)
from cpsplit.models import Model, State, build_tape

_RHO = 0.9  # stepsize safety factor


@dataclass(frozen=True)
class SectionSpec:
    """g(state) = coords[index] - offset; crossing requires the gate condition
    and, if direction is nonzero, sign(dg/dt) = direction at the crossing."""

    kind: str  # synodic_y0 | lc_v0 | toy_xpi | toy_xmpi | pendulum_xpi | pendulum_xmpi
    direction: int = 0

    def index_offset(self, ctx):
        # under the activated context: arithmetic on constants must not
        # round through the ambient (caller) precision
        with ctx.activate():
            if self.kind in ("synodic_y0", "lc_v0"):
                return 1, ctx.mpf(0)
            if self.kind in ("toy_xpi", "pendulum_xpi"):
                return 0, ctx.pi()
            if self.kind in ("toy_xmpi", "pendulum_xmpi"):
                return 0, -ctx.pi()
        raise ValueError("unknown section kind {!r}".format(self.kind))

    def gate(self, coords):
        # evaluated under an activated context
        if self.kind in ("synodic_y0", "lc_v0"):
            return coords[0] > 0
        if self.kind in ("toy_xpi", "pendulum_xpi"):
            return coords[1] > 0
        if self.kind in ("toy_xmpi", "pendulum_xmpi"):
            return coords[1] < 0
        raise ValueError(self.kind)


@dataclass(frozen=True)
class StepRecord:
    t0: gmpy2.mpfr
    h: gmpy2.mpfr
    polys: tuple  # per-component coefficient tuples in step-local time


@dataclass
class Trajectory:
    model: Optional[Model]
    initial: tuple
    final: tuple
    t_final: gmpy2.mpfr
    steps: list  # StepRecord (empty unless dense)
    n_steps: int
    max_order: int


class TapeSystem:
    """A tape-driven ODE z' = F(z); melnikov builds non-model instances."""

    def __init__(self, ctx, tape, svars, outs):
        self.ctx = ctx
        self.tape = tape
        self.svars = svars
        self.outs = outs

    @classmethod
    def from_model(cls, model: Model):
        tape, svars, outs = build_tape(model)
        return cls(model.ctx, tape, svars, outs)

    def step_polys(self, coords, order):
        """Taylor coefficients (0..order) of the solution from ``coords``."""
        ctx = self.ctx
        self.tape.reset()
        with ctx.activate():
            for var, c in zip(self.svars, coords):
                var.reset(gmpy2.mpfr(c))
            for k in range(order):
                self.tape.extend()
                kk = gmpy2.mpfr(k + 1)
                for var, out in zip(self.svars, self.outs):
                    var.set_coeff(k + 1, out.coeffs[k] / kk)
            return [list(var.coeffs) for var in self.svars]


def default_order(ctx, tol_exp10: float) -> int:
    """Order ~ -ln(tol)/2 clipped to [20, digits]."""
    p = int(math.ceil(tol_exp10 * math.log(10) / 2))
    return max(20, min(p, ctx.digits))


def _horner(coeffs, s):
    acc = gmpy2.mpfr(0)
    for c in reversed(coeffs):
        acc = acc * s + c
    return acc


def _propose_step(ctx, polys, order, tol):
    """rho * min over the last two orders of (tol/||c_k||_inf)^(1/k)."""
    with ctx.activate():
        h = None
        for k in (order - 1, order):
            nk = max(abs(p[k]) for p in polys)
            if nk == 0:
                continue
            hk = gmpy2.exp(gmpy2.log(tol / nk) / k)
            h = hk if h is None or hk < h else h
        if h is None:
            h = ctx.mpf(1)
        return _RHO * h


class _Stepper:
    """Shared stepping loop for plain integration and section hunting."""

    def __init__(self, system: TapeSystem, z0_coords, tol, *,
                 order=None, max_step=None, collision_radius=None):
        ctx = system.ctx
        self.system = system
        self.ctx = ctx
        with ctx.activate():
            self.tol = ctx.mpf(tol)
            self.coords = [gmpy2.mpfr(c) for c in z0_coords]
            self.t = ctx.mpf(0)
            tol_exp10 = -float(gmpy2.log10(self.tol))
            self.order = order or default_order(ctx, tol_exp10)
            self.max_step = None if max_step is None else ctx.mpf(max_step)
            self.h_min = gmpy2.mpfr(10) ** (-ctx.digits)
            self.collision_radius = collision_radius
        self.n_steps = 0
        self.last_polys = None
        self.last_h = None

    def advance(self, t_cap):
        """One accepted step, clipped so t never exceeds t_cap; returns h."""
        ctx = self.ctx
        polys = self.system.step_polys(self.coords, self.order)
        with ctx.activate():
            h = _propose_step(ctx, polys, self.order, self.tol)
            if self.max_step is not None and h > self.max_step:
                h = self.max_step
            remaining = t_cap - self.t
            if h > remaining:
                h = remaining
            if h < self.h_min and h < remaining:
                raise StepUnderflow("stepsize {} below 10^-digits".format(h))
            self.coords = [_horner(p, h) for p in polys]
            self.t += h
            if self.collision_radius is not None:
                r2 = self.coords[0] ** 2 + self.coords[1] ** 2
                if r2 < self.collision_radius ** 2:
                    raise CollisionApproach(
                        "r = {} in the synodic chart".format(gmpy2.sqrt(r2)))
        self.n_steps += 1
        self.last_polys = polys
        self.last_h = h
        return h


def integrate_system(system: TapeSystem, z0_coords, t_end, tol, *,
                     dense=False, order=None, max_step=None,
                     collision_radius=None, model=None, initial=None):
    """Integrate z' = F(z) from 0 to t_end (> 0) at local tolerance tol."""
    ctx = system.ctx
    st = _Stepper(system, z0_coords, tol, order=order, max_step=max_step,
                  collision_radius=collision_radius)
    with ctx.activate():
        t_end = ctx.mpf(t_end)
    steps = []
    while True:
        with ctx.activate():
            if st.t >= t_end:
                break
        t0 = st.t
        st.advance(t_end)
        if dense:
            steps.append(StepRecord(t0, st.last_h,
                                    tuple(tuple(p) for p in st.last_polys)))
    return Trajectory(model, tuple(z0_coords), tuple(st.coords), st.t,
                      steps, st.n_steps, st.order)


def integrate(model: Model, z0: State, t_end, tol, *, dense=False,
              order=None, max_step=None, collision_radius=None) -> Trajectory:
    system = TapeSystem.from_model(model)
    cr = collision_radius
    if model.family == "cp_synodic" and cr is None:
        cr = 0.05
    return integrate_system(system, z0.coords, t_end, tol, dense=dense,
                            order=order, max_step=max_step,
                            collision_radius=cr, model=model)


def _refine_crossing(ctx, polys, idx, offset, h, tol):
    """Newton (with bisection fallback) for poly_idx(tau) = offset on [0, h]."""
    g_poly = polys[idx]
    with ctx.activate():
        dg = [(k + 1) * g_poly[k + 1] for k in range(len(g_poly) - 1)]
        lo = ctx.mpf(0)
        hi = h
        glo = _horner(g_poly, lo) - offset
        ghi = _horner(g_poly, hi) - offset
        tau = lo + (hi - lo) * glo / (glo - ghi)
        target = 10 * tol
        for _ in range(300):
            g = _horner(g_poly, tau) - offset
            if abs(g) <= target:
                break
            # keep the bracket alive for the fallback
            if (g < 0) == (glo < 0):
                lo, glo = tau, g
            else:
                hi, ghi = tau, g
            d = _horner(dg, tau)
            if d != 0:
                step = g / d
                nxt = tau - step
            else:
                nxt = (lo + hi) / 2
            if not (lo <= nxt <= hi):
                nxt = (lo + hi) / 2
            tau = nxt
        return tau


def integrate_to_section(model_or_system, z0, section: SectionSpec, tol,
                         t_max, *, order=None, max_step=None,
                         collision_radius=None):
    """First matching crossing: returns (State-or-coords on section, time T).

    Accepts a Model plus State, or a TapeSystem plus coordinate tuple (the
    latter is used by the Melnikov pipeline).  A start exactly on the section
    (or on it with the wrong direction) is skipped: only strict sign changes
    of g after leaving the start count.
    """
    if isinstance(model_or_system, Model):
        model = model_or_system
        system = TapeSystem.from_model(model)
        coords0 = z0.coords
        chart = z0.chart
        if model.family == "cp_synodic" and collision_radius is None:
            collision_radius = 0.05
    else:
        model = None
        system = model_or_system
        coords0 = tuple(z0)
        chart = None
    ctx = system.ctx
    idx, offset = section.index_offset(ctx)
    st = _Stepper(system, coords0, tol, order=order, max_step=max_step,
                  collision_radius=collision_radius)
    with ctx.activate():
        t_max = ctx.mpf(t_max)
        g_prev = st.coords[idx] - offset
    while True:
        with ctx.activate():
            if st.t >= t_max:
                raise NoCrossing("no section crossing before t_max = {}".format(t_max))
        st.advance(t_max)
        with ctx.activate():
            g_now = st.coords[idx] - offset
            crossed = (g_prev < 0 < g_now) or (g_now < 0 < g_prev)
        if crossed:
            tau = _refine_crossing(ctx, st.last_polys, idx, offset, st.last_h, st.tol)
            with ctx.activate():
                coords = tuple(_horner(p, tau) for p in st.last_polys)
                dg = _horner([(k + 1) * st.last_polys[idx][k + 1]
                              for k in range(len(st.last_polys[idx]) - 1)], tau)
                ok = section.gate(coords)
                if section.direction and gmpy2.sign(dg) != section.direction:
                    ok = False
                T = st.t - st.last_h + tau
            if ok:
                if chart is not None:
                    return State(chart, coords), T
                return coords, T
        g_prev = g_now
