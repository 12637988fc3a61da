"""Parameterization method for 1D invariant manifolds of saddle points.

W(s) = z* + sum_k w_k s^k with internal dynamics exactly linear, f(s) = lambda*s
(normal-form style).  Order k solves the cohomological equation
(DF(z*) - k lambda Id) w_k = -[F(W_{<k})]_k, the right-hand side obtained by
jet composition of the field through the tape with w_k provisionally zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import gmpy2

from cpsplit.errors import DomainCollapse, ResonantOrder
from cpsplit.flow import SectionSpec, integrate_to_section
from cpsplit.linalg import lu_solve
from cpsplit.models import Equilibrium, Model, State, build_tape, eval_field, jacobian


@dataclass
class ManifoldExpansion:
    model: Model
    equilibrium: Equilibrium
    lam: gmpy2.mpfr
    v: tuple
    sigma: int
    order: int
    coeffs: list  # w_0 .. w_N as coordinate tuples
    s_hat: Optional[gmpy2.mpfr] = None
    residual_at_s_hat: Optional[gmpy2.mpfr] = None

    def eval(self, s):
        """W(s) by vector Horner."""
        ctx = self.model.ctx
        with ctx.activate():
            s = ctx.mpf(s)
            acc = [gmpy2.mpfr(0)] * len(self.v)
            for wk in reversed(self.coeffs):
                acc = [a * s + w for a, w in zip(acc, wk)]
            return tuple(acc)

    def eval_deriv(self, s):
        """W'(s)."""
        ctx = self.model.ctx
        with ctx.activate():
            s = ctx.mpf(s)
            acc = [gmpy2.mpfr(0)] * len(self.v)
            for k in range(self.order, 0, -1):
                wk = self.coeffs[k]
                acc = [a * s + k * w for a, w in zip(acc, wk)]
            return tuple(acc)

    def state(self, s) -> State:
        return State(self.model.chart, self.eval(s))

    def residual(self, s):
        """inf-norm of F(W(s)) - lambda s W'(s) (the invariance defect)."""
        ctx = self.model.ctx
        w = self.eval(s)
        f = eval_field(self.model, State(self.model.chart, w))
        dw = self.eval_deriv(s)
        with ctx.activate():
            s = ctx.mpf(s)
            return max(abs(fc - self.lam * s * dc) for fc, dc in zip(f.coords, dw))


def expand(model: Model, eq: Equilibrium, lam, v, N, sigma=1) -> ManifoldExpansion:
    """Order-N expansion of the manifold tangent to sigma*v at eq."""
    ctx = model.ctx
    tape, svars, outs = build_tape(model)
    DF = jacobian(model, eq.location)
    n = model.dim
    with ctx.activate():
        lam = ctx.mpf(lam)
        w1 = [ctx.mpf(sigma) * ctx.mpf(c) for c in v]
        coeffs = [tuple(ctx.mpf(c) for c in eq.location.coords), tuple(w1)]
        tape.reset()
        for var, c0, c1 in zip(svars, coeffs[0], coeffs[1]):
            var.reset(c0)
            var.set_coeff(1, c1)
    tape.extend()
    tape.extend()
    for k in range(2, N + 1):
        with ctx.activate():
            zero = gmpy2.mpfr(0)
            for var in svars:
                var.set_coeff(k, zero)
        tape.extend()
        with ctx.activate():
            Ek = [out.coeffs[k] for out in outs]
            klam = k * lam
            A = [[DF[i][j] - (klam if i == j else 0) for j in range(n)]
                 for i in range(n)]
            rhs = [-e for e in Ek]
        try:
            wk = lu_solve(ctx, A, rhs)
        except Exception as exc:
            # k*lam on the spectrum of DF makes the order-k solve singular;
            # cannot happen for spectra {+-lam, +-i nu} but guard anyway
            raise ResonantOrder("order {} solve failed".format(k)) from exc
        with ctx.activate():
            for var, c in zip(svars, wk):
                var.set_coeff(k, c)
        tape.redo_last()
        coeffs.append(tuple(wk))
    return ManifoldExpansion(model, eq, lam, tuple(v), sigma, N, coeffs)


def choose_domain(W: ManifoldExpansion, tol):
    """Largest s_hat on a geometric grid with the two-term tail estimate and
    the measured invariance residual both below tolerance; stores it in W."""
    ctx = W.model.ctx
    ctxa = ctx.activate

    def admissible(s):
        with ctxa():
            tail = nm1 * s ** (W.order - 1) + nm * s ** W.order
            if not tail <= tol:
                return False
        return W.residual(s) <= 10 * tol

    with ctxa():
        tol = ctx.mpf(tol)
        floor = gmpy2.mpfr(10) ** (-ctx.digits // 2)
        ratio = gmpy2.sqrt(gmpy2.sqrt(ctx.mpf(2)))  # 2^(1/4) grid
        s = ctx.mpf(1)
        nm1 = max(abs(c) for c in W.coeffs[W.order - 1])
        nm = max(abs(c) for c in W.coeffs[W.order])
        if nm1 == 0 and nm == 0:
            # symmetric expansions can zero a top coefficient; use earlier ones
            for k in range(W.order - 2, 0, -1):
                nm1 = max(abs(c) for c in W.coeffs[k])
                if nm1 != 0:
                    break
    if admissible(s):
        # walk up the grid to the largest admissible point
        for _ in range(4 * ctx.digits + 64):
            with ctxa():
                up = s * ratio
            if not admissible(up):
                break
            s = up
    else:
        while not admissible(s):
            with ctxa():
                s = s / ratio
                if s < floor:
                    raise DomainCollapse(
                        "no admissible s_hat above 10^(-digits/2); raise N")
    W.s_hat = s
    W.residual_at_s_hat = W.residual(s)
    return s


def globalize(W: ManifoldExpansion, section: SectionSpec, tol, *, t_max=None,
              max_step=None, collision_radius=None):
    """Flow W(s_hat) to the section: (crossing State, time T, s0 = s_hat e^(lam T))."""
    ctx = W.model.ctx
    if W.s_hat is None:
        raise DomainCollapse("choose_domain must validate s_hat before globalize")
    z0 = W.state(W.s_hat)
    if t_max is None:
        with ctx.activate():
            # transit time scales like 1/lambda near weak saddles
            t_max = 200 * gmpy2.const_pi() / min(W.lam, gmpy2.mpfr(1))
    zs, T = integrate_to_section(W.model, z0, section, tol, t_max,
                                 max_step=max_step,
                                 collision_radius=collision_radius)
    with ctx.activate():
        s0 = W.s_hat * gmpy2.exp(W.lam * T)
    return zs, T, s0
