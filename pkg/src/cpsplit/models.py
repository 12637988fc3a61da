"""Catalog of the Hamiltonian systems under study.

Vector fields, first integrals, equilibria, linearizations and Hill-region
membership for:

* cp_synodic      -- rotating-frame CP hydrogen problem, coords (x, y, px, py)
* cp_levi_civita  -- its Levi-Civita regularization, coords (u, v, u', v'),
                     polynomial field parameterized by the Jacobi constant C
* toy             -- Toy CP family H = w(q^2+p^2)/2 + y^2/2 + cos x - 1
                     - (2a/3) e^2 y^3 + e^m (3q/2 - (q/2)cos 2x - (p/2)sin 2x)
* pendulum        -- its 2-dof-free (x, y) reduction y' = sin x with the same
                     amended term (a=1) or the standard pendulum (a=0)

The field expressions below are the canonical equations of the respective
Hamiltonians (for the toy family, derived from H once and frozen; the test
suite re-checks them against central differences of H).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import gmpy2

from cpsplit.context import PrecisionContext
from cpsplit.errors import (
    ChartMismatch,
    CollisionSingularity,
    CpsplitError,
    DegenerateCircle,
    NoRealUnstableDirection,
    NotAnEquilibrium,
)
from cpsplit.jets import Tape
from cpsplit.linalg import char_poly, null_vector


@dataclass(frozen=True)
class State:
    chart: str  # synodic | levi_civita | delaunay | resonant_angle_action | resonant_qp | pendulum2d
    coords: tuple

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)


@dataclass(frozen=True)
class Model:
    family: str  # cp_synodic | cp_levi_civita | toy | pendulum
    ctx: PrecisionContext
    K: Optional[gmpy2.mpfr] = None
    eps: Optional[gmpy2.mpfr] = None
    omega: Optional[gmpy2.mpfr] = None
    a: Optional[gmpy2.mpfr] = None
    m: Optional[gmpy2.mpfr] = None
    C: Optional[gmpy2.mpfr] = None
    dim: int = 4

    # --- constructors enforcing the eps/omega/K consistency ---

    @staticmethod
    def _coupling(ctx, K=None, eps=None):
        """(K, eps, omega) with eps = (K/3)^(1/4), omega = -1/(3 eps^2)."""
        with ctx.activate():
            if K is not None:
                K = ctx.mpf(K)
                eps = gmpy2.sqrt(gmpy2.sqrt(K / 3))
            else:
                eps = ctx.mpf(eps)
                K = 3 * eps ** 4
            omega = -1 / (3 * eps ** 2) if eps > 0 else None
        return K, eps, omega

    @classmethod
    def cp_synodic(cls, ctx, K):
        K, eps, omega = cls._coupling(ctx, K=K)
        return cls("cp_synodic", ctx, K=K, eps=eps, omega=omega, dim=4)

    @classmethod
    def cp_levi_civita(cls, ctx, K, C):
        K, eps, omega = cls._coupling(ctx, K=K)
        return cls("cp_levi_civita", ctx, K=K, eps=eps, omega=omega,
                   C=ctx.mpf(C), dim=4)

    @classmethod
    def toy(cls, ctx, a, m, K=None, eps=None):
        K, eps, omega = cls._coupling(ctx, K=K, eps=eps)
        return cls("toy", ctx, K=K, eps=eps, omega=omega,
                   a=ctx.mpf(a), m=ctx.mpf(m), dim=4)

    @classmethod
    def pendulum(cls, ctx, a=0, eps=0):
        with ctx.activate():
            eps = ctx.mpf(eps)
            K = 3 * eps ** 4
            omega = -1 / (3 * eps ** 2) if eps > 0 else None
        return cls("pendulum", ctx, K=K, eps=eps, omega=omega,
                   a=ctx.mpf(a), dim=2)

    @property
    def chart(self) -> str:
        return {
            "cp_synodic": "synodic",
            "cp_levi_civita": "levi_civita",
            "toy": "resonant_qp",
            "pendulum": "pendulum2d",
        }[self.family]

    def state(self, *coords) -> State:
        return State(self.chart, tuple(self.ctx.mpf(c) for c in coords))


@dataclass(frozen=True)
class Equilibrium:
    location: State
    energy: gmpy2.mpfr
    eigenvalues: tuple  # 4 (or 2) values as (re, im) mpfr pairs
    real_eigenpair: tuple  # (lambda > 0, unit eigenvector tuple)
    label: str  # L1 | L2 | Lminus | Lplus | pendulum_origin


def _require_chart(model, z):
    if z.chart != model.chart:
        raise ChartMismatch(
            "state chart {!r} does not match model {!r}".format(z.chart, model.family))


# --------------------------------------------------------------------------
# vector fields
# --------------------------------------------------------------------------

def eval_field(model: Model, z: State) -> State:
    """Right-hand side of the equations of motion, same chart as z."""
    _require_chart(model, z)
    ctx = model.ctx
    with ctx.activate():
        if model.family == "cp_synodic":
            x, y, px, py = z.coords
            r2 = x * x + y * y
            if r2 == 0:
                raise CollisionSingularity("synodic field at r = 0")
            ir3 = r2 ** ctx.mpf("-1.5")
            return State(z.chart, (px + y,
                                   py - x,
                                   py - x * ir3 - model.K,
                                   -px - y * ir3))
        if model.family == "cp_levi_civita":
            u, v, up, vp = z.coords
            s2 = u * u + v * v
            s4 = s2 * s2
            C = model.C
            K = model.K
            return State(z.chart, (up,
                                   vp,
                                   8 * s2 * vp - 4 * C * u - 16 * K * u ** 3 + 12 * s4 * u,
                                   -8 * s2 * up - 4 * C * v + 16 * K * v ** 3 + 12 * s4 * v))
        if model.family == "toy":
            x, y, q, p = z.coords
            eps, om, a, m = model.eps, model.omega, model.a, model.m
            em = gmpy2.exp(m * gmpy2.log(eps))
            sx = gmpy2.sin(x)
            s2x = gmpy2.sin(2 * x)
            c2x = gmpy2.cos(2 * x)
            return State(z.chart, (y - 2 * a * eps ** 2 * y * y,
                                   sx - em * (q * s2x - p * c2x),
                                   om * p - em / 2 * s2x,
                                   -om * q - em * (ctx.mpf("1.5") - c2x / 2)))
        if model.family == "pendulum":
            x, y = z.coords
            return State(z.chart, (y - 2 * model.a * model.eps ** 2 * y * y,
                                   gmpy2.sin(x)))
    raise CpsplitError("unknown family {!r}".format(model.family))


def build_tape(model: Model):
    """Jet tape of the field: returns (tape, state Vars, output nodes)."""
    ctx = model.ctx
    t = Tape(ctx)
    with ctx.activate():
        if model.family == "cp_synodic":
            x, y, px, py = (t.var() for _ in range(4))
            r2 = x * x + y * y
            ir3 = t.pow_const(r2, "-1.5")
            outs = (px + y,
                    py - x,
                    py - x * ir3 - t.const(model.K),
                    -px - y * ir3)
            return t, (x, y, px, py), outs
        if model.family == "cp_levi_civita":
            u, v, up, vp = (t.var() for _ in range(4))
            s2 = u * u + v * v
            s4 = s2 * s2
            C4 = model.ctx.mpf(4) * model.C
            K16 = model.ctx.mpf(16) * model.K
            outs = (up,
                    vp,
                    8 * (s2 * vp) - C4 * u - K16 * (u * u * u) + 12 * (s4 * u),
                    -8 * (s2 * up) - C4 * v + K16 * (v * v * v) + 12 * (s4 * v))
            return t, (u, v, up, vp), outs
        if model.family == "toy":
            x, y, q, p = (t.var() for _ in range(4))
            eps, om, a, m = model.eps, model.omega, model.a, model.m
            em = gmpy2.exp(m * gmpy2.log(eps))
            sn, cs = t.sincos(x)
            # double angle: sin 2x = 2 sin x cos x, cos 2x = cos^2 - sin^2
            s2x = 2 * (sn * cs)
            c2x = cs * cs - sn * sn
            outs = (y - (2 * a * eps ** 2) * (y * y),
                    sn - em * (q * s2x - p * c2x),
                    om * p - (em / 2) * s2x,
                    -om * q - em * (ctx.mpf("1.5") * t.const(1) - ctx.mpf("0.5") * c2x))
            return t, (x, y, q, p), outs
        if model.family == "pendulum":
            x, y = t.var(), t.var()
            sn, _ = t.sincos(x)
            outs = (y - (2 * model.a * model.eps ** 2) * (y * y), sn)
            return t, (x, y), outs
    raise CpsplitError("unknown family {!r}".format(model.family))


# --------------------------------------------------------------------------
# first integrals
# --------------------------------------------------------------------------

def first_integral(model: Model, z: State):
    """H (Hamiltonian charts), Levi-Civita integral residual, or pendulum energy.

    The Levi-Civita residual u'^2+v'^2 - 4s2^3 - 8 + 8K(u^2-v^2)s2 + 4C s2
    (s2 = u^2+v^2) is polynomial, conserved, and equal to 0 exactly on the
    C-energy level -- including at the collision set u=v=0, u'^2+v'^2=8.
    """
    _require_chart(model, z)
    ctx = model.ctx
    with ctx.activate():
        if model.family == "cp_synodic":
            x, y, px, py = z.coords
            r = gmpy2.sqrt(x * x + y * y)
            if r == 0:
                raise CollisionSingularity("synodic H at r = 0")
            return (px * px + py * py) / 2 - 1 / r - (x * py - y * px) + model.K * x
        if model.family == "cp_levi_civita":
            u, v, up, vp = z.coords
            s2 = u * u + v * v
            return (up * up + vp * vp - 4 * s2 ** 3 - 8
                    + 8 * model.K * (u * u - v * v) * s2 + 4 * model.C * s2)
        if model.family == "toy":
            x, y, q, p = z.coords
            eps, om, a, m = model.eps, model.omega, model.a, model.m
            em = gmpy2.exp(m * gmpy2.log(eps))
            return (om * (q * q + p * p) / 2 + y * y / 2 + gmpy2.cos(x) - 1
                    - 2 * a / 3 * eps ** 2 * y ** 3
                    + em * (3 * q / 2 - q / 2 * gmpy2.cos(2 * x)
                            - p / 2 * gmpy2.sin(2 * x)))
        if model.family == "pendulum":
            x, y = z.coords
            return (y * y / 2 - 2 * model.a / 3 * model.eps ** 2 * y ** 3
                    + gmpy2.cos(x) - 1)
    raise CpsplitError("unknown family {!r}".format(model.family))


def jacobi_constant(model: Model, z: State):
    """C = -2H for the synodic chart (the Jacobi first integral)."""
    return -2 * first_integral(model, z)


# --------------------------------------------------------------------------
# equilibria and linearization
# --------------------------------------------------------------------------

def _bisect_newton(ctx, f, df, lo, hi):
    """Root by bisection bracket followed by full-precision Newton."""
    with ctx.activate():
        lo = ctx.mpf(lo)
        hi = ctx.mpf(hi)
        flo = f(lo)
        if flo * f(hi) > 0:
            raise CpsplitError("root not bracketed")
        for _ in range(60):
            mid = (lo + hi) / 2
            fm = f(mid)
            if flo * fm <= 0:
                hi = mid
            else:
                lo = mid
                flo = fm
        x = (lo + hi) / 2
        tol = ctx.eps_work() * (abs(x) + 1)
        for _ in range(200):
            dx = f(x) / df(x)
            x = x - dx
            if abs(dx) < tol:
                break
        return x


def jacobian(model: Model, z: State):
    """DF(z) as row lists, columns by first-order jet transport."""
    ctx = model.ctx
    tape, svars, outs = build_tape(model)
    n = model.dim
    cols = []
    with ctx.activate():
        one = ctx.mpf(1)
        zero = ctx.mpf(0)
        for j in range(n):
            tape.reset()
            for i, var in enumerate(svars):
                var.reset(ctx.mpf(z.coords[i]))
                var.set_coeff(1, one if i == j else zero)
            tape.extend()
            tape.extend()
            cols.append([out.coeffs[1] for out in outs])
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _spectrum(model: Model, z: State):
    """Eigen-decomposition at an equilibrium with spectrum {+-lambda, +-i nu}.

    Returns (eigenvalues as (re, im) pairs, lambda, nu, unit unstable vector)
    with nu None for 2d models.  Uses the evenness of the characteristic
    polynomial (Hamiltonian/reversible structure).
    """
    ctx = model.ctx
    J = jacobian(model, z)
    n = model.dim
    coeffs = char_poly(ctx, J)
    with ctx.activate():
        scale = max(abs(c) for c in coeffs) + 1
        odd_tol = ctx.eps_guarded() * scale
        if n == 2:
            if abs(coeffs[1]) > odd_tol:
                raise CpsplitError("characteristic polynomial not even")
            c2 = coeffs[2]
            if not c2 < 0:
                raise NoRealUnstableDirection("no real positive eigenvalue")
            lam = gmpy2.sqrt(-c2)
            eigs = ((lam, ctx.mpf(0)), (-lam, ctx.mpf(0)))
            nu = None
        else:
            if abs(coeffs[1]) > odd_tol or abs(coeffs[3]) > odd_tol:
                raise CpsplitError("characteristic polynomial not even")
            b, c = coeffs[2], coeffs[4]
            disc = b * b - 4 * c
            zero = ctx.mpf(0)
            if disc > 0:
                root = gmpy2.sqrt(disc)
                mu_plus = (-b + root) / 2
                mu_minus = (-b - root) / 2
                if mu_plus > 0 > mu_minus:
                    # center-saddle: {+-lambda, +-i nu}
                    lam = gmpy2.sqrt(mu_plus)
                    nu = gmpy2.sqrt(-mu_minus)
                    eigs = ((lam, zero), (-lam, zero), (zero, nu), (zero, -nu))
                elif mu_plus < 0 and mu_minus < 0:
                    # center-center: two imaginary pairs, no unstable direction
                    nu1 = gmpy2.sqrt(-mu_plus)
                    nu2 = gmpy2.sqrt(-mu_minus)
                    eigs = ((zero, nu1), (zero, -nu1), (zero, nu2), (zero, -nu2))
                    return eigs, None, None, None
                else:
                    raise NoRealUnstableDirection("both biquadratic roots positive")
            else:
                # complex quartet +-alpha +- i beta from mu^2 = (-b +- i sqrt(-disc))/2
                re2 = -b / 2
                im2 = gmpy2.sqrt(-disc) / 2
                mod = gmpy2.sqrt(re2 * re2 + im2 * im2)
                alpha = gmpy2.sqrt((mod + re2) / 2)
                beta = gmpy2.sqrt((mod - re2) / 2)
                eigs = ((alpha, beta), (alpha, -beta), (-alpha, beta), (-alpha, -beta))
                return eigs, None, None, None
        # unstable eigenvector: kernel of (J - lambda I)
        A = [[J[i][j] - (lam if i == j else 0) for j in range(n)] for i in range(n)]
        v = null_vector(ctx, A)
        norm = gmpy2.sqrt(sum((c * c for c in v), ctx.mpf(0)))
        v = [c / norm for c in v]
        sign_floor = gmpy2.mpfr(10) ** (-ctx.digits // 2)
        for c in v:
            if abs(c) > sign_floor:
                if c < 0:
                    v = [-c2_ for c2_ in v]
                break
        return eigs, lam, nu, tuple(v)


def equilibria(model: Model):
    """All equilibrium points of the family, with spectral labels."""
    ctx = model.ctx
    if model.family in ("cp_synodic", "cp_levi_civita"):
        if model.K == 0:
            raise DegenerateCircle("K = 0: the whole circle r = 1 is critical")
        with ctx.activate():
            K = model.K
            # On the x-axis: x - x/|x|^3 - K = 0 gives the two cubics
            x_pos = _bisect_newton(
                ctx,
                lambda t: t ** 3 - K * t * t - 1,
                lambda t: 3 * t * t - 2 * K * t,
                ctx.mpf("0.5") * (1 + K), 2 * (1 + K))
            x_neg = _bisect_newton(
                ctx,
                lambda t: t ** 3 - K * t * t + 1,
                lambda t: 3 * t * t - 2 * K * t,
                -2 * (1 + K), ctx.mpf("-0.5") * (1 + K))
        syn = model if model.family == "cp_synodic" else Model.cp_synodic(ctx, model.K)
        cands = []
        for xs in (x_pos, x_neg):
            with ctx.activate():
                loc = State("synodic", (xs, ctx.mpf(0), ctx.mpf(0), xs))
            h = first_integral(syn, loc)
            cands.append((loc, h))
        # L1 = the center-saddle; it also sits on the lower energy level
        decomp = [(loc, h) + _spectrum(syn, loc) for (loc, h) in cands]
        saddles = [d for d in decomp if d[3] is not None]
        others = [d for d in decomp if d[3] is None]
        if len(saddles) != 1:
            raise NoRealUnstableDirection(
                "expected exactly one center-saddle, found {}".format(len(saddles)))
        if others and not saddles[0][1] < others[0][1]:
            raise CpsplitError("center-saddle is not the lower-energy equilibrium")
        out = []
        for (loc, h, eigs, lam, nu, v), label in zip(saddles + others, ("L1", "L2")):
            pair = (lam, v) if lam is not None else None
            out.append(Equilibrium(loc, h, eigs, pair, label))
        if model.family == "cp_levi_civita":
            return [lc_equilibrium(model, eq) for eq in out
                    if _matches_level(model, eq)]
        return out
    if model.family == "toy":
        with ctx.activate():
            q0 = 3 * model.eps ** (model.m + 2)
            pi = ctx.pi()
            zero = ctx.mpf(0)
            locs = [(State("resonant_qp", (zero, zero, q0, zero)), "Lminus"),
                    (State("resonant_qp", (2 * pi, zero, q0, zero)), "Lplus")]
        out = []
        for loc, label in locs:
            h = first_integral(model, loc)
            eigs, lam, nu, v = _spectrum(model, loc)
            out.append(Equilibrium(loc, h, eigs, (lam, v), label))
        return out
    if model.family == "pendulum":
        with ctx.activate():
            loc = State("pendulum2d", (ctx.mpf(0), ctx.mpf(0)))
        h = first_integral(model, loc)
        eigs, lam, nu, v = _spectrum(model, loc)
        return [Equilibrium(loc, h, eigs, (lam, v), "pendulum_origin")]
    raise CpsplitError("unknown family {!r}".format(model.family))


def _matches_level(lc_model: Model, syn_eq: Equilibrium) -> bool:
    with lc_model.ctx.activate():
        return abs(lc_model.C + 2 * syn_eq.energy) < lc_model.ctx.eps_guarded() * 10


def lc_equilibrium(lc_model: Model, syn_eq: Equilibrium) -> Equilibrium:
    """The Levi-Civita image (u, v, 0, 0) of a synodic axis equilibrium."""
    ctx = lc_model.ctx
    with ctx.activate():
        xs = syn_eq.location.coords[0]
        zero = ctx.mpf(0)
        if xs > 0:
            loc = State("levi_civita", (gmpy2.sqrt(xs), zero, zero, zero))
        else:
            loc = State("levi_civita", (zero, gmpy2.sqrt(-xs), zero, zero))
    h = first_integral(lc_model, loc)
    eigs, lam, nu, v = _spectrum(lc_model, loc)
    return Equilibrium(loc, h, eigs, (lam, v), syn_eq.label)


def linearize(model: Model, eq: Equilibrium):
    """Validated eigen-decomposition at eq: (eigenvalues, lambda, nu, v)."""
    ctx = model.ctx
    f = eval_field(model, eq.location)
    with ctx.activate():
        nrm = max(abs(c) for c in f.coords)
        if nrm > ctx.eps_guarded():
            raise NotAnEquilibrium("field norm {} at claimed equilibrium".format(nrm))
    return _spectrum(model, eq.location)


# --------------------------------------------------------------------------
# Hill regions and symmetries
# --------------------------------------------------------------------------

def hill_membership(model: Model, point, C):
    """('allowed'|'forbidden', Omega) for a configuration point (x, y)."""
    if model.family not in ("cp_synodic", "cp_levi_civita"):
        raise ChartMismatch("Hill regions are defined for the CP families")
    ctx = model.ctx
    with ctx.activate():
        x = ctx.mpf(point[0])
        y = ctx.mpf(point[1])
        r = gmpy2.sqrt(x * x + y * y)
        if r == 0:
            raise CollisionSingularity("Omega at r = 0")
        omega_eff = (x * x + y * y) / 2 + 1 / r - model.K * x
        C = ctx.mpf(C)
        return ("allowed" if 2 * omega_eff >= C else "forbidden"), omega_eff


def reversibility_map(model: Model, z: State) -> State:
    """The time-reversal symmetry R with R o flow_t o R = flow_{-t}."""
    _require_chart(model, z)
    ctx = model.ctx
    with ctx.activate():
        if model.family == "cp_synodic":
            x, y, px, py = z.coords
            return State(z.chart, (x, -y, -px, py))
        if model.family == "cp_levi_civita":
            u, v, up, vp = z.coords
            return State(z.chart, (u, -v, -up, vp))
        if model.family == "toy":
            x, y, q, p = z.coords
            return State(z.chart, (2 * ctx.pi() - x, y, q, -p))
        if model.family == "pendulum":
            x, y = z.coords
            return State(z.chart, (2 * ctx.pi() - x, y))
    raise CpsplitError("unknown family {!r}".format(model.family))
