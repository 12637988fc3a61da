"""Experiment drivers measuring the splitting of the L1 manifolds.

Each driver produces SplitSample rows: the CP splitting Delta xdot = 2 xdot^u
measured on the synodic section y = 0 (computed in Levi-Civita coordinates and
mapped back), the same crossing re-expressed in resonant variables as
Delta p = 2 p^u, the Toy family splitting on x = pi, and the amended-pendulum
Melnikov value.  Only the unstable branch is ever integrated: the reversibility
x -> x, y -> -y pairs it with the stable one on the section, so the distance
between the two manifold traces is twice the unstable component.

Precision is budgeted per job from the e^(omega pi/2) scale of the result:
digits = ceil(0.69 |omega|) + 60 working digits, manifold order N ~ 1.2 digits.
K below the desk floor (default 1e-6) is refused unless explicitly overridden.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass
from typing import Optional

import gmpy2

from cpsplit.charts import lc_to_synodic, synodic_to_resonant
from cpsplit.context import PrecisionContext
from cpsplit.errors import BelowDeskFloor, BranchMisidentified
from cpsplit.flow import SectionSpec
from cpsplit.manifold import choose_domain, expand, globalize
from cpsplit.melnikov import amended_z0
from cpsplit.models import Model, State, equilibria, eval_field

DESK_FLOOR = 1e-6


@dataclass
class SplitSample:
    kind: str  # dx_dot | dp_resonant | dp_toy | z0_melnikov
    K: gmpy2.mpfr
    eps: gmpy2.mpfr
    omega: gmpy2.mpfr
    value: gmpy2.mpfr
    digits: int
    N: int
    section: str
    a: Optional[int] = None
    m: Optional[int] = None
    x_offset: Optional[gmpy2.mpfr] = None  # x^u - pi on the resonant section
    wall_seconds: float = 0.0

    def key(self):
        return resume_key(self.kind, self.K, self.a, self.m)


def resume_key(kind, K, a=None, m=None):
    """Store key (kind, K, a, m); K canonicalized through repr at 20 digits."""
    return (kind, _canon_K(K), "" if a is None else str(int(a)),
            "" if m is None else str(int(m)))


def _canon_K(K):
    return "{:.20e}".format(float(gmpy2.mpfr(K, 113)))


def precision_policy(K, *, floor=DESK_FLOOR, override=False,
                     digits_override=None, order_cap=None):
    """(PrecisionContext, manifold order N) sized for the K-job.

    digits = ceil(0.69 |omega|) + 60 with omega = -1/sqrt(3K);
    N = max(100, ceil(1.2 digits)), optionally capped.
    """
    Kf = float(gmpy2.mpfr(K, 113))
    if not Kf > 0:
        raise BelowDeskFloor("K must be positive, got {}".format(K))
    if Kf < float(floor) and not override:
        raise BelowDeskFloor(
            "K = {} below the desk floor {} (pass the override to force)".format(K, floor))
    abs_omega = 1.0 / math.sqrt(3.0 * Kf)
    digits = int(math.ceil(0.69 * abs_omega)) + 60
    if digits_override is not None:
        digits = int(digits_override)
    N = max(100, int(math.ceil(1.2 * digits)))
    if order_cap is not None:
        N = min(N, int(order_cap))
    return PrecisionContext(digits=max(digits, 30)), N


def _job_tol(ctx):
    with ctx.activate():
        return gmpy2.mpfr(10) ** (-(ctx.digits + ctx.guard // 2))


def _external_sigma(lc_model, syn_model, eq):
    """Sign of the tangent direction whose synodic image leaves L1 into the
    y > 0 half plane with increasing r (the external lobe)."""
    ctx = lc_model.ctx
    lam, v = eq.real_eigenpair
    with ctx.activate():
        delta = ctx.mpf("1e-6")
        for sigma in (1, -1):
            coords = tuple(c0 + sigma * delta * cv
                           for c0, cv in zip(eq.location.coords, v))
            zs = lc_to_synodic(ctx, State("levi_civita", coords))
            x, y, px, py = zs.coords
            f = eval_field(syn_model, zs)
            xdot, ydot = f.coords[0], f.coords[1]
            y_sign = y if abs(y) > delta * delta else ydot
            r_trend = x * xdot + y * ydot
            if y_sign > 0 and r_trend > 0:
                return sigma
    raise BranchMisidentified("no tangent sign gives y > 0 with increasing r")


def _cp_crossing(K, *, context=None, N=None, tol=None, floor=DESK_FLOOR,
                 override=False, digits_override=None, branch="external"):
    """Shared heavy part: globalized unstable-branch crossing on v = 0.

    Returns (ctx, N, synodic crossing State, eps, omega, wall time so far).
    """
    if context is None or N is None:
        ctx, N_pol = precision_policy(K, floor=floor, override=override,
                                      digits_override=digits_override)
        context = context or ctx
        N = N or N_pol
    ctx = context
    t0 = time.monotonic()
    syn = Model.cp_synodic(ctx, K)
    if tol is None:
        tol = _job_tol(ctx)
    eqs = equilibria(syn)
    L1 = next(eq for eq in eqs if eq.label == "L1")
    with ctx.activate():
        C = -2 * L1.energy
    lc = Model.cp_levi_civita(ctx, K, C)
    lc_eqs = equilibria(lc)
    eq = next(e for e in lc_eqs if e.label == "L1")
    sigma = _external_sigma(lc, syn, eq)
    if branch == "internal":
        sigma = -sigma
    elif branch != "external":
        raise ValueError("branch must be external or internal")
    lam, v = eq.real_eigenpair
    W = expand(lc, eq, lam, v, N, sigma=sigma)
    choose_domain(W, tol)
    zs, T, s0 = globalize(W, SectionSpec("lc_v0"), tol)
    with ctx.activate():
        if not zs.coords[0] > 0:
            raise BranchMisidentified(
                "section crossing has u = {} <= 0".format(zs.coords[0]))
    z_syn = lc_to_synodic(ctx, zs)
    with ctx.activate():
        if branch == "external" and not z_syn.coords[0] > 0:
            raise BranchMisidentified(
                "external crossing expected at synodic x > 0, got {}".format(
                    z_syn.coords[0]))
    return ctx, N, z_syn, syn.eps, syn.omega, time.monotonic() - t0


def cp_split_synodic(K, **kw) -> SplitSample:
    """Delta xdot = 2 xdot^u on the section y = 0, x > 0 (external branch)."""
    ctx, N, z_syn, eps, omega, wall = _cp_crossing(K, **kw)
    with ctx.activate():
        x, y, px, py = z_syn.coords
        value = 2 * (px + y)
    return SplitSample("dx_dot", ctx.mpf(K), eps, omega, value,
                       ctx.digits, N, "synodic_y0", wall_seconds=wall)


def cp_split_resonant(K, **kw) -> SplitSample:
    """Delta p = 2 p^u of the same crossing in resonant variables."""
    ctx, N, z_syn, eps, omega, wall = _cp_crossing(K, **kw)
    return _resonant_from_crossing(ctx, N, z_syn, eps, omega, wall)


def _resonant_from_crossing(ctx, N, z_syn, eps, omega, wall) -> SplitSample:
    z_res = synodic_to_resonant(ctx, z_syn, eps)
    with ctx.activate():
        value = 2 * z_res.coords[3]
        x_offset = z_res.coords[0] - ctx.pi()
        K = 3 * eps ** 4
    return SplitSample("dp_resonant", K, eps, omega, value,
                       ctx.digits, N, "synodic_y0", x_offset=x_offset,
                       wall_seconds=wall)


def cp_split_both(K, **kw):
    """(dx_dot, dp_resonant) samples from one globalized crossing."""
    ctx, N, z_syn, eps, omega, wall = _cp_crossing(K, **kw)
    with ctx.activate():
        x, y, px, py = z_syn.coords
        v_syn = 2 * (px + y)
    syn = SplitSample("dx_dot", ctx.mpf(K), eps, omega, v_syn,
                      ctx.digits, N, "synodic_y0", wall_seconds=wall)
    res = _resonant_from_crossing(ctx, N, z_syn, eps, omega, wall)
    return syn, res


def toy_split(K, a, m, *, context=None, N=None, tol=None, floor=DESK_FLOOR,
              override=False, digits_override=None,
              branch="external") -> SplitSample:
    """Delta p = 2 p^u of W^u(L-) of the Toy family on the section x = pi.

    The external branch is the upper separatrix lobe (x: 0 -> 2 pi, y > 0);
    the internal one descends along the lower lobe and is measured at its own
    symmetry section x = -pi, y < 0.
    """
    if branch not in ("external", "internal"):
        raise ValueError("branch must be external or internal")
    if context is None or N is None:
        ctx, N_pol = precision_policy(K, floor=floor, override=override,
                                      digits_override=digits_override)
        context = context or ctx
        N = N or N_pol
    ctx = context
    t0 = time.monotonic()
    model = Model.toy(ctx, a, m, K=K)
    if tol is None:
        tol = _job_tol(ctx)
    eq = next(e for e in equilibria(model) if e.label == "Lminus")
    lam, v = eq.real_eigenpair
    # leave x = 0 toward the section: x increasing (external) or decreasing
    sigma = 1 if v[0] > 0 else -1
    section = "toy_xpi"
    if branch == "internal":
        sigma = -sigma
        section = "toy_xmpi"
    W = expand(model, eq, lam, v, N, sigma=sigma)
    choose_domain(W, tol)
    zs, T, s0 = globalize(W, SectionSpec(section), tol)
    with ctx.activate():
        value = 2 * zs.coords[3]
    return SplitSample("dp_toy", model.K, model.eps, model.omega, value,
                       ctx.digits, N, section, a=int(a), m=int(m),
                       wall_seconds=time.monotonic() - t0)


def melnikov_sample(K, *, context=None, tol=None, floor=DESK_FLOOR,
                    override=False, digits_override=None) -> SplitSample:
    """Amended-pendulum z(0) = -A/2 (a = 1, omega tied to eps); the stored
    magnitude matches the toy splitting's Delta p / eps^m scale directly."""
    if context is None:
        context, _ = precision_policy(K, floor=floor, override=override,
                                      digits_override=digits_override)
    ctx = context
    t0 = time.monotonic()
    with ctx.activate():
        eps = gmpy2.sqrt(gmpy2.sqrt(ctx.mpf(K) / 3))
    if tol is None:
        tol = _job_tol(ctx)
    res = amended_z0(ctx, eps, tol)
    N = max(100, int(1.2 * ctx.digits) + 1)
    return SplitSample("z0_melnikov", ctx.mpf(K), res.eps, res.omega,
                       res.z0, ctx.digits, N, "pendulum_xpi", a=1,
                       wall_seconds=time.monotonic() - t0)


# --------------------------------------------------------------------------
# result store (scan CSVs, resumable by (kind, K, a, m))
# --------------------------------------------------------------------------

_CSV_FIELDS = ("kind", "K", "eps", "omega", "a", "m", "digits", "N",
               "value", "x_offset", "wall_seconds")


class ResultStore:
    """One CSV per scan kind; append-only, resume by the sample key."""

    def __init__(self, path):
        self.path = path
        self._keys = set()
        self._rows = []
        if os.path.exists(path):
            with open(path, newline="") as fh:
                for row in csv.DictReader(fh):
                    self._rows.append(row)
                    self._keys.add(self._row_key(row))

    @staticmethod
    def _row_key(row):
        return (row["kind"], _canon_K(row["K"]), row.get("a", "") or "",
                row.get("m", "") or "")

    def __contains__(self, key):
        return key in self._keys

    def __len__(self):
        return len(self._rows)

    def rows(self, kind=None, a=None, m=None):
        out = []
        for row in self._rows:
            if kind is not None and row["kind"] != kind:
                continue
            if a is not None and (row.get("a") or "") != str(int(a)):
                continue
            if m is not None and (row.get("m") or "") != str(int(m)):
                continue
            out.append(row)
        return out

    def samples(self, ctx, kind=None, a=None, m=None):
        """(eps, omega, value) triples parsed at ctx precision, for fitting."""
        with ctx.activate():
            return [(ctx.mpf(r["eps"]), ctx.mpf(r["omega"]), ctx.mpf(r["value"]))
                    for r in self.rows(kind, a, m)]

    def append(self, sample: SplitSample, ctx: PrecisionContext):
        key = sample.key()
        if key in self._keys:
            return False
        row = {
            "kind": sample.kind,
            "K": ctx.to_decimal(sample.K),
            "eps": ctx.to_decimal(sample.eps),
            "omega": ctx.to_decimal(sample.omega),
            "a": "" if sample.a is None else str(sample.a),
            "m": "" if sample.m is None else str(sample.m),
            "digits": str(sample.digits),
            "N": str(sample.N),
            "value": ctx.to_decimal(sample.value),
            "x_offset": ("" if sample.x_offset is None
                         else ctx.to_decimal(sample.x_offset)),
            "wall_seconds": "{:.3f}".format(sample.wall_seconds),
        }
        new_file = not os.path.exists(self.path)
        with open(self.path, "a", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
            if new_file:
                writer.writeheader()
            writer.writerow(row)
        self._rows.append(row)
        self._keys.add(key)
        return True


def geometric_grid(K_hi, K_lo, per_decade=12):
    """Decreasing geometric K grid from K_hi down to K_lo inclusive."""
    hi = float(K_hi)
    lo = float(K_lo)
    if not 0 < lo < hi:
        raise ValueError("need 0 < K_lo < K_hi")
    n = int(round(per_decade * math.log10(hi / lo)))
    return ["{:.12e}".format(hi * (lo / hi) ** (i / n)) for i in range(n + 1)]
