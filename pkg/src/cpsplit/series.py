"""Truncated one-variable power series over big reals.

The jet substrate for Taylor integration steps, manifold expansions and the
Melnikov tail integrals.  Arithmetic closes at the truncation order: terms of
degree > N are discarded, never folded back.  All operations run under the
series' PrecisionContext and are deterministic given inputs and context.
"""

from __future__ import annotations

import gmpy2

from cpsplit.context import PrecisionContext
from cpsplit.errors import NegativeRadicand, OrderMismatch, ZeroLeadingCoefficient
from cpsplit.kernels import conv_coeff


class TruncSeries:
    """Coefficients c0..cN; immutable by convention (no in-place mutation)."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: PrecisionContext, coeffs, *, convert=True):
        self.ctx = ctx
        if convert:
            coeffs = [ctx.mpf(c) for c in coeffs]
        self.coeffs = list(coeffs)

    # --- constructors ---

    @classmethod
    def const(cls, ctx, value, order):
        c = [ctx.mpf(value)] + [ctx.mpf(0)] * order
        return cls(ctx, c, convert=False)

    @classmethod
    def variable(cls, ctx, c0, order):
        """c0 + s (the identity jet seeded at c0)."""
        c = [ctx.mpf(c0), ctx.mpf(1)] + [ctx.mpf(0)] * (order - 1)
        return cls(ctx, c, convert=False)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self):
        return "TruncSeries(order={}, c0={})".format(self.order, self.coeffs[0])

    def _check(self, other):
        if self.order != other.order:
            raise OrderMismatch(
                "orders {} != {}".format(self.order, other.order))

    # --- ring operations ---

    def add(self, other):
        self._check(other)
        with self.ctx.activate():
            c = [a + b for a, b in zip(self.coeffs, other.coeffs)]
        return TruncSeries(self.ctx, c, convert=False)

    def sub(self, other):
        self._check(other)
        with self.ctx.activate():
            c = [a - b for a, b in zip(self.coeffs, other.coeffs)]
        return TruncSeries(self.ctx, c, convert=False)

    def neg(self):
        with self.ctx.activate():
            c = [-a for a in self.coeffs]
        return TruncSeries(self.ctx, c, convert=False)

    def scale(self, factor):
        with self.ctx.activate():
            f = self.ctx.mpf(factor)
            c = [f * a for a in self.coeffs]
        return TruncSeries(self.ctx, c, convert=False)

    def add_const(self, value):
        with self.ctx.activate():
            c = list(self.coeffs)
            c[0] = c[0] + self.ctx.mpf(value)
        return TruncSeries(self.ctx, c, convert=False)

    def mul(self, other):
        self._check(other)
        prec = self.ctx.bits
        a = self.coeffs
        b = other.coeffs
        with self.ctx.activate():
            c = [conv_coeff(prec, a, b, k, False) for k in range(len(a))]
        return TruncSeries(self.ctx, c, convert=False)

    def recip(self):
        a = self.coeffs
        prec = self.ctx.bits
        with self.ctx.activate():
            if a[0] == 0:
                raise ZeroLeadingCoefficient("recip of series with c0 = 0")
            inv0 = 1 / a[0]
            c = [inv0]
            for k in range(1, len(a)):
                # sum_{j<k} c_j a_{k-j}; the kernel skips the absent j=k term
                s = conv_coeff(prec, c, a, k, False)
                c.append(-s * inv0)
        return TruncSeries(self.ctx, c, convert=False)

    def div(self, other):
        return self.mul(other.recip())

    def int_pow(self, n: int):
        if n < 0:
            return self.int_pow(-n).recip()
        result = TruncSeries.const(self.ctx, 1, self.order)
        base = self
        while n:
            if n & 1:
                result = result.mul(base)
            base = base.mul(base) if n > 1 else base
            n >>= 1
        return result

    # --- elementary functions (D-finite recurrences) ---

    def sin_cos(self):
        a = self.coeffs
        prec = self.ctx.bits
        with self.ctx.activate():
            s = [gmpy2.sin(a[0])]
            c = [gmpy2.cos(a[0])]
            for k in range(1, len(a)):
                sk = conv_coeff(prec, a, c, k, True) / k
                ck = -conv_coeff(prec, a, s, k, True) / k
                s.append(sk)
                c.append(ck)
        return (TruncSeries(self.ctx, s, convert=False),
                TruncSeries(self.ctx, c, convert=False))

    def exp(self):
        a = self.coeffs
        prec = self.ctx.bits
        with self.ctx.activate():
            e = [gmpy2.exp(a[0])]
            for k in range(1, len(a)):
                e.append(conv_coeff(prec, a, e, k, True) / k)
        return TruncSeries(self.ctx, e, convert=False)

    def sqrt(self):
        a = self.coeffs
        prec = self.ctx.bits
        with self.ctx.activate():
            if not a[0] > 0:
                raise NegativeRadicand("sqrt requires c0 > 0")
            y = [gmpy2.sqrt(a[0])]
            half_inv = 1 / (2 * y[0])
            for k in range(1, len(a)):
                # conv over existing entries yields sum_{0<j<k} y_j y_{k-j}
                s = conv_coeff(prec, y, y, k, False)
                y.append((a[k] - s) * half_inv)
        return TruncSeries(self.ctx, y, convert=False)

    def pow_const(self, alpha):
        """a(s)^alpha for real alpha; requires c0 > 0."""
        a = self.coeffs
        prec = self.ctx.bits
        with self.ctx.activate():
            if not a[0] > 0:
                raise NegativeRadicand("pow_const requires c0 > 0")
            al = self.ctx.mpf(alpha)
            y = [a[0] ** al]
            inv_a0 = 1 / a[0]
            for k in range(1, len(a)):
                ws = conv_coeff(prec, a, y, k, True)
                cs = conv_coeff(prec, a, y, k, False)
                y.append(((al + 1) * ws - k * cs) * inv_a0 / k)
        return TruncSeries(self.ctx, y, convert=False)

    # --- calculus and evaluation ---

    def deriv(self):
        with self.ctx.activate():
            c = [(k + 1) * self.coeffs[k + 1] for k in range(self.order)]
        return TruncSeries(self.ctx, c, convert=False)

    def eval(self, s):
        """Horner evaluation at a big real point."""
        with self.ctx.activate():
            sv = self.ctx.mpf(s)
            acc = gmpy2.mpfr(0)
            for c in reversed(self.coeffs):
                acc = acc * sv + c
            return acc

    def truncate(self, order):
        return TruncSeries(self.ctx, self.coeffs[:order + 1], convert=False)


# --- convenience dispatchers ---

def ts_arith(kind, a, b=None, n=None):
    if kind == "add":
        return a.add(b)
    if kind == "sub":
        return a.sub(b)
    if kind == "mul":
        return a.mul(b)
    if kind == "recip":
        return a.recip()
    if kind == "int_pow":
        return a.int_pow(n)
    raise ValueError("unknown arithmetic kind {!r}".format(kind))


def ts_elem(kind, a):
    if kind == "sin_cos":
        return a.sin_cos()
    if kind == "exp":
        return a.exp()
    if kind == "sqrt":
        return a.sqrt()
    raise ValueError("unknown elementary kind {!r}".format(kind))


def ts_eval(a, s):
    return a.eval(s)
