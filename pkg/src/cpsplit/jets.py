"""Incremental jet tape: an evaluation graph extended one order at a time.

A Tape records the arithmetic of a vector field once; each node computes its
k-th Taylor coefficient from coefficients of order <= k of its inputs.  The
Taylor integrator extends the tape order by order while feeding back state
coefficients, and the parameterization method re-runs a single order after
substituting a solved coefficient (``redo``).  Total cost per expansion is
O(N^2) multiplications.

All node evaluation happens under an activated PrecisionContext supplied by
the tape; coefficients are plain gmpy2 mpfr values.
"""

from __future__ import annotations

import gmpy2

from cpsplit.kernels import conv_coeff


class Node:
    __slots__ = ("tape", "coeffs")

    def __init__(self, tape):
        self.tape = tape
        self.coeffs = []
        tape.nodes.append(self)

    def _compute(self, k):
        raise NotImplementedError

    def extend(self, k, redo=False):
        c = self._compute(k)
        if redo:
            self.coeffs[k] = c
        else:
            self.coeffs.append(c)

    # operator sugar; constants are wrapped by the tape

    def __add__(self, other):
        return Add(self.tape, self, self.tape.lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Sub(self.tape, self, self.tape.lift(other))

    def __rsub__(self, other):
        return Sub(self.tape, self.tape.lift(other), self)

    def __mul__(self, other):
        if isinstance(other, Node):
            return Mul(self.tape, self, other)
        return Scale(self.tape, self.tape.ctx.mpf(other), self)

    __rmul__ = __mul__

    def __neg__(self):
        return Scale(self.tape, self.tape.ctx.mpf(-1), self)


class Var(Node):
    """Externally managed coefficients (state components, manifold unknowns)."""

    def extend(self, k, redo=False):
        if len(self.coeffs) <= k:
            raise RuntimeError("Var coefficient of order {} not seeded".format(k))

    def set_coeff(self, k, value):
        if k == len(self.coeffs):
            self.coeffs.append(value)
        else:
            self.coeffs[k] = value

    def reset(self, c0):
        self.coeffs = [c0]


class Const(Node):
    def __init__(self, tape, value):
        super().__init__(tape)
        self.coeffs = [value]

    def _compute(self, k):
        return gmpy2.mpfr(0)


class Add(Node):
    __slots__ = ("a", "b")

    def __init__(self, tape, a, b):
        super().__init__(tape)
        self.a = a
        self.b = b

    def _compute(self, k):
        return self.a.coeffs[k] + self.b.coeffs[k]


class Sub(Node):
    __slots__ = ("a", "b")

    def __init__(self, tape, a, b):
        super().__init__(tape)
        self.a = a
        self.b = b

    def _compute(self, k):
        return self.a.coeffs[k] - self.b.coeffs[k]


class Scale(Node):
    __slots__ = ("factor", "a")

    def __init__(self, tape, factor, a):
        super().__init__(tape)
        self.factor = factor
        self.a = a

    def _compute(self, k):
        return self.factor * self.a.coeffs[k]


class Mul(Node):
    __slots__ = ("a", "b")

    def __init__(self, tape, a, b):
        super().__init__(tape)
        self.a = a
        self.b = b

    def _compute(self, k):
        return conv_coeff(self.tape.prec, self.a.coeffs, self.b.coeffs, k, False)


class PowConst(Node):
    """a(s)^alpha, a0 > 0; the only non-polynomial power used (r^-3 via alpha=-3/2)."""

    __slots__ = ("a", "alpha")

    def __init__(self, tape, a, alpha):
        super().__init__(tape)
        self.a = a
        self.alpha = tape.ctx.mpf(alpha)

    def _compute(self, k):
        a = self.a.coeffs
        y = self.coeffs
        if k == 0:
            return a[0] ** self.alpha
        # truncate own coefficients at k so a redo never reads the stale y_k
        ws = conv_coeff(self.tape.prec, a, y[:k], k, True)
        cs = conv_coeff(self.tape.prec, a, y[:k], k, False)
        return ((self.alpha + 1) * ws - k * cs) / (k * a[0])


class SinCos(Node):
    """Joint sin/cos node; ``coeffs`` holds sin, ``cos.coeffs`` holds cos."""

    __slots__ = ("a", "cos")

    def __init__(self, tape, a):
        super().__init__(tape)
        self.a = a
        self.cos = _CosView(tape, self)

    def extend(self, k, redo=False):
        a = self.a.coeffs
        c = self.cos.coeffs
        s = self.coeffs
        if k == 0:
            sk = gmpy2.sin(a[0])
            ck = gmpy2.cos(a[0])
        else:
            sk = conv_coeff(self.tape.prec, a, c, k, True) / k
            ck = -conv_coeff(self.tape.prec, a, s, k, True) / k
        if redo:
            s[k] = sk
            c[k] = ck
        else:
            s.append(sk)
            c.append(ck)


class _CosView(Node):
    """Placeholder whose coefficients are written by its parent SinCos."""

    __slots__ = ("parent",)

    def __init__(self, tape, parent):
        super().__init__(tape)
        self.parent = parent

    def extend(self, k, redo=False):
        pass


class Tape:
    """Ordered node list; construction order is topological by design."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.prec = ctx.bits
        self.nodes = []
        self.order = -1

    def var(self):
        return Var(self)

    def const(self, value):
        return Const(self, self.ctx.mpf(value))

    def lift(self, x):
        if isinstance(x, Node):
            return x
        return self.const(x)

    def sincos(self, a):
        node = SinCos(self, a)
        return node, node.cos

    def pow_const(self, a, alpha):
        return PowConst(self, a, alpha)

    def extend(self):
        """Compute coefficient order+1 of every node (Vars must be seeded)."""
        k = self.order + 1
        with self.ctx.activate():
            for node in self.nodes:
                node.extend(k)
        self.order = k

    def redo_last(self):
        """Recompute the top order after a Var coefficient was replaced."""
        with self.ctx.activate():
            for node in self.nodes:
                node.extend(self.order, redo=True)

    def reset(self):
        """Drop all coefficients (Vars must be reseeded before extending)."""
        for node in self.nodes:
            if isinstance(node, Const):
                node.coeffs = node.coeffs[:1]
            else:
                node.coeffs = []
        self.order = -1
