"""Small dense linear algebra in big reals (4x4 at most)."""

from __future__ import annotations

import gmpy2

from cpsplit.errors import SingularSolve


def lu_solve(ctx, A, b):
    """Solve A x = b by Gaussian elimination with partial pivoting.

    A: list of row lists (mpfr), b: list (mpfr).  Inputs are not modified.
    """
    n = len(A)
    with ctx.activate():
        M = [list(row) + [b[i]] for i, row in enumerate(A)]
        for col in range(n):
            piv = max(range(col, n), key=lambda r: abs(M[r][col]))
            if M[piv][col] == 0:
                raise SingularSolve("zero pivot in column {}".format(col))
            if piv != col:
                M[col], M[piv] = M[piv], M[col]
            inv = 1 / M[col][col]
            for r in range(col + 1, n):
                f = M[r][col] * inv
                if f == 0:
                    continue
                for c in range(col, n + 1):
                    M[r][c] -= f * M[col][c]
        x = [gmpy2.mpfr(0)] * n
        for r in range(n - 1, -1, -1):
            s = M[r][n]
            for c in range(r + 1, n):
                s -= M[r][c] * x[c]
            x[r] = s / M[r][r]
        return x


def null_vector(ctx, A):
    """One nonzero kernel vector of a rank-(n-1) matrix.

    Eliminates with partial pivoting, treats the weakest pivot's column as the
    free variable (set to 1) and back-substitutes.
    """
    n = len(A)
    with ctx.activate():
        M = [list(row) for row in A]
        pivots = []  # (row, col) in elimination order
        used_rows = set()
        used_cols = set()
        for _ in range(n - 1):
            best = None
            for r in range(n):
                if r in used_rows:
                    continue
                for c in range(n):
                    if c in used_cols:
                        continue
                    if best is None or abs(M[r][c]) > abs(M[best[0]][best[1]]):
                        best = (r, c)
            r0, c0 = best
            if M[r0][c0] == 0:
                raise SingularSolve("matrix rank deficient beyond corank 1")
            inv = 1 / M[r0][c0]
            for r in range(n):
                if r == r0 or r in used_rows:
                    continue
                f = M[r][c0] * inv
                if f == 0:
                    continue
                for c in range(n):
                    M[r][c] -= f * M[r0][c]
            used_rows.add(r0)
            used_cols.add(c0)
            pivots.append((r0, c0))
        free_col = next(c for c in range(n) if c not in used_cols)
        v = [gmpy2.mpfr(0)] * n
        v[free_col] = gmpy2.mpfr(1)
        for r0, c0 in reversed(pivots):
            s = gmpy2.mpfr(0)
            for c in range(n):
                if c != c0:
                    s += M[r0][c] * v[c]
            v[c0] = -s / M[r0][c0]
        return v


def char_poly(ctx, A):
    """Monic characteristic polynomial coefficients [1, c1, ..., cn]
    via the Faddeev-LeVerrier recursion (exact in the ambient precision)."""
    n = len(A)
    with ctx.activate():
        zero = gmpy2.mpfr(0)
        M = [[gmpy2.mpfr(1) if i == j else zero for j in range(n)] for i in range(n)]
        coeffs = [gmpy2.mpfr(1)]
        for k in range(1, n + 1):
            # M <- A*M + c_{k-1} I was folded in at the end of last round
            AM = [[sum((A[i][t] * M[t][j] for t in range(n)), zero)
                   for j in range(n)] for i in range(n)]
            tr = sum((AM[i][i] for i in range(n)), zero)
            ck = -tr / k
            coeffs.append(ck)
            M = [[AM[i][j] + (ck if i == j else zero) for j in range(n)]
                 for i in range(n)]
        return coeffs
