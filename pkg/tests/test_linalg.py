import gmpy2
import pytest

from cpsplit.errors import SingularSolve
from cpsplit.linalg import char_poly, lu_solve, null_vector


def test_lu_solve_known_system(ctx40):
    with ctx40.activate():
        A = [[ctx40.mpf(2), ctx40.mpf(1)], [ctx40.mpf(1), ctx40.mpf(3)]]
        b = [ctx40.mpf(5), ctx40.mpf(10)]
        x = lu_solve(ctx40, A, b)
        assert abs(x[0] - 1) < ctx40.eps_guarded()
        assert abs(x[1] - 3) < ctx40.eps_guarded()


def test_lu_solve_random_residual(ctx40, rng):
    n = 5
    with ctx40.activate():
        A = [[ctx40.mpf(rng.uniform(-1, 1)) for _ in range(n)]
             for _ in range(n)]
        for i in range(n):
            A[i][i] += 4  # diagonally dominant, well conditioned
        b = [ctx40.mpf(rng.uniform(-1, 1)) for _ in range(n)]
        x = lu_solve(ctx40, A, b)
        for i in range(n):
            r = sum(A[i][j] * x[j] for j in range(n)) - b[i]
            assert abs(r) < ctx40.eps_guarded()


def test_lu_solve_singular(ctx40):
    with ctx40.activate():
        A = [[ctx40.mpf(1), ctx40.mpf(2)], [ctx40.mpf(2), ctx40.mpf(4)]]
        b = [ctx40.mpf(1), ctx40.mpf(1)]
    with pytest.raises(SingularSolve):
        lu_solve(ctx40, A, b)


def test_null_vector_rank_deficient(ctx40):
    with ctx40.activate():
        # rank-1 matrix; null vector must satisfy Av ~ 0 and |v| = 1
        A = [[ctx40.mpf(1), ctx40.mpf(2)], [ctx40.mpf(2), ctx40.mpf(4)]]
        v = null_vector(ctx40, A)
        norm = gmpy2.sqrt(sum(c * c for c in v))
        assert norm > 0
        for row in A:
            r = sum(rc * c for rc, c in zip(row, v))
            assert abs(r) < ctx40.eps_guarded() * norm


def test_char_poly_companion(ctx40):
    # matrix with known characteristic polynomial x^2 - 5x + 6
    with ctx40.activate():
        A = [[ctx40.mpf(0), ctx40.mpf(-6)], [ctx40.mpf(1), ctx40.mpf(5)]]
        p = char_poly(ctx40, A)
        # coefficients [1, c1, ..., cn] multiply descending powers of lambda
        n = len(A)
        for root in (2, 3):
            val = sum(c * ctx40.mpf(root) ** (n - k) for k, c in enumerate(p))
            assert abs(val) < ctx40.eps_guarded()
