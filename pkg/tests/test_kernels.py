import gmpy2

from cpsplit import kernels


def _random_coeffs(ctx, rng, n):
    with ctx.activate():
        return [ctx.mpf(rng.uniform(-2, 2)) for _ in range(n)]


def test_compiled_kernel_available():
    # the build ships the extension; the fallback is for constrained installs
    assert kernels.HAVE_COMPILED


def test_compiled_matches_python_bit_for_bit(ctx60, rng):
    a = _random_coeffs(ctx60, rng, 24)
    b = _random_coeffs(ctx60, rng, 24)
    with ctx60.activate():
        for k in range(24):
            for jweight in (False, True):
                got = kernels.conv_coeff(ctx60.bits, a, b, k, jweight)
                ref = kernels.conv_coeff_python(ctx60.bits, a, b, k, jweight)
                assert got == ref
                assert got.precision == ref.precision


def test_conv_coeff_against_direct_sum(ctx40):
    with ctx40.activate():
        a = [ctx40.mpf(i + 1) for i in range(6)]
        b = [ctx40.mpf(2 * i - 3) for i in range(6)]
        k = 5
        direct = sum(a[i] * b[k - i] for i in range(k + 1))
        weighted = sum(i * a[i] * b[k - i] for i in range(1, k + 1))
        assert kernels.conv_coeff(ctx40.bits, a, b, k, False) == direct
        assert kernels.conv_coeff(ctx40.bits, a, b, k, True) == weighted


def test_short_operands_skip_missing_terms(ctx40):
    with ctx40.activate():
        a = [ctx40.mpf(1), ctx40.mpf(2)]
        b = [ctx40.mpf(3)]
        # k=2: only i=2 would pair a[2]*b[0] but a has no order-2 term
        assert kernels.conv_coeff(ctx40.bits, a, b, 2, False) == 0
        assert kernels.conv_coeff(ctx40.bits, a, b, 1, False) == 6
