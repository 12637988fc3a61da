# cython: language_level=3
"""Compiled series-convolution kernel over the MPFR C API.

Computes one Cauchy-product coefficient sum_i a[i]*b[k-i] (optionally with the
derivative weight i) without leaving C, which is the hot inner loop of all
truncated-series multiplication and of the sin/cos/exp/pow recurrences.
"""

from gmpy2 cimport mpfr, GMPy_MPFR_New, import_gmpy2, mpfr_t, mpfr_rnd_t, MPFR_RNDN, mpfr_prec_t

cdef extern from "mpfr.h":
    int mpfr_mul(mpfr_t rop, const mpfr_t a, const mpfr_t b, mpfr_rnd_t rnd)
    int mpfr_add(mpfr_t rop, const mpfr_t a, const mpfr_t b, mpfr_rnd_t rnd)
    int mpfr_mul_si(mpfr_t rop, const mpfr_t a, long b, mpfr_rnd_t rnd)
    void mpfr_set_zero(mpfr_t x, int sign)
    void mpfr_init2(mpfr_t x, mpfr_prec_t prec)
    void mpfr_clear(mpfr_t x)

import_gmpy2()

HAVE_COMPILED = True


def conv_coeff(mpfr_prec_t prec, list a, list b, Py_ssize_t k, bint jweight):
    """Return sum over i of (i if jweight else 1)*a[i]*b[k-i], i = 0..k.

    Terms whose index falls outside either list are skipped, so truncated
    operands of different lengths are handled without padding.
    """
    cdef mpfr acc = GMPy_MPFR_New(prec, NULL)
    cdef mpfr_t tmp
    cdef Py_ssize_t i, lo, na = len(a), nb = len(b)
    mpfr_init2(tmp, prec)
    mpfr_set_zero(acc.f, 1)
    lo = 1 if jweight else 0
    for i in range(lo, k + 1):
        if i >= na or (k - i) >= nb:
            continue
        mpfr_mul(tmp, (<mpfr>(a[i])).f, (<mpfr>(b[k - i])).f, MPFR_RNDN)
        if jweight:
            mpfr_mul_si(tmp, tmp, i, MPFR_RNDN)
        mpfr_add(acc.f, acc.f, tmp, MPFR_RNDN)
    mpfr_clear(tmp)
    return acc
