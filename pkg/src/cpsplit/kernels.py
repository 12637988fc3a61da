"""Series-convolution kernel with compiled/pure-Python selection.

``conv_coeff(prec, a, b, k, jweight)`` returns the k-th Cauchy-product
coefficient sum_i a[i]*b[k-i] (times i when ``jweight``), skipping terms whose
index falls outside either coefficient list.  The compiled extension and the
fallback accumulate in the same order at the same precision, so results are
bit-identical either way.
"""

import gmpy2

try:
    from cpsplit._kernels import conv_coeff as _conv_compiled

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _conv_compiled = None
    HAVE_COMPILED = False


def conv_coeff_python(prec, a, b, k, jweight=False):
    """Pure-Python reference kernel (ambient gmpy2 context must match prec)."""
    acc = gmpy2.mpfr(0)
    na = len(a)
    nb = len(b)
    lo = 1 if jweight else 0
    for i in range(lo, k + 1):
        if i >= na or (k - i) >= nb:
            continue
        t = a[i] * b[k - i]
        if jweight:
            acc += t * i
        else:
            acc += t
    return acc


if HAVE_COMPILED:
    conv_coeff = _conv_compiled
else:
    conv_coeff = conv_coeff_python
