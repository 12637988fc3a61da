"""Working-precision context for all big-real arithmetic.

Precision is decimal-digit denominated (the splitting driver decides digits
per job); internally everything runs on gmpy2/MPFR binary floats with
round-to-nearest.  ``guard`` extra digits absorb cancellation; the binary
precision covers digits+guard decimal digits.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass

import gmpy2

from cpsplit.errors import CpsplitError

# bits per decimal digit
_LOG2_10 = math.log2(10.0)


@dataclass(frozen=True)
class PrecisionContext:
    """Decimal working-digit budget; immutable and hashable."""

    digits: int
    guard: int = 50
    rounding: str = "round-to-nearest"

    def __post_init__(self):
        if self.digits < 30:
            raise CpsplitError("PrecisionContext requires digits >= 30")
        if self.guard < 0:
            raise CpsplitError("PrecisionContext requires guard >= 0")
        if self.rounding != "round-to-nearest":
            raise CpsplitError("only round-to-nearest is supported")

    @property
    def bits(self) -> int:
        return int(math.ceil((self.digits + self.guard) * _LOG2_10)) + 4

    @property
    def dec_digits(self) -> int:
        """Significant decimal digits needed for exact round-trip serialization."""
        return int(math.ceil(self.bits / _LOG2_10)) + 2

    @contextmanager
    def activate(self):
        """Make this precision the ambient gmpy2 context (re-entrant)."""
        old = gmpy2.get_context()
        gmpy2.set_context(gmpy2.context(precision=self.bits))
        try:
            yield self
        finally:
            gmpy2.set_context(old)

    # --- construction of big reals ---

    def mpf(self, x) -> gmpy2.mpfr:
        """Big real from int, float, decimal string, fraction string 'a/b', or mpfr."""
        with self.activate():
            if isinstance(x, str) and "/" in x:
                num, den = x.split("/", 1)
                return gmpy2.mpfr(gmpy2.mpq(int(num), int(den)))
            return gmpy2.mpfr(x)

    def pi(self) -> gmpy2.mpfr:
        with self.activate():
            return gmpy2.const_pi()

    # --- tolerances used throughout the test contracts ---

    def eps_guarded(self) -> gmpy2.mpfr:
        """10^(-digits + guard/2): the standard comparison tolerance."""
        with self.activate():
            return gmpy2.mpfr(10) ** (-self.digits + self.guard // 2)

    def eps_work(self) -> gmpy2.mpfr:
        """10^(-(digits+guard)): the working round-off scale."""
        with self.activate():
            return gmpy2.mpfr(10) ** (-(self.digits + self.guard))

    # --- serialization ---

    def to_decimal(self, x) -> str:
        """Full-precision decimal string (round-trip exact at this precision).

        Built from mpfr.digits(); the format-spec path of gmpy2's mpfr is
        unreliable for large precisions.
        """
        with self.activate():
            x = gmpy2.mpfr(x)
            if not gmpy2.is_finite(x):
                return str(x)
            if x == 0:
                return "0"
            digits, exp, _ = x.digits(10, self.dec_digits)
            sign = "-" if digits.startswith("-") else ""
            return "{}0.{}e{}".format(sign, digits.lstrip("-"), exp)

    def from_decimal(self, s: str) -> gmpy2.mpfr:
        with self.activate():
            return gmpy2.mpfr(s)
