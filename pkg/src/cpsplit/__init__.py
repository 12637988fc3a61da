"""High-precision splitting of invariant manifolds: CP hydrogen problem and Toy models."""

from cpsplit.context import PrecisionContext
from cpsplit.series import TruncSeries, ts_arith, ts_elem, ts_eval
from cpsplit.kernels import HAVE_COMPILED

__version__ = "0.1.0"

__all__ = [
    "PrecisionContext",
    "TruncSeries",
    "ts_arith",
    "ts_elem",
    "ts_eval",
    "HAVE_COMPILED",
]
