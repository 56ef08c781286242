"""Matrix multiplication over small prime fields on Q-adic packed words."""

from .errors import (DigitOverflow, DimensionMismatch, InvalidModulus,
                     NoCompression, PlanMismatch, QadicError, SlotOverflow,
                     UnsupportedAlgorithm)
from .fieldcore import PrimeModulus, addmul, reduce
from .gemm import (CompressedMatrix, blocked_accumulate, compress_cols_forward,
                   compress_rows_forward, compress_rows_reversed,
                   mul_common_compressed, mul_full_compressed,
                   mul_left_compressed, mul_right_compressed, multiply,
                   multiply_compressed, naive_gemm, uncompress)
from .pack import (compress_forward, compress_reverse, extract_all,
                   extract_coefficient, redq, reduce_and_compress)
from .plan import (Algorithm, CompressionPlan, FullPlan, GainEstimate,
                   choose_panel, plan_compression, plan_full, predicted_gain)

__version__ = "0.1.0"
