"""Normalized discrete Fourier transform of arbitrary (prime) length.

Every lattice size used by the detection algorithms is prime, so radix
splitting alone cannot apply; numpy's pocketfft kernel handles arbitrary
lengths in O(M log M) via chirp-z style reductions and is used here behind
the normalization contract: coefficient h equals
(1/M) * sum_j samples[j] * exp(-2 pi i j h / M).

The 1/M factor is applied on every path; it is inert for zero/nonzero
classification and required for the coefficient medians.
"""

import numpy as np

from .errors import ParameterError


def dft_forward_normalized(samples):
    """Length-M forward DFT with 1/M normalization."""
    x = np.asarray(samples, dtype=np.complex128)
    if x.ndim != 1:
        raise ParameterError("samples must be a 1-d vector")
    if x.size == 0:
        raise ParameterError("samples must be nonempty")
    if not np.all(np.isfinite(x.view(np.float64))):
        raise ParameterError("samples contain NaN or Inf")
    return np.fft.fft(x) / x.size
