"""Frequency identification from samples along a multi-lattice configuration.

The pipeline is the same for every entry point: one normalized DFT per
lattice, a gather of each candidate's residue k.z mod M, a count of how many
of the L per-lattice values are nonzero under an approximate zero test, and
(for the coefficient-computing variants) componentwise real/imaginary medians
over the L values.  A candidate is kept when its nonzero count reaches nu*L.

Variants:
  * detect_frequencies  - classification only, any nu in (0, 1/2]
  * detect_and_compute  - nu = 1/2, odd L, medians as coefficients
  * detect_topk         - detect_and_compute restricted to the s largest
  * postprocess_r1l     - refine coefficients on lattices where a detected
                          frequency has a collision-free residue (opt-in)
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .dft import dft_forward_normalized
from .errors import ParameterError
from .freqset import FreqSet
from .lattice import residues


class ZeroTest:
    """Absolute magnitude threshold standing in for the exact zero check."""

    __slots__ = ("theta_zero",)

    def __init__(self, theta_zero):
        if theta_zero < 0:
            raise ParameterError("theta_zero must be >= 0")
        self.theta_zero = float(theta_zero)

    def __repr__(self):
        return f"ZeroTest({self.theta_zero!r})"


def default_zero_test(samples):
    """max(1e-12, 1e-10 * median per-lattice RMS) of the sample values.

    Scaling by the signal RMS keeps the zero test meaningful for signals far
    from unit scale; the absolute floor covers the all-zero signal.
    """
    rms = sorted(
        float(np.sqrt(np.mean(np.abs(np.asarray(s)) ** 2))) for s in samples
    )
    mid = rms[len(rms) // 2] if len(rms) % 2 == 1 else (
        0.5 * (rms[len(rms) // 2 - 1] + rms[len(rms) // 2]))
    return ZeroTest(max(1e-12, 1e-10 * mid))


class DetectionResult:
    """Detected frequencies, their coefficients, and per-candidate hit counts.

    ``hits`` is aligned with ``candidates.elems``; ``detected_idx`` indexes
    into the candidate set and ``coeffs`` (when present) is aligned with
    ``detected.elems``.
    """

    __slots__ = ("candidates", "hits", "detected", "detected_idx", "coeffs",
                 "theta_zero")

    def __init__(self, candidates, hits, detected_idx, coeffs, theta_zero):
        self.candidates = candidates
        self.hits = hits
        self.detected_idx = detected_idx
        self.detected = FreqSet(candidates.dim,
                                candidates.elems[detected_idx], _sorted=True)
        self.coeffs = coeffs
        self.theta_zero = theta_zero

    def __repr__(self):
        return (f"DetectionResult(candidates={len(self.candidates)}, "
                f"detected={len(self.detected)})")

    @property
    def per_lattice_hits(self):
        """Hit counts as a frequency-keyed dict (materialized on demand)."""
        return {k: int(h) for k, h in zip(self.candidates, self.hits)}

    def hit_count(self, k):
        row = np.asarray(k, dtype=np.int64)
        where = np.flatnonzero(np.all(self.candidates.elems == row, axis=1))
        if where.size == 0:
            raise KeyError(k)
        return int(self.hits[where[0]])

    def coeffs_dict(self):
        if self.coeffs is None:
            return {}
        return {k: complex(c) for k, c in zip(self.detected, self.coeffs)}


def _ghat_list(samples, config):
    if len(samples) != config.L:
        raise ParameterError(
            f"expected {config.L} sample vectors, got {len(samples)}")
    ghat = []
    for s, lat in zip(samples, config.lattices):
        s = np.asarray(s, dtype=np.complex128)
        if s.shape != (lat.M,):
            raise ParameterError(
                f"sample vector of length {s.shape} does not match M={lat.M}")
        ghat.append(dft_forward_normalized(s))
    return ghat


def per_lattice_coefficients(samples, config, gamma):
    """(n, L) matrix of per-lattice coefficient estimates for every k in gamma."""
    ghat = _ghat_list(samples, config)
    n = len(gamma)
    out = np.empty((n, config.L), dtype=np.complex128)
    for col, (g, lat) in enumerate(zip(ghat, config.lattices)):
        out[:, col] = g[residues(gamma.elems, lat)]
    return out


def _gather(samples, config, gamma, zero, want_medians):
    ghat = _ghat_list(samples, config)
    theta = zero.theta_zero
    threshold = config.nu * config.L
    M = config.shared_M
    if M is not None:
        if not gamma.dim * (M - 1) ** 2 < 2**62:
            raise ParameterError("lattice size too large for int64 residues")
        zmat = np.vstack([lat.z for lat in config.lattices])
        hits, medians = _kernels.detect_gather(
            gamma.elems % M, zmat, M, np.vstack(ghat), theta, threshold,
            want_medians)
    else:
        vals = np.empty((len(gamma), config.L), dtype=np.complex128)
        for col, (g, lat) in enumerate(zip(ghat, config.lattices)):
            vals[:, col] = g[residues(gamma.elems, lat)]
        hits = np.sum(np.abs(vals) > theta, axis=1).astype(np.int64)
        medians = np.zeros(len(gamma), dtype=np.complex128)
        if want_medians:
            det = hits >= threshold
            if np.any(det):
                sel = vals[det]
                medians[det] = np.median(sel.real, axis=1) + 1j * np.median(
                    sel.imag, axis=1)
    return hits, medians, threshold


def detect_frequencies(samples, config, gamma, zero=None):
    """Classification only: keep k when its nonzero count reaches nu*L."""
    if zero is None:
        zero = default_zero_test(samples)
    hits, _, threshold = _gather(samples, config, gamma, zero, False)
    detected_idx = np.flatnonzero(hits >= threshold)
    return DetectionResult(gamma, hits, detected_idx, None, zero.theta_zero)


def detect_and_compute(samples, config, gamma, zero=None):
    """Classification plus coefficient medians (nu = 1/2, odd L)."""
    if config.nu != 0.5:
        raise ParameterError("coefficient computation requires nu = 1/2")
    if config.L % 2 == 0:
        raise ParameterError("coefficient computation requires odd L")
    if zero is None:
        zero = default_zero_test(samples)
    hits, medians, threshold = _gather(samples, config, gamma, zero, True)
    detected_idx = np.flatnonzero(hits >= threshold)
    return DetectionResult(gamma, hits, detected_idx, medians[detected_idx],
                           zero.theta_zero)


def detect_topk(samples, config, gamma, s_tilde, theta, zero=None):
    """detect_and_compute filtered to |coeff| >= theta, then the s_tilde largest.

    Ties at the cutoff magnitude break by ascending lexicographic frequency
    order, so replays are deterministic.
    """
    s_tilde = int(s_tilde)
    if s_tilde < 0:
        raise ParameterError("s_tilde must be >= 0")
    if theta < 0:
        raise ParameterError("theta must be >= 0")
    result = detect_and_compute(samples, config, gamma, zero=zero)
    keep = np.abs(result.coeffs) >= theta
    idx = result.detected_idx[keep]
    coeffs = result.coeffs[keep]
    if idx.size > s_tilde:
        elems = result.candidates.elems[idx]
        keys = tuple(elems[:, j] for j in range(elems.shape[1] - 1, -1, -1))
        order = np.lexsort(keys + (-np.abs(coeffs),))[:s_tilde]
        order = np.sort(order)  # back to lexicographic candidate order
        idx = idx[order]
        coeffs = coeffs[order]
    return DetectionResult(result.candidates, result.hits, idx, coeffs,
                           result.theta_zero)


def postprocess_r1l(result, samples, config, zero=None):
    """Refine coefficients using lattices where a frequency is collision-free.

    For k in the detected set, every lattice on which no other detected
    frequency shares k's residue yields the exact coefficient of the
    polynomial restricted to the detected set; those values are averaged.
    Frequencies without any collision-free lattice keep their median as a
    fall-back.  Values at or below the zero threshold are dropped, which is
    what removes residue-isolated false positives.
    """
    if zero is None:
        zero = ZeroTest(result.theta_zero)
    n = len(result.detected)
    if n == 0:
        return result
    vals = per_lattice_coefficients(samples, config, result.detected)
    refined = np.array(result.coeffs, dtype=np.complex128)
    unique_count = np.zeros(n, dtype=np.int64)
    unique_sum = np.zeros(n, dtype=np.complex128)
    for col, lat in enumerate(config.lattices):
        res = residues(result.detected.elems, lat)
        counts = np.bincount(res, minlength=lat.M)
        is_unique = counts[res] == 1
        unique_count += is_unique
        unique_sum[is_unique] += vals[is_unique, col]
    has_unique = unique_count > 0
    refined[has_unique] = unique_sum[has_unique] / unique_count[has_unique]
    keep = np.abs(refined) > zero.theta_zero
    return DetectionResult(result.candidates, result.hits,
                           result.detected_idx[keep], refined[keep],
                           result.theta_zero)


def format_detection(result):
    """CLI text form: components, Re, Im, hit count, one line per frequency."""
    lines = []
    has_coeffs = result.coeffs is not None
    for i, idx in enumerate(result.detected_idx):
        row = result.candidates.elems[idx]
        comps = " ".join(str(int(v)) for v in row)
        c = complex(result.coeffs[i]) if has_coeffs else 0j
        lines.append(f"{comps} {float(c.real)!r} {float(c.imag)!r} {int(result.hits[idx])}")
    return "\n".join(lines) + ("\n" if lines else "")
