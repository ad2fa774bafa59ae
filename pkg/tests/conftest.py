"""Shared test fixtures and independent reference oracles.

The oracles here deliberately avoid the library's production code paths:
the naive DFT is the quadratic sum, lattice sampling for oracle comparisons
evaluates the polynomial pointwise, and alias sets are enumerated by testing
the dual-lattice congruence directly.
"""

import numpy as np
import pytest


def naive_dft(x):
    """Quadratic-time normalized DFT: the reference for the fft-backed kernel."""
    x = np.asarray(x, dtype=np.complex128)
    M = len(x)
    j = np.arange(M)
    F = np.exp(-2j * np.pi * np.outer(j, j) / M)
    return (F @ x) / M


def pointwise_lattice_samples(poly, lat):
    """Sample a sparse polynomial on lattice nodes by direct summation."""
    vals = np.empty(lat.M, dtype=np.complex128)
    z = np.asarray(lat.z, dtype=np.float64)
    for j in range(lat.M):
        x = (j * z / lat.M) % 1.0
        vals[j] = np.sum(poly.coeffs
                         * np.exp(2j * np.pi * (poly.support.elems @ x)))
    return vals


def alias_set(k, support_elems, z, M):
    """{h in support : (h - k) . z = 0 mod M}, by direct congruence tests."""
    k = np.asarray(k, dtype=np.int64)
    out = []
    for h in support_elems:
        if int(np.dot(h - k, z)) % M == 0:
            out.append(tuple(int(v) for v in h))
    return out


def alias_oracle(gamma, poly, config, theta_zero):
    """Hits, detected mask, and medians straight from the aliasing formula."""
    n = len(gamma)
    L = config.L
    vals = np.zeros((n, L), dtype=np.complex128)
    for col, lat in enumerate(config.lattices):
        for i, k in enumerate(gamma.elems):
            for h, c in zip(poly.support.elems, poly.coeffs):
                if int(np.dot(h - k, lat.z)) % lat.M == 0:
                    vals[i, col] += c
    hits = np.sum(np.abs(vals) > theta_zero, axis=1)
    detected = hits >= config.nu * L
    medians = np.median(vals.real, axis=1) + 1j * np.median(vals.imag, axis=1)
    return hits, detected, medians


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
