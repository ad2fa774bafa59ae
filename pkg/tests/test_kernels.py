"""Backend equivalence: the compiled core must reproduce the numpy fallback."""

import numpy as np
import pytest

from latfft import _kernels
from latfft._kernels import fallback

compiled = pytest.mark.skipif(_kernels._core is None,
                              reason="compiled kernels not built")


@compiled
class TestCompiledMatchesFallback:
    def test_hc_count_and_enumerate(self, rng):
        for _ in range(8):
            d = int(rng.integers(1, 5))
            N = int(rng.integers(2, 12))
            w = rng.uniform(0.4, 2.5, size=d)
            nc = _kernels._core.hc_count(d, float(N), w)
            nf = fallback.hc_count(d, float(N), w)
            assert nc == nf
            ec = _kernels._core.hc_enumerate(d, float(N), w)
            ef = fallback.hc_enumerate(d, float(N), w)
            assert np.array_equal(ec, ef)

    def test_rows_injective(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 200))
            d = int(rng.integers(1, 5))
            elems = rng.integers(-100, 100, size=(n, d))
            p = int(rng.integers(2, 60))
            got = _kernels._core.rows_injective_mod(
                np.ascontiguousarray(elems), p)
            assert got in (0, 1)
            assert bool(got) == fallback.rows_injective_mod(elems, p)

    def test_rows_injective_unencodable_signals(self):
        elems = np.arange(20, dtype=np.int64).reshape(2, 10)
        assert _kernels._core.rows_injective_mod(elems, 10**7) == -1
        assert fallback.rows_injective_mod(elems, 10**7)

    def test_detect_gather(self, rng):
        for want_medians in (False, True):
            n, d, M = 300, 3, 31
            L = 7
            elems = rng.integers(0, M, size=(n, d))
            zmat = rng.integers(0, M, size=(L, d))
            ghat = (rng.normal(size=(L, M)) + 1j * rng.normal(size=(L, M)))
            ghat[rng.random(size=(L, M)) < 0.6] = 0.0
            args = (elems, zmat, M, ghat, 1e-9, 3.5, want_medians)
            hc, mc = _kernels._core.detect_gather(
                np.ascontiguousarray(elems), np.ascontiguousarray(zmat), M,
                np.ascontiguousarray(ghat), 1e-9, 3.5, want_medians)
            hf, mf = fallback.detect_gather(*args)
            assert np.array_equal(hc, hf)
            assert np.array_equal(mc, mf)


class TestDispatcher:
    def test_reports_backend(self):
        assert _kernels.BACKEND in ("compiled", "python")

    def test_injective_dispatch_wide_rows(self):
        elems = np.arange(20, dtype=np.int64).reshape(2, 10)
        assert _kernels.rows_injective_mod(elems, 10**7)
        stacked = np.vstack([elems, elems])
        assert not _kernels.rows_injective_mod(stacked, 10**7)

    def test_median_requires_odd_L(self, rng):
        elems = rng.integers(0, 11, size=(5, 2))
        zmat = rng.integers(0, 11, size=(4, 2))
        ghat = np.zeros((4, 11), dtype=complex)
        with pytest.raises(ValueError):
            _kernels.detect_gather(elems, zmat, 11, ghat, 0.0, 2.0, True)

    def test_gather_matches_direct_computation(self, rng):
        n, d, M, L = 100, 2, 17, 5
        elems = rng.integers(0, M, size=(n, d))
        zmat = rng.integers(0, M, size=(L, d))
        ghat = rng.normal(size=(L, M)) + 1j * rng.normal(size=(L, M))
        hits, med = _kernels.detect_gather(elems, zmat, M, ghat, 0.5, 2.5,
                                           True)
        res = (elems @ zmat.T) % M
        vals = ghat[np.arange(L)[None, :], res]
        want_hits = np.sum(np.abs(vals) > 0.5, axis=1)
        assert np.array_equal(hits, want_hits)
        det = want_hits >= 2.5
        want_med = np.zeros(n, dtype=complex)
        want_med[det] = (np.median(vals[det].real, axis=1)
                         + 1j * np.median(vals[det].imag, axis=1))
        assert np.allclose(med, want_med, atol=0, rtol=0)
