"""Trigonometric-polynomial signal models and sampling oracles.

Covers the sparse polynomial p(x) = sum_k c_k exp(2 pi i k.x), random test
polynomials, black-box sampling oracles with evaluation counters, the
periodized B-splines N_m normalized to unit L2 norm, and the ten-variate
B-spline test function built from three tensor-product summands.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .freqset import FreqSet
from .lattice import residues

_EVAL_CHUNK = 4096


class SparsePoly:
    """Frequency support plus nonzero complex coefficients, kept aligned."""

    __slots__ = ("support", "coeffs")

    def __init__(self, support, coeffs):
        if not isinstance(support, FreqSet):
            raise ParameterError("support must be a FreqSet")
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (len(support),):
            raise ParameterError(
                "need exactly one coefficient per support frequency")
        if len(support) and np.any(coeffs == 0):
            raise ParameterError("coefficients must be nonzero")
        coeffs.setflags(write=False)
        self.support = support
        self.coeffs = coeffs

    @classmethod
    def from_dict(cls, dim, mapping):
        support = FreqSet(dim, list(mapping.keys()))
        coeffs = np.array([mapping[k] for k in support], dtype=np.complex128)
        return cls(support, coeffs)

    def as_dict(self):
        return {k: complex(c) for k, c in zip(self.support, self.coeffs)}

    @property
    def dim(self):
        return self.support.dim

    def __len__(self):
        return len(self.support)


def evaluate(p, x):
    """p(x) by direct summation."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.dim,):
        raise ParameterError("point/polynomial dimension mismatch")
    phase = p.support.elems @ x
    return complex(np.sum(p.coeffs * np.exp(2j * np.pi * phase)))


def evaluate_many(p, X):
    """p at each row of an (m, d) array of points, chunked."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.complex128)
    K = p.support.elems.T
    for lo in range(0, X.shape[0], _EVAL_CHUNK):
        hi = min(lo + _EVAL_CHUNK, X.shape[0])
        phase = X[lo:hi] @ K
        out[lo:hi] = np.exp(2j * np.pi * phase) @ p.coeffs
    return out


def evaluate_on_lattice(p, lat):
    """p at all M lattice nodes at O(|I| d + M log M) cost.

    The node values are exactly the inverse DFT of the residue-binned
    coefficients: p(j z / M) = sum_h (sum_{k: k.z = h mod M} c_k) e^{2 pi i jh/M}.
    """
    res = residues(p.support.elems, lat)
    binned_re = np.bincount(res, weights=p.coeffs.real, minlength=lat.M)
    binned_im = np.bincount(res, weights=p.coeffs.imag, minlength=lat.M)
    return lat.M * np.fft.ifft(binned_re + 1j * binned_im)


class SamplingOracle:
    """Black-box point evaluator with a cumulative sample counter.

    ``fn`` maps an (m, d) array of torus points to m complex values.  An
    optional ``lattice_fn`` provides a structured fast path for whole-lattice
    sampling (it must agree with pointwise evaluation).  The counter is a
    plain int: confine one oracle to one thread.
    """

    __slots__ = ("fn", "dim", "lattice_fn", "count")

    def __init__(self, fn, dim, lattice_fn=None):
        self.fn = fn
        self.dim = int(dim)
        self.lattice_fn = lattice_fn
        self.count = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ParameterError("point/oracle dimension mismatch")
        self.count += 1
        return complex(self.fn(x[None, :])[0])

    def sample_many(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise ParameterError("points must be an (m, d) array")
        self.count += X.shape[0]
        return np.asarray(self.fn(X), dtype=np.complex128)

    def sample_lattice(self, lat):
        """All M node values of one lattice; prefers the structured path."""
        if lat.dim != self.dim:
            raise ParameterError("lattice/oracle dimension mismatch")
        if self.lattice_fn is not None:
            self.count += lat.M
            return np.asarray(self.lattice_fn(lat), dtype=np.complex128)
        from .lattice import lattice_nodes

        return self.sample_many(lattice_nodes(lat))


def oracle_from_poly(p, fast_lattice=True):
    lattice_fn = (lambda lat: evaluate_on_lattice(p, lat)) if fast_lattice else None
    return SamplingOracle(lambda X: evaluate_many(p, X), p.dim,
                          lattice_fn=lattice_fn)


def sample_on_lattice(oracle, lat, d=None):
    """Node values of one lattice through an oracle (advances its counter)."""
    if d is not None and d != lat.dim:
        raise ParameterError("dimension mismatch")
    return oracle.sample_lattice(lat)


def random_poly(I, rng, min_mag=1e-6):
    """Coefficients uniform on [-1,1)+[-1,1)i, rejected below min_mag."""
    if min_mag >= 1:
        raise ParameterError("min_mag must be < 1")
    n = len(I)
    coeffs = np.zeros(n, dtype=np.complex128)
    todo = np.arange(n)
    while todo.size:
        draw = rng.uniform(-1, 1, size=(todo.size, 2))
        vals = draw[:, 0] + 1j * draw[:, 1]
        coeffs[todo] = vals
        todo = todo[np.abs(vals) < min_mag]
    return SparsePoly(I, coeffs)


# ---------------------------------------------------------------------------
# periodized B-splines with unit L2 norm
# ---------------------------------------------------------------------------

_BSPLINE_NORM_CACHE = {}


def _sinc(t):
    out = np.ones_like(t)
    nz = t != 0
    out[nz] = np.sin(t[nz]) / t[nz]
    return out


def bspline_norm_constant(m):
    """C_m = (sum_k sinc(pi k/m)^{2m})^{-1/2} by truncated summation.

    The summand decays like (m/(pi k))^{2m}, so the horizon
    |k| <= max(1e5, 1000 m) leaves a tail far below 1e-10.
    """
    m = int(m)
    if m < 1:
        raise ParameterError("spline order must be >= 1")
    if m not in _BSPLINE_NORM_CACHE:
        horizon = max(100_000, 1000 * m)
        k = np.arange(1, horizon + 1, dtype=np.float64)
        s = _sinc(np.pi * k / m) ** (2 * m)
        total = 1.0 + 2.0 * float(np.sum(s[::-1]))
        _BSPLINE_NORM_CACHE[m] = total ** -0.5
    return _BSPLINE_NORM_CACHE[m]


def bspline_coeff(m, k):
    """Fourier coefficient C_m sinc(pi k/m)^m (-1)^k of the order-m spline."""
    return float(bspline_coeffs(m, np.asarray([k]))[0])


def bspline_coeffs(m, ks):
    ks = np.asarray(ks, dtype=np.int64)
    c = bspline_norm_constant(m)
    vals = c * _sinc(np.pi * ks / m) ** m
    vals[ks % 2 == 1] *= -1.0
    return vals


def _cardinal_bspline(m, t):
    """Centered cardinal B-spline of order m (support [-m/2, m/2])."""
    t = np.asarray(t, dtype=np.float64)
    acc = np.zeros_like(t)
    for j in range(m + 1):
        u = t + m / 2.0 - j
        acc += (-1.0) ** j * math.comb(m, j) * np.where(u > 0, u ** (m - 1), 0.0)
    return acc / math.gamma(m)


def bspline_values(m, x):
    """N_m at torus points x, via the closed piecewise-polynomial form.

    The Fourier series sums, by Poisson summation, to the periodization of
    the centered cardinal B-spline scaled to unit period; the alternating
    signs center the bump at x = 1/2.
    """
    x = np.asarray(x, dtype=np.float64)
    u = x - np.floor(x) - 0.5
    return bspline_norm_constant(m) * m * _cardinal_bspline(m, m * u)


def bspline_values_series_on_grid(m, n, horizon=None):
    """N_m at the grid j/n, j = 0..n-1, by direct Fourier summation.

    On a uniform grid the series can be summed exactly by folding
    coefficients into their bins mod n, so the horizon can be pushed far
    enough (default 2^27) that even the slowly decaying m = 2 tail drops
    below 1e-8.  This is the cross-check route for the piecewise form.
    """
    if horizon is None:
        horizon = 1 << 27
    c = bspline_norm_constant(m)
    binned = np.zeros(n)
    binned[0] = c
    chunk = 1 << 22
    for start in range(1, horizon + 1, chunk):
        ks = np.arange(start, min(start + chunk, horizon + 1), dtype=np.float64)
        vals = c * _sinc(np.pi * ks / m) ** m
        vals[ks.astype(np.int64) % 2 == 1] *= -1.0
        idx = ks.astype(np.int64) % n
        binned += np.bincount(idx, weights=vals, minlength=n)
        binned += np.bincount((-idx) % n, weights=vals, minlength=n)
    return n * np.fft.ifft(binned).real


# ---------------------------------------------------------------------------
# the ten-variate B-spline test function
# ---------------------------------------------------------------------------

#: (axes, spline order) of the three tensor-product summands (0-based axes)
F10_GROUPS = (((0, 2, 7), 2), ((1, 4, 5, 9), 4), ((3, 6, 8), 6))
F10_DIM = 10


def f10_values(X):
    """Test-function values at an (m, 10) array of torus points."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != F10_DIM:
        raise ParameterError("points must be an (m, 10) array")
    total = np.zeros(X.shape[0])
    for axes, m in F10_GROUPS:
        prod = np.ones(X.shape[0])
        for a in axes:
            prod *= bspline_values(m, X[:, a])
        total += prod
    return total


def f10_oracle():
    return SamplingOracle(lambda X: f10_values(X).astype(np.complex128),
                          F10_DIM)


def f10_coeffs(elems):
    """Exact Fourier coefficients of the test function for (n, 10) indices.

    A summand supported on a group of axes contributes only where all
    off-group components vanish; the groups are pairwise disjoint, so at
    most one summand contributes except at k = 0.
    """
    elems = np.asarray(elems, dtype=np.int64)
    if elems.ndim != 2 or elems.shape[1] != F10_DIM:
        raise ParameterError("indices must be an (n, 10) array")
    out = np.zeros(elems.shape[0])
    for axes, m in F10_GROUPS:
        off = [a for a in range(F10_DIM) if a not in axes]
        mask = np.all(elems[:, off] == 0, axis=1)
        if not np.any(mask):
            continue
        prod = np.ones(int(mask.sum()))
        for a in axes:
            prod *= bspline_coeffs(m, elems[mask, a])
        out[mask] += prod
    return out


def f10_coeff(k):
    k = np.asarray(k, dtype=np.int64)
    if k.shape != (F10_DIM,):
        raise ParameterError("index must have 10 components")
    return float(f10_coeffs(k[None, :])[0])


def f10_sq_norm():
    """Squared L2 norm, in closed form over the three summands.

    Each summand has unit norm; the only cross-term overlap is at k = 0,
    where summand coefficients are products of the normalization constants.
    """
    c = {m: bspline_norm_constant(m) for _, m in F10_GROUPS}
    at_zero = [c[m] ** len(axes) for axes, m in F10_GROUPS]
    total = float(len(F10_GROUPS))
    for i in range(len(at_zero)):
        for j in range(i + 1, len(at_zero)):
            total += 2.0 * at_zero[i] * at_zero[j]
    return total


def rel_l2_error(I, coeffs, f_sq_norm, f_coeff_fn):
    """Relative L2 distance of sum_{k in I} coeffs_k e^{2 pi i k.x} to f.

    Evaluates sqrt(|f|^2 - sum_{k in I} |f_k|^2 + sum_{k in I} |c_k - f_k|^2)
    normalized by |f|; tiny negative radicands (roundoff) clamp to zero.
    """
    if f_sq_norm <= 0:
        raise ParameterError("f_sq_norm must be positive")
    if isinstance(coeffs, dict):
        coeffs = np.array([coeffs[k] for k in I], dtype=np.complex128)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if coeffs.shape != (len(I),):
        raise ParameterError("need one coefficient per frequency")
    if len(I):
        fk = np.asarray(f_coeff_fn(I.elems), dtype=np.complex128)
        radicand = (f_sq_norm - float(np.sum(np.abs(fk) ** 2))
                    + float(np.sum(np.abs(coeffs - fk) ** 2)))
    else:
        radicand = f_sq_norm
    if radicand < -1e-12 * f_sq_norm:
        raise ParameterError(f"negative radicand {radicand} in error formula")
    return math.sqrt(max(radicand, 0.0) / f_sq_norm)


# ---------------------------------------------------------------------------
# text serialization: frequency-set format plus Re/Im columns
# ---------------------------------------------------------------------------

def format_poly(p):
    lines = [f"d={p.dim} n={len(p)}"]
    for row, c in zip(p.support.elems, p.coeffs):
        comps = " ".join(str(int(v)) for v in row)
        lines.append(f"{comps} {float(c.real)!r} {float(c.imag)!r}")
    return "\n".join(lines) + "\n"


def save_poly(p, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_poly(p))


def parse_poly(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty polynomial file")
    header = dict(part.split("=", 1) for part in lines[0].split())
    d = int(header["d"])
    n = int(header["n"])
    elems = np.zeros((n, d), dtype=np.int64)
    coeffs = np.zeros(n, dtype=np.complex128)
    for i, ln in enumerate(lines[1:n + 1]):
        parts = ln.split()
        elems[i] = [int(v) for v in parts[:d]]
        coeffs[i] = float(parts[d]) + 1j * float(parts[d + 1])
    order = np.lexsort(elems.T[::-1])
    return SparsePoly(FreqSet(d, elems[order], _sorted=True), coeffs[order])


def load_poly(path):
    with open(path, "r", encoding="ascii") as fh:
        return parse_poly(fh.read())
