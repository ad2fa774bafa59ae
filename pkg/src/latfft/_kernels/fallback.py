"""Numpy implementations of the hot kernels.

These are the reference semantics for the compiled core in ``_core.pyx``:
both backends must produce identical results on identical inputs (the
equivalence is asserted in tests/test_kernels.py).  Everything here is
vectorized but allocates O(chunk * L) temporaries, whereas the compiled
core streams row by row.
"""

import numpy as np

_GATHER_CHUNK = 1 << 16


def _axis_cap(bound, prods, w):
    """Largest K >= 0 per prefix with prods * max(1, w*K) <= bound.

    Computed by float division and then corrected by direct comparison so
    that the criterion is exactly ``prods * max(1.0, w * K) <= bound``.
    """
    k = np.floor((bound / prods) / w).astype(np.int64)
    np.maximum(k, 0, out=k)
    # fix up boundary rounding of the division
    too_big = prods * np.maximum(1.0, w * k) > bound
    while np.any(too_big):
        k[too_big] -= 1
        too_big = (k > 0) & (prods * np.maximum(1.0, w * k) > bound)
    grows = prods * np.maximum(1.0, w * (k + 1)) <= bound
    while np.any(grows):
        k[grows] += 1
        grows = prods * np.maximum(1.0, w * (k + 1)) <= bound
    return k


def hc_count(d, bound, weights):
    """Cardinality of {k in Z^d : prod_t max(1, w_t |k_t|) <= bound}."""
    prods = np.ones(1)
    for t in range(d - 1):
        w = float(weights[t])
        caps = _axis_cap(bound, prods, w)
        prods = np.repeat(prods, 2 * caps + 1)
        ks = _ragged_ranges(caps)
        prods = prods * np.maximum(1.0, w * np.abs(ks).astype(np.float64))
    caps = _axis_cap(bound, prods, float(weights[d - 1]))
    return int(np.sum(2 * caps + 1))


def _ragged_ranges(caps):
    """Concatenate ranges -K..K for each K in caps."""
    reps = 2 * caps + 1
    total = int(reps.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    starts = np.zeros(len(caps), dtype=np.int64)
    starts[1:] = np.cumsum(reps)[:-1]
    idx = np.arange(total, dtype=np.int64)
    local = idx - np.repeat(starts, reps)
    return local - np.repeat(caps, reps)


def hc_enumerate(d, bound, weights):
    """Enumerate the weighted hyperbolic cross in lexicographic row order."""
    prefixes = np.zeros((1, 0), dtype=np.int64)
    prods = np.ones(1)
    for t in range(d):
        w = float(weights[t])
        caps = _axis_cap(bound, prods, w)
        reps = 2 * caps + 1
        prefixes = np.repeat(prefixes, reps, axis=0)
        prods = np.repeat(prods, reps)
        ks = _ragged_ranges(caps)
        prefixes = np.column_stack([prefixes, ks])
        if t < d - 1:
            prods = prods * np.maximum(1.0, w * np.abs(ks).astype(np.float64))
    return np.ascontiguousarray(prefixes)


def _pack_rows(reduced, p):
    """Pack rows of residues in [0, p) into as few int64 codes as possible."""
    n, d = reduced.shape
    per_code = max(1, int(62 // max(1.0, np.log2(p))))
    cols = []
    for start in range(0, d, per_code):
        code = np.zeros(n, dtype=np.int64)
        for j in range(start, min(start + per_code, d)):
            code = code * p + reduced[:, j]
        cols.append(code)
    return cols


def rows_injective_mod(elems, p):
    """True iff componentwise reduction of the rows mod p has no collision."""
    reduced = elems % p
    cols = _pack_rows(reduced, int(p))
    if len(cols) == 1:
        s = np.sort(cols[0])
        return not bool(np.any(s[1:] == s[:-1]))
    order = np.lexsort(cols[::-1])
    equal = np.ones(len(cols[0]) - 1, dtype=bool)
    for c in cols:
        cs = c[order]
        equal &= cs[1:] == cs[:-1]
    return not bool(np.any(equal))


def detect_gather(elems, zmat, M, ghat, theta, hit_threshold, want_medians):
    """Per-candidate hit counts and (optionally) coefficient medians.

    elems must be pre-reduced mod M; ghat is the (L, M) array of normalized
    per-lattice DFT outputs.  Returns (hits, medians) where medians[i] is 0
    for rows whose hit count is below hit_threshold.
    """
    n = elems.shape[0]
    L = zmat.shape[0]
    hits = np.zeros(n, dtype=np.int64)
    medians = np.zeros(n, dtype=np.complex128)
    lat_idx = np.arange(L)[None, :]
    for lo in range(0, n, _GATHER_CHUNK):
        hi = min(lo + _GATHER_CHUNK, n)
        res = (elems[lo:hi] @ zmat.T) % M
        vals = ghat[lat_idx, res]
        h = np.sum(np.abs(vals) > theta, axis=1)
        hits[lo:hi] = h
        if want_medians:
            det = h >= hit_threshold
            if np.any(det):
                sel = vals[det]
                medians[lo:hi][det] = np.median(sel.real, axis=1) + 1j * np.median(
                    sel.imag, axis=1
                )
    return hits, medians
