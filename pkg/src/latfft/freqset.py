"""Frequency index sets: generation, set algebra, and serialization.

Sets of integer multi-indices are the common currency of the whole library:
candidate sets, supports, coordinate projections, and the structured index
families (full grids, weighted hyperbolic crosses).  A :class:`FreqSet` holds
its elements as a lexicographically sorted, duplicate-free ``(n, d)`` int64
array, which makes iteration order deterministic and membership O(1) after a
lazily built hash index.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import CapacityError, ParameterError

#: refuse to materialize index sets above this many elements by default
DEFAULT_ELEMENT_CAP = 50_000_000


def _as_rows(elems, dim=None):
    arr = np.asarray(elems, dtype=np.int64)
    if arr.size == 0:
        if dim is None:
            raise ParameterError("cannot infer dimension from an empty array")
        return np.zeros((0, dim), dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ParameterError("frequency data must be a 2-d array of integers")
    return np.ascontiguousarray(arr)


def _pack_codes(arr, lo, hi):
    """Rows packed into single int64 codes preserving lexicographic order,
    or None when the component ranges do not fit into 62 bits."""
    spans = (hi - lo + 1).astype(np.float64)
    if np.sum(np.log2(spans)) >= 62.0:
        return None
    codes = np.zeros(arr.shape[0], dtype=np.int64)
    for j in range(arr.shape[1]):
        codes *= int(spans[j])
        codes += arr[:, j] - lo[j]
    return codes


def _canonicalize(arr):
    """Sort rows lexicographically (first column primary) and drop duplicates."""
    if arr.shape[0] == 0:
        return arr
    codes = _pack_codes(arr, arr.min(axis=0), arr.max(axis=0))
    if codes is not None:
        order = np.argsort(codes, kind="stable")
        sc = codes[order]
        keep = np.empty(arr.shape[0], dtype=bool)
        keep[0] = True
        np.not_equal(sc[1:], sc[:-1], out=keep[1:])
        return np.ascontiguousarray(arr[order[keep]])
    order = np.lexsort(arr.T[::-1])
    arr = arr[order]
    if arr.shape[0] > 1:
        keep = np.empty(arr.shape[0], dtype=bool)
        keep[0] = True
        np.any(arr[1:] != arr[:-1], axis=1, out=keep[1:])
        arr = arr[keep]
    return np.ascontiguousarray(arr)


def _rows_in(rows, pool):
    """Boolean mask: which rows (n, d) occur among pool rows (m, d)."""
    if pool.shape[0] == 0 or rows.shape[0] == 0:
        return np.zeros(rows.shape[0], dtype=bool)
    lo = np.minimum(rows.min(axis=0), pool.min(axis=0))
    hi = np.maximum(rows.max(axis=0), pool.max(axis=0))
    a = _pack_codes(rows, lo, hi)
    if a is not None:
        return np.isin(a, _pack_codes(pool, lo, hi))
    dt = np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))
    a = np.ascontiguousarray(rows).view(dt).ravel()
    b = np.ascontiguousarray(pool).view(dt).ravel()
    return np.isin(a, b)


class FreqSet:
    """Finite, duplicate-free set of frequency vectors in Z^d."""

    __slots__ = ("dim", "elems", "_index")

    def __init__(self, dim, elems=(), *, _sorted=False):
        dim = int(dim)
        if dim < 1:
            raise ParameterError("dimension must be >= 1")
        arr = _as_rows(list(elems) if not isinstance(elems, np.ndarray) else elems,
                       dim)
        if arr.size == 0:
            arr = arr.reshape(0, dim)
        if arr.shape[1] != dim:
            raise ParameterError(
                f"elements have {arr.shape[1]} components, expected {dim}")
        if not _sorted:
            arr = _canonicalize(arr)
        arr.setflags(write=False)
        self.dim = dim
        self.elems = arr
        self._index = None

    @classmethod
    def from_array(cls, arr, *, _sorted=False):
        arr = _as_rows(arr)
        return cls(arr.shape[1], arr, _sorted=_sorted)

    def __len__(self):
        return self.elems.shape[0]

    def __iter__(self):
        for row in self.elems:
            yield tuple(int(v) for v in row)

    def __contains__(self, k):
        if self._index is None:
            self._index = {row.tobytes(): i for i, row in enumerate(self.elems)}
        key = np.asarray(k, dtype=np.int64)
        if key.shape != (self.dim,):
            return False
        return key.tobytes() in self._index

    def __eq__(self, other):
        if not isinstance(other, FreqSet):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.elems, other.elems)

    def __hash__(self):
        return hash((self.dim, self.elems.tobytes()))

    def __repr__(self):
        return f"FreqSet(dim={self.dim}, n={len(self)})"

    def contains_rows(self, rows):
        """Vectorized membership mask for an (m, d) integer array."""
        rows = _as_rows(rows, self.dim)
        return _rows_in(rows, self.elems)

    def union(self, other):
        if other.dim != self.dim:
            raise ParameterError("dimension mismatch in union")
        return FreqSet(self.dim, np.vstack([self.elems, other.elems]))

    def intersection(self, other):
        mask = self.contains_rows(other.elems)
        return FreqSet(self.dim, other.elems[mask], _sorted=True)

    def difference(self, other):
        mask = other.contains_rows(self.elems)
        return FreqSet(self.dim, self.elems[~mask], _sorted=True)


class Box:
    """Implicit integer cube [lo, hi]^d used where a full grid would be too
    large to materialize (candidate descriptions, random-subset populations).
    """

    __slots__ = ("dim", "lo", "hi")

    def __init__(self, dim, lo, hi):
        if dim < 1:
            raise ParameterError("dimension must be >= 1")
        if hi < lo:
            raise ParameterError("empty box")
        self.dim = int(dim)
        self.lo = int(lo)
        self.hi = int(hi)

    @property
    def size(self):
        return (self.hi - self.lo + 1) ** self.dim

    def __len__(self):
        return self.size

    def __repr__(self):
        return f"Box(dim={self.dim}, lo={self.lo}, hi={self.hi})"

    def project_1d(self, axis):
        if not 0 <= axis < self.dim:
            raise ParameterError(f"axis {axis} out of range for dim {self.dim}")
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def contains_rows(self, rows):
        rows = _as_rows(rows)
        return np.all((rows >= self.lo) & (rows <= self.hi), axis=1)

    def materialize(self, cap=DEFAULT_ELEMENT_CAP):
        n = self.size
        if n > cap:
            raise CapacityError(
                f"grid with {n} elements exceeds the cap of {cap}")
        side = np.arange(self.lo, self.hi + 1, dtype=np.int64)
        m = len(side)
        elems = np.empty((n, self.dim), dtype=np.int64)
        for j in range(self.dim):
            inner = m ** (self.dim - 1 - j)
            elems[:, j] = np.tile(np.repeat(side, inner), m**j)
        return FreqSet(self.dim, elems, _sorted=True)


def full_grid(d, N, *, count_only=False, cap=DEFAULT_ELEMENT_CAP):
    """The cube [-N, N]^d, materialized unless count_only is set.

    Materialization of more than ``cap`` elements raises
    :class:`CapacityError`; the cardinality (2N+1)^d is always available via
    ``count_only=True``.
    """
    if d < 1 or N < 1:
        raise ParameterError("full_grid requires d >= 1 and N >= 1")
    box = Box(d, -N, N)
    if count_only:
        return box.size
    return box.materialize(cap)


def hyperbolic_cross(d, N, weights=None, *, count_only=False,
                     cap=DEFAULT_ELEMENT_CAP):
    """{k in Z^d : prod_t max(1, w_t |k_t|) <= N} with positive weights.

    The unweighted cross uses w_t = 1 for all t.  Enumeration recurses over
    coordinates with a per-coordinate bound derived from the accumulated
    weight product, so the set is never scanned out of a full grid.
    """
    if d < 1 or N < 1:
        raise ParameterError("hyperbolic_cross requires d >= 1 and N >= 1")
    if weights is None:
        weights = np.ones(d)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (d,):
        raise ParameterError(f"need {d} weights, got shape {weights.shape}")
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
        raise ParameterError("weights must be finite and positive")
    n = _kernels.hc_count(d, float(N), weights)
    if count_only:
        return n
    if n > cap:
        raise CapacityError(f"cross with {n} elements exceeds the cap of {cap}")
    elems = _kernels.hc_enumerate(d, float(N), weights)
    return FreqSet(d, elems, _sorted=True)


def random_subset(population, count, rng):
    """Uniform sample of ``count`` distinct frequencies from a FreqSet or Box."""
    count = int(count)
    if count < 0:
        raise ParameterError("count must be >= 0")
    if count > len(population):
        raise ParameterError(
            f"cannot draw {count} elements from a population of "
            f"{len(population)}")
    if isinstance(population, FreqSet):
        idx = rng.choice(len(population), size=count, replace=False)
        return FreqSet(population.dim, population.elems[np.sort(idx)],
                       _sorted=True)
    if isinstance(population, Box):
        return _random_from_box(population, count, rng)
    raise ParameterError(f"unsupported population type {type(population)!r}")


def _random_from_box(box, count, rng):
    # rejection on duplicates; for the intended regimes count << box.size,
    # so a handful of top-up rounds suffice
    rows = np.empty((0, box.dim), dtype=np.int64)
    need = count
    while need > 0:
        batch = rng.integers(box.lo, box.hi + 1,
                             size=(int(need * 1.05) + 16, box.dim),
                             dtype=np.int64)
        rows = _canonicalize(np.vstack([rows, batch]))
        if len(rows) > count:
            keep = np.sort(rng.choice(len(rows), size=count, replace=False))
            rows = rows[keep]
        need = count - len(rows)
    return FreqSet(box.dim, rows, _sorted=True)


def expansion(S):
    """Max over coordinates of (coordinate max - coordinate min)."""
    if len(S) == 0:
        raise ParameterError("expansion of an empty set is undefined")
    return int(np.max(S.elems.max(axis=0) - S.elems.min(axis=0)))


def project(S, axes):
    """Restrict every frequency to the given coordinate axes (0-based)."""
    axes = list(axes)
    if not axes:
        raise ParameterError("projection needs at least one axis")
    for a in axes:
        if not 0 <= a < S.dim:
            raise ParameterError(f"axis {a} out of range for dim {S.dim}")
    return FreqSet(len(axes), S.elems[:, axes])


def reduce_mod(S, M):
    """Componentwise representative in {0, ..., M-1}^d, deduplicated."""
    M = int(M)
    if M < 1:
        raise ParameterError("modulus must be >= 1")
    return FreqSet(S.dim, S.elems % M)


# ---------------------------------------------------------------------------
# text serialization: "d=<d> n=<count>" header, one frequency per line
# ---------------------------------------------------------------------------

def save_freqset(S, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_freqset(S))


def format_freqset(S):
    lines = [f"d={S.dim} n={len(S)}"]
    for row in S.elems:
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def load_freqset(path):
    with open(path, "r", encoding="ascii") as fh:
        return parse_freqset(fh.read())


def parse_freqset(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty frequency-set file")
    header = dict(part.split("=", 1) for part in lines[0].split())
    d = int(header["d"])
    n = int(header["n"])
    body = lines[1:]
    if len(body) != n:
        raise ParameterError(
            f"header promises {n} frequencies, file has {len(body)}")
    if n == 0:
        return FreqSet(d)
    elems = np.array([[int(v) for v in ln.split()[:d]] for ln in body],
                     dtype=np.int64)
    return FreqSet(d, elems)
