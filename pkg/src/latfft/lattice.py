"""Rank-1 lattices, admissible primes, and random multi-lattice configurations.

A rank-1 lattice is the point set {j*z/M mod 1 : j = 0..M-1} on the d-torus.
Configurations bundle L such lattices together with the decision threshold
``nu``, the oversampling factor ``c``, and the target failure probability
``delta``; drawing one fixes a shared prime size M just above c times the
target sparsity and samples the L generating vectors i.i.d. uniformly from
[0, M-1]^d (the all-zeros vector is deliberately admissible).
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import _kernels
from .errors import ParameterError

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin, exact for all 64-bit integers."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_above(x):
    """Smallest prime strictly greater than x."""
    n = int(math.floor(x)) + 1
    if n <= 2:
        return 2
    if n % 2 == 0:
        n += 1
    while not is_prime(n):
        n += 2
    return n


class Rank1Lattice:
    """Generating vector z (components in [0, M-1]) and lattice size M."""

    __slots__ = ("z", "M")

    def __init__(self, z, M):
        M = int(M)
        if M < 1:
            raise ParameterError("lattice size must be >= 1")
        z = np.asarray(z, dtype=np.int64) % M
        if z.ndim != 1:
            raise ParameterError("generating vector must be 1-d")
        z.setflags(write=False)
        self.z = z
        self.M = M

    @property
    def dim(self):
        return self.z.shape[0]

    def __repr__(self):
        return f"Rank1Lattice(z={self.z.tolist()}, M={self.M})"

    def __eq__(self, other):
        if not isinstance(other, Rank1Lattice):
            return NotImplemented
        return self.M == other.M and np.array_equal(self.z, other.z)


def lattice_nodes(lat, d=None):
    """All M nodes j*z/M mod 1, j = 0..M-1, as an (M, d) float array."""
    if d is not None and d != lat.dim:
        raise ParameterError(
            f"lattice has dimension {lat.dim}, requested {d}")
    j = np.arange(lat.M, dtype=np.int64)[:, None]
    return (j * lat.z[None, :] % lat.M) / lat.M


def residue(k, lat):
    """(k . z) mod M in [0, M-1], exact for negative components."""
    k = np.asarray(k, dtype=np.int64)
    if k.shape != (lat.dim,):
        raise ParameterError("frequency/lattice dimension mismatch")
    return int(np.dot(k % lat.M, lat.z) % lat.M)


def residues(elems, lat):
    """Vectorized residues for an (n, d) array of frequencies."""
    elems = np.asarray(elems, dtype=np.int64) % lat.M
    return (elems @ lat.z) % lat.M


def next_valid_prime(S, lower):
    """Smallest prime p > lower whose componentwise reduction keeps |S|.

    All primes above the expansion of S qualify, so the scan terminates.
    """
    if len(S) == 0:
        raise ParameterError("need a nonempty frequency set")
    elems = S.elems
    p = next_prime_above(lower)
    while not _kernels.rows_injective_mod(elems, p):
        p = next_prime_above(p)
    return p


def required_L(gamma_size, delta, nu=0.5, c=10.33, force_odd=True, L_scale=1.0):
    """Number of lattices needed for candidate-set size gamma_size.

    With nu = 1/2 and force_odd, the smallest odd n with
    n >= L_scale * 4c/((c-2) ln(c-1)) * (ln gamma_size - ln delta);
    general nu uses the prefactor c(c-2)/((c nu - 1)^2 ln(c-1)).
    """
    gamma_size = int(gamma_size)
    if gamma_size < 1:
        raise ParameterError("candidate-set size must be >= 1")
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    if not 0 < nu <= 0.5:
        raise ParameterError("nu must lie in (0, 1/2]")
    if c <= max(1.0 / nu, 2.0):
        raise ParameterError("need c > 1/nu and c > 2")
    if L_scale <= 0:
        raise ParameterError("L_scale must be positive")
    prefactor = c * (c - 2.0) / ((c * nu - 1.0) ** 2 * math.log(c - 1.0))
    value = L_scale * prefactor * (math.log(gamma_size) - math.log(delta))
    if force_odd:
        n = max(1, math.ceil(value))
        if n % 2 == 0:
            n += 1
        return n
    return max(1, math.ceil(value))


class MultiLatticeConfig:
    """L rank-1 lattices plus the detection parameters they were drawn for."""

    __slots__ = ("lattices", "nu", "c", "delta", "target_sparsity", "seed")

    def __init__(self, lattices, nu, c, delta, target_sparsity=None, seed=None):
        if not lattices:
            raise ParameterError("need at least one lattice")
        if not 0 < nu <= 0.5:
            raise ParameterError("nu must lie in (0, 1/2]")
        if c <= 1.0 / nu:
            raise ParameterError("need c > 1/nu")
        if not 0 < delta < 1:
            raise ParameterError("delta must lie in (0, 1)")
        dims = {lat.dim for lat in lattices}
        if len(dims) != 1:
            raise ParameterError("all lattices must share one dimension")
        if target_sparsity is not None:
            lam = c * target_sparsity
            for lat in lattices:
                if lat.M <= lam:
                    raise ParameterError(
                        f"lattice size {lat.M} does not exceed "
                        f"c*sparsity = {lam}")
        self.lattices = tuple(lattices)
        self.nu = float(nu)
        self.c = float(c)
        self.delta = float(delta)
        self.target_sparsity = target_sparsity
        self.seed = seed

    @property
    def L(self):
        return len(self.lattices)

    @property
    def dim(self):
        return self.lattices[0].dim

    @property
    def shared_M(self):
        """Common lattice size, or None when sizes differ."""
        sizes = {lat.M for lat in self.lattices}
        return sizes.pop() if len(sizes) == 1 else None

    @property
    def sizes(self):
        return [lat.M for lat in self.lattices]

    def __repr__(self):
        return (f"MultiLatticeConfig(L={self.L}, M={self.sizes[0]}, "
                f"nu={self.nu}, c={self.c}, delta={self.delta})")


def draw_config(S, sparsity, delta, nu=0.5, c=10.33, L_scale=1.0, rng=None,
                L=None, seed=None):
    """Random configuration for candidate set S and a target sparsity.

    One prime M = next_valid_prime(S, c*sparsity) is shared by all lattices;
    L defaults to required_L(|S|, delta, ...) and may be overridden (the
    experiment sweeps do).  Odd L is forced whenever nu = 1/2.
    """
    if sparsity < 1:
        raise ParameterError("sparsity must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    M = next_valid_prime(S, c * sparsity)
    if L is None:
        L = required_L(len(S), delta, nu=nu, c=c, force_odd=(nu == 0.5),
                       L_scale=L_scale)
    d = S.dim
    zmat = rng.integers(0, M, size=(int(L), d), dtype=np.int64)
    lattices = [Rank1Lattice(z, M) for z in zmat]
    return MultiLatticeConfig(lattices, nu, c, delta,
                              target_sparsity=sparsity, seed=seed)


def draw_config_with_sizes(sizes, d, nu, c, delta, rng, target_sparsity=None):
    """Per-lattice-size constructor (sizes need not coincide)."""
    lattices = []
    for M in sizes:
        z = rng.integers(0, int(M), size=d, dtype=np.int64)
        lattices.append(Rank1Lattice(z, int(M)))
    return MultiLatticeConfig(lattices, nu, c, delta,
                              target_sparsity=target_sparsity)


# ---------------------------------------------------------------------------
# JSON serialization (consumed by the CLI for replay)
# ---------------------------------------------------------------------------

def config_to_dict(config):
    return {
        "M": config.sizes,
        "L": config.L,
        "nu": config.nu,
        "c": config.c,
        "delta": config.delta,
        "seed": config.seed,
        "z": [lat.z.tolist() for lat in config.lattices],
    }


def save_config(config, path):
    with open(path, "w", encoding="ascii") as fh:
        json.dump(config_to_dict(config), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_config(path):
    with open(path, "r", encoding="ascii") as fh:
        data = json.load(fh)
    lattices = [Rank1Lattice(z, M) for z, M in zip(data["z"], data["M"])]
    return MultiLatticeConfig(lattices, data["nu"], data["c"], data["delta"],
                              seed=data.get("seed"))
