"""Worst-case detection accounting and the experiment harness.

A frequency can be misclassified only through aliasing, so running the
detector on the auxiliary polynomial with all coefficients equal to one
turns each recovered median into an exact alias count: an active frequency
whose median reaches 2 is a potential false negative (some coefficient
choice could cancel it), an inactive frequency whose median reaches 1 is a
potential false positive.  The experiment runner sweeps the lattice count L,
repeats seeded trials, and aggregates success rates against the theoretical
failure bound |Gamma| * (c-1)^(-L(c-2)/(4c)).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detect import detect_and_compute, postprocess_r1l
from .dimincr import SfftParams, sfft
from .errors import ParameterError
from .freqset import Box, FreqSet, hyperbolic_cross, random_subset
from .lattice import MultiLatticeConfig, Rank1Lattice, next_valid_prime
from .polyeval import (
    SparsePoly,
    f10_coeffs,
    f10_oracle,
    f10_sq_norm,
    oracle_from_poly,
    rel_l2_error,
)


def theoretical_failure_bound(gamma_size, L, c):
    """Upper bound on the failure probability at nu = 1/2 for L lattices."""
    if c <= 2:
        raise ParameterError("bound requires c > 2")
    return float(gamma_size) * (c - 1.0) ** (-L * (c - 2.0) / (4.0 * c))


def sample_budget(config):
    """Total sample count of a configuration (sum of lattice sizes)."""
    return int(sum(config.sizes))


def guaranteed_sample_budget(sparsity, gamma_size, delta):
    """Samples sufficient for recovery w.h.p.: 37 |I| (ln |Gamma| - ln delta)."""
    return 37.0 * sparsity * (math.log(gamma_size) - math.log(delta))


class PfpPfnOutcome:
    """Classification of one auxiliary-polynomial run."""

    __slots__ = ("pfn", "pfp", "anomalies", "detection", "samples")

    def __init__(self, pfn, pfp, anomalies, detection, samples):
        self.pfn = pfn
        self.pfp = pfp
        self.anomalies = anomalies
        self.detection = detection
        self.samples = samples


def pfp_pfn_count(I, gamma, config, tol=1e-6, zero=None):
    """Potential false negatives/positives of a configuration for support I.

    Runs the median detector on the all-ones polynomial over I.  Medians are
    exact alias counts, so they must be integers up to roundoff; any value
    farther than ``tol`` from an integer is counted as a numerical anomaly
    instead of being classified.
    """
    if len(I) == 0:
        raise ParameterError("support must be nonempty")
    aux = SparsePoly(I, np.ones(len(I)))
    oracle = oracle_from_poly(aux)
    samples = [oracle.sample_lattice(lat) for lat in config.lattices]
    det = detect_and_compute(samples, config, gamma, zero=zero)

    n = len(gamma)
    detected = np.zeros(n, dtype=bool)
    detected[det.detected_idx] = True
    medians = np.zeros(n, dtype=np.complex128)
    medians[det.detected_idx] = det.coeffs
    in_I = I.contains_rows(gamma.elems)

    rounded = np.rint(medians.real).astype(np.int64)
    integral = (np.abs(medians.real - rounded) <= tol) & (
        np.abs(medians.imag) <= tol)

    # active frequencies always survive (every per-lattice value counts the
    # frequency itself), so an undetected member of I is an anomaly
    anomalies = int(np.sum(in_I & ~detected))
    anomalies += int(np.sum(detected & ~integral))
    anomalies += int(np.sum(detected & ~in_I & integral & (rounded < 1)))
    anomalies += int(np.sum(detected & in_I & integral & (rounded < 1)))

    pfn_mask = in_I & detected & integral & (rounded >= 2)
    pfp_mask = ~in_I & detected & integral & (rounded >= 1)
    pfn = FreqSet(gamma.dim, gamma.elems[pfn_mask], _sorted=True)
    pfp = FreqSet(gamma.dim, gamma.elems[pfp_mask], _sorted=True)
    return PfpPfnOutcome(pfn, pfp, anomalies, det, samples)


@dataclass
class TrialRecord:
    seed: int
    L: int
    M: int
    pfn_count: int
    pfp_count: int
    success_plain: bool
    success_pfp_budget: dict
    success_postprocessed: bool
    sample_count: int
    wall_time: float
    anomalies: int = 0

    def as_jsonable(self):
        """Deterministic record for JSON-lines output (wall time excluded)."""
        return {
            "seed": self.seed,
            "L": self.L,
            "M": self.M,
            "pfn": self.pfn_count,
            "pfp": self.pfp_count,
            "success_plain": self.success_plain,
            "success_pfp_budget": {str(k): v
                                   for k, v in self.success_pfp_budget.items()},
            "success_postprocessed": self.success_postprocessed,
            "samples": self.sample_count,
            "anomalies": self.anomalies,
        }


@dataclass
class ExperimentSpec:
    """Declarative worst-case experiment: set generators, L sweep, M rule.

    ``redraw`` selects which objects are regenerated per trial: "both"
    redraws candidate set, support, and lattices (the random-sets protocol),
    "lattices" keeps the structured sets fixed and redraws only the
    generating vectors.
    """

    name: str
    candidates: dict
    support: dict
    L_values: list
    trials: int
    master_seed: int
    c: float = 10.33
    nu: float = 0.5
    delta: float = 0.5
    redraw: str = "both"
    pfp_budgets: tuple = (10, 100)
    postprocess: bool = True

    def as_dict(self):
        return {
            "name": self.name,
            "candidates": self.candidates,
            "support": self.support,
            "L_values": list(self.L_values),
            "trials": self.trials,
            "master_seed": self.master_seed,
            "c": self.c,
            "nu": self.nu,
            "delta": self.delta,
            "redraw": self.redraw,
            "pfp_budgets": list(self.pfp_budgets),
            "postprocess": self.postprocess,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data["pfp_budgets"] = tuple(data.get("pfp_budgets", (10, 100)))
        return cls(**data)


def _resolve_weights(spec, d):
    w = spec.get("weights")
    if w is None:
        return None
    if isinstance(w, str):
        if w != "t^1.08":
            raise ParameterError(f"unknown weight rule {w!r}")
        return np.arange(1, d + 1, dtype=np.float64) ** 1.08
    return np.asarray(w, dtype=np.float64)


def _make_candidates(spec, rng):
    kind = spec["kind"]
    if kind == "random-box":
        box = Box(spec["d"], spec["lo"], spec["hi"])
        return random_subset(box, spec["count"], rng)
    if kind == "hyperbolic":
        return hyperbolic_cross(spec["d"], spec["N"],
                                _resolve_weights(spec, spec["d"]))
    if kind == "grid":
        return Box(spec["d"], -spec["N"], spec["N"]).materialize()
    raise ParameterError(f"unknown candidate generator {kind!r}")


def _make_support(spec, gamma, rng):
    kind = spec["kind"]
    if kind == "random-subset":
        return random_subset(gamma, spec["count"], rng)
    if kind == "hyperbolic":
        d = gamma.dim
        return hyperbolic_cross(d, spec["N"], _resolve_weights(spec, d))
    raise ParameterError(f"unknown support generator {kind!r}")


def _trial(spec, L, trial, fixed):
    t0 = time.perf_counter()
    seed_seq = np.random.SeedSequence((spec.master_seed, L, trial))
    rng = np.random.default_rng(seed_seq)
    if fixed is None:
        gamma = _make_candidates(spec.candidates, rng)
        I = _make_support(spec.support, gamma, rng)
        M = next_valid_prime(gamma, spec.c * len(I))
    else:
        gamma, I, M = fixed
    d = gamma.dim
    zmat = rng.integers(0, M, size=(L, d), dtype=np.int64)
    config = MultiLatticeConfig([Rank1Lattice(z, M) for z in zmat],
                                spec.nu, spec.c, spec.delta,
                                target_sparsity=len(I))
    outcome = pfp_pfn_count(I, gamma, config)
    pfn_count, pfp_count = len(outcome.pfn), len(outcome.pfp)
    clean = outcome.anomalies == 0
    success_plain = clean and pfn_count == 0 and pfp_count == 0
    budgets = {b: clean and pfn_count == 0 and pfp_count <= b
               for b in spec.pfp_budgets}
    success_post = success_plain
    if spec.postprocess and clean and pfn_count == 0 and not success_plain:
        post = postprocess_r1l(outcome.detection, outcome.samples, config)
        success_post = (post.detected == I
                        and np.all(np.abs(post.coeffs - 1.0) <= 1e-6))
    return TrialRecord(
        seed=trial, L=L, M=M, pfn_count=pfn_count, pfp_count=pfp_count,
        success_plain=success_plain, success_pfp_budget=budgets,
        success_postprocessed=bool(success_post),
        sample_count=sample_budget(config),
        wall_time=time.perf_counter() - t0,
        anomalies=outcome.anomalies)


def run_success_experiment(spec, threads=1):
    """All (L, trial) runs of a spec plus one aggregate row per L.

    Per-trial failures are recorded, never raised; trials are independent
    given their derived seeds, so the records are identical no matter how
    many worker threads execute them.
    """
    fixed = None
    if spec.redraw == "lattices":
        rng = np.random.default_rng(
            np.random.SeedSequence((spec.master_seed, 0xFACE)))
        gamma = _make_candidates(spec.candidates, rng)
        I = _make_support(spec.support, gamma, rng)
        fixed = (gamma, I, next_valid_prime(gamma, spec.c * len(I)))
    elif spec.redraw != "both":
        raise ParameterError(f"unknown redraw policy {spec.redraw!r}")

    tasks = [(L, trial) for L in spec.L_values for trial in range(spec.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(
                lambda lt: _trial(spec, lt[0], lt[1], fixed), tasks))
    else:
        records = [_trial(spec, L, trial, fixed) for L, trial in tasks]

    gamma_size = (len(fixed[0]) if fixed is not None
                  else spec.candidates["count"])
    aggregate = []
    for L in spec.L_values:
        recs = [r for r in records if r.L == L]
        n = len(recs)
        row = {
            "L": L,
            "trials": n,
            "fail_rate": (1.0 - sum(r.success_plain for r in recs) / n)
            if n else 0.0,
            "fail_rate_postprocessed": (
                1.0 - sum(r.success_postprocessed for r in recs) / n)
            if n else 0.0,
            "max_pfn": max((r.pfn_count for r in recs), default=0),
            "max_pfp": max((r.pfp_count for r in recs), default=0),
            "theo_bound": theoretical_failure_bound(gamma_size, L, spec.c),
            "samples": max((r.sample_count for r in recs), default=0),
        }
        aggregate.append(row)
    return records, aggregate


def run_bspline_experiment(N, s, runs, master_seed, r=5, delta=0.999,
                           L_scale=0.25, theta=1e-12, s_local=None):
    """Approximation study rows for the ten-variate B-spline test function."""
    rows = []
    sq_norm = f10_sq_norm()
    for run in range(runs):
        oracle = f10_oracle()
        params = SfftParams(s, delta, s_local=s_local, theta=theta, r=r,
                            L_scale=L_scale)
        seed = int(np.random.SeedSequence(
            (master_seed, run)).generate_state(1)[0])
        result = sfft(oracle, Box(10, -N, N), params, seed)
        err = rel_l2_error(result.support, result.coeffs, sq_norm, f10_coeffs)
        rows.append({"run": run, "N": N, "s": s,
                     "samples": result.sample_count, "rel_l2_error": err})
    return rows
