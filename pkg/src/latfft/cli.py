"""Command-line entry point: detect, sfft, experiment, and set utilities.

stdout carries data only (CSV or whitespace-separated records, with one
leading reproducibility comment line); diagnostics go to stderr.  Exit codes:
0 success, 2 parameter/validation error, 3 detection failure (empty result),
4 capacity error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    ExperimentSpec,
    run_bspline_experiment,
    run_success_experiment,
    theoretical_failure_bound,
)
from .detect import (
    ZeroTest,
    detect_and_compute,
    detect_frequencies,
    detect_topk,
    format_detection,
    postprocess_r1l,
)
from .dimincr import SfftParams, sfft
from .errors import CapacityError, DetectionFailure, ParameterError
from .freqset import (
    Box,
    full_grid,
    hyperbolic_cross,
    load_freqset,
    random_subset,
    save_freqset,
    format_freqset,
)
from .lattice import draw_config, load_config, save_config
from .polyeval import f10_oracle, load_poly, oracle_from_poly, random_poly

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DETECTION = 3
EXIT_CAPACITY = 4


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", encoding="ascii") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        return False


def _header(cmd, seed, **params):
    parts = [f"# latfft {__version__} cmd={cmd} seed={seed}"]
    parts += [f"{k}={v}" for k, v in params.items()]
    return " ".join(parts)


def _parse_L_values(text):
    values = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = span.split("..")
            values.extend(range(int(lo), int(hi) + 1, int(step or 1)))
        else:
            values.append(int(part))
    return values


def _resolve_seed(args):
    if args.seed is not None:
        return int(args.seed)
    return int(np.random.SeedSequence().generate_state(1)[0])


def _make_oracle(spec, candidates, sparsity, rng):
    if spec == "f10":
        return f10_oracle()
    if spec == "random-poly":
        if candidates is None:
            raise ParameterError("random-poly oracle needs a candidate set")
        if sparsity is None:
            raise ParameterError("random-poly oracle needs --sparsity")
        support = random_subset(candidates, sparsity, rng)
        return oracle_from_poly(random_poly(support, rng))
    if spec.startswith("poly:"):
        return oracle_from_poly(load_poly(spec[len("poly:"):]))
    raise ParameterError(f"unknown oracle spec {spec!r}")


def _load_samples(path, config):
    with open(path, "r", encoding="ascii") as fh:
        data = json.load(fh)
    samples = []
    for block, lat in zip(data["samples"], config.lattices):
        arr = np.asarray(block, dtype=np.float64)
        if arr.shape != (lat.M, 2):
            raise ParameterError(
                f"sample block of shape {arr.shape} does not match M={lat.M}")
        samples.append(arr[:, 0] + 1j * arr[:, 1])
    if len(samples) != config.L:
        raise ParameterError("sample file does not match the configuration")
    return samples


def _cmd_detect(args):
    candidates = load_freqset(args.candidates)
    seed = _resolve_seed(args)
    rng = np.random.default_rng(seed)
    if args.config:
        config = load_config(args.config)
    else:
        if args.sparsity is None:
            raise ParameterError("need --sparsity to draw a configuration")
        config = draw_config(candidates, args.sparsity, args.delta, c=args.c,
                             L_scale=args.l_scale, rng=rng, seed=seed)
    if args.save_config:
        save_config(config, args.save_config)
    if args.samples:
        samples = _load_samples(args.samples, config)
    else:
        oracle = _make_oracle(args.oracle, candidates, args.sparsity, rng)
        samples = [oracle.sample_lattice(lat) for lat in config.lattices]
    zero = ZeroTest(args.theta_zero) if args.theta_zero is not None else None
    if args.mode == "classify":
        result = detect_frequencies(samples, config, candidates, zero=zero)
    elif args.mode == "median":
        result = detect_and_compute(samples, config, candidates, zero=zero)
    else:
        if args.sparsity is None:
            raise ParameterError("topk mode needs --sparsity")
        result = detect_topk(samples, config, candidates, args.sparsity,
                             args.theta, zero=zero)
    if args.postprocess:
        result = postprocess_r1l(result, samples, config, zero=zero)
    with _Output(args.out) as fh:
        fh.write(_header("detect", seed, mode=args.mode,
                         candidates=len(candidates), L=config.L) + "\n")
        fh.write(format_detection(result))
    return EXIT_OK


def _cmd_sfft(args):
    seed = _resolve_seed(args)
    rng = np.random.default_rng(seed)
    if args.candidates:
        gamma = load_freqset(args.candidates)
        dim = gamma.dim
    else:
        if args.dim is None or args.grid is None:
            raise ParameterError("need either --candidates or --dim/--grid")
        dim = args.dim
        gamma = Box(dim, -args.grid, args.grid)
    oracle_pool = gamma if args.oracle == "random-poly" else None
    oracle = _make_oracle(args.oracle, oracle_pool, args.sparsity, rng)
    if oracle.dim != dim:
        raise ParameterError(
            f"oracle dimension {oracle.dim} does not match candidates {dim}")
    params = SfftParams(args.sparsity, args.delta, s_local=args.s_local,
                        theta=args.theta, r=args.iterations, c=args.c,
                        L_scale=args.l_scale, pair_cap=args.pair_cap)
    result = sfft(oracle, gamma, params, seed)
    with _Output(args.out) as fh:
        fh.write(_header("sfft", seed, dim=dim, sparsity=args.sparsity,
                         delta=args.delta, r=args.iterations,
                         l_scale=args.l_scale) + "\n")
        fh.write(f"# samples={result.sample_count} "
                 f"detected={len(result.support)}\n")
        for entry in result.stage_log:
            fh.write("# stage={stage} t={t} i={i} candidates={candidates} "
                     "kept={kept} samples={samples}\n".format(**entry))
        for k, c in zip(result.support.elems, result.coeffs):
            comps = " ".join(str(int(v)) for v in k)
            fh.write(f"{comps} {float(c.real)!r} {float(c.imag)!r}\n")
    if result.failed:
        print("detection failed: empty support", file=sys.stderr)
        return EXIT_DETECTION
    return EXIT_OK


def _write_experiment(args, spec, header):
    records, aggregate = run_success_experiment(spec, threads=args.threads)
    with _Output(args.out) as fh:
        fh.write(header + "\n")
        fh.write("L,trials,fail_rate,fail_rate_postprocessed,"
                 "max_pfn,max_pfp,theo_bound,samples\n")
        for row in aggregate:
            fh.write(
                f"{row['L']},{row['trials']},{float(row['fail_rate'])!r},"
                f"{float(row['fail_rate_postprocessed'])!r},{row['max_pfn']},"
                f"{row['max_pfp']},{float(row['theo_bound'])!r},{row['samples']}\n")
    if args.trials_out:
        with open(args.trials_out, "w", encoding="ascii") as fh:
            for rec in records:
                fh.write(json.dumps(rec.as_jsonable(), sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_experiment_random(args):
    seed = _resolve_seed(args)
    if args.spec:
        with open(args.spec, "r", encoding="ascii") as fh:
            spec = ExperimentSpec.from_dict(json.load(fh))
    else:
        spec = ExperimentSpec(
            name="random",
            candidates={"kind": "random-box", "d": args.dim, "lo": args.lo,
                        "hi": args.hi, "count": args.gamma_size},
            support={"kind": "random-subset", "count": args.sparsity},
            L_values=_parse_L_values(args.L),
            trials=args.trials,
            master_seed=seed,
            c=args.c,
            redraw="both",
            postprocess=not args.no_postprocess,
        )
    header = _header("experiment-random", spec.master_seed,
                     gamma=spec.candidates.get("count"), trials=spec.trials)
    return _write_experiment(args, spec, header)


def _cmd_experiment_hyperbolic(args):
    seed = _resolve_seed(args)
    if args.spec:
        with open(args.spec, "r", encoding="ascii") as fh:
            spec = ExperimentSpec.from_dict(json.load(fh))
    else:
        spec = ExperimentSpec(
            name="hyperbolic",
            candidates={"kind": "hyperbolic", "d": args.dim, "N": args.N,
                        "weights": None},
            support={"kind": "hyperbolic", "N": args.N,
                     "weights": args.weights},
            L_values=_parse_L_values(args.L),
            trials=args.trials,
            master_seed=seed,
            c=args.c,
            redraw="lattices",
            postprocess=not args.no_postprocess,
        )
    header = _header("experiment-hyperbolic", spec.master_seed,
                     trials=spec.trials)
    return _write_experiment(args, spec, header)


def _cmd_experiment_bspline(args):
    seed = _resolve_seed(args)
    rows = run_bspline_experiment(args.grid, args.sparsity, args.runs, seed,
                                  r=args.iterations, delta=args.delta,
                                  L_scale=args.l_scale, theta=args.theta)
    with _Output(args.out) as fh:
        fh.write(_header("experiment-bspline", seed, N=args.grid,
                         sparsity=args.sparsity) + "\n")
        fh.write("run,N,s,samples,rel_l2_error\n")
        for row in rows:
            fh.write(f"{row['run']},{row['N']},{row['s']},{row['samples']},"
                     f"{float(row['rel_l2_error'])!r}\n")
    return EXIT_OK


def _cmd_experiment_bound(args):
    with _Output(args.out) as fh:
        fh.write(_header("experiment-bound", 0, gamma_size=args.gamma_size,
                         c=args.c) + "\n")
        fh.write("L,theo_bound\n")
        for L in _parse_L_values(args.L):
            fh.write(f"{L},{float(theoretical_failure_bound(args.gamma_size, L, args.c))!r}\n")
    return EXIT_OK


def _cmd_genset(args):
    rng = np.random.default_rng(_resolve_seed(args))
    if args.kind == "grid":
        S = full_grid(args.dim, args.N)
    elif args.kind == "cross":
        weights = None
        if args.weights == "t^1.08":
            weights = np.arange(1, args.dim + 1, dtype=np.float64) ** 1.08
        S = hyperbolic_cross(args.dim, args.N, weights)
    else:
        S = random_subset(Box(args.dim, -args.N, args.N), args.count, rng)
    if args.out:
        save_freqset(S, args.out)
    else:
        sys.stdout.write(format_freqset(S))
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="latfft",
        description="sparse Fourier reconstruction from random rank-1 lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the multi-lattice detector")
    p.add_argument("--candidates", required=True)
    p.add_argument("--config", help="replay an existing configuration")
    p.add_argument("--save-config", help="write the configuration used")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--c", type=float, default=10.33)
    p.add_argument("--l-scale", type=float, default=1.0)
    p.add_argument("--samples")
    p.add_argument("--oracle", default="random-poly")
    p.add_argument("--mode", choices=("classify", "median", "topk"),
                   default="median")
    p.add_argument("--sparsity", type=int)
    p.add_argument("--theta", type=float, default=1e-12)
    p.add_argument("--theta-zero", type=float)
    p.add_argument("--postprocess", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("sfft", help="dimension-incremental sparse FFT")
    p.add_argument("--dim", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--candidates")
    p.add_argument("--oracle", default="random-poly")
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--s-local", type=int)
    p.add_argument("--theta", type=float, default=1e-12)
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.9)
    p.add_argument("--c", type=float, default=10.33)
    p.add_argument("--l-scale", type=float, default=1.0)
    p.add_argument("--pair-cap", type=int, default=10_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sfft)

    exp = sub.add_parser("experiment", help="worst-case experiment sweeps")
    esub = exp.add_subparsers(dest="target", required=True)

    p = esub.add_parser("random", help="random candidate/support sets")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--lo", type=int, default=-1000)
    p.add_argument("--hi", type=int, default=1000)
    p.add_argument("--gamma-size", type=int, default=100_000)
    p.add_argument("--sparsity", type=int, default=100)
    p.add_argument("--L", default="9..37:2")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--c", type=float, default=10.33)
    p.add_argument("--no-postprocess", action="store_true")
    p.add_argument("--spec", help="JSON experiment spec (overrides flags)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--trials-out")
    p.set_defaults(func=_cmd_experiment_random)

    p = esub.add_parser("hyperbolic", help="structured cross sets")
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--weights", default="t^1.08")
    p.add_argument("--L", default="9..37:2")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--c", type=float, default=10.33)
    p.add_argument("--no-postprocess", action="store_true")
    p.add_argument("--spec")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--trials-out")
    p.set_defaults(func=_cmd_experiment_hyperbolic)

    p = esub.add_parser("bspline", help="B-spline approximation study")
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--sparsity", type=int, default=1000)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--delta", type=float, default=0.999)
    p.add_argument("--l-scale", type=float, default=0.25)
    p.add_argument("--theta", type=float, default=1e-12)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_experiment_bspline)

    p = esub.add_parser("bound", help="theoretical failure-bound table")
    p.add_argument("--gamma-size", type=float, required=True)
    p.add_argument("--c", type=float, default=10.33)
    p.add_argument("--L", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_experiment_bound)

    p = sub.add_parser("genset", help="write a frequency-set file")
    p.add_argument("kind", choices=("grid", "cross", "random-box"))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--weights")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_genset)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except DetectionFailure as exc:
        print(f"detection failure: {exc}", file=sys.stderr)
        return EXIT_DETECTION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
