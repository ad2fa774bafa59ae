import json
import math

import numpy as np
import pytest

from conftest import alias_oracle
from latfft.analysis import (
    ExperimentSpec,
    pfp_pfn_count,
    run_bspline_experiment,
    run_success_experiment,
    sample_budget,
    guaranteed_sample_budget,
    theoretical_failure_bound,
)
from latfft.errors import ParameterError
from latfft.freqset import Box, FreqSet, random_subset
from latfft.lattice import MultiLatticeConfig, Rank1Lattice, draw_config
from latfft.polyeval import SparsePoly


def ones_poly(I):
    return SparsePoly(I, np.ones(len(I)))


class TestTheoreticalBound:
    def test_paper_curve_anchors(self):
        assert theoretical_failure_bound(1e7, 37, 10.33) == pytest.approx(
            0.583, abs=1e-3)
        assert theoretical_failure_bound(1e7, 41, 10.33) == pytest.approx(
            0.096, abs=2e-3)

    def test_vacuous_at_zero_lattices(self):
        assert theoretical_failure_bound(123.0, 0, 10.33) == 123.0

    def test_requires_c_above_two(self):
        with pytest.raises(ParameterError):
            theoretical_failure_bound(10.0, 5, 2.0)


class TestBudgets:
    def test_single_lattice_budget(self, rng):
        config = MultiLatticeConfig([Rank1Lattice([1, 2], 13)], 0.5, 10.33,
                                    0.5)
        assert sample_budget(config) == 13

    def test_config_budget_sums_sizes(self, rng):
        S = random_subset(Box(2, -40, 40), 100, rng)
        config = draw_config(S, 9, 0.4, rng=rng)
        assert sample_budget(config) == config.L * config.shared_M

    def test_guaranteed_sample_budget_arithmetic(self):
        # recomputed independently: 37000 * (ln 1e7 - ln 0.5)
        want = 37 * 1000 * (math.log(10**7) + math.log(2.0))
        assert guaranteed_sample_budget(1000, 10**7, 0.5) == pytest.approx(want)
        assert want == pytest.approx(6.22e5, rel=1e-2)


class TestPfpPfnCount:
    def test_lone_active_frequency_never_pfn(self, rng):
        gamma = random_subset(Box(2, -20, 20), 60, rng)
        I = random_subset(gamma, 1, rng)
        for _ in range(10):
            config = draw_config(gamma, 1, 0.5, rng=rng, L=5)
            out = pfp_pfn_count(I, gamma, config)
            assert len(out.pfn) == 0

    def test_zero_generator_everything_aliases(self, rng):
        gamma = random_subset(Box(2, -9, 9), 30, rng)
        I = random_subset(gamma, 4, rng)
        lats = [Rank1Lattice([0, 0], 47) for _ in range(3)]
        config = MultiLatticeConfig(lats, 0.5, 10.33, 0.5)
        out = pfp_pfn_count(I, gamma, config)
        assert out.pfn == I  # medians equal |I| >= 2
        assert out.pfp == gamma.difference(I)  # all residues collide at 0

    def test_matches_alias_oracle_classification(self, rng):
        for _ in range(25):
            d = int(rng.integers(1, 4))
            M = int(rng.choice([11, 13, 17, 19, 23, 29, 31]))
            box = Box(d, -4, 4)
            gamma = random_subset(box, min(int(rng.integers(6, 30)),
                                           box.size), rng)
            I = random_subset(gamma, int(rng.integers(1, 7)), rng)
            L = int(rng.choice([3, 5]))
            lats = [Rank1Lattice(rng.integers(0, M, d), M) for _ in range(L)]
            config = MultiLatticeConfig(lats, 0.5, 10.33, 0.5)
            out = pfp_pfn_count(I, gamma, config)
            _, _, medians = alias_oracle(gamma, ones_poly(I), config, 1e-8)
            counts = np.rint(medians.real).astype(int)
            in_I = I.contains_rows(gamma.elems)
            want_pfn = FreqSet(d, gamma.elems[in_I & (counts >= 2)])
            want_pfp = FreqSet(d, gamma.elems[~in_I & (counts >= 1)])
            assert out.pfn == want_pfn
            assert out.pfp == want_pfp
            assert out.anomalies == 0

    def test_pfn_pfp_disjoint_subsets(self, rng):
        gamma = random_subset(Box(3, -6, 6), 40, rng)
        I = random_subset(gamma, 6, rng)
        config = draw_config(gamma, 6, 0.5, rng=rng, L=3)
        out = pfp_pfn_count(I, gamma, config)
        assert np.all(I.contains_rows(out.pfn.elems))
        assert not np.any(I.contains_rows(out.pfp.elems))


def desk_spec(**overrides):
    base = dict(
        name="unit",
        candidates={"kind": "random-box", "d": 2, "lo": -60, "hi": 60,
                    "count": 400},
        support={"kind": "random-subset", "count": 8},
        L_values=[3, 9],
        trials=6,
        master_seed=99,
        pfp_budgets=(0, 10),
    )
    base.update(overrides)
    return ExperimentSpec(**base)


class TestExperimentRunner:
    def test_zero_trials(self):
        records, agg = run_success_experiment(desk_spec(trials=0))
        assert records == []
        assert all(row["trials"] == 0 for row in agg)

    def test_deterministic_rerun(self):
        r1, a1 = run_success_experiment(desk_spec())
        r2, a2 = run_success_experiment(desk_spec())
        assert a1 == a2
        assert [r.as_jsonable() for r in r1] == [r.as_jsonable() for r in r2]

    def test_budget_monotonicity_and_postprocess_dominance(self):
        records, agg = run_success_experiment(desk_spec())
        for rec in records:
            if rec.success_plain:
                assert all(rec.success_pfp_budget.values())
            assert rec.success_pfp_budget[0] <= rec.success_pfp_budget[10]
            if rec.success_plain:
                assert rec.success_postprocessed
        for row in agg:
            assert row["fail_rate_postprocessed"] <= row["fail_rate"] + 1e-12

    def test_lattices_only_redraw_fixes_sets(self):
        spec = desk_spec(
            candidates={"kind": "hyperbolic", "d": 3, "N": 6,
                        "weights": None},
            support={"kind": "hyperbolic", "N": 2, "weights": "t^1.08"},
            redraw="lattices", trials=3, L_values=[5])
        records, agg = run_success_experiment(spec)
        assert len({r.M for r in records}) == 1
        assert agg[0]["trials"] == 3

    def test_threaded_matches_serial(self):
        spec = desk_spec(trials=4)
        serial = run_success_experiment(spec, threads=1)
        threaded = run_success_experiment(spec, threads=4)
        assert serial[1] == threaded[1]
        assert ([r.as_jsonable() for r in serial[0]]
                == [r.as_jsonable() for r in threaded[0]])

    def test_spec_round_trip(self):
        spec = desk_spec()
        again = ExperimentSpec.from_dict(json.loads(json.dumps(spec.as_dict())))
        assert again.as_dict() == spec.as_dict()

    def test_shipped_fullscale_specs_parse(self):
        for name in ("configs/random_fullscale_slow.json",
                     "configs/hyperbolic_fullscale_slow.json"):
            with open(name) as fh:
                spec = ExperimentSpec.from_dict(json.load(fh))
            assert spec.trials == 1000

    def test_record_fields_jsonable_and_wall_time_excluded(self):
        records, _ = run_success_experiment(desk_spec(trials=1, L_values=[3]))
        blob = records[0].as_jsonable()
        json.dumps(blob)
        assert "wall_time" not in blob
        assert records[0].wall_time >= 0


@pytest.mark.slow
class TestBsplineExperiment:
    def test_small_run_row_shape(self):
        rows = run_bspline_experiment(4, 30, runs=1, master_seed=5, r=1,
                                      delta=0.9, L_scale=0.5)
        assert len(rows) == 1
        row = rows[0]
        assert row["samples"] > 0
        assert 0 <= row["rel_l2_error"] <= 1
