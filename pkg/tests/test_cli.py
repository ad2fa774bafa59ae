import json

import numpy as np
import pytest

from latfft.cli import main
from latfft.freqset import load_freqset
from latfft.lattice import draw_config, save_config
from latfft.polyeval import random_poly, save_poly
from latfft.freqset import Box, random_subset


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGenset:
    def test_grid_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "genset", "grid", "--dim", "2",
                               "--N", "1")
        assert code == 0
        assert out.splitlines()[0] == "d=2 n=9"

    def test_capacity_exit_code(self, capsys):
        code, _, err = run_cli(capsys, "genset", "grid", "--dim", "5",
                               "--N", "32")
        assert code == 4
        assert "capacity" in err

    def test_random_box_to_file(self, capsys, tmp_path):
        path = tmp_path / "set.txt"
        code, _, _ = run_cli(capsys, "genset", "random-box", "--dim", "3",
                             "--N", "50", "--count", "40", "--seed", "1",
                             "--out", str(path))
        assert code == 0
        assert len(load_freqset(path)) == 40

    def test_cross_weighted(self, capsys):
        code, out, _ = run_cli(capsys, "genset", "cross", "--dim", "2",
                               "--N", "4", "--weights", "t^1.08")
        assert code == 0
        assert out.splitlines()[0].startswith("d=2")


class TestDetect:
    @pytest.fixture
    def files(self, tmp_path, rng):
        gamma = random_subset(Box(2, -30, 30), 150, rng)
        I = random_subset(gamma, 10, rng)
        p = random_poly(I, rng, min_mag=0.1)
        cand = tmp_path / "gamma.txt"
        from latfft.freqset import save_freqset

        save_freqset(gamma, cand)
        poly = tmp_path / "p.txt"
        save_poly(p, poly)
        return cand, poly, gamma, I, p

    def test_median_mode_with_drawn_config(self, capsys, files, tmp_path):
        cand, poly, gamma, I, p = files
        cfg = tmp_path / "cfg.json"
        code, out, _ = run_cli(
            capsys, "detect", "--candidates", str(cand), "--oracle",
            f"poly:{poly}", "--sparsity", "10", "--seed", "7",
            "--save-config", str(cfg))
        assert code == 0
        lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
        got = {tuple(int(v) for v in ln.split()[:2]) for ln in lines}
        assert got == set(I)
        assert cfg.exists()

    def test_replay_with_config_file(self, capsys, files, tmp_path):
        cand, poly, gamma, I, p = files
        cfg = tmp_path / "cfg.json"
        config = draw_config(gamma, 10, 0.1, rng=np.random.default_rng(3))
        save_config(config, cfg)
        args = ("detect", "--candidates", str(cand), "--config", str(cfg),
                "--oracle", f"poly:{poly}", "--mode", "topk", "--sparsity",
                "10", "--seed", "5")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_samples_file_round_trip(self, capsys, files, tmp_path):
        cand, poly, gamma, I, p = files
        cfg = tmp_path / "cfg.json"
        config = draw_config(gamma, 10, 0.1, rng=np.random.default_rng(3))
        save_config(config, cfg)
        from latfft.polyeval import oracle_from_poly

        oracle = oracle_from_poly(p)
        samples = [oracle.sample_lattice(lat) for lat in config.lattices]
        sfile = tmp_path / "samples.json"
        with open(sfile, "w") as fh:
            json.dump({"samples": [
                [[float(v.real), float(v.imag)] for v in s] for s in samples
            ]}, fh)
        code, out, _ = run_cli(
            capsys, "detect", "--candidates", str(cand), "--config",
            str(cfg), "--samples", str(sfile), "--mode", "median",
            "--seed", "0")
        assert code == 0
        lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert {tuple(int(v) for v in ln.split()[:2]) for ln in lines} \
            == set(I)

    def test_validation_exit(self, capsys, files):
        cand, poly, *_ = files
        code, _, err = run_cli(capsys, "detect", "--candidates", str(cand),
                               "--oracle", f"poly:{poly}", "--mode", "topk")
        assert code == 2
        assert "sparsity" in err


class TestSfft:
    def test_roundtrip_and_determinism(self, capsys, tmp_path, rng):
        I = random_subset(Box(3, -8, 8), 6, rng)
        p = random_poly(I, rng, min_mag=0.1)
        poly = tmp_path / "p.txt"
        save_poly(p, poly)
        args = ("sfft", "--dim", "3", "--grid", "8", "--oracle",
                f"poly:{poly}", "--sparsity", "6", "--seed", "42")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        lines = [ln for ln in out1.splitlines() if not ln.startswith("#")]
        assert {tuple(int(v) for v in ln.split()[:3]) for ln in lines} \
            == set(I)

    def test_random_poly_oracle_runs(self, capsys):
        code, out, _ = run_cli(capsys, "sfft", "--dim", "2", "--grid", "6",
                               "--oracle", "random-poly", "--sparsity", "4",
                               "--seed", "11")
        assert code == 0
        body = [ln for ln in out.splitlines() if not ln.startswith("#")]
        assert len(body) == 4

    def test_detection_failure_exit(self, capsys, tmp_path):
        # coefficients below theta: nothing survives the thresholds
        from latfft.freqset import FreqSet
        from latfft.polyeval import SparsePoly

        p = SparsePoly(FreqSet(2, [(1, 1)]), np.array([1e-30 + 0j]))
        poly = tmp_path / "tiny.txt"
        save_poly(p, poly)
        code, _, err = run_cli(capsys, "sfft", "--dim", "2", "--grid", "4",
                               "--oracle", f"poly:{poly}", "--sparsity", "1",
                               "--seed", "3")
        assert code == 3
        assert "fail" in err.lower()

    def test_needs_candidates_or_grid(self, capsys):
        code, _, err = run_cli(capsys, "sfft", "--oracle", "f10",
                               "--sparsity", "5", "--seed", "1")
        assert code == 2


class TestExperiment:
    def test_bound_table(self, capsys):
        code, out, _ = run_cli(capsys, "experiment", "bound", "--gamma-size",
                               "1e7", "--c", "10.33", "--L", "37..47:2")
        assert code == 0
        rows = dict(ln.split(",") for ln in out.splitlines()
                    if ln and not ln.startswith("#") and "theo" not in ln)
        assert float(rows["37"]) == pytest.approx(0.583, abs=1e-3)
        assert float(rows["47"]) == pytest.approx(0.006, abs=2e-3)

    def test_random_experiment_tiny(self, capsys, tmp_path):
        trials_out = tmp_path / "trials.jsonl"
        args = ("experiment", "random", "--dim", "2", "--lo", "-40", "--hi",
                "40", "--gamma-size", "300", "--sparsity", "6", "--L",
                "3,5", "--trials", "4", "--seed", "13", "--threads", "1",
                "--trials-out", str(trials_out))
        code1, out1, _ = run_cli(capsys, *args)
        blob1 = trials_out.read_text()
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        assert blob1 == trials_out.read_text()
        header, cols = out1.splitlines()[0], out1.splitlines()[1]
        assert header.startswith("# latfft")
        assert cols == ("L,trials,fail_rate,fail_rate_postprocessed,"
                        "max_pfn,max_pfp,theo_bound,samples")
        assert len(blob1.splitlines()) == 8

    def test_hyperbolic_experiment_tiny(self, capsys):
        code, out, _ = run_cli(capsys, "experiment", "hyperbolic", "--dim",
                               "3", "--N", "4", "--L", "3,5", "--trials",
                               "3", "--seed", "2", "--threads", "1")
        assert code == 0
        assert len(out.splitlines()) == 4  # header + columns + 2 rows

    def test_spec_file_accepted(self, capsys, tmp_path):
        spec = {
            "name": "mini",
            "candidates": {"kind": "random-box", "d": 2, "lo": -20,
                           "hi": 20, "count": 100},
            "support": {"kind": "random-subset", "count": 4},
            "L_values": [3],
            "trials": 2,
            "master_seed": 5,
        }
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        code, out, _ = run_cli(capsys, "experiment", "random", "--spec",
                               str(path), "--threads", "1")
        assert code == 0
        assert out.splitlines()[2].startswith("3,2,")
