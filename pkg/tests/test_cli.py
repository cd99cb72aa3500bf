import json

import pytest

from oracle_thrift.cli import main
from oracle_thrift.runner import read_results
from oracle_thrift.schedule import build_grid


def run_cli(args):
    return main(args)


class TestRun:
    def test_cucb_final_queries_equal_horizon(self, tmp_path):
        out = tmp_path / "r"
        rc = run_cli(["run", "--algo", "cucb", "--env", "linear", "--T", "1000",
                      "--d", "5", "--m", "2", "--seed", "1", "--out", str(out)])
        assert rc == 0
        rows = read_results(out / "cucb-linear-T1000-seed1.csv")
        assert rows[-1]["cum_queries"] == 1000
        assert rows[-1]["t"] == 1000

    def test_sroq_metadata_contains_grid(self, tmp_path):
        out = tmp_path / "r"
        rc = run_cli(["run", "--algo", "sroq", "--env", "linear", "--T", "10000",
                      "--d", "5", "--m", "2", "--M", "4", "--seed", "1",
                      "--out", str(out)])
        assert rc == 0
        meta = json.loads((out / "sroq-linear-T10000-seed1.meta.json").read_text())
        assert meta["grid_boundaries"] == list(build_grid(10_000, 4).boundaries)

    def test_incompatible_pair_exits_one(self, tmp_path, capsys):
        rc = run_cli(["run", "--algo", "aroq-c", "--env", "general",
                      "--T", "1000", "--out", str(tmp_path)])
        assert rc == 1
        assert "linear feedback" in capsys.readouterr().err

    def test_unknown_algo_exits_one(self, tmp_path):
        rc = run_cli(["run", "--algo", "nope", "--env", "linear", "--out", str(tmp_path)])
        assert rc == 1

    def test_inapplicable_flag_exits_one(self, tmp_path, capsys):
        rc = run_cli(["run", "--algo", "cucb", "--env", "linear", "--T", "500",
                      "--discretize", "--out", str(tmp_path)])
        assert rc == 1
        assert "do not apply" in capsys.readouterr().err

    def test_cov_metadata_has_sigma_profile(self, tmp_path):
        out = tmp_path / "r"
        rc = run_cli(["run", "--algo", "sroq-c", "--env", "cov", "--T", "2000",
                      "--d", "5", "--m", "2", "--seed", "1", "--out", str(out)])
        assert rc == 0
        meta = json.loads((out / "sroq-c-cov-T2000-seed1.meta.json").read_text())
        assert "sigma_profile" in meta
        assert len(meta["sigma_profile"]["per_arm_max"]) == 5


class TestSweep:
    def test_writes_csv_and_meta(self, tmp_path):
        out = tmp_path / "s"
        rc = run_cli(["sweep", "--algo", "aroq", "--env", "linear", "--T", "500",
                      "--d", "5", "--m", "2", "--seeds", "3", "--out", str(out)])
        assert rc == 0
        rows = read_results(out / "aroq-linear-T500-seeds3.csv")
        assert {r["seed"] for r in rows} == {1, 2, 3}


class TestOutputRoot:
    def test_env_var_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ORACLE_THRIFT_OUT", str(tmp_path / "envroot"))
        rc = run_cli(["run", "--algo", "cucb", "--env", "linear", "--T", "200",
                      "--d", "4", "--m", "2", "--seed", "1"])
        assert rc == 0
        assert (tmp_path / "envroot" / "cucb-linear-T200-seed1.csv").exists()


class TestReproduce:
    def test_fig2_small_scale_inventory(self, tmp_path):
        out = tmp_path / "rep"
        rc = run_cli(["reproduce", "fig2", "--scale", "0.01", "--out", str(out)])
        assert rc == 0
        for algo in ("cucb", "aroq", "sroq"):
            assert (out / "fig2" / f"{algo}.csv").exists()
            assert (out / "fig2" / f"{algo}.meta.json").exists()
        rows = read_results(out / "fig2" / "cucb.csv")
        assert {r["seed"] for r in rows} == set(range(1, 21))
        assert rows[-1]["T"] == 1000

    def test_bad_scale_exits_one(self, tmp_path):
        assert run_cli(["reproduce", "fig2", "--scale", "0", "--out", str(tmp_path)]) == 1


class TestListAlgos:
    def test_lists_all_eight(self, capsys):
        assert run_cli(["list-algos"]) == 0
        out = capsys.readouterr().out
        for name in ("cucb", "aroq", "sroq", "alpha-aroq", "aroq-c", "sroq-c",
                     "aroq-gr", "sroq-gr"):
            assert name in out

    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
