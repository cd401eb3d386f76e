import csv
import json

import numpy as np
import pytest

from mnlpm.cli import main


def run_cli(args):
    return main([str(a) for a in args])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A simulated dataset plus a completed quick fit, shared across tests."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "net.edges"
    assert run_cli(["simulate", "--actors", 9, "--layers", 3, "--prob", 0.3,
                    "--seed", 11, "--out", data]) == 0
    fit_dir = root / "fit"
    assert run_cli(["fit", "--data", data, "--k", 2, "--burn", 150,
                    "--thin", 1, "--keep", 120, "--seed", 2,
                    "--out-dir", fit_dir]) == 0
    return root, data, fit_dir


class TestElicit:
    def test_writes_file(self, tmp_path):
        out = tmp_path / "hyper.json"
        assert run_cli(["elicit", "--k", 3, "--out", out]) == 0
        d = json.loads(out.read_text())
        assert d["b_zeta"] == pytest.approx(3.009, abs=1e-3)
        assert d["b_theta"] == pytest.approx(1.066, abs=1e-3)

    def test_round_trip(self, tmp_path):
        from mnlpm import Hyperparameters, elicit

        out = tmp_path / "hyper.json"
        run_cli(["elicit", "--k", 2, "--theta0", 0.1, "--out", out])
        assert Hyperparameters.from_json(out.read_text()) == elicit(2, 0.1)

    def test_usage_error(self):
        assert run_cli(["elicit", "--k", 0]) == 2


class TestFit:
    def test_outputs_and_manifest(self, workspace):
        root, data, fit_dir = workspace
        for name in ("samples.bin", "loglik.csv", "accept.csv", "config.json",
                     "manifest.json"):
            assert (fit_dir / name).exists()
        manifest = json.loads((fit_dir / "manifest.json").read_text())
        assert manifest["command"] == "fit"
        assert manifest["seed"] == 2
        assert str(data) in manifest["input_digests"]

    def test_missing_data_exit_3(self, tmp_path):
        assert run_cli(["fit", "--data", tmp_path / "nope.edges", "--k", 1,
                        "--out-dir", tmp_path / "o"]) == 3

    def test_malformed_data_exit_3(self, tmp_path):
        bad = tmp_path / "bad.edges"
        bad.write_text("not a header\n")
        assert run_cli(["fit", "--data", bad, "--k", 1,
                        "--out-dir", tmp_path / "o"]) == 3

    def test_determinism(self, workspace, tmp_path):
        root, data, fit_dir = workspace
        other = tmp_path / "fit2"
        assert run_cli(["fit", "--data", data, "--k", 2, "--burn", 150,
                        "--thin", 1, "--keep", 120, "--seed", 2, "--jobs", 1,
                        "--out-dir", other]) == 0
        assert (other / "samples.bin").read_bytes() == \
            (fit_dir / "samples.bin").read_bytes()

    def test_env_seed_fallback(self, workspace, tmp_path, monkeypatch):
        root, data, _ = workspace
        monkeypatch.setenv("MNLPM_SEED", "2")
        a = tmp_path / "env_fit"
        assert run_cli(["fit", "--data", data, "--k", 2, "--burn", 150,
                        "--thin", 1, "--keep", 120, "--out-dir", a]) == 0
        assert (a / "samples.bin").read_bytes() == \
            (workspace[2] / "samples.bin").read_bytes()


class TestReport:
    def test_waic(self, workspace, tmp_path):
        _, data, fit_dir = workspace
        out = tmp_path / "rep"
        assert run_cli(["report", "--data", data, "--samples", fit_dir,
                        "--which", "waic", "--out-dir", out]) == 0
        with open(out / "waic.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1 and float(rows[0]["waic"]) > 0

    def test_correlation_long_form(self, workspace, tmp_path):
        _, data, fit_dir = workspace
        out = tmp_path / "rep"
        assert run_cli(["report", "--data", data, "--samples", fit_dir,
                        "--which", "correlation", "--out-dir", out]) == 0
        with open(out / "correlation.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3  # J=3 -> 3 unordered layer pairs
        for row in rows:
            assert float(row["lo"]) <= float(row["mean"]) <= float(row["hi"])

    def test_consensus_positions_convergence_ppc(self, workspace, tmp_path):
        _, data, fit_dir = workspace
        out = tmp_path / "rep"
        for which in ("consensus", "positions", "convergence", "ppc"):
            args = ["report", "--data", data, "--samples", fit_dir,
                    "--which", which, "--out-dir", out]
            if which == "ppc":
                args += ["--replicates", 30]
            if which == "positions":
                args += ["--svg"]
            assert run_cli(args) == 0
        mat = np.loadtxt(out / "consensus.csv", delimiter=",")
        assert mat.shape == (9, 9) and np.allclose(mat, mat.T)
        assert (out / "positions.svg").exists()

    def test_delta_requires_square_data_exit_2(self, workspace, tmp_path):
        _, data, fit_dir = workspace
        assert run_cli(["report", "--data", data, "--samples", fit_dir,
                        "--which", "delta", "--out-dir", tmp_path / "r"]) == 2

    def test_missing_samples_exit_3(self, workspace, tmp_path):
        _, data, _ = workspace
        assert run_cli(["report", "--data", data, "--samples",
                        tmp_path / "nothing", "--which", "waic",
                        "--out-dir", tmp_path / "r"]) == 3


class TestScanAndCv:
    def test_waic_scan(self, workspace, tmp_path):
        _, data, _ = workspace
        out = tmp_path / "scan"
        assert run_cli(["waic-scan", "--data", data, "--k-range", "1..2",
                        "--burn", 100, "--thin", 1, "--keep", 80, "--seed", 1,
                        "--out-dir", out]) == 0
        with open(out / "waic.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["K"] for r in rows] == ["1", "2"]

    def test_cv(self, workspace, tmp_path):
        _, data, _ = workspace
        out = tmp_path / "cv"
        assert run_cli(["cv", "--data", data, "--k-range", "1", "--folds", 2,
                        "--variants", "IFLPM,MNLPM", "--burn", 80, "--thin", 1,
                        "--keep", 60, "--seed", 1, "--out-dir", out]) == 0
        with open(out / "cv_summary.csv") as fh:
            summary = list(csv.DictReader(fh))
        assert {r["variant"] for r in summary} == {"IFLPM", "MNLPM"}
        with open(out / "cv.csv") as fh:
            folds = list(csv.DictReader(fh))
        assert len(folds) == 4  # 2 variants x 2 folds

    def test_cv_fold_validation(self, workspace, tmp_path):
        _, data, _ = workspace
        assert run_cli(["cv", "--data", data, "--folds", 1,
                        "--out-dir", tmp_path / "cv"]) == 2


class TestSimulate:
    def test_header_and_determinism(self, tmp_path):
        a, b = tmp_path / "a.edges", tmp_path / "b.edges"
        for p in (a, b):
            assert run_cli(["simulate", "--actors", 6, "--layers", 2,
                            "--prob", 0.5, "--seed", 3, "--out", p]) == 0
        assert a.read_text() == b.read_text()
        assert a.read_text().splitlines()[0] == "6 2"

    def test_from_prior(self, tmp_path):
        out = tmp_path / "p.edges"
        assert run_cli(["simulate", "--actors", 6, "--layers", 2,
                        "--from-prior", "--k", 2, "--seed", 3,
                        "--out", out]) == 0
        from mnlpm import load_network
        net = load_network(out)
        assert net.n_actors == 6 and net.n_layers == 2

    def test_usage_errors(self, tmp_path):
        assert run_cli(["simulate", "--actors", 5, "--layers", 1,
                        "--out", tmp_path / "x"]) == 2  # neither prob nor prior
        assert run_cli(["simulate", "--actors", 5, "--layers", 1,
                        "--from-prior", "--out", tmp_path / "x"]) == 2


class TestConfigFile:
    def test_config_defaults_and_flag_override(self, workspace, tmp_path):
        _, data, _ = workspace
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "data": str(data), "k": 2, "burn": 150, "thin": 1, "keep": 120,
            "seed": 999,
        }))
        out = tmp_path / "fit_cfg"
        # --seed on the command line overrides the config file's 999
        assert run_cli(["--config", cfg, "fit", "--seed", 2,
                        "--out-dir", out]) == 0
        assert (out / "samples.bin").read_bytes() == \
            (workspace[2] / "samples.bin").read_bytes()
