"""Tests for the main CLI module."""

import json

import numpy as np
from click.testing import CliRunner

from commuting_pairs import __version__
from commuting_pairs.cli.main import main
from commuting_pairs.experiments.studies import rotated_event_instance
from commuting_pairs.utils.serialization import write_event, write_matrix


class TestMainCLI:
    """Test the main CLI functionality."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_main_help(self):
        """Test main command help."""
        result = self.runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        assert "Commuting approximants" in result.output
        for command in ("gen", "approx", "pinch", "event", "verify", "sweep", "study"):
            assert command in result.output

    def test_version(self):
        """Test the version option."""
        result = self.runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_constructions_command(self):
        """Test the constructions table."""
        result = self.runner.invoke(main, ["constructions"])
        assert result.exit_code == 0
        assert "Commuting Constructions" in result.stdout
        for name in ("binning", "observable", "quantize", "state"):
            assert name in result.stdout

    def test_eig_method_from_environment(self, oracle_files):
        """Test that COMMUTING_PAIRS_EIG_METHOD selects the eigensolver."""
        args = ["approx", "--omega", str(oracle_files["omega"]), "--x", str(oracle_files["x"])]
        args += ["--eps", "0.1"]
        result = self.runner.invoke(main, args, env={"COMMUTING_PAIRS_EIG_METHOD": "lapack"})
        assert result.exit_code == 0
        assert abs(json.loads(result.stdout)["dX"] - 0.2) < 1e-12
        env = {"COMMUTING_PAIRS_EIG_METHOD": "qr"}
        result = self.runner.invoke(main, ["constructions"], env=env)
        assert result.exit_code == 2


class TestGenCommand:
    """Test instance generation."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_gen_writes_files(self, tmp_path):
        """Test a perturbed instance."""
        out = tmp_path / "inst"
        result = self.runner.invoke(
            main, ["gen", "--dim", "4", "--eps", "1e-3", "--seed", "1", "-o", str(out)]
        )
        assert result.exit_code == 0
        assert "Wrote" in result.stderr
        assert (out / "omega.json").exists()
        assert (out / "x.json").exists()
        recipe = json.loads((out / "recipe.json").read_text(encoding="utf-8"))
        assert abs(recipe["eps_measured"] - 1e-3) < 1e-9

    def test_gen_random_event(self, tmp_path):
        """Test that the random_event family also writes the event."""
        result = self.runner.invoke(
            main,
            ["gen", "--kind", "random_event", "-m", "5", "--eps", "1e-3", "-o", str(tmp_path)],
        )
        assert result.exit_code == 0
        assert (tmp_path / "event.json").exists()

    def test_gen_infeasible(self, tmp_path):
        """Test that an infeasible recipe exits 2."""
        result = self.runner.invoke(
            main,
            [
                "gen",
                "--kind",
                "clustered_spectrum",
                "-m",
                "4",
                "--eps",
                "0.5",
                "-o",
                str(tmp_path),
            ],
        )
        assert result.exit_code == 2
        assert "infeasible recipe" in result.stderr

    def test_gen_bad_spectrum(self, tmp_path):
        """Test that an unnormalized spectrum exits 2."""
        result = self.runner.invoke(
            main,
            ["gen", "-m", "2", "--eps", "1e-3", "--spectrum", "0.5,0.4", "-o", str(tmp_path)],
        )
        assert result.exit_code == 2


class TestApproxAndVerify:
    """Test the gap-binning command and certificate verification."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def _approx(self, files, *extra):
        args = ["approx", "--omega", str(files["omega"]), "--x", str(files["x"])]
        return self.runner.invoke(main, args + list(extra))

    def test_approx_prints_certificate(self, oracle_files, tmp_path):
        """Test the 2x2 pair at eps = 0.1."""
        result = self._approx(oracle_files, "--eps", "0.1", "--out-dir", str(tmp_path / "out"))
        assert result.exit_code == 0
        certificate = json.loads(result.stdout)
        assert abs(certificate["dX"] - 0.2) < 1e-12
        assert abs(certificate["dOmega"] - 0.5) < 1e-12
        assert certificate["params"] == {"delta_exp": 0.25, "beta_exp": 0.75}
        assert (tmp_path / "out" / "omega_prime.json").exists()
        assert (tmp_path / "out" / "x_prime.json").exists()

    def test_approx_measures_eps_by_default(self, oracle_files):
        """Test that eps defaults to the measured commutator."""
        result = self._approx(oracle_files)
        assert result.exit_code == 0
        assert abs(json.loads(result.stdout)["eps"] - 0.1) < 1e-12

    def test_approx_eps_below_commutator(self, oracle_files):
        """Test that eps below ||[Omega, X]|| exits 1."""
        result = self._approx(oracle_files, "--eps", "0.05")
        assert result.exit_code == 1
        assert "exceeds eps" in result.stderr

    def test_approx_bad_exponents(self, oracle_files):
        """Test that beta <= 2 delta exits 2."""
        result = self._approx(oracle_files, "--eps", "0.1", "--delta-exp", "0.4")
        assert result.exit_code == 2

    def test_approx_bad_file(self, oracle_files, tmp_path):
        """Test that a malformed matrix file exits 2."""
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        result = self.runner.invoke(
            main, ["approx", "--omega", str(broken), "--x", str(oracle_files["x"])]
        )
        assert result.exit_code == 2
        assert "JSON" in result.stderr

    def test_approx_dimension_mismatch(self, oracle_files, tmp_path):
        """Test that Omega and X must share a dimension."""
        x3 = tmp_path / "x3.json"
        write_matrix(np.eye(3), x3)
        result = self.runner.invoke(
            main, ["approx", "--omega", str(oracle_files["omega"]), "--x", str(x3)]
        )
        assert result.exit_code == 2
        assert "dimension mismatch" in result.stderr

    def test_verify_round_trip(self, oracle_files, tmp_path):
        """Test that a fresh certificate verifies."""
        cert = tmp_path / "cert.json"
        assert self._approx(oracle_files, "--eps", "0.1", "-o", str(cert)).exit_code == 0
        result = self.runner.invoke(
            main,
            [
                "verify",
                "--certificate",
                str(cert),
                "--omega",
                str(oracle_files["omega"]),
                "--x",
                str(oracle_files["x"]),
            ],
        )
        assert result.exit_code == 0
        assert "Certificate verified" in result.stderr

    def test_verify_tampered(self, oracle_files, tmp_path):
        """Test that an edited dX exits 1."""
        cert = tmp_path / "cert.json"
        self._approx(oracle_files, "--eps", "0.1", "-o", str(cert))
        document = json.loads(cert.read_text(encoding="utf-8"))
        document["dX"] = 0.1
        cert.write_text(json.dumps(document), encoding="utf-8")
        result = self.runner.invoke(
            main,
            [
                "verify",
                "--certificate",
                str(cert),
                "--omega",
                str(oracle_files["omega"]),
                "--x",
                str(oracle_files["x"]),
            ],
        )
        assert result.exit_code == 1
        assert "dX" in result.stderr

    def test_verify_tampered_constant(self, oracle_files, tmp_path):
        """Test that a certificate restated with a larger C and a matching bound exits 1."""
        cert = tmp_path / "cert.json"
        self._approx(oracle_files, "--eps", "0.1", "-o", str(cert))
        document = json.loads(cert.read_text(encoding="utf-8"))
        document["C"] = 1e6
        document["bound_dOmega"] = 2 * document["delta_eps"] + 1e6 * 0.1**0.25
        cert.write_text(json.dumps(document), encoding="utf-8")
        args = ["verify", "--certificate", str(cert)]
        args += ["--omega", str(oracle_files["omega"]), "--x", str(oracle_files["x"])]
        result = self.runner.invoke(main, args)
        assert result.exit_code == 1
        assert "frozen" in result.stderr

    def test_verify_under_other_constant(self, oracle_files, tmp_path):
        """Test that a certificate made with the default C fails under --constant 3."""
        cert = tmp_path / "cert.json"
        assert self._approx(oracle_files, "--eps", "0.1", "-o", str(cert)).exit_code == 0
        args = ["--constant", "3", "verify", "--certificate", str(cert)]
        args += ["--omega", str(oracle_files["omega"]), "--x", str(oracle_files["x"])]
        assert self.runner.invoke(main, args).exit_code == 1
        assert json.loads(cert.read_text(encoding="utf-8"))["C"] == 4.0

    def test_verify_bad_certificate(self, oracle_files, tmp_path):
        """Test that a certificate missing fields exits 2."""
        cert = tmp_path / "cert.json"
        cert.write_text('{"eps": 0.1}', encoding="utf-8")
        result = self.runner.invoke(
            main,
            [
                "verify",
                "--certificate",
                str(cert),
                "--omega",
                str(oracle_files["omega"]),
                "--x",
                str(oracle_files["x"]),
            ],
        )
        assert result.exit_code == 2


class TestPinchAndEvent:
    """Test the pinching and event commands."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_pinch_state(self, state_pinch_pair, tmp_path):
        """Test state pinching on X = diag(1, -1)."""
        omega, x = state_pinch_pair
        write_matrix(omega, tmp_path / "omega.json")
        write_matrix(x, tmp_path / "x.json")
        result = self.runner.invoke(
            main,
            [
                "pinch",
                "--omega",
                str(tmp_path / "omega.json"),
                "--x",
                str(tmp_path / "x.json"),
                "--mode",
                "state",
            ],
        )
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert document["construction"] == "state"
        assert abs(document["dOmega"] - 0.2) < 1e-12
        assert abs(document["certificate"]["claimed_bound"] - 0.8) < 1e-12
        assert document["passed"] is True

    def test_pinch_quantize_needs_eps(self, oracle_files):
        """Test that quantize without eps exits 2."""
        result = self.runner.invoke(
            main,
            [
                "pinch",
                "--omega",
                str(oracle_files["omega"]),
                "--x",
                str(oracle_files["x"]),
                "--mode",
                "quantize",
            ],
        )
        assert result.exit_code == 2

    def test_event_pipeline(self, tmp_path):
        """Test the event command on a rotated event."""
        instance = rotated_event_instance(0.01)
        write_matrix(instance.omega, tmp_path / "omega.json")
        write_matrix(instance.x, tmp_path / "x.json")
        write_event(list(instance.event.projections), tmp_path / "event.json")
        result = self.runner.invoke(
            main,
            [
                "event",
                "--omega",
                str(tmp_path / "omega.json"),
                "--x",
                str(tmp_path / "x.json"),
                "--event",
                str(tmp_path / "event.json"),
                "--eps",
                "0.25",
                "--out-dir",
                str(tmp_path / "chain"),
            ],
        )
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert document["n0"] == 3
        assert document["index_sets"] == [[0, 1], []]
        assert all(document["items"].values())
        for name in ("x_prime", "x_dprime", "x_tprime", "x_fin"):
            assert (tmp_path / "chain" / f"{name}.json").exists()

    def test_event_bad_eps(self, tmp_path):
        """Test that eps outside (0, 1) exits 2."""
        instance = rotated_event_instance(0.01)
        write_matrix(instance.omega, tmp_path / "omega.json")
        write_matrix(instance.x, tmp_path / "x.json")
        write_event(list(instance.event.projections), tmp_path / "event.json")
        result = self.runner.invoke(
            main,
            [
                "event",
                "--omega",
                str(tmp_path / "omega.json"),
                "--x",
                str(tmp_path / "x.json"),
                "--event",
                str(tmp_path / "event.json"),
                "--eps",
                "1.5",
            ],
        )
        assert result.exit_code == 2


class TestExperimentCommands:
    """Test sweep, calibrate and the studies."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_sweep_to_stdout(self):
        """Test a six-row sweep."""
        result = self.runner.invoke(
            main, ["sweep", "--dims", "4,8", "--eps-grid", "1e-2:1e-6:log3"]
        )
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert len(lines) == 7
        assert lines[0].startswith("kind,dim,seed,eps")

    def test_sweep_to_file(self, tmp_path):
        """Test --out."""
        out = tmp_path / "sweep.csv"
        result = self.runner.invoke(
            main, ["sweep", "--dims", "4", "--eps-grid", "1e-3", "-o", str(out)]
        )
        assert result.exit_code == 0
        assert len(out.read_text(encoding="utf-8").splitlines()) == 2

    def test_sweep_unknown_kind(self):
        """Test that an unknown family exits 2."""
        result = self.runner.invoke(
            main, ["sweep", "--dims", "4", "--eps-grid", "1e-3", "--kinds", "banded"]
        )
        assert result.exit_code == 2

    def test_sweep_all_exponents_rejected(self):
        """Test that a grid with no valid exponents exits 2."""
        result = self.runner.invoke(
            main, ["sweep", "--dims", "4", "--eps-grid", "1e-3", "--deltas", "0.4"]
        )
        assert result.exit_code == 2
        assert "Rejected exponents" in result.stderr

    def test_calibrate(self):
        """Test that calibrate prints C and the instance count."""
        result = self.runner.invoke(
            main, ["calibrate", "--dims", "4", "--eps-grid", "1e-3,1e-5", "--seeds", "2"]
        )
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert document["instances"] == 4
        assert document["C"] >= 0

    def test_study_rounding(self):
        """Test a small rounding study."""
        result = self.runner.invoke(main, ["study", "rounding", "--count", "20", "--dim", "4"])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["factor_two_violations"] == 0

    def test_study_rounding_bad_settings(self):
        """Test that max_defect >= 1/4 exits 2."""
        result = self.runner.invoke(main, ["study", "rounding", "--max-defect", "0.3"])
        assert result.exit_code == 2

    def test_study_rotated(self):
        """Test the rotated-event study."""
        result = self.runner.invoke(main, ["study", "rotated"])
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert abs(document["slope"] - 1.0) <= 0.2
        assert document["exact_all_pass"] is True

    def test_study_warmup(self):
        """Test a small warm-up study."""
        result = self.runner.invoke(main, ["study", "warmup", "--count", "12"])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["passed"] is True
