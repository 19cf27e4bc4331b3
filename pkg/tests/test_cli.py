"""
Tests for the CLI interface.
"""

import csv
import json

import pytest
from click.utils import strip_ansi
from typer.testing import CliRunner

from polyrep.cli import app
from polyrep.poly import SparsePoly

X = SparsePoly.variable(2, 0)
Y = SparsePoly.variable(2, 1)


@pytest.fixture
def runner():
    """Create a CLI test runner."""
    return CliRunner()


def _plain_stdout(result) -> str:
    """Return CLI output without terminal styling escape sequences."""
    return strip_ansi(result.stdout)


@pytest.fixture
def temp_config(tmp_path):
    """Create a temporary configuration file with small budgets."""
    config_content = """
log_level = "ERROR"  # Reduce noise in tests

[budget]
samples = 120

[verification]
samples = 200
resolution = "1/32"
"""
    config_path = tmp_path / "config.toml"
    config_path.write_text(config_content)
    return str(config_path)


class TestCLICommands:
    """Test CLI command interface."""

    def test_cli_help(self, runner):
        """Test main CLI help."""
        result = runner.invoke(app, ["--help"])
        output = _plain_stdout(result)
        assert result.exit_code == 0
        for command in ("represent", "verify", "separate", "info", "contour", "catalog"):
            assert command in output

    def test_catalog_list(self, runner):
        """Test the catalog table."""
        result = runner.invoke(app, ["catalog", "list"])
        output = _plain_stdout(result)
        assert result.exit_code == 0
        assert "square-pyramid" in output
        assert "whole-plane" in output
        assert "corner-cut" in output
        assert "slab-3" in output

    def test_catalog_show(self, runner):
        """Test printing a catalog entry."""
        result = runner.invoke(app, ["catalog", "show", "square"])
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["expected_size"] == 2
        assert len(payload["vertices"]) == 4
        assert payload["polyhedron"]["dim"] == 2

    def test_catalog_show_unknown(self, runner):
        """Test an unknown catalog name is a precondition error."""
        result = runner.invoke(app, ["catalog", "show", "dodecahedron"])
        assert result.exit_code == 2

    @pytest.mark.integration
    def test_info_octahedron(self, runner, temp_config):
        """Test combinatorial summary of a non-simple polytope."""
        result = runner.invoke(app, ["info", "--catalog", "octahedron", "--config", temp_config])
        assert result.exit_code == 0
        info = json.loads(result.stdout)
        assert info["simple"] is False
        assert info["s"] == 4
        assert info["lower_bound"] == 3
        assert info["f_vector"] == [6, 12, 8]
        assert info["pipeline"] == "polytope"


class TestRepresentCommand:
    """Test the represent command."""

    @pytest.mark.integration
    def test_half_plane(self, runner, temp_config):
        """Test a half-plane is represented by one polynomial."""
        result = runner.invoke(app, ["represent", "--catalog", "half-plane", "--config", temp_config])
        assert result.exit_code == 0
        doc = json.loads(result.stdout)
        assert doc["pipeline"] == "polyhedron"
        assert len(doc["polynomials"]) == 1
        assert doc["report"]["passed"] is True
        assert "seconds" not in doc

    @pytest.mark.integration
    def test_line_format_input(self, runner, temp_config, tmp_path):
        """Test reading an H-representation in the line format."""
        hrep = tmp_path / "quadrant.txt"
        hrep.write_text("# x >= 0, y >= 0\n1 0 0\n0 1 0\n")
        out = tmp_path / "rep.json"
        result = runner.invoke(
            app, ["represent", "--input", str(hrep), "--output", str(out), "--timing", "--config", temp_config]
        )
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert len(doc["polynomials"]) == 2

    @pytest.mark.integration
    def test_budget_scale(self, runner, temp_config):
        """Test a rational --budget scales the search budget."""
        result = runner.invoke(
            app, ["represent", "--catalog", "half-plane", "--budget", "1/2", "--config", temp_config]
        )
        assert result.exit_code == 0
        assert len(json.loads(result.stdout)["polynomials"]) == 1

    def test_budget_nonpositive(self, runner, temp_config):
        """Test a zero budget scale is a parse error."""
        result = runner.invoke(app, ["represent", "--catalog", "half-plane", "--budget", "0", "--config", temp_config])
        assert result.exit_code == 1

    def test_budget_file_unknown_key(self, runner, temp_config, tmp_path):
        """Test a budget file with an unknown key is a parse error."""
        budget = tmp_path / "budget.toml"
        budget.write_text("[budget]\nmax_exponent = 8\nbogus = 1\n")
        result = runner.invoke(
            app, ["represent", "--catalog", "half-plane", "--budget", str(budget), "--config", temp_config]
        )
        assert result.exit_code == 1
        assert doc["seconds"] >= 0

    def test_needs_exactly_one_source(self, runner, temp_config, tmp_path):
        """Test input and catalog are mutually exclusive."""
        hrep = tmp_path / "p.txt"
        hrep.write_text("1 0 0\n")
        result = runner.invoke(
            app, ["represent", "--input", str(hrep), "--catalog", "square", "--config", temp_config]
        )
        assert result.exit_code == 1

    def test_malformed_input(self, runner, temp_config, tmp_path):
        """Test a parse error exits with code 1."""
        hrep = tmp_path / "bad.txt"
        hrep.write_text("1 zero 0\n")
        result = runner.invoke(app, ["represent", "--input", str(hrep), "--config", temp_config])
        assert result.exit_code == 1

    def test_missing_config(self, runner):
        """Test a missing configuration file exits with code 1."""
        result = runner.invoke(app, ["represent", "--catalog", "square", "--config", "missing.toml"])
        assert result.exit_code == 1


class TestVerifyCommand:
    """Test the verify command."""

    @pytest.fixture
    def quadrant_rep(self, runner, temp_config, tmp_path):
        out = tmp_path / "quadrant.json"
        result = runner.invoke(
            app, ["represent", "--catalog", "quadrant", "--output", str(out), "--config", temp_config]
        )
        assert result.exit_code == 0
        return out

    @pytest.mark.integration
    def test_verify_passes(self, runner, temp_config, quadrant_rep):
        """Test a representation verifies against its own polyhedron."""
        result = runner.invoke(
            app, ["verify", "--rep", str(quadrant_rep), "--catalog", "quadrant", "--config", temp_config]
        )
        assert result.exit_code == 0
        report = json.loads(result.stdout)
        assert report["passed"] is True
        assert report["mode"] == "sampled"

    @pytest.mark.integration
    def test_verify_fails_against_other_polyhedron(self, runner, temp_config, quadrant_rep):
        """Test a wrong polyhedron gives exit code 4 and counterexamples."""
        result = runner.invoke(
            app, ["verify", "--rep", str(quadrant_rep), "--catalog", "square", "--config", temp_config]
        )
        assert result.exit_code == 4
        doc = json.loads(result.stdout)
        assert doc["report"]["passed"] is False
        assert doc["report"]["counterexamples"]

    def test_unknown_mode(self, runner, temp_config, quadrant_rep):
        """Test an unknown verification mode."""
        result = runner.invoke(
            app, ["verify", "--rep", str(quadrant_rep), "--catalog", "quadrant", "--mode", "exhaustive"]
        )
        assert result.exit_code == 1

    @pytest.mark.integration
    def test_contour_export(self, runner, temp_config, quadrant_rep, tmp_path):
        """Test sign grid and segment export."""
        out_dir = tmp_path / "plots"
        result = runner.invoke(
            app,
            [
                "contour",
                "--rep",
                str(quadrant_rep),
                "--window=-1,1",
                "--resolution",
                "20",
                "--out-dir",
                str(out_dir),
                "--config",
                temp_config,
            ],
        )
        assert result.exit_code == 0
        with (out_dir / "signs.csv").open() as f:
            assert len(list(csv.reader(f))) == 1 + 2 * 20 * 20
        assert (out_dir / "segments.csv").exists()

    def test_contour_bad_window(self, runner, temp_config, quadrant_rep, tmp_path):
        """Test a window with the wrong number of bounds."""
        result = runner.invoke(
            app, ["contour", "--rep", str(quadrant_rep), "--window", "0,1,2", "--config", temp_config]
        )
        assert result.exit_code == 1


class TestSeparateCommand:
    """Test the separate command."""

    @pytest.mark.integration
    def test_square_and_half_plane(self, runner, temp_config, tmp_path):
        """Test separating a square from a disjoint half-plane."""
        s = tmp_path / "s.json"
        t = tmp_path / "t.json"
        s.write_text(
            json.dumps(
                {
                    "kind": "basic-closed",
                    "polys": [(1 - X**2).to_json(), (1 - Y**2).to_json()],
                    "window": [["-1", "1"], ["-1", "1"]],
                }
            )
        )
        t.write_text(json.dumps({"kind": "polyhedron", "dim": 2, "ineqs": [{"coeffs": ["1", "0"], "const": "-3"}]}))
        result = runner.invoke(app, ["separate", "--s", str(s), "--t", str(t), "--config", temp_config])
        assert result.exit_code == 0
        doc = json.loads(result.stdout)
        assert doc["construction"] == "disjoint"
        assert doc["report"]["passed"] is True
        assert {c["name"] for c in doc["found_constants"]} == {"rho_0", "rho_1", "m"}

    def test_unbounded_s_rejected(self, runner, temp_config, tmp_path):
        """Test a noncompact S is a precondition error."""
        s = tmp_path / "s.json"
        s.write_text(json.dumps({"kind": "polyhedron", "dim": 1, "ineqs": [{"coeffs": ["1"], "const": "0"}]}))
        result = runner.invoke(app, ["separate", "--s", str(s), "--t", str(s), "--config", temp_config])
        assert result.exit_code == 2
