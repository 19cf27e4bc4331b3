"""
Tests for the core PolyRepApp class.
"""

import json
from pathlib import Path

import pytest

from polyrep.app import PolyRepApp
from polyrep.catalog import load_entry
from polyrep.errors import ParseError, VerificationFailure
from polyrep.paths import get_default_run_dir
from polyrep.representations import Representation


@pytest.fixture
def temp_config(tmp_path):
    """Create a temporary configuration file with small budgets."""
    config_content = """
cache_dir = "test_cache"
log_dir = "test_log"
log_level = "WARNING"

[budget]
samples = 120
seed = 3

[verification]
samples = 200
"""
    config_path = tmp_path / "config.toml"
    config_path.write_text(config_content)
    return str(config_path)


class TestPolyRepApp:
    """Test the application object."""

    @pytest.mark.unit
    def test_runtime_paths(self, temp_config):
        """Test runtime directories resolve under the default run dir."""
        app = PolyRepApp(temp_config)
        assert app.config.cache_dir == str((Path(get_default_run_dir()) / "test_cache").resolve())
        assert app.cache.cache_file.parent == Path(app.config.cache_dir)

    @pytest.mark.unit
    def test_directory_overrides(self, temp_config, tmp_path):
        """Test explicit cache and log directories win over the config."""
        app = PolyRepApp(temp_config, cache_dir=str(tmp_path / "c"), log_dir=str(tmp_path / "l"))
        assert app.config.cache_dir == str((tmp_path / "c").resolve())
        assert app.config.log_dir == str((tmp_path / "l").resolve())

    @pytest.mark.unit
    def test_seed_override(self, temp_config):
        """Test the seed option replaces the configured seed."""
        assert PolyRepApp(temp_config).budget.seed == 3
        assert PolyRepApp(temp_config, seed=11).budget.seed == 11

    @pytest.mark.unit
    def test_verification_overrides(self, temp_config):
        """Test per-call verification settings."""
        app = PolyRepApp(temp_config)
        config = app.verification_config("1/64", 50)
        assert config.resolution == "1/64"
        assert config.samples == 50
        assert app.verification_config() is app.config.verification

    @pytest.mark.unit
    def test_setup_logging_creates_log_dir(self, temp_config):
        """Test logging setup creates the log directory once."""
        app = PolyRepApp(temp_config)
        app.setup_logging()
        app.setup_logging()
        assert Path(app.config.log_dir).is_dir()

    @pytest.mark.unit
    def test_load_polyhedron_sources(self, temp_config, tmp_path):
        """Test exactly one polyhedron source is accepted."""
        app = PolyRepApp(temp_config)
        hrep = tmp_path / "p.json"
        hrep.write_text(json.dumps({"dim": 1, "ineqs": [{"coeffs": ["1"], "const": "0"}]}))
        assert app.load_polyhedron(hrep).dim == 1
        assert app.load_polyhedron(catalog="cube") is load_entry("cube")
        with pytest.raises(ParseError):
            app.load_polyhedron()
        with pytest.raises(ParseError):
            app.load_polyhedron(hrep, "cube")

    @pytest.mark.unit
    def test_load_json_errors(self, tmp_path):
        """Test unreadable and malformed JSON are parse errors."""
        with pytest.raises(ParseError):
            PolyRepApp.load_json(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        with pytest.raises(ParseError):
            PolyRepApp.load_json(bad)


class TestCommands:
    """Test the library entry points used by the CLI."""

    @pytest.mark.integration
    def test_represent_quadrant(self, temp_config):
        """Test a verified document without timing."""
        app = PolyRepApp(temp_config)
        doc = app.represent(load_entry("quadrant"))
        assert doc.pipeline == "polyhedron"
        assert doc.report.passed
        assert doc.seconds is None
        assert doc.report.seconds is None

    @pytest.mark.integration
    def test_represent_with_timing(self, temp_config):
        """Test timing fills in seconds."""
        app = PolyRepApp(temp_config, timing=True)
        doc = app.represent(load_entry("half-plane"))
        assert doc.seconds is not None
        assert doc.report.seconds is not None

    @pytest.mark.integration
    def test_verify_round_trip(self, temp_config, tmp_path):
        """Test a written document verifies, and fails against another polyhedron."""
        app = PolyRepApp(temp_config)
        path = tmp_path / "rep.json"
        path.write_text(app.represent(load_entry("quadrant")).model_dump_json())
        assert isinstance(app.load_representation(path), Representation)
        assert app.verify(path, load_entry("quadrant")).report.passed
        with pytest.raises(VerificationFailure) as excinfo:
            app.verify(path, load_entry("square"))
        assert excinfo.value.exit_code == 4
        assert not excinfo.value.report.report.passed

    @pytest.mark.unit
    def test_info_square(self, temp_config):
        """Test the combinatorial summary."""
        info = PolyRepApp(temp_config).info(load_entry("square"))
        assert info.facets == 4
        assert info.vertices == 4
        assert info.s == 2
        assert info.simple
        assert info.lower_bound == 2
        assert info.symmetric_epsilon is not None

    @pytest.mark.unit
    def test_info_half_plane(self, temp_config):
        """Test an unbounded polyhedron with a single facet."""
        info = PolyRepApp(temp_config).info(load_entry("half-plane"))
        assert not info.bounded
        assert info.lineality == 1
        assert info.lower_bound == 1
        assert info.symmetric_epsilon is None
