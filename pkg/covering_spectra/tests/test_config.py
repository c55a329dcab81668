"""Tests for run configuration."""
import json

import pytest

from covering_spectra.config import RunConfig, load_config
from covering_spectra.const import DEFAULT_EIG_COUNT, ENV_CONFIG_PATH, FORMAT_CSV
from covering_spectra.exceptions import UsageError


class TestRunConfig:
    """Tests for RunConfig."""

    def test_defaults(self):
        """An empty config carries the package defaults."""
        cfg = RunConfig.from_dict({})

        assert cfg.m == DEFAULT_EIG_COUNT
        assert cfg.output is None
        assert cfg.solver["seed"] == cfg.seed

    def test_coercion(self):
        """String numbers are coerced by the schema."""
        assert RunConfig.from_dict({"m": "20", "tol": "1e-8"}).m == 20

    @pytest.mark.parametrize(
        "data",
        [{"m": 0}, {"tol": -1.0}, {"eps_zero": 0.5}, {"laplacian": "hodge"}, {"unknown": 1}],
    )
    def test_invalid_values(self, data):
        """Schema violations are usage errors."""
        with pytest.raises(UsageError):
            RunConfig.from_dict(data)

    def test_merged_skips_none(self):
        """Unset command-line options keep the file value."""
        cfg = RunConfig(m=30).merged({"m": None, "seed": 11, "verbose": True})

        assert cfg.m == 30
        assert cfg.seed == 11

    def test_merged_validates(self):
        """Overrides go through the same schema."""
        with pytest.raises(UsageError):
            RunConfig().merged({"margin": 0})

    def test_hash_ignores_output(self):
        """Where results go does not change the hash."""
        base = RunConfig()

        assert base.config_hash == base.merged({"output": "out.json", "format": FORMAT_CSV, "jobs": 4}).config_hash
        assert base.config_hash != base.merged({"seed": 1}).config_hash


class TestLoadConfig:
    """Tests for load_config."""

    def test_no_file(self, monkeypatch):
        """Without a path or environment variable the defaults apply."""
        monkeypatch.delenv(ENV_CONFIG_PATH, raising=False)

        assert load_config() == RunConfig()

    def test_from_path(self, tmp_path):
        """A JSON file overrides the defaults."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"m": 40, "seed": None}), encoding="utf-8")
        cfg = load_config(str(path))

        assert cfg.m == 40
        assert cfg.seed is None

    def test_from_environment(self, tmp_path, monkeypatch):
        """The environment names a default config file."""
        path = tmp_path / "env.json"
        path.write_text(json.dumps({"margin": 1e-6}), encoding="utf-8")
        monkeypatch.setenv(ENV_CONFIG_PATH, str(path))

        assert load_config().margin == 1e-6

    def test_missing_file(self, tmp_path):
        """Unreadable files are usage errors."""
        with pytest.raises(UsageError, match="cannot read"):
            load_config(str(tmp_path / "absent.json"))

    def test_not_an_object(self, tmp_path):
        """The file must hold an object."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]", encoding="utf-8")

        with pytest.raises(UsageError, match="JSON object"):
            load_config(str(path))
