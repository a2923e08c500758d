import tempfile
from pathlib import Path

import pytest

from bqqkit.env import SweepConfigFile, method_param_keys
from bqqkit.errors import ConfigError


class TestSweepConfigFile:
    EXPECTED_SEED_COUNT = 3

    @pytest.fixture
    def temp_env_file(self):
        """Class method fixture for temporary .env file."""
        with tempfile.NamedTemporaryFile(mode="w", suffix=".env", delete=False) as f:
            yield f.name
        Path(f.name).unlink()

    @pytest.fixture
    def config_file(self, temp_env_file):
        """Class method fixture providing SweepConfigFile instance."""
        return SweepConfigFile(temp_env_file)

    def write(self, path: str, text: str):
        Path(path).write_text(text)

    def test_minimal(self, config_file, temp_env_file):
        """Test the three required keys are enough."""
        self.write(temp_env_file, "INPUT=gen:gaussian:8x8\nMETHODS=uq,bcq\nSEEDS=0,1,2\n")
        config = config_file.load()
        assert config.input == "gen:gaussian:8x8"
        assert config.methods == ("uq", "bcq")
        assert len(config.seeds) == self.EXPECTED_SEED_COUNT
        assert config.formats == ("csv",)
        assert config.output is None
        assert not config.original_scale

    def test_grids_and_options(self, config_file, temp_env_file):
        """Test method grids, annealing and output settings."""
        self.write(
            temp_env_file,
            "\n".join(
                [
                    "INPUT=weights.fvecs",
                    "METHODS=bqq",
                    "SEEDS=4",
                    "BQQ_P=1,2,4",
                    "BQQ_BUDGET=2",
                    "STEPS=500",
                    "T_FIN=0.01",
                    "GROUP_ROWS=16",
                    "SCALAR_BITS=64",
                    "OUTPUT=out/sweep",
                    "FORMATS=csv,json",
                    "ORIGINAL_SCALE=yes",
                ]
            )
            + "\n",
        )
        config = config_file.load()
        assert config.grids == {"bqq": {"p": [1, 2, 4]}}
        assert config.bqq_budget == (2.0,)
        assert config.anneal.n_step == 500  # noqa: PLR2004
        assert config.anneal.t_fin == 0.01  # noqa: PLR2004
        assert config.group_rows == 16  # noqa: PLR2004
        assert config.group_cols is None
        assert config.scalar_bits == 64  # noqa: PLR2004
        assert config.output == "out/sweep"
        assert config.formats == ("csv", "json")
        assert config.original_scale

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            SweepConfigFile(tmp_path / "missing.env").load()

    def test_unknown_key(self, config_file, temp_env_file):
        """Test keys outside the schema are rejected."""
        self.write(temp_env_file, "INPUT=a.csv\nMETHODS=uq\nSEEDS=0\nBQQ_RANK=2\n")
        with pytest.raises(ConfigError, match="BQQ_RANK"):
            config_file.load()

    @pytest.mark.parametrize("missing", ["INPUT", "METHODS", "SEEDS"])
    def test_required_keys(self, config_file, temp_env_file, missing):
        """Test each required key."""
        lines = {"INPUT": "INPUT=a.csv", "METHODS": "METHODS=uq", "SEEDS": "SEEDS=0"}
        del lines[missing]
        self.write(temp_env_file, "\n".join(lines.values()) + "\n")
        with pytest.raises(ConfigError, match=f"{missing} is required"):
            config_file.load()

    def test_unknown_method(self, config_file, temp_env_file):
        """Test unregistered methods are rejected."""
        self.write(temp_env_file, "INPUT=a.csv\nMETHODS=uq,gptq\nSEEDS=0\n")
        with pytest.raises(ConfigError, match="gptq"):
            config_file.load()

    @pytest.mark.parametrize(
        "line", ["UQ_BITS=two", "STEPS=1,2", "ORIGINAL_SCALE=maybe", "T_FIN=5"]
    )
    def test_malformed_values(self, config_file, temp_env_file, line):
        """Test malformed values raise ConfigError."""
        self.write(temp_env_file, f"INPUT=a.csv\nMETHODS=uq\nSEEDS=0\n{line}\n")
        with pytest.raises(ConfigError):
            config_file.load()

    def test_write_template(self, config_file):
        """Test the template loads back with every parameter at its default."""
        config_file.write_template("gen:lowrank:32x32", ["bqq", "uq"], [0, 1])
        config = config_file.load()
        assert config.methods == ("bqq", "uq")
        assert config.seeds == (0, 1)
        assert config.grids["bqq"] == {"p": [1], "l_scale": [1.0]}
        assert config.grids["uq"] == {"bits": [2], "n_split": [100]}

    def test_param_keys(self):
        """Test every method parameter has an upper-case key."""
        keys = method_param_keys()
        assert keys["BQQ_L_SCALE"] == ("bqq", "l_scale")
        assert keys["VQ_UQ_BITS"] == ("vq_uq", "bits")
