"""Tests for the configuration system."""

from pathlib import Path

import pytest

from mcpinns.config import (
    Config,
    ConfigError,
    ConfigLoader,
    RunConfig,
    load_config,
    load_run_config,
)

BASE = """
seed = 5
workers = 2

[problem]
family = "forward_laplacian"
d = 3

[train]
epochs = 100

[environments.full.train]
epochs = 40000

[environments.smoke]
workers = 1
"""


class TestConfig:
    """Test the Config container."""

    def test_dot_access(self):
        config = Config({"problem": {"d": 2}, "seed": 1})
        assert config.seed == 1
        assert config.problem.d == 2

    def test_get_method(self):
        config = Config({"exists": "yes"})
        assert config.get("exists") == "yes"
        assert config.get("missing", "default") == "default"

    def test_missing_attribute(self):
        with pytest.raises(AttributeError):
            _ = Config({}).missing


class TestConfigLoader:
    """Test file discovery, environments and overrides."""

    def test_explicit_file(self, write_config):
        config = load_config(write_config(BASE))
        assert config.problem["d"] == 3
        assert config.environment == "desk"
        assert "environments" not in config

    def test_environment_overlay(self, write_config):
        config = load_config(write_config(BASE), environment="full")
        assert config.train["epochs"] == 40000
        assert config.problem["d"] == 3

    def test_environment_from_variable(self, write_config, monkeypatch):
        monkeypatch.setenv("MCPINNS_ENV", "smoke")
        config = load_config(write_config(BASE))
        assert config.workers == 1
        assert config.environment == "smoke"

    def test_unknown_environment(self, write_config):
        with pytest.raises(ConfigError, match="unknown environment"):
            load_config(write_config(BASE), environment="cluster")

    def test_default_environment_need_not_exist(self, write_config):
        assert load_config(write_config(BASE), environment="desk").train["epochs"] == 100

    def test_overrides_win(self, write_config):
        config = load_config(write_config(BASE), environment="full", overrides={"train": {"epochs": 3}})
        assert config.train["epochs"] == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.toml")

    def test_syntax_error_names_the_line(self, write_config):
        path = write_config("seed = 1\n[problem]\nd = = 2\n")
        with pytest.raises(ConfigError, match="line 3"):
            load_config(path)

    def test_discovery_walks_up(self, tmp_path, monkeypatch):
        (tmp_path / "mcpinns.toml").write_text("seed = 9\n")
        nested = tmp_path / "a" / "b"
        nested.mkdir(parents=True)
        (nested / "pyproject.toml").write_text('[project]\nname = "other"\n')
        monkeypatch.chdir(nested)
        config = ConfigLoader().load()
        assert config.seed == 9
        assert config.source == str((tmp_path / "mcpinns.toml").resolve())

    def test_pyproject_section(self, tmp_path, monkeypatch):
        (tmp_path / "pyproject.toml").write_text("[tool.mcpinns]\nseed = 4\n")
        monkeypatch.chdir(tmp_path)
        assert ConfigLoader().load().seed == 4

    def test_extra_search_path(self, tmp_path, monkeypatch):
        (tmp_path / "custom.toml").write_text("seed = 8\n")
        monkeypatch.chdir(tmp_path)
        loader = ConfigLoader(search_paths=[Path("custom.toml"), *ConfigLoader.DEFAULT_SEARCH_PATHS])
        assert loader.load().seed == 8


class TestRunConfig:
    """Test the typed run configuration."""

    def test_defaults(self, write_config):
        run = load_run_config(write_config("seed = 1\n"))
        assert run.problem.family == "forward_laplacian"
        assert run.network.hidden_layers == (64, 64, 64, 64)
        assert run.estimator.m == 20
        assert run.workers == 1

    def test_lists_become_tuples(self, write_config):
        run = load_run_config(write_config("seed = 1\n[network]\nhidden_layers = [16, 16]\n"))
        assert run.network.hidden_layers == (16, 16)
        assert run.build_problem().network.widths == (2, 16, 16, 1)

    def test_seed_override(self, write_config):
        run = load_run_config(write_config("seed = 1\n"), overrides={"seed": 42, "workers": None})
        assert run.seed == 42 and run.workers == 1

    def test_seed_required(self, write_config):
        with pytest.raises(ConfigError, match="seed"):
            load_run_config(write_config("workers = 2\n"))

    @pytest.mark.parametrize("seed", ["-1", "18446744073709551616", '"abc"'])
    def test_seed_range(self, seed, write_config):
        with pytest.raises(ConfigError, match="seed"):
            load_run_config(write_config(f"seed = {seed}\n"))

    def test_unknown_top_level_key(self, write_config):
        with pytest.raises(ConfigError, match="unknown top-level"):
            load_run_config(write_config("seed = 1\nsede = 2\n"))

    def test_unknown_section_key(self, write_config):
        with pytest.raises(ConfigError, match=r"\[estimator\] unknown key\(s\): mm"):
            load_run_config(write_config("seed = 1\n[estimator]\nmm = 3\n"))

    def test_type_mismatch(self, write_config):
        with pytest.raises(ConfigError, match=r"\[train\] epochs"):
            load_run_config(write_config('seed = 1\n[train]\nepochs = "many"\n'))

    def test_int_accepted_for_float(self, write_config):
        assert load_run_config(write_config("seed = 1\n[train]\nlr = 1\n")).train.lr == 1

    @pytest.mark.parametrize(
        "text, section",
        [
            ("[problem]\nalpha = 2.5\n", "problem"),
            ("[estimator]\nm = 0\n", "estimator"),
            ("[estimator]\neps = 0.5\n", "estimator"),
            ('[train]\nmode = "median"\n', "train"),
            ("[abc]\ntolerance = -1.0\n", "abc"),
            ('[abc]\nsource = "oracle"\n', "abc"),
            ('[estimate]\nfield = "gaussian"\n', "estimate"),
            ("[estimate]\nd = 2\npoint = [0.1]\n", "estimate"),
            ('[oracle]\ntarget = "heat"\n', "oracle"),
            ('[logging]\nlevel = "LOUD"\n', "logging"),
        ],
    )
    def test_range_errors_name_their_section(self, text, section, write_config):
        with pytest.raises(ConfigError, match=rf"\[{section}\]"):
            load_run_config(write_config("seed = 1\n" + text))

    def test_domain_objects(self, write_config):
        run = load_run_config(
            write_config(
                "seed = 3\nworkers = 4\n"
                '[problem]\nfamily = "inverse_ade"\nd = 1\n'
                "[train]\nepochs = 7\nw_u = 2.0\n"
            )
        )
        cfg = run.train_config()
        assert (cfg.epochs, cfg.seed, cfg.workers) == (7, 3, 4)
        assert cfg.weights.w_u == 2.0
        problem = run.build_problem()
        assert problem.family == "inverse_ade"
        assert problem.n_sensors == 20
        assert run.abc_config().n_draws == 100_000

    def test_shipped_configs_validate(self):
        root = Path(__file__).resolve().parents[1]
        paths = [root / "mcpinns.toml", *sorted((root / "configs").glob("*.toml"))]
        for path in paths:
            assert isinstance(load_run_config(path), RunConfig), path
