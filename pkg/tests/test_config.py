"""Tests for config loading and CLI > config > environment > default resolution."""

import pytest

from sphere_roots.config import (
    DEFAULTS,
    SEED_ENV_VAR,
    build_solver_config,
    create_parser,
    load_config,
    parse_float_list,
    parse_int_list,
    resolve,
)


def _args(*argv):
    return create_parser().parse_args(list(argv))


class TestLoadConfig:
    """TOML files with flattened sub-tables."""

    def test_missing_file(self, tmp_path):
        assert load_config(tmp_path / "absent.toml") == {}

    def test_tables_flattened(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text(
            'seed = 5\n'
            '[hd]\nC1 = 0.05\nmax_iters = 100\n'
            '[mss]\ndelta = 0.3\nk0 = 9\n'
            '[cert]\nmode = "analytic"\n'
        )
        cfg = load_config(path)
        assert cfg == {
            "seed": 5, "C1": 0.05, "hd_max_iters": 100,
            "mss_delta": 0.3, "k0": 9, "cert_mode": "analytic",
        }

    def test_unknown_keys_dropped(self, tmp_path, capsys):
        path = tmp_path / "c.toml"
        path.write_text('bogus = 1\nseed = 2\n[hd]\nwhat = 3\n')
        assert load_config(path) == {"seed": 2}
        err = capsys.readouterr().err
        assert "bogus" in err
        assert "[hd].what" in err

    def test_top_level_key_wins_over_table(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('C1 = 2.0\n[hd]\nC1 = 0.5\n')
        assert load_config(path)["C1"] == 2.0

    def test_invalid_toml_exits(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text("seed = = 1\n")
        with pytest.raises(SystemExit) as exc:
            load_config(path)
        assert exc.value.code == 1
        assert "failed to read config file" in capsys.readouterr().err


class TestResolve:
    """Priority order for every setting."""

    def test_defaults(self):
        r = resolve(_args(), {}, env={})
        assert r == DEFAULTS

    def test_config_over_default(self):
        r = resolve(_args(), {"delta": 0.05, "u1": 1.1}, env={})
        assert r["delta"] == 0.05
        assert r["u1"] == 1.1

    def test_cli_over_config(self):
        r = resolve(_args("--delta", "0.02", "--mss-delta", "0.4"), {"delta": 0.05, "mss_delta": 0.2}, env={})
        assert r["delta"] == 0.02
        assert r["mss_delta"] == 0.4

    def test_env_seed(self):
        assert resolve(_args(), {}, env={SEED_ENV_VAR: "42"})["seed"] == 42

    def test_config_seed_over_env(self):
        assert resolve(_args(), {"seed": 3}, env={SEED_ENV_VAR: "42"})["seed"] == 3

    def test_cli_seed_over_everything(self):
        assert resolve(_args("--seed", "9"), {"seed": 3}, env={SEED_ENV_VAR: "42"})["seed"] == 9

    def test_blank_env_seed_ignored(self):
        assert resolve(_args(), {}, env={SEED_ENV_VAR: "  "})["seed"] == DEFAULTS["seed"]

    def test_invalid_env_seed(self):
        with pytest.raises(ValueError, match=SEED_ENV_VAR):
            resolve(_args(), {}, env={SEED_ENV_VAR: "seven"})

    def test_constant_flags(self):
        r = resolve(_args("--C1", "0.05", "--A", "0.5", "--k0", "7", "--cert-mode", "analytic"), {}, env={})
        assert (r["C1"], r["A"], r["k0"], r["cert_mode"]) == (0.05, 0.5, 7, "analytic")


class TestBuildSolverConfig:
    def test_defaults(self):
        cfg = build_solver_config(resolve(_args(), {}, env={}))
        assert cfg.mode == "auto"
        assert cfg.k0_override is None
        assert cfg.hd_config().max_iters is None
        assert cfg.mss_run_config().workers == 1

    def test_overrides_flow_through(self):
        r = resolve(_args("--threads", "3", "--hd-max-iters", "50", "--energy-floor", "1e-9"), {"k0": 5}, env={})
        cfg = build_solver_config(r, mode="hd", quiet=False)
        assert cfg.mode == "hd"
        assert not cfg.quiet
        assert cfg.threads == 3
        assert cfg.k0_override == 5
        hd = cfg.hd_config()
        assert hd.max_iters == 50
        assert hd.energy_floor == 1e-9

    def test_delta_validated(self):
        r = resolve(_args("--delta", "0.5"), {}, env={})
        with pytest.raises(ValueError, match="delta"):
            build_solver_config(r)

    def test_unknown_cert_mode(self):
        r = resolve(_args(), {"cert_mode": "magic"}, env={})
        with pytest.raises(ValueError):
            build_solver_config(r).cert_config()


class TestParseLists:
    def test_ints(self):
        assert parse_int_list("2, 3,3") == [2, 3, 3]

    def test_floats(self):
        assert parse_float_list("0.6,0.8,0") == [0.6, 0.8, 0.0]

    @pytest.mark.parametrize("raw", ["", "2,x", ","])
    def test_bad_ints(self, raw):
        with pytest.raises(ValueError):
            parse_int_list(raw)

    def test_bad_floats(self):
        with pytest.raises(ValueError):
            parse_float_list("0.6,abc")
