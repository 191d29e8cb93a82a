import logging

import pytest

from ipobisim.config import ACCEPTANCE_DEFAULTS, SEED_ENV, Settings, load_settings
from ipobisim.errors import IpoBisimError


def test_file_values_override_defaults(config_file):
    settings = load_settings(config_file, environ={})
    assert settings.depth == 3
    assert settings.fuel == 64
    assert settings.pool == Settings().pool
    assert settings.acceptance["coincidence_depth"] == 5
    assert settings.acceptance["cbv_depth"] == ACCEPTANCE_DEFAULTS["cbv_depth"]


def test_unknown_keys_are_reported(config_file, caplog):
    with caplog.at_level(logging.WARNING, logger="ipobisim.config"):
        load_settings(config_file, environ={})
    assert "defaults.colour" in caplog.text


def test_missing_explicit_file(tmp_path):
    with pytest.raises(IpoBisimError):
        load_settings(tmp_path / "missing.toml", environ={})


def test_malformed_file(tmp_path):
    path = tmp_path / "ipobisim.toml"
    path.write_text("[defaults\n")
    with pytest.raises(IpoBisimError):
        load_settings(path, environ={})


def test_defaults_without_a_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert load_settings(environ={}) == Settings()


def test_file_in_working_directory_is_picked_up(config_file, monkeypatch):
    monkeypatch.chdir(config_file.parent)
    assert load_settings(environ={}).depth == 3


def test_seed_from_environment(config_file):
    assert load_settings(config_file, environ={SEED_ENV: "7"}).seed == 7
    with pytest.raises(IpoBisimError):
        load_settings(config_file, environ={SEED_ENV: "seven"})


def test_override_ignores_missing_flags():
    settings = Settings().override(depth=2, fuel=None)
    assert settings.depth == 2
    assert settings.fuel == Settings().fuel
