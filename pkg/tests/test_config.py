"""Configuration precedence: defaults, file, environment."""
from __future__ import annotations

import json

import pytest

from cinevoice.config import AppConfig, load_config


def test_defaults():
    config = load_config(env={})
    assert config == AppConfig()
    assert config.page_size == 8
    assert config.session_timeout_s == 120.0
    assert config.auth_token == "dev-token"


def test_file_overrides_defaults(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"port": 9000, "data_dir": "/tmp/x"}),
                    encoding="utf-8")
    config = load_config(path, env={})
    assert config.port == 9000
    assert config.data_dir == "/tmp/x"
    assert config.page_size == 8


def test_env_overrides_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"port": 9000}), encoding="utf-8")
    config = load_config(path, env={"CINEVOICE_PORT": "9001",
                                    "CINEVOICE_PAGE_SIZE": "4"})
    assert config.port == 9001
    assert config.page_size == 4


def test_env_values_are_coerced():
    config = load_config(env={"CINEVOICE_SESSION_TIMEOUT_S": "90.5",
                              "CINEVOICE_K": "10"})
    assert config.session_timeout_s == 90.5
    assert config.k == 10


def test_unknown_file_key_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"pagesize": 4}), encoding="utf-8")
    with pytest.raises(ValueError, match="unknown config keys: pagesize"):
        load_config(path, env={})


def test_non_object_file_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ValueError, match="JSON object"):
        load_config(path, env={})


def test_uncoercible_value_rejected():
    with pytest.raises(ValueError, match="not int"):
        load_config(env={"CINEVOICE_PORT": "not-a-number"})
