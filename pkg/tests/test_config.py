import json
from pathlib import Path

import pytest

from src.config import AppConfig, ConfigManager, parse_switch
from src.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("TILECOH_COLOR", "LOG_LEVEL", "TILECOH_CONFIG"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    config = ConfigManager().get_config()
    assert config == AppConfig()
    assert config.analysis.horizon == 64
    assert config.analysis.max_prime == 97
    assert config.analysis.power == 2
    assert config.analysis.collar is True
    assert config.output.color is None
    assert config.log_level == "WARNING"


def test_json_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "analysis": {"horizon": 32, "collar": "off"},
        "output": {"report_timings": True, "json_indent": 4},
        "workers": 2,
    }))
    config = ConfigManager(str(path)).get_config()
    assert config.analysis.horizon == 32
    assert config.analysis.collar is False
    assert config.analysis.max_prime == 97
    assert config.output.report_timings is True
    assert config.output.json_indent == 4
    assert config.workers == 2


def test_yaml_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("analysis:\n  max_prime: 13\nlog_level: info\n")
    manager = ConfigManager(str(path))
    assert manager.get_config().analysis.max_prime == 13
    assert manager.get_config().log_level == "INFO"


def test_sample_config_loads():
    config = ConfigManager(str(Path(__file__).resolve().parent.parent / "deploy" / "config.json")).get_config()
    assert config == AppConfig()


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        ConfigManager(str(tmp_path / "absent.json"))


def test_environment_overrides(monkeypatch, tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"output": {"color": True}, "log_level": "ERROR"}))
    monkeypatch.setenv("TILECOH_COLOR", "0")
    monkeypatch.setenv("LOG_LEVEL", "debug")
    config = ConfigManager(str(path)).get_config()
    assert config.output.color is False
    assert config.log_level == "DEBUG"


def test_validation(tmp_path):
    path = tmp_path / "config.json"
    for bad in ({"analysis": {"horizon": 1}}, {"analysis": {"power": 0}},
                {"analysis": {"max_prime": "many"}}, {"workers": 0}):
        path.write_text(json.dumps(bad))
        with pytest.raises(ConfigError):
            ConfigManager(str(path))


def test_parse_switch():
    assert parse_switch("on") is True
    assert parse_switch("1") is True
    assert parse_switch("OFF") is False
    assert parse_switch(False) is False
    with pytest.raises(ConfigError):
        parse_switch("maybe")
