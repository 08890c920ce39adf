from pathlib import Path

import pytest

from multoeplitz.errors import ConfigError
from multoeplitz.load_config import load_config, read_raw_config, read_records, validate_config
from multoeplitz.runner import emit, run
from multoeplitz.symbol import Symbol, additive

FIXTURES = Path(__file__).parent.parent / "fixtures"


def test_toml_and_json_agree():
    from_toml = load_config(FIXTURES / "szego_small.toml")
    from_json = load_config(FIXTURES / "szego_small.json")
    assert from_toml.experiment == from_json.experiment
    assert from_toml.family == from_json.family
    assert from_json.symbol.file == FIXTURES / "tridiagonal.sym"
    assert from_toml.symbol.build() == from_json.symbol.build() == Symbol(additive(1), {1: 1, -1: 1})
    assert from_toml.function.build().degree == 2


def test_bad_schedule():
    with pytest.raises(ConfigError) as e:
        load_config(FIXTURES / "bad_schedule.toml")
    assert any(d.startswith("family.schedule") for d in e.value.diagnostics)


def test_bad_syntax_reports_position():
    with pytest.raises(ConfigError) as e:
        read_raw_config(FIXTURES / "bad_syntax.toml")
    assert "line 2" in e.value.diagnostics[0]


def test_missing_files():
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(FIXTURES / "no-such-config.toml")
    with pytest.raises(ConfigError) as e:
        load_config(FIXTURES / "missing_file.toml")
    assert any("no-such-symbol.sym" in d for d in e.value.diagnostics)


def test_unsupported_extension(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("experiment: {}\n")
    with pytest.raises(ConfigError, match="unsupported"):
        read_raw_config(path)


def test_kind_requirements():
    raw = {"experiment": {"kind": "szego-sweep"}, "family": {"name": "additive-segment", "schedule": [5]}}
    with pytest.raises(ConfigError, match="needs a \\[symbol\\] section"):
        validate_config(raw)
    raw = {"experiment": {"kind": "szego-sweep"}, "symbol": {"literal": "alpha=(1) 1"},
           "family": {"name": "natural-segment", "schedule": [5]}}
    with pytest.raises(ConfigError, match="no reference limit"):
        validate_config(raw)
    raw = {"experiment": {"kind": "determinant"}, "symbol": {"literal": "q=1 3; q=2 1; q=1/2 1"},
           "family": {"name": "alternating", "members": ["exponent-box", "natural-segment"], "schedule": [5]}}
    with pytest.raises(ConfigError, match="no reference limit along the alternating family"):
        validate_config(raw)
    raw["experiment"]["kind"] = "szego-sweep"
    assert validate_config(raw).family.name == "alternating"
    raw = {"experiment": {"kind": "folner-check"}, "family": {"name": "natural-segment", "schedule": [5]}}
    with pytest.raises(ConfigError, match="shifts"):
        validate_config(raw)
    raw = {"experiment": {"kind": "szego-sweep"}, "symbol": {"literal": "q=0 1"},
           "family": {"name": "additive-segment", "schedule": [5]}}
    with pytest.raises(ConfigError, match="symbol.literal"):
        validate_config(raw)


def test_unknown_keys_rejected():
    raw = {"experiment": {"kind": "szego-sweep", "tolerence": 1e-3}, "symbol": {"literal": "alpha=(1) 1"},
           "family": {"name": "additive-segment", "schedule": [5]}}
    with pytest.raises(ConfigError, match="tolerence"):
        validate_config(raw)


@pytest.mark.parametrize("format", ["csv", "json"])
def test_records_round_trip(tmp_path, format):
    result = run(load_config(FIXTURES / "szego_small.toml"))
    path = tmp_path / "out" / f"records.{format}"
    emit(result, format, path)
    assert read_records(path) == result.records
