from pathlib import Path

import pytest

from multoeplitz.load_config import load_config, read_records
from multoeplitz.runner import emit, run

CONFIGS = Path(__file__).parent.parent.parent / "configs"


@pytest.mark.parametrize("config_path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs(tmp_path, config_path):
    """every shipped config runs end to end and writes both output formats - takes ~ 1min"""
    config = load_config(config_path)
    result = run(config)
    assert result.verdict in ("PASS", "EXPLORATORY", "FOLNER", "NON-FOLNER"), result.records

    for format in ("csv", "json"):
        path = tmp_path / f"{config_path.stem}.{format}"
        emit(result, format, path)
        assert path.exists(), f"Expected file {path.name} does not exist."
        assert read_records(path) == result.records


def test_folner_verdicts():
    assert run(load_config(CONFIGS / "folner_natural.toml")).verdict == "NON-FOLNER"
    assert run(load_config(CONFIGS / "folner_boxes.toml")).verdict == "FOLNER"


def test_alternating_sweep_is_exploratory():
    result = run(load_config(CONFIGS / "szego_alternating.toml"))
    assert result.verdict == "EXPLORATORY"
    assert [r.reference for r in result.records] == pytest.approx([2.0] * 4)
    boxes, naturals = result.records[0::2], result.records[1::2]
    # exponent boxes {0..n}^2 lose 1/(n+1) of the set under the shift by 2
    assert [r.value for r in boxes] == pytest.approx([2 - 2 / 3, 2 - 2 / 21])
    assert [r.value for r in naturals] == pytest.approx([1.0, 1.0])
