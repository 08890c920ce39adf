import mimetypes
import tomllib
from pathlib import Path

import orjson
import pandas as pd
from pydantic import ValidationError

from multoeplitz.errors import ConfigError
from multoeplitz.models import RECORD_COLUMNS, ExperimentConfig, ExperimentRecord

mimetypes.add_type("application/toml", ".toml")


def _guess(path: Path) -> str:
    return mimetypes.guess_type(str(path), strict=False)[0] or ""


def _diagnostics(error: ValidationError) -> list[str]:
    return [f"{'.'.join(str(part) for part in e['loc']) or '<root>'}: {e['msg']}" for e in error.errors()]


def read_raw_config(path: str | Path) -> dict:
    """Parse a TOML or JSON experiment file into a plain dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    result = _guess(path)
    text = path.read_bytes()
    if "toml" in result:
        try:
            return tomllib.loads(text.decode("utf-8"))
        except tomllib.TOMLDecodeError as e:
            # message already carries "(at line N, column M)"
            raise ConfigError(f"{path}: invalid TOML", [str(e)]) from e
    if "json" in result:
        try:
            return orjson.loads(text)
        except orjson.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON", [f"line {e.lineno}, column {e.colno}: {e.msg}"]) from e
    raise ConfigError(f"{path}: unsupported config type {result or 'unknown'!r}, use .toml or .json")


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate an experiment config; relative file references resolve against its directory."""
    path = Path(path)
    raw = read_raw_config(path)
    try:
        return ExperimentConfig.model_validate(raw, context={"base": path.parent})
    except ValidationError as e:
        raise ConfigError(f"{path}: invalid experiment config", _diagnostics(e)) from e


def validate_config(raw: dict, base: str | Path | None = None) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw, context={"base": base})
    except ValidationError as e:
        raise ConfigError("invalid experiment config", _diagnostics(e)) from e


def read_records(path: str | Path) -> list[ExperimentRecord]:
    """Records written by ``emit``, from CSV or JSON."""
    path = Path(path)
    result = _guess(path)
    if "json" in result:
        data = orjson.loads(path.read_bytes())
        rows = data["records"] if isinstance(data, dict) else data
    elif "csv" in result:
        df = pd.read_csv(path)
        if list(df.columns) != RECORD_COLUMNS:
            raise ConfigError(f"{path}: expected columns {RECORD_COLUMNS}, got {list(df.columns)}")
        rows = df.to_dict(orient="records")
    else:
        raise ConfigError(f"{path}: unsupported record file type {result or 'unknown'!r}")
    return [ExperimentRecord(**row) for row in rows]
