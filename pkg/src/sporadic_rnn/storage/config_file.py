"""Flat `key = value` configuration files."""

import logging
from pathlib import Path

from sporadic_rnn.data.errors import DataError
from sporadic_rnn.models.config import RunConfig

log = logging.getLogger(__name__)


def read_key_values(path: Path | str) -> dict[str, str]:
    """Parse `key = value` lines; `#` starts a comment, blank lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}: expected 'key = value', got '{raw.strip()}'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise DataError(f"{path}: empty key", line=lineno)
        if key in values:
            raise DataError(f"{path}: duplicate key '{key}'", line=lineno)
        values[key] = value
    return values


def write_key_values(path: Path | str, values: dict[str, str], header: str | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {header}"] if header else []
    lines += [f"{k} = {v}" for k, v in values.items()]
    path.write_text("\n".join(lines) + "\n")


def resolve_run_config(
    config_path: Path | str | None = None,
    overrides: dict | None = None,
) -> RunConfig:
    """Merge defaults, file values and CLI flags (highest precedence wins).

    Flags left as None do not override anything.
    """
    values: dict = read_key_values(config_path) if config_path is not None else {}
    flags = {k: v for k, v in (overrides or {}).items() if v is not None}
    if flags:
        log.debug(f"CLI overrides: {sorted(flags)}")
    return RunConfig(**{**values, **flags})
