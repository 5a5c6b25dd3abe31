"""Human-readable and CSV report files."""

import logging
from pathlib import Path

import pandas as pd

log = logging.getLogger(__name__)


def write_report(path: Path | str, stats: dict) -> tuple[Path, Path]:
    """Write `stats` as `<path>.txt` (key: value lines) and `<path>.csv` (key,value rows)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text_path, csv_path = path.with_suffix(".txt"), path.with_suffix(".csv")
    text_path.write_text("".join(f"{k}: {v}\n" for k, v in stats.items()))
    frame = pd.DataFrame({"key": list(stats), "value": [str(v) for v in stats.values()]})
    frame.to_csv(csv_path, index=False)
    log.info(f"Wrote report {text_path}")
    return text_path, csv_path


def write_frame(path: Path | str, df: pd.DataFrame) -> Path:
    """Write a result table with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format="%.17g")
    return path


def read_report(path: Path | str) -> dict[str, str]:
    """Read back the CSV half of a report."""
    frame = pd.read_csv(Path(path).with_suffix(".csv"), dtype=str, keep_default_na=False)
    return dict(zip(frame["key"], frame["value"], strict=True))
