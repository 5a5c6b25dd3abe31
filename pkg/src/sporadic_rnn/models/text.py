"""Parsing of vector and matrix values written in flat key = value files."""

from typing import Any


def parse_vector(v: Any) -> Any:
    """Turn "1.0, 2.0" or "1.0 2.0" into a list of floats; pass lists through."""
    if isinstance(v, str):
        parts = v.replace(",", " ").split()
        return [float(p) for p in parts]
    if isinstance(v, int | float):
        return [float(v)]
    return v


def parse_matrix(v: Any) -> Any:
    """Turn "a b; c d" into [[a, b], [c, d]]; pass nested lists through."""
    if isinstance(v, str):
        rows = [r for r in v.split(";") if r.strip()]
        return [parse_vector(r) for r in rows]
    return v


def format_vector(values) -> str:
    return " ".join(repr(float(x)) for x in values)


def format_matrix(rows) -> str:
    return "; ".join(format_vector(r) for r in rows)
