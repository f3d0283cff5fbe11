"""Deterministic text output helpers shared by table writers."""

from __future__ import annotations

import json
import os
from typing import Iterable, Sequence

import numpy as np

__all__ = ["format_value", "write_csv", "write_json"]


def _plain(v):
    """numpy scalars -> native python; everything else passes through."""
    return v.item() if isinstance(v, np.generic) else v


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def format_value(v) -> str:
    """Render a cell deterministically; floats use shortest round-trip form."""
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Comma-separated, '.' decimals, LF endings, no quoting (no free text)."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str | os.PathLike, payload) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
