"""Deterministic file output: fixed float formatting, stable field order.

Batch outputs must be byte-identical across reruns and across worker
counts, so every float that reaches a report file goes through one of two
formatters: ``G12`` (12 significant digits, the plot-data convention) or
``REPR`` (shortest round-trip form, used where a file must reload to the
exact same values).
"""

from __future__ import annotations

import json
from dataclasses import is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ValidationError

G12 = "%.12g"


def fmt_float(x: float) -> str:
    return G12 % float(x)


def round12(x: float) -> float:
    """Round to 12 significant digits; the JSON-side twin of the CSV format."""
    return float(G12 % float(x))


def json_ready(obj):
    """Recursively convert to JSON-encodable values with rounded floats."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, (float, np.floating)):
        return round12(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Enum):
        return json_ready(obj.value)
    if isinstance(obj, pd.Timestamp):
        return obj.strftime("%Y-%m-%d")
    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset, np.ndarray, pd.Index)):
        items = sorted(obj, key=str) if isinstance(obj, (set, frozenset)) else list(obj)
        return [json_ready(v) for v in items]
    if is_dataclass(obj) and hasattr(obj, "to_dict"):
        return json_ready(obj.to_dict())
    raise ValidationError("unserializable", f"cannot serialize {type(obj).__name__} to JSON")


def dump_json(obj) -> str:
    return json.dumps(json_ready(obj), indent=2, ensure_ascii=False) + "\n"


def check_writable(path: Path, overwrite: bool) -> Path:
    """Create the parent directory; refuse to clobber without the flag."""
    path = Path(path)
    if path.exists() and not overwrite:
        raise ValidationError("output_exists", f"{path} exists; pass overwrite to replace it")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(obj, path, overwrite: bool = True) -> Path:
    path = check_writable(Path(path), overwrite)
    path.write_text(dump_json(obj), encoding="utf-8")
    return path


def write_csv(frame: pd.DataFrame, path, overwrite: bool = True, exact: bool = False) -> Path:
    """Write a frame as UTF-8 CSV with deterministic float text.

    ``exact`` switches from the 12-significant-digit plot convention to
    shortest round-trip floats, for files meant to be read back losslessly.
    """
    path = check_writable(Path(path), overwrite)
    kwargs = {} if exact else {"float_format": G12}
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n", date_format="%Y-%m-%d", **kwargs)
    return path
