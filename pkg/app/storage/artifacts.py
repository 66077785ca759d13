"""Atomic, deterministic CSV and JSON artifacts"""

import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)


def format_number(value: Any) -> str:
    """repr-based formatting so reruns are byte-identical."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return f"{repr(float(value.real))}{'+' if value.imag >= 0 or math.isnan(value.imag) else '-'}{repr(abs(float(value.imag)))}j"
    return str(value)


def _plain(value: Any) -> Any:
    """Convert models, arrays and numpy scalars into JSON-native values."""
    if isinstance(value, BaseModel):
        return _plain(value.model_dump(mode="json"))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write through a temporary file in the same directory and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except Exception as e:
        logger.error(f"Error writing {path}: {e}", exc_info=True)
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug(f"Wrote {path}")
    return path


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return atomic_write_text(path, buffer.getvalue())


def write_json(path: Union[str, Path], payload: Any) -> Path:
    """JSON with sorted keys and a trailing newline."""
    text = json.dumps(_plain(payload), sort_keys=True, indent=2)
    return atomic_write_text(path, text + "\n")
