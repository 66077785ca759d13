"""Plain-text boundary map tables"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from app.errors import DomainError, InvariantViolation
from app.models.maps import Lift, LineMap
from app.storage.artifacts import atomic_write_text, format_number

logger = logging.getLogger(__name__)

MODULE = "storage"

LIFT_PREFIX = "# lift:"


def read_map_table(path: Union[str, Path], name: Optional[str] = None) -> LineMap:
    """
    Read a sampled map.

    The first line declares the lift (`# lift: circle` or `# lift: line`), the second is
    the `x,h` header and every further line is one strictly increasing row.

    Args:
        path: Table file
        name: Map name, defaults to the file stem

    Returns:
        Sampled LineMap
    """
    path = Path(path)
    try:
        lines = [line.strip() for line in path.read_text().splitlines() if line.strip()]
    except OSError as e:
        raise DomainError(f"cannot read map table {path}: {e}", module=MODULE)

    if not lines or not lines[0].startswith(LIFT_PREFIX):
        raise DomainError(f"{path}: first line must be '{LIFT_PREFIX} circle' or '{LIFT_PREFIX} line'", module=MODULE)
    lift = lines[0][len(LIFT_PREFIX):].strip()
    if lift not in (Lift.CIRCLE.value, Lift.LINE.value):
        raise DomainError(f"{path}: unknown lift {lift!r}", module=MODULE)
    if len(lines) < 2 or [c.strip() for c in lines[1].split(",")] != ["x", "h"]:
        raise DomainError(f"{path}: second line must be the header 'x,h'", module=MODULE)

    rows = []
    for number, line in enumerate(lines[2:], start=3):
        try:
            x, h = (float(v) for v in line.split(","))
        except ValueError:
            raise DomainError(f"{path}:{number}: expected two numbers, got {line!r}", module=MODULE)
        rows.append((x, h))
    if len(rows) < 2:
        raise DomainError(f"{path}: a map table needs at least two rows", module=MODULE)

    xs = np.array([r[0] for r in rows])
    hs = np.array([r[1] for r in rows])
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(hs) <= 0):
        bad = int(np.argmax((np.diff(xs) <= 0) | (np.diff(hs) <= 0)))
        raise InvariantViolation(f"{path}: rows are not strictly increasing after x = {xs[bad]:.6g}", module=MODULE)

    try:
        h = LineMap.from_table(xs, hs, name=name or path.stem, lift=Lift(lift))
    except ValueError as e:
        raise DomainError(f"{path}: {e}", module=MODULE)
    logger.info(f"Read {len(rows)}-row {lift} map table from {path}")
    return h


def write_map_table(path: Union[str, Path], h: LineMap, nodes: Optional[Sequence[float]] = None) -> Path:
    """
    Tabulate h on the nodes and write it in the format read_map_table expects.

    Circle lifts default to 1025 nodes covering [0, 1]; sampled maps default to their own table.
    """
    if nodes is None:
        if h.table_x:
            nodes = h.table_x
        elif h.is_circle:
            nodes = np.linspace(0.0, 1.0, 1025)
        else:
            raise DomainError(f"closed-form line map {h.name} needs explicit nodes", module=MODULE)
    xs = np.asarray(nodes, dtype=float)
    hs = np.asarray(h(xs), dtype=float)
    lines = [f"{LIFT_PREFIX} {h.lift}", "x,h"]
    lines += [f"{format_number(x)},{format_number(v)}" for x, v in zip(xs, hs)]
    return atomic_write_text(path, "\n".join(lines) + "\n")
