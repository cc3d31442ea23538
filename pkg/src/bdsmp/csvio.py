"""CSV rendering and parsing for the command-line surface.

Floats are written with 17 significant digits so that re-parsing a file
recovers every value bit for bit.  Each file starts with a provenance
comment line ``# model=<digest> command=<name> version=<version>`` and is
written atomically (temp file in the target directory, then a rename).
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from importlib import metadata
from typing import Iterable, Sequence

Cell = float | int | str | None


def package_version() -> str:
    try:
        return metadata.version("bdsmp")
    except metadata.PackageNotFoundError:  # running from a source tree
        return "0.1.0"


def format_cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def render_csv(
    columns: Sequence[str],
    rows: Iterable[Sequence[Cell]],
    *,
    digest: str,
    command: str,
    version: str | None = None,
) -> str:
    buf = io.StringIO()
    buf.write(
        f"# model={digest} command={command} version={version or package_version()}\n"
    )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(c) for c in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[dict[str, str], tuple[str, ...], list[tuple]]:
    """Inverse of render_csv.

    Returns the provenance fields, the column names, and the data rows
    with numeric cells converted back to float (empty cells to None).
    """
    lines = text.splitlines()
    meta: dict[str, str] = {}
    while lines and lines[0].startswith("#"):
        for part in lines.pop(0).lstrip("# ").split():
            key, _, val = part.partition("=")
            meta[key] = val
    reader = csv.reader(lines)
    columns = tuple(next(reader))
    rows = []
    for raw in reader:
        cells = []
        for cell in raw:
            if cell == "":
                cells.append(None)
            else:
                try:
                    cells.append(float(cell))
                except ValueError:
                    cells.append(cell)
        rows.append(tuple(cells))
    return meta, columns, rows


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write so that readers never observe a half-written file."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
