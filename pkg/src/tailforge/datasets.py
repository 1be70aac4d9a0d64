"""Dataset ingestion: CSV to validated, registered samples."""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field

import numpy as np

from .empirical import Sample

__all__ = ["Dataset", "IngestReport", "ingest_csv"]


@dataclass(frozen=True)
class Dataset:
    id: str
    name: str
    sample: Sample
    checksum: str

    def to_summary(self) -> dict:
        return {"id": self.id, "name": self.name, "n": self.sample.n,
                "min": float(self.sample.values[0]), "max": float(self.sample.values[-1]),
                "checksum": self.checksum}


@dataclass
class IngestReport:
    dataset: Dataset
    n_rows: int
    rejected: list = field(default_factory=list)  # (row index, reason)


def ingest_csv(data: bytes | str, dataset_id: str, name: str | None = None,
               column: int | str | None = None, header: bool | None = None) -> IngestReport:
    """Parse one numeric observation per row from CSV text.

    ``column`` picks a header name or 0-based index (default: first).
    ``header`` forces header handling; by default the first row is treated
    as a header when its chosen cell is not numeric.  Non-numeric cells are
    an error (with the row index); non-finite or empty rows are rejected
    and reported.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise ValueError(f"not valid UTF-8: {err}") from None
    else:
        text = data
    if not text.strip():
        raise ValueError("empty file")

    plain = "," not in text and '"' not in text and "\r" not in text
    if plain and not isinstance(column, str) and (column in (None, 0)):
        return _ingest_single_column(text, dataset_id, name, header)

    rows = list(csv.reader(io.StringIO(text)))
    col_idx = 0
    start = 0
    first = rows[0]
    if isinstance(column, str):
        if header is False:
            raise ValueError("a named column requires a header row")
        if column not in first:
            raise ValueError(f"column {column!r} not found in header {first}")
        col_idx = first.index(column)
        start = 1
    else:
        if column is not None:
            col_idx = int(column)
        if header is None:
            try:
                float(first[col_idx])
            except (ValueError, IndexError):
                header = True
        if header:
            start = 1

    values = []
    rejected = []
    for i, row in enumerate(rows[start:], start=start + 1):
        if not row or all(not cell.strip() for cell in row):
            rejected.append((i, "blank row"))
            continue
        if col_idx >= len(row):
            rejected.append((i, "missing column"))
            continue
        cell = row[col_idx].strip()
        try:
            v = float(cell)
        except ValueError:
            raise ValueError(f"non-numeric value {cell!r} at row {i}") from None
        if not np.isfinite(v):
            rejected.append((i, f"non-finite value {cell!r}"))
            continue
        values.append(v)
    if len(values) < 2:
        raise ValueError("need at least 2 usable observations")

    checksum = hashlib.sha256(text.encode()).hexdigest()
    ds = Dataset(id=dataset_id, name=name or dataset_id, sample=Sample(np.array(values)),
                 checksum=checksum)
    return IngestReport(dataset=ds, n_rows=len(rows) - start, rejected=rejected)


def _ingest_single_column(text: str, dataset_id: str, name: str | None,
                          header: bool | None) -> IngestReport:
    """Bulk-vectorized path for plain one-column files (the common case)."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    start = 0
    if header is None:
        try:
            float(lines[0])
        except ValueError:
            header = True
    if header:
        start = 1
    body = lines[start:]
    rejected = []
    keep = []
    for i, cell in enumerate(body, start=start + 1):
        if not cell.strip():
            rejected.append((i, "blank row"))
        else:
            keep.append((i, cell))
    try:
        values = np.asarray([cell for _, cell in keep], dtype=float)
    except ValueError:
        # locate the offending row for the error message
        for i, cell in keep:
            try:
                float(cell)
            except ValueError:
                raise ValueError(f"non-numeric value {cell.strip()!r} at row {i}") from None
        raise
    finite = np.isfinite(values)
    if not finite.all():
        rejected.extend((keep[j][0], f"non-finite value {keep[j][1].strip()!r}")
                        for j in np.flatnonzero(~finite))
        rejected.sort()
        values = values[finite]
    if values.size < 2:
        raise ValueError("need at least 2 usable observations")
    checksum = hashlib.sha256(text.encode()).hexdigest()
    ds = Dataset(id=dataset_id, name=name or dataset_id, sample=Sample(values),
                 checksum=checksum)
    return IngestReport(dataset=ds, n_rows=len(body), rejected=rejected)
